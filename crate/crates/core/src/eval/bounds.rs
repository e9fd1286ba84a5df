use crate::structure::{Relation, Tuple};

/// `⌈log₂ n⌉`: the smallest `w` with `2^w ≥ n`. `None` for `n = 0`.
pub fn ceil_log(n: usize) -> Option<usize> {
    if n == 0 {
        return None;
    }
    Some((usize::BITS - (n - 1).leading_zeros()) as usize)
}

/// `⌈log₂ n⌉^k`, saturating.
pub fn log_pow(n: usize, k: u32) -> Option<usize> {
    ceil_log(n).map(|w| w.saturating_pow(k))
}

/// All tuples of `[n]^arity` in lexicographic order.
pub fn all_tuples(n: usize, arity: usize) -> impl Iterator<Item = Tuple> {
    let total = n.checked_pow(arity as u32).expect("tuple space too large");
    (0..total).map(move |mut code| {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = code % n;
            code /= n;
        }
        t
    })
}

/// Number of relations `S ⊆ [n]^arity` with `|S| ≤ bound`.
pub fn count_bounded_relations(n: usize, arity: usize, bound: usize) -> u128 {
    let total = (n as u128).pow(arity as u32);
    let mut sum = 1u128;
    let mut binom = 1u128;
    for i in 1..=(bound as u128).min(total) {
        binom = binom * (total - i + 1) / i;
        sum += binom;
    }
    sum
}

/// Every `S ⊆ [n]^arity` with `|S| ≤ bound`, exactly once: sizes ascending,
/// lexicographic (over the sorted tuple list) within a size.
#[derive(Debug, Clone)]
pub struct BoundedRelations {
    arity: usize,
    tuples: Vec<Tuple>,
    max_size: usize,
    indices: Vec<usize>,
    done: bool,
}

impl BoundedRelations {
    pub fn new(n: usize, arity: usize, bound: usize) -> Self {
        let tuples: Vec<Tuple> = all_tuples(n, arity).collect();
        let max_size = bound.min(tuples.len());
        BoundedRelations {
            arity,
            tuples,
            max_size,
            indices: Vec::new(),
            done: false,
        }
    }

    fn advance(&mut self) {
        let k = self.indices.len();
        let t = self.tuples.len();
        // rightmost index that can still move
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.indices[i] < t - k + i {
                self.indices[i] += 1;
                for j in i + 1..k {
                    self.indices[j] = self.indices[j - 1] + 1;
                }
                return;
            }
        }
        if k == self.max_size {
            self.done = true;
        } else {
            self.indices = (0..k + 1).collect();
        }
    }
}

impl Iterator for BoundedRelations {
    type Item = Relation;

    fn next(&mut self) -> Option<Relation> {
        if self.done {
            return None;
        }
        let rel = Relation::from_set(
            self.arity,
            self.indices.iter().map(|&i| self.tuples[i].clone()).collect(),
        );
        self.advance();
        Some(rel)
    }
}
