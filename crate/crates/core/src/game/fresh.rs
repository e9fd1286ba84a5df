//! The duplicator strategy for edgeless graphs of sizes `n` and `n + 1`:
//! answer every relation with its image under a growing injection that
//! sends newly mentioned elements to fresh ones, then pebble mentioned
//! elements through the injection and unmentioned ones to fresh partners.

use std::collections::{BTreeSet, HashSet, VecDeque};

use super::{Dense, GameError, GameParams, Side};
use crate::eval::{ceil_log, count_bounded_relations, log_pow, BoundedRelations};
use crate::structure::{Element, Relation, Structure};

/// The smallest even `n` with `(m+1)·r·s·⌈log₂ n⌉^k < n` and
/// `⌈log₂ n⌉ = ⌈log₂ (n+1)⌉`, paired with `n + 1`.
pub fn even_instance(p: GameParams) -> (usize, usize) {
    let factor = (p.m as u128 + 1) * p.r as u128 * p.s as u128;
    let mut n = 2usize;
    loop {
        let w = ceil_log(n).expect("n >= 2");
        let lhs = factor.saturating_mul((w as u128).saturating_pow(p.k));
        if lhs < n as u128 && Some(w) == ceil_log(n + 1) {
            return (n, n + 1);
        }
        n += 2;
    }
}

/// Plays the fresh-element strategy against every spoiler line and reports
/// whether it always keeps a partial isomorphism.
pub fn verify_fresh_strategy(a: &Structure, b: &Structure, p: GameParams) -> Result<bool, GameError> {
    p.check()?;
    if a.signature() != b.signature() {
        return Err(GameError::ShapeMismatch("different signatures".into()));
    }
    if a.relation_list().iter().chain(b.relation_list()).any(|r| !r.is_empty()) {
        return Err(GameError::HypothesisViolated("structures must have no tuples".into()));
    }
    let (na, nb) = (a.size(), b.size());
    let (wa, wb) = (ceil_log(na).expect("n >= 1"), ceil_log(nb).expect("n >= 1"));
    let la = log_pow(na, p.k).expect("n >= 1");
    let lhs = (p.m as u128 + 1) * p.r as u128 * p.s as u128 * la as u128;
    if lhs >= na as u128 {
        return Err(GameError::HypothesisViolated(format!(
            "(m+1)·r·s·log^k(n) = {lhs} is not below n = {na}"
        )));
    }
    if wa != wb {
        return Err(GameError::HypothesisViolated(format!(
            "log sizes differ: {wa} vs {wb}"
        )));
    }
    let v = Verifier { a, b, p };
    for m in 0..=p.m {
        let start = State {
            forward: vec![None; na],
            backward: vec![None; nb],
            extras_a: Vec::new(),
            extras_b: Vec::new(),
        };
        if !v.relation_phase(&start, m)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone)]
struct State {
    forward: Vec<Option<Element>>,
    backward: Vec<Option<Element>>,
    extras_a: Vec<Relation>,
    extras_b: Vec<Relation>,
}

impl State {
    fn map(&self, side: Side) -> &[Option<Element>] {
        match side {
            Side::A => &self.forward,
            Side::B => &self.backward,
        }
    }

    /// Sends every element of `ment` not yet mapped to the smallest
    /// unmentioned element of the other side. False if none is left.
    fn extend(&mut self, side: Side, ment: &BTreeSet<Element>) -> bool {
        for &x in ment {
            if self.map(side)[x].is_some() {
                continue;
            }
            let (fwd, bwd) = match side {
                Side::A => (&mut self.forward, &mut self.backward),
                Side::B => (&mut self.backward, &mut self.forward),
            };
            let Some(y) = bwd.iter().position(Option::is_none) else {
                return false;
            };
            fwd[x] = Some(y);
            bwd[y] = Some(x);
        }
        true
    }
}

struct Verifier<'s> {
    a: &'s Structure,
    b: &'s Structure,
    p: GameParams,
}

impl Verifier<'_> {
    fn size(&self, side: Side) -> usize {
        match side {
            Side::A => self.a.size(),
            Side::B => self.b.size(),
        }
    }

    fn relation_phase(&self, st: &State, moves: usize) -> Result<bool, GameError> {
        if moves == 0 {
            return Ok(self.pebble_phase(st));
        }
        for side in [Side::A, Side::B] {
            let n = self.size(side);
            for arity in 1..=self.p.r {
                // a larger k′ admits every smaller relation too
                let bound = log_pow(n, self.p.k).expect("n >= 1");
                if count_bounded_relations(n, arity, bound) > super::DEFAULT_NODE_BUDGET as u128 {
                    return Err(GameError::ResourceLimit(super::DEFAULT_NODE_BUDGET));
                }
                for r in BoundedRelations::new(n, arity, bound) {
                    let mut next = st.clone();
                    if !next.extend(side, &r.mention_set()) {
                        return Ok(false);
                    }
                    let map = next.map(side).to_vec();
                    let image = r.map_elements(|x| map[x].expect("mapped"));
                    let other = self.size(side.other());
                    // the reply must respect the bound for the k′ the spoiler used
                    let k_used = (1..=self.p.k)
                        .find(|&k| r.len() <= log_pow(n, k).expect("n >= 1"))
                        .expect("within the largest bound");
                    if image.len() > log_pow(other, k_used).expect("n >= 1") {
                        return Ok(false);
                    }
                    let (ra, rb) = match side {
                        Side::A => (r, image),
                        Side::B => (image, r),
                    };
                    next.extras_a.push(ra);
                    next.extras_b.push(rb);
                    if !self.relation_phase(&next, moves - 1)? {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Explores every position the strategy can reach; all must be partial
    /// isomorphisms.
    fn pebble_phase(&self, st: &State) -> bool {
        let da = Dense::new(self.a, &st.extras_a);
        let db = Dense::new(self.b, &st.extras_b);
        let s = self.p.s;
        let mut seen: HashSet<Vec<(Element, Element)>> = HashSet::new();
        let mut queue = VecDeque::from([Vec::new()]);
        seen.insert(Vec::new());
        while let Some(p) = queue.pop_front() {
            let mut pre: Vec<Vec<(Element, Element)>> = Vec::new();
            if p.len() < s {
                pre.push(p.clone());
            }
            for i in 0..p.len() {
                let mut q = p.clone();
                q.remove(i);
                pre.push(q);
            }
            for p0 in pre {
                for side in [Side::A, Side::B] {
                    for x in 0..self.size(side) {
                        let Some(pair) = self.reply(st, &p0, side, x) else {
                            return false;
                        };
                        let mut q = p0.clone();
                        if !q.contains(&pair) {
                            q.push(pair);
                            q.sort_unstable();
                        }
                        let abar: Vec<_> = q.iter().map(|&(u, _)| u).collect();
                        let bbar: Vec<_> = q.iter().map(|&(_, v)| v).collect();
                        if !abar.is_empty() && da.atomic_type(&abar) != db.atomic_type(&bbar) {
                            return false;
                        }
                        if seen.insert(q.clone()) {
                            queue.push_back(q);
                        }
                    }
                }
            }
        }
        true
    }

    /// The strategy's answer to pebbling `x` on `side`, as an `(a, b)` pair.
    fn reply(
        &self,
        st: &State,
        p0: &[(Element, Element)],
        side: Side,
        x: Element,
    ) -> Option<(Element, Element)> {
        let orient = |y: Element| match side {
            Side::A => (x, y),
            Side::B => (y, x),
        };
        if let Some(y) = st.map(side)[x] {
            return Some(orient(y));
        }
        let partner = p0.iter().find_map(|&(u, v)| match side {
            Side::A if u == x => Some(v),
            Side::B if v == x => Some(u),
            _ => None,
        });
        if let Some(y) = partner {
            return Some(orient(y));
        }
        let other = side.other();
        let taken = |y: Element| {
            st.map(other)[y].is_some()
                || p0.iter().any(|&(u, v)| match other {
                    Side::A => u == y,
                    Side::B => v == y,
                })
        };
        (0..self.size(other)).find(|&y| !taken(y)).map(orient)
    }
}
