//! The bitstring route for existential log-quantifier prefixes, and the
//! guess-then-check runner.
//!
//! Each binary relation variable is guessed as a bit block: a sequence of
//! tuples, each tuple written as two `⌈log₂ n⌉`-bit LSB-first element codes.
//! Blocks are enumerated by length, then lexicographically. Codes that do
//! not name an element are skipped; repeated tuples collapse. Every relation
//! with at most `⌈log₂ n⌉^k` tuples is reachable this way.

use thiserror::Error;

use super::{ceil_log, log_pow, Env, EvalError, Evaluator};
use crate::formula::{metrics, Formula, LogBinder};
use crate::structure::{Relation, StringStructure, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitstringError {
    #[error("formula is not an existential log-quantifier prefix over a log-free matrix")]
    NotPrenex,
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Decodes one block of `2·w`-bit tuples (LSB first) over `[n]`. `None` when
/// the block is misaligned or a code is out of range.
pub fn decode_relation_block(n: usize, bits: &[bool]) -> Option<Relation> {
    let w = ceil_log(n)?;
    if w == 0 || !bits.len().is_multiple_of(2 * w) {
        return None;
    }
    let mut rel = Relation::empty(2);
    for chunk in bits.chunks(2 * w) {
        let a = read_lsb(&chunk[..w]);
        let b = read_lsb(&chunk[w..]);
        if a >= n || b >= n {
            return None;
        }
        rel.insert(vec![a, b]);
    }
    Some(rel)
}

fn read_lsb(bits: &[bool]) -> usize {
    bits.iter()
        .enumerate()
        .map(|(i, &b)| (b as usize) << i)
        .sum()
}

/// All bit blocks of whole tuples up to `max_tuples`, length then lex order.
fn blocks(w: usize, max_tuples: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..=max_tuples).flat_map(move |t| {
        let len = 2 * w * t;
        (0u64..1 << len).map(move |code| lex_bits(code, len))
    })
}

/// The `code`-th string of length `len` in lexicographic order (0 < 1).
fn lex_bits(code: u64, len: usize) -> Vec<bool> {
    (0..len).map(|i| (code >> (len - 1 - i)) & 1 == 1).collect()
}

/// Decides a sentence `∃^{log^k}X₁…∃^{log^k}X_m ψ` (binary `Xᵢ`, log-free
/// `ψ`) by guessing bit blocks instead of relations. Agrees with `evaluate`.
pub fn evaluate_via_bitstrings(u: &StringStructure, f: &Formula) -> Result<bool, BitstringError> {
    if !metrics(f).prenex_existential {
        return Err(BitstringError::NotPrenex);
    }
    let (binders, matrix) = f.existential_log_prefix();
    if let Some(b) = binders.iter().find(|b| b.arity != 2) {
        return Err(BitstringError::UnsupportedShape(format!(
            "{} has arity {}, only binary variables are guessed as bits",
            b.var, b.arity
        )));
    }
    if binders.windows(2).any(|p| p[0].k != p[1].k) {
        return Err(BitstringError::UnsupportedShape(
            "log-quantifiers with different exponents".into(),
        ));
    }
    let a = u.as_structure();
    let n = a.size();
    let w = ceil_log(n).expect("strings are nonempty");
    if w < 2 {
        return Err(BitstringError::UnsupportedShape(format!(
            "strings of length {n} are too short"
        )));
    }
    let ev = Evaluator::new(a);
    let alpha = super::Assignment::new();
    let mut env = Env::from_assignment(&alpha);
    Ok(guess(&ev, &binders, matrix, n, w, &mut env)?)
}

fn guess<'a>(
    ev: &Evaluator<'_>,
    binders: &'a [LogBinder],
    matrix: &'a Formula,
    n: usize,
    w: usize,
    env: &mut Env<'a>,
) -> Result<bool, EvalError> {
    let Some((first, rest)) = binders.split_first() else {
        return ev.eval(matrix, env);
    };
    let max_tuples = log_pow(n, first.k).expect("strings are nonempty");
    for bits in blocks(w, max_tuples) {
        let Some(rel) = decode_relation_block(n, &bits) else {
            continue;
        };
        env.push_relation(&first.var, rel);
        let r = guess(ev, rest, matrix, n, w, env);
        env.pop_relation();
        if r? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Result of a guess-then-check run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GcOutcome {
    pub accepted: bool,
    /// The first accepted guess, as `0`/`1` text.
    pub witness: Option<String>,
    pub candidates_tried: u128,
}

/// Number of guesses `v ∈ {0,1}^{≤ c·⌈log₂ n⌉^k}`.
pub fn gc_search_space(n: usize, k: u32, c: usize) -> u128 {
    let bound = c.saturating_mul(log_pow(n, k).expect("n >= 1"));
    (1u128 << (bound + 1)) - 1
}

/// Accepts `u` iff `checker(u#v)` for some `v` of length at most
/// `c·⌈log₂ |u|⌉^k`. Guesses are tried by length, then lexicographically.
pub fn gc_check(
    u: &StringStructure,
    k: u32,
    c: usize,
    mut checker: impl FnMut(&StringStructure) -> bool,
) -> GcOutcome {
    let bound = c.saturating_mul(log_pow(u.len(), k).expect("strings are nonempty"));
    let mut tried = 0u128;
    for len in 0..=bound {
        for code in 0u64..1 << len {
            let v = lex_bits(code, len);
            let mut symbols = u.symbols().to_vec();
            symbols.push(Symbol::Hash);
            symbols.extend(v.iter().map(|&b| Symbol::bit(b)));
            let joined = StringStructure::from_symbols(symbols).expect("nonempty");
            tried += 1;
            if checker(&joined) {
                let text = v.iter().map(|&b| if b { '1' } else { '0' }).collect();
                return GcOutcome {
                    accepted: true,
                    witness: Some(text),
                    candidates_tried: tried,
                };
            }
        }
    }
    GcOutcome {
        accepted: false,
        witness: None,
        candidates_tried: tried,
    }
}
