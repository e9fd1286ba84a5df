//! Ehrenfeucht–Fraïssé games: the s-pebble game, the game with bounded
//! relation moves before the pebble phase, the fresh-element strategy for
//! edgeless graphs, and a sentence sampler to cross-check verdicts.

mod fresh;
mod pebble;
mod sampler;
mod search;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::eval::log_pow;
use crate::structure::{Element, Relation, Structure, StructureError};

pub use fresh::{even_instance, verify_fresh_strategy};
pub use pebble::{pebble_game_winner, PebbleOutcome, Position};
pub use sampler::{equivalence_sampler, random_sentence, SamplerReport};
pub use search::{game_winner, game_winner_with, GameOptions, GameOutcome, RelationMove, TranscriptMove};

/// Default bound on explored game nodes.
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("structures or tuples do not have matching shapes: {0}")]
    ShapeMismatch(String),
    #[error("search exceeded the budget of {0} nodes")]
    ResourceLimit(u64),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("invalid game parameters: {0}")]
    BadParams(String),
    #[error("evaluation failed: {0}")]
    Eval(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Winner {
    Spoiler,
    Duplicator,
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Winner::Spoiler => "Spoiler",
            Winner::Duplicator => "Duplicator",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "A",
            Side::B => "B",
        })
    }
}

/// Up to `m` relation moves of arity `≤ r` and size `≤ ⌈log₂ n⌉^k`, then
/// the pebble game with `s` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GameParams {
    pub m: usize,
    pub r: usize,
    pub k: u32,
    pub s: usize,
}

impl GameParams {
    pub fn new(m: usize, r: usize, k: u32, s: usize) -> Result<Self, GameError> {
        let p = GameParams { m, r, k, s };
        p.check()?;
        Ok(p)
    }

    pub(crate) fn check(&self) -> Result<(), GameError> {
        if self.r == 0 || self.k == 0 || self.s == 0 {
            return Err(GameError::BadParams(format!(
                "r, k and s must be at least 1 (got r={}, k={}, s={})",
                self.r, self.k, self.s
            )));
        }
        Ok(())
    }
}

/// A structure together with the relations chosen in relation moves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExpandedStructure {
    base: Structure,
    extras: Vec<Relation>,
}

impl ExpandedStructure {
    pub fn new(base: Structure, extras: Vec<Relation>) -> Result<Self, GameError> {
        for (i, r) in extras.iter().enumerate() {
            r.check_range(&format!("extra relation {}", i + 1), base.size())?;
        }
        Ok(ExpandedStructure { base, extras })
    }

    /// Also checks `|Rᵢ| ≤ ⌈log₂ n⌉^{kᵢ}`.
    pub fn with_bounds(base: Structure, extras: Vec<(Relation, u32)>) -> Result<Self, GameError> {
        let n = base.size();
        for (i, (r, k)) in extras.iter().enumerate() {
            let bound = log_pow(n, *k).expect("nonempty domain");
            if r.len() > bound {
                return Err(GameError::ShapeMismatch(format!(
                    "extra relation {} has {} tuples, more than {bound}",
                    i + 1,
                    r.len()
                )));
            }
        }
        Self::new(base, extras.into_iter().map(|(r, _)| r).collect())
    }

    pub fn bare(base: Structure) -> Self {
        ExpandedStructure {
            base,
            extras: Vec::new(),
        }
    }

    pub fn base(&self) -> &Structure {
        &self.base
    }

    pub fn extras(&self) -> &[Relation] {
        &self.extras
    }

    pub fn size(&self) -> usize {
        self.base.size()
    }

    /// The expansion as a plain structure (extras named `_X1`, `_X2`, …).
    pub fn flatten(&self) -> Structure {
        let sig = self
            .base
            .signature()
            .extended(
                self.extras
                    .iter()
                    .enumerate()
                    .map(|(i, r)| (format!("_X{}", i + 1), r.arity())),
            )
            .expect("extra names are fresh");
        let mut rels = self.base.relation_list().to_vec();
        rels.extend(self.extras.iter().cloned());
        Structure::from_relations(sig, self.base.size(), rels).expect("validated parts")
    }

    pub(crate) fn shape_matches(&self, other: &ExpandedStructure) -> Result<(), GameError> {
        if self.base.signature() != other.base.signature() {
            return Err(GameError::ShapeMismatch("different signatures".into()));
        }
        let arities = |e: &ExpandedStructure| e.extras.iter().map(Relation::arity).collect::<Vec<_>>();
        if arities(self) != arities(other) {
            return Err(GameError::ShapeMismatch("extra relations differ in arity".into()));
        }
        Ok(())
    }
}

/// Relations of an expanded structure as dense truth tables.
#[derive(Debug, Clone)]
pub(crate) struct Dense {
    n: usize,
    ordered: bool,
    rels: Vec<(usize, Vec<bool>)>,
}

impl Dense {
    pub(crate) fn new(base: &Structure, extras: &[Relation]) -> Self {
        let n = base.size();
        let rels = base
            .relation_list()
            .iter()
            .chain(extras)
            .map(|r| {
                let mut table = vec![false; n.pow(r.arity() as u32)];
                for t in r.iter() {
                    table[index(n, t)] = true;
                }
                (r.arity(), table)
            })
            .collect();
        Dense {
            n,
            ordered: base.is_ordered(),
            rels,
        }
    }

    pub(crate) fn of(e: &ExpandedStructure) -> Self {
        Dense::new(&e.base, &e.extras)
    }

    pub(crate) fn size(&self) -> usize {
        self.n
    }

    /// Atomic type of a tuple: equalities, order, and every relation on
    /// every tuple of its entries.
    pub(crate) fn atomic_type(&self, elems: &[Element]) -> Vec<bool> {
        let len = elems.len();
        let mut out = Vec::new();
        for i in 0..len {
            for j in i + 1..len {
                out.push(elems[i] == elems[j]);
                if self.ordered {
                    out.push(elems[i] < elems[j]);
                    out.push(elems[j] < elems[i]);
                }
            }
        }
        let mut buf = Vec::new();
        for (arity, table) in &self.rels {
            let count = len.pow(*arity as u32);
            for code in 0..count {
                buf.clear();
                let mut c = code;
                for _ in 0..*arity {
                    buf.push(elems[c % len]);
                    c /= len;
                }
                out.push(table[index(self.n, &buf)]);
            }
        }
        out
    }

    /// Atomic types realized by `t`-tuples (`t ≤ 2` is all the filters use).
    pub(crate) fn type_set(&self, t: usize) -> BTreeSet<Vec<bool>> {
        let mut out = BTreeSet::new();
        let mut elems = vec![0; t];
        let total = self.n.pow(t as u32);
        for code in 0..total {
            let mut c = code;
            for e in elems.iter_mut() {
                *e = c % self.n;
                c /= self.n;
            }
            out.insert(self.atomic_type(&elems));
        }
        out
    }
}

fn index(n: usize, t: &[Element]) -> usize {
    t.iter().fold(0, |acc, &e| acc * n + e)
}

/// Is `āᵢ ↦ b̄ᵢ` a partial isomorphism between the expansions (well defined,
/// injective, preserving every relation, extra relation and the order)?
pub fn is_partial_isomorphism(
    a: &ExpandedStructure,
    abar: &[Element],
    b: &ExpandedStructure,
    bbar: &[Element],
) -> Result<bool, GameError> {
    a.shape_matches(b)?;
    if abar.len() != bbar.len() {
        return Err(GameError::ShapeMismatch(format!(
            "{} elements against {}",
            abar.len(),
            bbar.len()
        )));
    }
    if let Some(&e) = abar.iter().find(|&&e| e >= a.size()) {
        return Err(GameError::ShapeMismatch(format!("{e} is not an element of A")));
    }
    if let Some(&e) = bbar.iter().find(|&&e| e >= b.size()) {
        return Err(GameError::ShapeMismatch(format!("{e} is not an element of B")));
    }
    if abar.is_empty() {
        return Ok(true);
    }
    Ok(Dense::of(a).atomic_type(abar) == Dense::of(b).atomic_type(bbar))
}
