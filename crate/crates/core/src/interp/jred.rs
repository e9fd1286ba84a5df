//! The interpretation that turns a string `u` with binary relations
//! `R₁ … R_r` into the string `u#J(R₁)…J(R_r)`.
//!
//! Universe tuples use the variables `x1 x2 x3 x4 x5 y z1 … z_b` with
//! `b = ⌈log₂ r⌉`:
//! * `x1 = x2 = 0`: position `x4` of `u`;
//! * `x1 = 0, x2 = 1`: the separator `#`;
//! * `x1 = x2 = 1`: bit `x3 < ⌈log₂ n⌉ - 1` of `y`, with value `x4`, for a
//!   tuple `(x5, y)` of the relation numbered by `z`.
//!
//! The target order is lexicographic on the tuples as laid out. With the
//! variables in the order written above, tuples sort by bit position before
//! relation tuple, which scrambles the bit blocks; [`JLayout::Grouped`]
//! places `z, x5, y` before `x3, x4` so the order matches `J`.

use super::{Defining, Interpretation, TargetOrder};
use crate::eval::ceil_log;
use crate::formula::{Formula, Term};
use crate::structure::{Relation, Signature, StringStructure, Structure, StructureError};

/// Order of the universe variables inside a tuple.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum JLayout {
    /// `x1 x2 z… x5 y x3 x4`, relations numbered from 0 by `z`.
    #[default]
    Grouped,
    /// `x1 x2 x3 x4 x5 y z…`, with `z` the binary expansion of the
    /// 1-based relation number.
    AsWritten,
}

fn lit(i: usize) -> Term {
    Term::Lit(i)
}

fn v(name: &str) -> Term {
    Term::var(name)
}

fn eq(name: &str, value: usize) -> Formula {
    Formula::eq(v(name), lit(value))
}

fn and_all(parts: Vec<Formula>) -> Formula {
    Formula::conjunction(parts).expect("nonempty")
}

/// `τ_str` extended by the binary relations `R1 … Rr`.
pub fn j_source_signature(r: usize) -> Signature {
    Signature::string()
        .extended((1..=r).map(|i| (format!("R{i}"), 2)))
        .expect("fresh names")
}

/// The source structure `(u, R₁, …, R_r)`.
pub fn j_reduction_input(u: &StringStructure, rels: &[Relation]) -> Result<Structure, StructureError> {
    let base = u.as_structure();
    let mut all: Vec<Relation> = base.relation_list().to_vec();
    all.extend(rels.iter().cloned());
    Structure::from_relations(j_source_signature(rels.len()), base.size(), all)
}

/// Builds the reduction for `r ≥ 1` relations; width `⌈log₂ r⌉ + 6`.
pub fn build_j_reduction(r: usize, layout: JLayout) -> Interpretation {
    assert!(r >= 1, "at least one relation");
    let b = ceil_log(r).expect("r >= 1");
    let zs: Vec<String> = (1..=b).map(|j| format!("z{j}")).collect();
    let named = |s: &[&str]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let vars: Vec<String> = match layout {
        JLayout::Grouped => named(&["x1", "x2"])
            .into_iter()
            .chain(zs.iter().cloned())
            .chain(named(&["x5", "y", "x3", "x4"]))
            .collect(),
        JLayout::AsWritten => named(&["x1", "x2", "x3", "x4", "x5", "y"])
            .into_iter()
            .chain(zs.iter().cloned())
            .collect(),
    };
    let zeros = |names: &[&str]| -> Vec<Formula> {
        names
            .iter()
            .map(|n| eq(n, 0))
            .chain(zs.iter().map(|z| eq(z, 0)))
            .collect()
    };

    let mut string_part = vec![eq("x1", 0), eq("x2", 0)];
    string_part.extend(zeros(&["y", "x3", "x5"]));
    let mut hash_part = vec![eq("x1", 0), eq("x2", 1)];
    hash_part.extend(zeros(&["y", "x3", "x4", "x5"]));

    // x3 < logn - 1
    let bit_guard = Formula::exists(
        "t",
        Formula::and(
            Formula::Less(v("x3"), v("t")),
            Formula::Less(v("t"), Term::LogN),
        ),
    );
    let bit = Formula::Bit(v("y"), v("x3"));
    let mut per_relation = Vec::new();
    for i in 1..=r {
        let number = match layout {
            JLayout::Grouped => Some(i - 1),
            // an expansion that does not fit in b bits matches no z
            JLayout::AsWritten if b == 0 || i >> b == 0 => Some(i),
            JLayout::AsWritten => None,
        };
        let Some(number) = number else { continue };
        let mut parts = vec![Formula::rel(format!("R{i}"), [v("x5"), v("y")])];
        // z1 is the most significant bit
        for (j, z) in zs.iter().enumerate() {
            parts.push(eq(z, (number >> (b - 1 - j)) & 1));
        }
        parts.push(bit_guard.clone());
        parts.push(Formula::iff(eq("x4", 1), bit.clone()));
        parts.push(Formula::iff(eq("x4", 0), Formula::not(bit.clone())));
        per_relation.push(and_all(parts));
    }
    let mut clauses = vec![and_all(string_part), and_all(hash_part)];
    if let Some(rels) = Formula::disjunction(per_relation) {
        clauses.push(Formula::and(Formula::and(eq("x1", 1), eq("x2", 1)), rels));
    }
    let uni = Formula::disjunction(clauses).expect("nonempty");

    let both = |a: usize| Formula::and(eq("x1", a), eq("x2", a));
    let copy = |p: &str| Formula::and(both(0), Formula::rel(p, [v("x4")]));
    let rels = vec![
        ("P0", Formula::or(copy("P0"), Formula::and(both(1), eq("x4", 0)))),
        ("P1", Formula::or(copy("P1"), Formula::and(both(1), eq("x4", 1)))),
        (
            "PHash",
            Formula::or(copy("PHash"), Formula::and(eq("x1", 0), eq("x2", 1))),
        ),
        ("POpen", copy("POpen")),
        ("PClose", copy("PClose")),
    ];
    Interpretation::new(
        vars.len(),
        j_source_signature(r),
        Signature::string(),
        Defining {
            vars: vars.clone(),
            formula: uni,
        },
        rels.into_iter()
            .map(|(name, formula)| {
                (
                    name.to_string(),
                    Defining {
                        vars: vars.clone(),
                        formula,
                    },
                )
            })
            .collect(),
        Some(TargetOrder::Lexicographic),
    )
    .expect("well-formed by construction")
}
