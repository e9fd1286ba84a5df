//! Interpretations: tuples of formulas that define a target structure inside
//! a source structure, and the matching backward translation of formulas.

mod jred;
mod transform;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{all_tuples, query, Assignment, EvalError, Evaluator};
use crate::formula::{parse_formula, resolve, validate, Formula, Term, ValidationError};
use crate::structure::{Relation, Signature, Structure, StructureError, Tuple};

pub use jred::{build_j_reduction, j_reduction_input, JLayout};
pub use transform::{lexicographic_less, transform_formula, transform_formula_with_free};

/// Largest relation-variable arity a translated formula may use.
pub const MAX_TRANSLATED_ARITY: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("width must be at least 1")]
    ZeroWidth,
    #[error("{formula} needs {expected} variables but {found} were given")]
    VariableCount {
        formula: String,
        expected: usize,
        found: usize,
    },
    #[error("{formula}: {source}")]
    Invalid {
        formula: String,
        source: ValidationError,
    },
    #[error("{formula} has undeclared free variable {var}")]
    StrayVariable { formula: String, var: String },
    #[error("no formula for target relation {0}")]
    MissingRelation(String),
    #[error("{0} is not a target relation")]
    UnknownRelation(String),
    #[error("target signature is ordered iff an order formula is given")]
    OrderMismatch,
    #[error("structure does not have the source signature")]
    SignatureMismatch,
    #[error("no tuple satisfies the universe formula")]
    EmptyUniverse,
    #[error("order formula is not a strict linear order on the universe")]
    NotLinearOrder,
    #[error("cannot translate formulas with log-quantifiers")]
    LogQuantifierUnsupported,
    #[error("translated relation variable {name} would have arity {arity}")]
    ArityOverflow { name: String, arity: usize },
    #[error("cannot translate {0}")]
    Unsupported(String),
    #[error("bad interpretation document: {0}")]
    Document(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// A formula together with the variables it is read over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Defining {
    pub vars: Vec<String>,
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetOrder {
    /// Lexicographic comparison of the underlying tuples (a built-in macro).
    Lexicographic,
    Formula(Defining),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpretation {
    width: usize,
    source: Signature,
    target: Signature,
    uni: Defining,
    /// Aligned with the target signature.
    rels: Vec<Defining>,
    order: Option<TargetOrder>,
}

/// `x, y, z, u, v, w` for up to six variables, else `x1 … xN`.
pub fn default_vars(count: usize) -> Vec<String> {
    const SHORT: [&str; 6] = ["x", "y", "z", "u", "v", "w"];
    if count <= SHORT.len() {
        SHORT[..count].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=count).map(|i| format!("x{i}")).collect()
    }
}

impl Interpretation {
    /// Checks every member formula against the source signature. `rels`
    /// must define each target relation exactly once.
    pub fn new(
        width: usize,
        source: Signature,
        target: Signature,
        uni: Defining,
        rels: Vec<(String, Defining)>,
        order: Option<TargetOrder>,
    ) -> Result<Self, InterpError> {
        if width == 0 {
            return Err(InterpError::ZeroWidth);
        }
        if target.is_ordered() != order.is_some() {
            return Err(InterpError::OrderMismatch);
        }
        let check = |label: &str, d: Defining, count: usize| -> Result<Defining, InterpError> {
            if d.vars.len() != count {
                return Err(InterpError::VariableCount {
                    formula: label.to_string(),
                    expected: count,
                    found: d.vars.len(),
                });
            }
            let formula = resolve(&d.formula, &source);
            let free = validate(&formula, &source).map_err(|source| InterpError::Invalid {
                formula: label.to_string(),
                source,
            })?;
            if let Some(r) = free.relations.keys().next() {
                return Err(InterpError::Invalid {
                    formula: label.to_string(),
                    source: ValidationError::UnknownRelation(r.clone()),
                });
            }
            if let Some(v) = free.elements.iter().find(|v| !d.vars.contains(v)) {
                return Err(InterpError::StrayVariable {
                    formula: label.to_string(),
                    var: v.clone(),
                });
            }
            Ok(Defining {
                vars: d.vars,
                formula,
            })
        };
        let uni = check("universe formula", uni, width)?;
        let mut by_name: BTreeMap<String, Defining> = BTreeMap::new();
        for (name, d) in rels {
            let arity = target
                .arity_of(&name)
                .ok_or_else(|| InterpError::UnknownRelation(name.clone()))?;
            let d = check(&format!("formula for {name}"), d, arity * width)?;
            by_name.insert(name, d);
        }
        let mut aligned = Vec::with_capacity(target.relations().len());
        for (name, _) in target.relations() {
            aligned.push(
                by_name
                    .remove(name)
                    .ok_or_else(|| InterpError::MissingRelation(name.clone()))?,
            );
        }
        let order = match order {
            Some(TargetOrder::Formula(d)) => {
                Some(TargetOrder::Formula(check("order formula", d, 2 * width)?))
            }
            other => other,
        };
        Ok(Interpretation {
            width,
            source,
            target,
            uni,
            rels: aligned,
            order,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn source(&self) -> &Signature {
        &self.source
    }

    pub fn target(&self) -> &Signature {
        &self.target
    }

    pub fn universe_formula(&self) -> &Defining {
        &self.uni
    }

    pub fn relation_formula(&self, name: &str) -> Option<&Defining> {
        self.target.index_of(name).map(|i| &self.rels[i])
    }

    pub fn order(&self) -> Option<&TargetOrder> {
        self.order.as_ref()
    }

    pub fn from_json(text: &str) -> Result<Self, InterpError> {
        let doc: InterpretationDoc =
            serde_json::from_str(text).map_err(|e| InterpError::Document(e.to_string()))?;
        doc.into_interpretation()
    }

    pub fn to_json(&self) -> String {
        let sig_doc = |s: &Signature| SignatureDoc {
            relations: s.relations().to_vec(),
            ordered: s.is_ordered(),
        };
        let mut rels = BTreeMap::new();
        let mut rel_vars = BTreeMap::new();
        for ((name, _), d) in self.target.relations().iter().zip(&self.rels) {
            rels.insert(name.clone(), d.formula.to_string());
            rel_vars.insert(name.clone(), d.vars.clone());
        }
        let (order, order_vars) = match &self.order {
            None => (None, None),
            Some(TargetOrder::Lexicographic) => (Some("lex".to_string()), None),
            Some(TargetOrder::Formula(d)) => (Some(d.formula.to_string()), Some(d.vars.clone())),
        };
        let doc = InterpretationDoc {
            width: self.width,
            source: sig_doc(&self.source),
            target: sig_doc(&self.target),
            uni: self.uni.formula.to_string(),
            uni_vars: Some(self.uni.vars.clone()),
            rels,
            rel_vars: Some(rel_vars),
            order,
            order_vars,
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignatureDoc {
    relations: Vec<(String, usize)>,
    #[serde(default)]
    ordered: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InterpretationDoc {
    width: usize,
    source: SignatureDoc,
    target: SignatureDoc,
    uni: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    uni_vars: Option<Vec<String>>,
    rels: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rel_vars: Option<BTreeMap<String, Vec<String>>>,
    /// `"lex"` or an order formula.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order_vars: Option<Vec<String>>,
}

impl InterpretationDoc {
    fn into_interpretation(self) -> Result<Interpretation, InterpError> {
        let sig = |d: SignatureDoc| -> Result<Signature, InterpError> {
            Ok(Signature::new(d.relations, d.ordered)?)
        };
        let source = sig(self.source)?;
        let target = sig(self.target)?;
        let w = self.width;
        let parse = |label: &str, text: &str| {
            parse_formula(text).map_err(|e| InterpError::Document(format!("{label}: {e}")))
        };
        let uni = Defining {
            vars: self.uni_vars.unwrap_or_else(|| default_vars(w)),
            formula: parse("uni", &self.uni)?,
        };
        let mut rel_vars = self.rel_vars.unwrap_or_default();
        let mut rels = Vec::new();
        for (name, text) in &self.rels {
            let arity = target
                .arity_of(name)
                .ok_or_else(|| InterpError::UnknownRelation(name.clone()))?;
            let vars = rel_vars
                .remove(name)
                .unwrap_or_else(|| default_vars(arity * w));
            rels.push((
                name.clone(),
                Defining {
                    vars,
                    formula: parse(name, text)?,
                },
            ));
        }
        let order = match self.order.as_deref() {
            None => None,
            Some("lex") => Some(TargetOrder::Lexicographic),
            Some(text) => Some(TargetOrder::Formula(Defining {
                vars: self.order_vars.unwrap_or_else(|| default_vars(2 * w)),
                formula: parse("order", text)?,
            })),
        };
        Interpretation::new(w, source, target, uni, rels, order)
    }
}

/// The universe of `I(A)` as source tuples, listed in target index order.
pub fn universe(i: &Interpretation, a: &Structure) -> Result<Vec<Tuple>, InterpError> {
    if a.signature() != &i.source {
        return Err(InterpError::SignatureMismatch);
    }
    let alpha = Assignment::new();
    let tuples: Vec<Tuple> = query(a, &i.uni.formula, &i.uni.vars, &alpha)?
        .iter()
        .cloned()
        .collect();
    if tuples.is_empty() {
        return Err(InterpError::EmptyUniverse);
    }
    match &i.order {
        None | Some(TargetOrder::Lexicographic) => Ok(tuples),
        Some(TargetOrder::Formula(d)) => {
            let ev = Evaluator::new(a);
            let m = tuples.len();
            let mut less = vec![vec![false; m]; m];
            for (p, s) in tuples.iter().enumerate() {
                for (q, t) in tuples.iter().enumerate() {
                    let mut alpha = Assignment::new();
                    for (v, &e) in d.vars.iter().zip(s.iter().chain(t)) {
                        alpha.elements.insert(v.clone(), e);
                    }
                    less[p][q] = ev.evaluate_cached(&d.formula, &alpha)?;
                }
            }
            // strict linear order iff the predecessor counts are 0..m and agree
            let rank: Vec<usize> = (0..m).map(|q| (0..m).filter(|&p| less[p][q]).count()).collect();
            let mut seen = vec![false; m];
            for &r in &rank {
                if r >= m || std::mem::replace(&mut seen[r], true) {
                    return Err(InterpError::NotLinearOrder);
                }
            }
            for p in 0..m {
                for q in 0..m {
                    if less[p][q] != (rank[p] < rank[q]) {
                        return Err(InterpError::NotLinearOrder);
                    }
                }
            }
            let mut ordered = vec![Vec::new(); m];
            for (t, r) in tuples.into_iter().zip(rank) {
                ordered[r] = t;
            }
            Ok(ordered)
        }
    }
}

/// `I(A)`: the universe re-indexed `0…`, each target relation read off its
/// defining formula.
pub fn apply_interpretation(i: &Interpretation, a: &Structure) -> Result<Structure, InterpError> {
    let dom = universe(i, a)?;
    let ev = Evaluator::new(a);
    let mut relations = Vec::with_capacity(i.rels.len());
    for ((_, arity), d) in i.target.relations().iter().zip(&i.rels) {
        let mut rel = Relation::empty(*arity);
        for idx in all_tuples(dom.len(), *arity) {
            let mut alpha = Assignment::new();
            let values = idx.iter().flat_map(|&j| dom[j].iter().copied());
            for (v, e) in d.vars.iter().zip(values) {
                alpha.elements.insert(v.clone(), e);
            }
            if ev.evaluate_cached(&d.formula, &alpha)? {
                rel.insert(idx);
            }
        }
        relations.push(rel);
    }
    Ok(Structure::from_relations(
        i.target.clone(),
        dom.len(),
        relations,
    )?)
}

/// Convenience: a term list of variable names.
pub(crate) fn var_terms(names: &[String]) -> Vec<Term> {
    names.iter().map(|n| Term::Var(n.clone())).collect()
}
