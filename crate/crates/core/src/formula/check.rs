//! Well-formedness against a signature, and the formula metrics
//! (maximal variable arity, height, log-quantifier rank).

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::ast::{Formula, Term};
use crate::structure::Signature;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("relation {0} is neither in the signature nor bound")]
    UnknownRelation(String),
    #[error("{name} is used with {found} arguments but has arity {expected}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("order, BIT, numerals and logn need an ordered signature")]
    OrderUsedUnordered,
    #[error("malformed fixed point: {0}")]
    IfpShapeError(String),
    #[error("log-quantifier over {0} needs exponent and arity at least 1")]
    DegenerateLogQuantifier(String),
    #[error("free element variable {0} in a sentence")]
    FreeElementVariable(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreeVars {
    pub elements: BTreeSet<String>,
    /// Free relation variables with their arities.
    pub relations: BTreeMap<String, usize>,
}

struct Validator<'a> {
    sig: &'a Signature,
    elements: Vec<&'a str>,
    relvars: Vec<(&'a str, usize)>,
    free: FreeVars,
}

impl<'a> Validator<'a> {
    fn term(&mut self, t: &'a Term) -> Result<(), ValidationError> {
        match t {
            Term::Var(v) => {
                if !self.elements.contains(&v.as_str()) {
                    self.free.elements.insert(v.clone());
                }
                Ok(())
            }
            Term::Lit(_) | Term::LogN => self.require_order(),
        }
    }

    fn require_order(&self) -> Result<(), ValidationError> {
        if self.sig.is_ordered() {
            Ok(())
        } else {
            Err(ValidationError::OrderUsedUnordered)
        }
    }

    fn bound_relvar(&self, name: &str) -> Option<usize> {
        self.relvars
            .iter()
            .rev()
            .find(|(n, _)| *n == name)
            .map(|&(_, a)| a)
    }

    fn check_arity(name: &str, expected: usize, found: usize) -> Result<(), ValidationError> {
        if expected == found {
            Ok(())
        } else {
            Err(ValidationError::ArityMismatch {
                name: name.to_string(),
                expected,
                found,
            })
        }
    }

    fn free_relvar(&mut self, name: &str, arity: usize) -> Result<(), ValidationError> {
        match self.free.relations.get(name) {
            Some(&a) => Self::check_arity(name, a, arity),
            None => {
                self.free.relations.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }

    fn formula(&mut self, f: &'a Formula) -> Result<(), ValidationError> {
        match f {
            Formula::Rel { name, args } | Formula::RelVar { name, args } => {
                for t in args {
                    self.term(t)?;
                }
                if let Some(a) = self.bound_relvar(name) {
                    return Self::check_arity(name, a, args.len());
                }
                match (f, self.sig.arity_of(name)) {
                    (Formula::Rel { .. }, Some(a)) => Self::check_arity(name, a, args.len()),
                    _ => self.free_relvar(name, args.len()),
                }
            }
            Formula::Eq(a, b) => {
                self.term(a)?;
                self.term(b)
            }
            Formula::Less(a, b) | Formula::Bit(a, b) => {
                self.require_order()?;
                self.term(a)?;
                self.term(b)
            }
            Formula::Not(a) => self.formula(a),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                self.formula(a)?;
                self.formula(b)
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                self.elements.push(v);
                let r = self.formula(body);
                self.elements.pop();
                r
            }
            Formula::Ifp {
                vars,
                relvar,
                body,
                args,
            } => {
                if vars.is_empty() {
                    return Err(ValidationError::IfpShapeError(
                        "no fixed-point variables".into(),
                    ));
                }
                let distinct: BTreeSet<&String> = vars.iter().collect();
                if distinct.len() != vars.len() {
                    return Err(ValidationError::IfpShapeError(format!(
                        "repeated variable in {relvar}({})",
                        vars.join(",")
                    )));
                }
                if args.len() != vars.len() {
                    return Err(ValidationError::IfpShapeError(format!(
                        "{relvar} has arity {} but is applied to {} terms",
                        vars.len(),
                        args.len()
                    )));
                }
                for t in args {
                    self.term(t)?;
                }
                let depth = self.elements.len();
                self.elements.extend(vars.iter().map(String::as_str));
                self.relvars.push((relvar, vars.len()));
                let r = self.formula(body);
                self.relvars.pop();
                self.elements.truncate(depth);
                r
            }
            Formula::ExistsLog {
                k,
                var,
                arity,
                body,
            }
            | Formula::ForallLog {
                k,
                var,
                arity,
                body,
            } => {
                if *k == 0 || *arity == 0 {
                    return Err(ValidationError::DegenerateLogQuantifier(var.clone()));
                }
                self.relvars.push((var, *arity));
                let r = self.formula(body);
                self.relvars.pop();
                r
            }
        }
    }
}

/// Checks atoms, fixed points and order usage; returns the free variables.
///
/// An atom whose name is neither bound nor in `sig` is a free relation
/// variable.
pub fn validate(f: &Formula, sig: &Signature) -> Result<FreeVars, ValidationError> {
    let mut v = Validator {
        sig,
        elements: Vec::new(),
        relvars: Vec::new(),
        free: FreeVars::default(),
    };
    v.formula(f)?;
    Ok(v.free)
}

/// Like [`validate`], but rejects any free variable.
pub fn validate_sentence(f: &Formula, sig: &Signature) -> Result<(), ValidationError> {
    let free = validate(f, sig)?;
    if let Some(name) = free.relations.keys().next() {
        return Err(ValidationError::UnknownRelation(name.clone()));
    }
    if let Some(v) = free.elements.iter().next() {
        return Err(ValidationError::FreeElementVariable(v.clone()));
    }
    Ok(())
}

/// Marks every atom that does not name a signature relation (or that is
/// shadowed by a binder) as a relation-variable atom.
pub fn resolve(f: &Formula, sig: &Signature) -> Formula {
    fn go(f: &Formula, sig: &Signature, bound: &mut Vec<String>) -> Formula {
        match f {
            Formula::Rel { name, args } | Formula::RelVar { name, args } => {
                if bound.contains(name) || sig.arity_of(name).is_none() {
                    Formula::relvar(name.clone(), args.clone())
                } else {
                    Formula::rel(name.clone(), args.clone())
                }
            }
            Formula::Eq(..) | Formula::Less(..) | Formula::Bit(..) => f.clone(),
            Formula::Not(a) => Formula::not(go(a, sig, bound)),
            Formula::And(a, b) => Formula::and(go(a, sig, bound), go(b, sig, bound)),
            Formula::Or(a, b) => Formula::or(go(a, sig, bound), go(b, sig, bound)),
            Formula::Implies(a, b) => Formula::implies(go(a, sig, bound), go(b, sig, bound)),
            Formula::Exists(v, a) => Formula::exists(v.clone(), go(a, sig, bound)),
            Formula::Forall(v, a) => Formula::forall(v.clone(), go(a, sig, bound)),
            Formula::Ifp {
                vars,
                relvar,
                body,
                args,
            } => {
                bound.push(relvar.clone());
                let body = go(body, sig, bound);
                bound.pop();
                Formula::Ifp {
                    vars: vars.clone(),
                    relvar: relvar.clone(),
                    body: Box::new(body),
                    args: args.clone(),
                }
            }
            Formula::ExistsLog {
                k,
                var,
                arity,
                body,
            }
            | Formula::ForallLog {
                k,
                var,
                arity,
                body,
            } => {
                bound.push(var.clone());
                let body = Box::new(go(body, sig, bound));
                bound.pop();
                let (k, var, arity) = (*k, var.clone(), *arity);
                if matches!(f, Formula::ExistsLog { .. }) {
                    Formula::ExistsLog {
                        k,
                        var,
                        arity,
                        body,
                    }
                } else {
                    Formula::ForallLog {
                        k,
                        var,
                        arity,
                        body,
                    }
                }
            }
        }
    }
    go(f, sig, &mut Vec::new())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Metrics {
    /// Largest arity of a free or log-quantified relation variable.
    pub mva: usize,
    /// Largest exponent `k` of a log-quantifier.
    pub height: u32,
    /// Nesting depth of log-quantifiers.
    pub lqr: usize,
    /// A (possibly empty) block of `∃^{log^k}` followed by a log-free formula.
    pub prenex_existential: bool,
    /// Distinct element variable names, bound or free.
    pub num_element_vars: usize,
}

/// Free relation variables are recognised as unbound [`Formula::RelVar`]
/// atoms, so parse results should go through [`resolve`] first.
pub fn metrics(f: &Formula) -> Metrics {
    let (_, matrix) = f.existential_log_prefix();
    Metrics {
        mva: mva(f, &mut Vec::new()),
        height: height(f),
        lqr: lqr(f),
        prenex_existential: !matrix.contains_log_quantifier(),
        num_element_vars: f.element_variables().len(),
    }
}

fn mva<'a>(f: &'a Formula, bound: &mut Vec<&'a str>) -> usize {
    match f {
        Formula::RelVar { name, args } if !bound.contains(&name.as_str()) => args.len(),
        Formula::Ifp { relvar, body, .. } => {
            bound.push(relvar);
            let m = mva(body, bound);
            bound.pop();
            m
        }
        Formula::ExistsLog {
            var, arity, body, ..
        }
        | Formula::ForallLog {
            var, arity, body, ..
        } => {
            bound.push(var);
            let m = mva(body, bound);
            bound.pop();
            m.max(*arity)
        }
        _ => f.children().map(|c| mva(c, bound)).max().unwrap_or(0),
    }
}

fn height(f: &Formula) -> u32 {
    let own = match f {
        Formula::ExistsLog { k, .. } | Formula::ForallLog { k, .. } => *k,
        _ => 0,
    };
    f.children().map(height).max().unwrap_or(0).max(own)
}

/// Atoms 0; negation, first-order quantifiers and fixed points pass through;
/// binary connectives take the maximum; log-quantifiers add one.
fn lqr(f: &Formula) -> usize {
    match f {
        Formula::ExistsLog { body, .. } | Formula::ForallLog { body, .. } => lqr(body) + 1,
        _ => f.children().map(lqr).max().unwrap_or(0),
    }
}
