//! Backward translation `φ ↦ φ^I`: `A ⊨ φ^I` iff `I(A) ⊨ φ`.

use std::collections::{BTreeMap, BTreeSet};

use super::{var_terms, Defining, InterpError, Interpretation, TargetOrder, MAX_TRANSLATED_ARITY};
use crate::formula::{resolve, Formula, Term};

/// `ā <_lex b̄` as a disjunction over the first differing position.
pub fn lexicographic_less(a: &[String], b: &[String]) -> Formula {
    let disjuncts = (0..a.len()).map(|i| {
        let equal_prefix = (0..i).map(|j| Formula::eq(Term::var(&a[j]), Term::var(&b[j])));
        let strict = Formula::Less(Term::var(&a[i]), Term::var(&b[i]));
        Formula::conjunction(equal_prefix.chain([strict])).expect("nonempty")
    });
    Formula::disjunction(disjuncts).expect("width is at least 1")
}

/// Translates a formula over the target signature into one over the source.
pub fn transform_formula(f: &Formula, i: &Interpretation) -> Result<Formula, InterpError> {
    transform_formula_with_free(f, i).map(|(g, _)| g)
}

/// Also returns, for each free element variable, the variables that stand
/// for its tuple.
pub fn transform_formula_with_free(
    f: &Formula,
    i: &Interpretation,
) -> Result<(Formula, BTreeMap<String, Vec<String>>), InterpError> {
    let f = resolve(f, i.target());
    let mut used = f.element_variables();
    used.extend(i.universe_formula().formula.element_variables());
    used.extend(i.universe_formula().vars.iter().cloned());
    for (name, _) in i.target().relations() {
        let d = i.relation_formula(name).expect("aligned");
        used.extend(d.formula.element_variables());
        used.extend(d.vars.iter().cloned());
    }
    if let Some(TargetOrder::Formula(d)) = i.order() {
        used.extend(d.formula.element_variables());
        used.extend(d.vars.iter().cloned());
    }
    let mut t = Translator {
        interp: i,
        used,
        scope: Vec::new(),
    };
    let mut free_map = BTreeMap::new();
    for v in f.free_element_variables() {
        let names = t.block(&v);
        t.scope.push((v.clone(), names.clone()));
        free_map.insert(v, names);
    }
    let g = t.formula(&f)?;
    Ok((g, free_map))
}

struct Translator<'i> {
    interp: &'i Interpretation,
    used: BTreeSet<String>,
    scope: Vec<(String, Vec<String>)>,
}

impl Translator<'_> {
    fn fresh(&mut self, base: &str) -> String {
        let mut name = base.to_string();
        let mut n = 0;
        while self.used.contains(&name) {
            n += 1;
            name = format!("{base}_{n}");
        }
        self.used.insert(name.clone());
        name
    }

    /// Fresh names `v1 … vw` standing for the tuple of `v`.
    fn block(&mut self, v: &str) -> Vec<String> {
        (1..=self.interp.width())
            .map(|j| self.fresh(&format!("{v}{j}")))
            .collect()
    }

    fn tuple(&self, t: &Term) -> Result<Vec<String>, InterpError> {
        match t {
            Term::Var(v) => self
                .scope
                .iter()
                .rev()
                .find(|(name, _)| name == v)
                .map(|(_, names)| names.clone())
                .ok_or_else(|| InterpError::Unsupported(format!("unscoped variable {v}"))),
            other => Err(InterpError::Unsupported(format!("term {other}"))),
        }
    }

    fn tuples(&self, ts: &[Term]) -> Result<Vec<String>, InterpError> {
        let mut out = Vec::new();
        for t in ts {
            out.extend(self.tuple(t)?);
        }
        Ok(out)
    }

    /// `d.formula` with its variables replaced by `args` and every bound
    /// element variable renamed apart.
    fn instance(&mut self, d: &Defining, args: &[String]) -> Formula {
        let mut map: Vec<(String, String)> = d.vars.iter().cloned().zip(args.iter().cloned()).collect();
        self.rename(&d.formula, &mut map)
    }

    fn rename(&mut self, f: &Formula, map: &mut Vec<(String, String)>) -> Formula {
        let term = |t: &Term, map: &Vec<(String, String)>| match t {
            Term::Var(v) => Term::Var(
                map.iter()
                    .rev()
                    .find(|(from, _)| from == v)
                    .map(|(_, to)| to.clone())
                    .unwrap_or_else(|| v.clone()),
            ),
            other => other.clone(),
        };
        match f {
            Formula::Rel { name, args } => Formula::rel(name.clone(), args.iter().map(|t| term(t, map))),
            Formula::RelVar { name, args } => {
                Formula::relvar(name.clone(), args.iter().map(|t| term(t, map)))
            }
            Formula::Eq(a, b) => Formula::Eq(term(a, map), term(b, map)),
            Formula::Less(a, b) => Formula::Less(term(a, map), term(b, map)),
            Formula::Bit(a, b) => Formula::Bit(term(a, map), term(b, map)),
            Formula::Not(a) => Formula::not(self.rename(a, map)),
            Formula::And(a, b) => Formula::and(self.rename(a, map), self.rename(b, map)),
            Formula::Or(a, b) => Formula::or(self.rename(a, map), self.rename(b, map)),
            Formula::Implies(a, b) => Formula::implies(self.rename(a, map), self.rename(b, map)),
            Formula::Exists(v, a) | Formula::Forall(v, a) => {
                let nv = self.fresh(v);
                map.push((v.clone(), nv.clone()));
                let body = self.rename(a, map);
                map.pop();
                if matches!(f, Formula::Exists(..)) {
                    Formula::exists(nv, body)
                } else {
                    Formula::forall(nv, body)
                }
            }
            Formula::Ifp {
                vars,
                relvar,
                body,
                args,
            } => {
                let args = args.iter().map(|t| term(t, map)).collect();
                let depth = map.len();
                let mut nvars = Vec::with_capacity(vars.len());
                for v in vars {
                    let nv = self.fresh(v);
                    map.push((v.clone(), nv.clone()));
                    nvars.push(nv);
                }
                let body = self.rename(body, map);
                map.truncate(depth);
                Formula::Ifp {
                    vars: nvars,
                    relvar: relvar.clone(),
                    body: Box::new(body),
                    args,
                }
            }
            Formula::ExistsLog {
                k,
                var,
                arity,
                body,
            } => Formula::ExistsLog {
                k: *k,
                var: var.clone(),
                arity: *arity,
                body: Box::new(self.rename(body, map)),
            },
            Formula::ForallLog {
                k,
                var,
                arity,
                body,
            } => Formula::ForallLog {
                k: *k,
                var: var.clone(),
                arity: *arity,
                body: Box::new(self.rename(body, map)),
            },
        }
    }

    fn uni(&mut self, names: &[String]) -> Formula {
        let d = self.interp.universe_formula().clone();
        self.instance(&d, names)
    }

    fn formula(&mut self, f: &Formula) -> Result<Formula, InterpError> {
        Ok(match f {
            Formula::Rel { name, args } => {
                let d = self
                    .interp
                    .relation_formula(name)
                    .cloned()
                    .ok_or_else(|| InterpError::UnknownRelation(name.clone()))?;
                let flat = self.tuples(args)?;
                self.instance(&d, &flat)
            }
            Formula::RelVar { name, args } => {
                let flat = self.tuples(args)?;
                if flat.len() > MAX_TRANSLATED_ARITY {
                    return Err(InterpError::ArityOverflow {
                        name: name.clone(),
                        arity: flat.len(),
                    });
                }
                Formula::relvar(name.clone(), var_terms(&flat))
            }
            Formula::Eq(a, b) => {
                let (a, b) = (self.tuple(a)?, self.tuple(b)?);
                Formula::conjunction(
                    a.iter()
                        .zip(&b)
                        .map(|(x, y)| Formula::eq(Term::var(x), Term::var(y))),
                )
                .expect("width is at least 1")
            }
            Formula::Less(a, b) => {
                let (a, b) = (self.tuple(a)?, self.tuple(b)?);
                match self.interp.order().cloned() {
                    Some(TargetOrder::Lexicographic) => lexicographic_less(&a, &b),
                    Some(TargetOrder::Formula(d)) => {
                        let args: Vec<String> = a.into_iter().chain(b).collect();
                        self.instance(&d, &args)
                    }
                    None => return Err(InterpError::Unsupported("order without an order formula".into())),
                }
            }
            Formula::Bit(..) => return Err(InterpError::Unsupported("BIT".into())),
            Formula::Not(a) => Formula::not(self.formula(a)?),
            Formula::And(a, b) => Formula::and(self.formula(a)?, self.formula(b)?),
            Formula::Or(a, b) => Formula::or(self.formula(a)?, self.formula(b)?),
            Formula::Implies(a, b) => Formula::implies(self.formula(a)?, self.formula(b)?),
            Formula::Exists(v, a) | Formula::Forall(v, a) => {
                let names = self.block(v);
                self.scope.push((v.clone(), names.clone()));
                let body = self.formula(a);
                self.scope.pop();
                let guard = self.uni(&names);
                let existential = matches!(f, Formula::Exists(..));
                let mut out = if existential {
                    Formula::and(guard, body?)
                } else {
                    Formula::implies(guard, body?)
                };
                for n in names.into_iter().rev() {
                    out = if existential {
                        Formula::exists(n, out)
                    } else {
                        Formula::forall(n, out)
                    };
                }
                out
            }
            Formula::Ifp {
                vars,
                relvar,
                body,
                args,
            } => {
                let arity = vars.len() * self.interp.width();
                if arity > MAX_TRANSLATED_ARITY {
                    return Err(InterpError::ArityOverflow {
                        name: relvar.clone(),
                        arity,
                    });
                }
                let new_args = self.tuples(args)?;
                let depth = self.scope.len();
                let mut blocks = Vec::with_capacity(vars.len());
                for v in vars {
                    let names = self.block(v);
                    self.scope.push((v.clone(), names.clone()));
                    blocks.push(names);
                }
                let inner = self.formula(body);
                self.scope.truncate(depth);
                let mut conj = vec![inner?];
                for b in &blocks {
                    conj.push(self.uni(b));
                }
                Formula::Ifp {
                    vars: blocks.into_iter().flatten().collect(),
                    relvar: relvar.clone(),
                    body: Box::new(Formula::conjunction(conj).expect("nonempty")),
                    args: var_terms(&new_args),
                }
            }
            Formula::ExistsLog { .. } | Formula::ForallLog { .. } => {
                return Err(InterpError::LogQuantifierUnsupported)
            }
        })
    }
}
