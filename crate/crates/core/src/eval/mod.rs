//! Model checking: first-order connectives, inflationary fixed points and
//! log-bounded second-order quantifiers (by enumeration).

mod bitstrings;
mod bounds;

use std::borrow::Cow;
use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use smallvec::SmallVec;
use thiserror::Error;

use crate::formula::{Formula, Term};
use crate::structure::{Element, Relation, Structure, Tuple};

pub use bitstrings::{
    decode_relation_block, evaluate_via_bitstrings, gc_check, gc_search_space, BitstringError,
    GcOutcome,
};
pub use bounds::{all_tuples, ceil_log, count_bounded_relations, log_pow, BoundedRelations};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("element variable {0} is unbound")]
    UnboundVariable(String),
    #[error("relation {0} is neither in the structure nor assigned")]
    UnboundRelation(String),
    #[error("order, BIT, numerals and logn need an ordered structure")]
    OrderUsedUnordered,
    #[error("term {0} does not denote an element of the domain")]
    TermOutOfRange(String),
    #[error("{name} has arity {expected} but got {found} arguments")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
}

/// Values for free element and relation variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    pub elements: BTreeMap<String, Element>,
    pub relations: BTreeMap<String, Relation>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_element(mut self, var: impl Into<String>, value: Element) -> Self {
        self.elements.insert(var.into(), value);
        self
    }

    pub fn with_relation(mut self, var: impl Into<String>, value: Relation) -> Self {
        self.relations.insert(var.into(), value);
        self
    }
}

/// Order in which log-quantifiers try candidate relations. The verdict never
/// depends on it; only which witness is found first does.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum EnumerationOrder {
    #[default]
    Forward,
    Reverse,
}

pub fn evaluate(a: &Structure, f: &Formula, alpha: &Assignment) -> Result<bool, EvalError> {
    Evaluator::new(a).evaluate(f, alpha)
}

/// The fixed point of `Y ↦ Y ∪ {ȳ : ψ(ȳ, Y)}` starting from `∅`.
pub fn ifp_fixpoint(
    a: &Structure,
    body: &Formula,
    vars: &[String],
    relvar: &str,
    alpha: &Assignment,
) -> Result<Relation, EvalError> {
    Ok(ifp_stages(a, body, vars, relvar, alpha)?
        .pop()
        .expect("stage list always holds the empty stage"))
}

/// All stages `X₀ = ∅ ⊊ X₁ ⊊ … ⊊ X_f` of the inflationary iteration.
pub fn ifp_stages(
    a: &Structure,
    body: &Formula,
    vars: &[String],
    relvar: &str,
    alpha: &Assignment,
) -> Result<Vec<Relation>, EvalError> {
    let ev = Evaluator::new(a);
    let mut env = Env::from_assignment(alpha);
    let mut stages = vec![Relation::empty(vars.len())];
    loop {
        let cur = stages.last().unwrap();
        let next = ev.ifp_step(body, vars, relvar, cur, &mut env)?;
        if next.len() == cur.len() {
            return Ok(stages);
        }
        stages.push(next);
    }
}

/// `{ t̄ : A ⊨ φ[vars/t̄] }` over all tuples of `[n]^|vars|`.
///
/// Tuples are filled in left to right; a prefix is abandoned as soon as the
/// connectives already force `false` (three-valued evaluation).
pub fn query(
    a: &Structure,
    f: &Formula,
    vars: &[String],
    alpha: &Assignment,
) -> Result<Relation, EvalError> {
    let ev = Evaluator::new(a);
    let mut env = Env::from_assignment(alpha);
    let mut out = Relation::empty(vars.len());
    let mut prefix = Vec::with_capacity(vars.len());
    ev.extend_query(f, vars, &mut prefix, &mut env, &mut out)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct IfpKey {
    node: usize,
    params: Vec<Element>,
    relations: Vec<Relation>,
}

/// Free element and relation variable names of an IFP body, beyond its own.
#[derive(Debug, Clone)]
struct IfpFree {
    elements: Vec<String>,
    relations: Vec<String>,
}

/// Variable bindings as scoped stacks; lookups scan from the innermost.
pub(crate) struct Env<'a> {
    elements: Vec<(&'a str, Element)>,
    relations: Vec<(&'a str, Cow<'a, Relation>)>,
}

impl<'a> Env<'a> {
    pub(crate) fn from_assignment(alpha: &'a Assignment) -> Self {
        Env {
            elements: alpha
                .elements
                .iter()
                .map(|(k, &v)| (k.as_str(), v))
                .collect(),
            relations: alpha
                .relations
                .iter()
                .map(|(k, v)| (k.as_str(), Cow::Borrowed(v)))
                .collect(),
        }
    }

    fn element(&self, name: &str) -> Option<Element> {
        self.elements
            .iter()
            .rev()
            .find(|(n, _)| *n == name)
            .map(|&(_, v)| v)
    }

    fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations
            .iter()
            .rev()
            .find(|(n, _)| *n == name)
            .map(|(_, r)| r.as_ref())
    }

    pub(crate) fn push_relation(&mut self, name: &'a str, rel: Relation) {
        self.relations.push((name, Cow::Owned(rel)));
    }

    pub(crate) fn pop_relation(&mut self) {
        self.relations.pop();
    }
}

/// Evaluates formulas over one structure, caching fixed points by node
/// address and parameter values.
pub struct Evaluator<'s> {
    structure: &'s Structure,
    order: EnumerationOrder,
    ifp_cache: RefCell<HashMap<IfpKey, Relation>>,
    ifp_free: RefCell<HashMap<usize, IfpFree>>,
}

impl<'s> Evaluator<'s> {
    pub fn new(structure: &'s Structure) -> Self {
        Evaluator {
            structure,
            order: EnumerationOrder::Forward,
            ifp_cache: RefCell::new(HashMap::new()),
            ifp_free: RefCell::new(HashMap::new()),
        }
    }

    pub fn with_order(mut self, order: EnumerationOrder) -> Self {
        self.order = order;
        self
    }

    pub fn structure(&self) -> &Structure {
        self.structure
    }

    /// Starts from an empty fixed-point cache: entries are keyed by node
    /// address, which a later formula may reuse.
    pub fn evaluate(&self, f: &Formula, alpha: &Assignment) -> Result<bool, EvalError> {
        self.ifp_cache.borrow_mut().clear();
        self.ifp_free.borrow_mut().clear();
        self.evaluate_cached(f, alpha)
    }

    /// Keeps cached fixed points; only sound while every formula evaluated
    /// since the last [`Evaluator::evaluate`] is still alive.
    pub(crate) fn evaluate_cached(&self, f: &Formula, alpha: &Assignment) -> Result<bool, EvalError> {
        let mut env = Env::from_assignment(alpha);
        self.eval(f, &mut env)
    }

    /// Evaluates `f` with `vars` bound to `values` on top of `env`.
    pub(crate) fn holds_at<'a>(
        &self,
        f: &'a Formula,
        vars: &'a [String],
        values: &[Element],
        env: &mut Env<'a>,
    ) -> Result<bool, EvalError> {
        let depth = env.elements.len();
        env.elements
            .extend(vars.iter().map(String::as_str).zip(values.iter().copied()));
        let r = self.eval(f, env);
        env.elements.truncate(depth);
        r
    }

    fn extend_query<'a>(
        &self,
        f: &'a Formula,
        vars: &'a [String],
        prefix: &mut Vec<Element>,
        env: &mut Env<'a>,
        out: &mut Relation,
    ) -> Result<(), EvalError> {
        let depth = env.elements.len();
        env.elements
            .extend(vars.iter().map(String::as_str).zip(prefix.iter().copied()));
        let unknown: Vec<&str> = vars[prefix.len()..].iter().map(String::as_str).collect();
        let verdict = self.partial(f, env, &unknown);
        env.elements.truncate(depth);
        match verdict? {
            Some(false) => Ok(()),
            Some(true) if prefix.len() < vars.len() => {
                // every completion satisfies f
                let rest = vars.len() - prefix.len();
                for tail in all_tuples(self.structure.size(), rest) {
                    let mut t = prefix.clone();
                    t.extend(tail);
                    out.insert(t);
                }
                Ok(())
            }
            Some(true) => {
                out.insert(prefix.clone());
                Ok(())
            }
            None => {
                for e in 0..self.structure.size() {
                    prefix.push(e);
                    let r = self.extend_query(f, vars, prefix, env, out);
                    prefix.pop();
                    r?;
                }
                Ok(())
            }
        }
    }

    /// Kleene truth value of `f` while the variables in `unknown` are still
    /// unassigned; `None` when it depends on them.
    fn partial<'a>(
        &self,
        f: &'a Formula,
        env: &mut Env<'a>,
        unknown: &[&str],
    ) -> Result<Option<bool>, EvalError> {
        if unknown.is_empty()
            || !f
                .free_element_variables()
                .iter()
                .any(|v| unknown.contains(&v.as_str()))
        {
            return self.eval(f, env).map(Some);
        }
        Ok(match f {
            Formula::Not(a) => self.partial(a, env, unknown)?.map(|b| !b),
            Formula::And(a, b) => match self.partial(a, env, unknown)? {
                Some(false) => Some(false),
                left => match (left, self.partial(b, env, unknown)?) {
                    (_, Some(false)) => Some(false),
                    (Some(true), Some(true)) => Some(true),
                    _ => None,
                },
            },
            Formula::Or(a, b) => match self.partial(a, env, unknown)? {
                Some(true) => Some(true),
                left => match (left, self.partial(b, env, unknown)?) {
                    (_, Some(true)) => Some(true),
                    (Some(false), Some(false)) => Some(false),
                    _ => None,
                },
            },
            Formula::Implies(a, b) => match self.partial(a, env, unknown)? {
                Some(false) => Some(true),
                left => match (left, self.partial(b, env, unknown)?) {
                    (_, Some(true)) => Some(true),
                    (Some(true), Some(false)) => Some(false),
                    _ => None,
                },
            },
            _ => None,
        })
    }

    fn term(&self, t: &Term, env: &Env<'_>) -> Result<Element, EvalError> {
        let n = self.structure.size();
        match t {
            Term::Var(v) => env
                .element(v)
                .ok_or_else(|| EvalError::UnboundVariable(v.clone())),
            Term::Lit(i) => {
                self.require_order()?;
                if *i < n {
                    Ok(*i)
                } else {
                    Err(EvalError::TermOutOfRange(i.to_string()))
                }
            }
            Term::LogN => {
                self.require_order()?;
                let w = ceil_log(n).expect("domains are nonempty");
                if w < n {
                    Ok(w)
                } else {
                    Err(EvalError::TermOutOfRange("logn".into()))
                }
            }
        }
    }

    fn require_order(&self) -> Result<(), EvalError> {
        if self.structure.is_ordered() {
            Ok(())
        } else {
            Err(EvalError::OrderUsedUnordered)
        }
    }

    fn atom(&self, rel: &Relation, name: &str, args: &[Term], env: &Env<'_>) -> Result<bool, EvalError> {
        if rel.arity() != args.len() {
            return Err(EvalError::ArityMismatch {
                name: name.to_string(),
                expected: rel.arity(),
                found: args.len(),
            });
        }
        let mut buf: SmallVec<[Element; 8]> = SmallVec::with_capacity(args.len());
        for t in args {
            buf.push(self.term(t, env)?);
        }
        Ok(rel.contains(&buf))
    }

    pub(crate) fn eval<'a>(&self, f: &'a Formula, env: &mut Env<'a>) -> Result<bool, EvalError> {
        match f {
            Formula::Rel { name, args } => {
                let rel = self
                    .structure
                    .relation(name)
                    .or_else(|| env.relation(name))
                    .ok_or_else(|| EvalError::UnboundRelation(name.clone()))?;
                self.atom(rel, name, args, env)
            }
            Formula::RelVar { name, args } => {
                let rel = env
                    .relation(name)
                    .or_else(|| self.structure.relation(name))
                    .ok_or_else(|| EvalError::UnboundRelation(name.clone()))?;
                self.atom(rel, name, args, env)
            }
            Formula::Eq(a, b) => Ok(self.term(a, env)? == self.term(b, env)?),
            Formula::Less(a, b) => {
                self.require_order()?;
                Ok(self.term(a, env)? < self.term(b, env)?)
            }
            Formula::Bit(y, x) => {
                self.require_order()?;
                let (y, x) = (self.term(y, env)?, self.term(x, env)?);
                Ok(x < usize::BITS as usize && (y >> x) & 1 == 1)
            }
            Formula::Not(a) => Ok(!self.eval(a, env)?),
            Formula::And(a, b) => Ok(self.eval(a, env)? && self.eval(b, env)?),
            Formula::Or(a, b) => Ok(self.eval(a, env)? || self.eval(b, env)?),
            Formula::Implies(a, b) => Ok(!self.eval(a, env)? || self.eval(b, env)?),
            Formula::Exists(v, body) => self.quantify(v, body, env, true),
            Formula::Forall(v, body) => self.quantify(v, body, env, false),
            Formula::Ifp {
                vars,
                relvar,
                body,
                args,
            } => {
                let mut point: SmallVec<[Element; 8]> = SmallVec::new();
                for t in args {
                    point.push(self.term(t, env)?);
                }
                let fixpoint = self.cached_fixpoint(f, body, vars, relvar, env)?;
                Ok(fixpoint.contains(&point))
            }
            Formula::ExistsLog {
                k,
                var,
                arity,
                body,
            } => self.log_quantify(*k, var, *arity, body, env, true),
            Formula::ForallLog {
                k,
                var,
                arity,
                body,
            } => self.log_quantify(*k, var, *arity, body, env, false),
        }
    }

    fn quantify<'a>(
        &self,
        var: &'a str,
        body: &'a Formula,
        env: &mut Env<'a>,
        existential: bool,
    ) -> Result<bool, EvalError> {
        env.elements.push((var, 0));
        let slot = env.elements.len() - 1;
        let mut result = !existential;
        for e in 0..self.structure.size() {
            env.elements[slot].1 = e;
            match self.eval(body, env) {
                Ok(v) if v == existential => {
                    result = existential;
                    break;
                }
                Ok(_) => {}
                Err(err) => {
                    env.elements.pop();
                    return Err(err);
                }
            }
        }
        env.elements.pop();
        Ok(result)
    }

    /// `∃^{log^k} X` (or `∀`): try every relation of the given arity with at
    /// most `⌈log₂ n⌉^k` tuples; stop at the first decisive one.
    fn log_quantify<'a>(
        &self,
        k: u32,
        var: &'a str,
        arity: usize,
        body: &'a Formula,
        env: &mut Env<'a>,
        existential: bool,
    ) -> Result<bool, EvalError> {
        let n = self.structure.size();
        let bound = log_pow(n, k).expect("domains are nonempty");
        let candidates = BoundedRelations::new(n, arity, bound);
        let candidates: Box<dyn Iterator<Item = Relation>> = match self.order {
            EnumerationOrder::Forward => Box::new(candidates),
            EnumerationOrder::Reverse => {
                let mut all: Vec<Relation> = candidates.collect();
                all.reverse();
                Box::new(all.into_iter())
            }
        };
        for rel in candidates {
            env.push_relation(var, rel);
            let r = self.eval(body, env);
            env.pop_relation();
            if r? == existential {
                return Ok(existential);
            }
        }
        Ok(!existential)
    }

    fn ifp_free_names(&self, node: &Formula, body: &Formula, vars: &[String], relvar: &str) -> IfpFree {
        let key = node as *const Formula as usize;
        if let Some(found) = self.ifp_free.borrow().get(&key) {
            return found.clone();
        }
        let elements = body
            .free_element_variables()
            .into_iter()
            .filter(|v| !vars.contains(v))
            .collect();
        let mut relations = Vec::new();
        free_relation_names(body, &mut vec![relvar.to_string()], &mut relations);
        relations.sort();
        relations.dedup();
        let free = IfpFree {
            elements,
            relations,
        };
        self.ifp_free.borrow_mut().insert(key, free.clone());
        free
    }

    fn cached_fixpoint<'a>(
        &self,
        node: &'a Formula,
        body: &'a Formula,
        vars: &'a [String],
        relvar: &'a str,
        env: &mut Env<'a>,
    ) -> Result<Relation, EvalError> {
        let free = self.ifp_free_names(node, body, vars, relvar);
        let mut params = Vec::with_capacity(free.elements.len());
        for v in &free.elements {
            params.push(
                env.element(v)
                    .ok_or_else(|| EvalError::UnboundVariable(v.clone()))?,
            );
        }
        // structure relations need no key entry: they never change
        let relations = free
            .relations
            .iter()
            .filter_map(|r| env.relation(r).cloned())
            .collect();
        let key = IfpKey {
            node: node as *const Formula as usize,
            params,
            relations,
        };
        if let Some(hit) = self.ifp_cache.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let mut stage = Relation::empty(vars.len());
        loop {
            let next = self.ifp_step(body, vars, relvar, &stage, env)?;
            if next.len() == stage.len() {
                break;
            }
            stage = next;
        }
        self.ifp_cache.borrow_mut().insert(key, stage.clone());
        Ok(stage)
    }

    /// One inflationary round: `cur ∪ {t̄ : ψ(t̄, cur)}`.
    fn ifp_step<'a>(
        &self,
        body: &'a Formula,
        vars: &'a [String],
        relvar: &'a str,
        cur: &Relation,
        env: &mut Env<'a>,
    ) -> Result<Relation, EvalError> {
        let mut next = cur.clone();
        env.push_relation(relvar, cur.clone());
        let mut outcome = Ok(());
        for t in all_tuples(self.structure.size(), vars.len()) {
            if cur.contains(&t) {
                continue;
            }
            match self.holds_at(body, vars, &t, env) {
                Ok(true) => {
                    next.insert(t);
                }
                Ok(false) => {}
                Err(e) => {
                    outcome = Err(e);
                    break;
                }
            }
        }
        env.pop_relation();
        outcome.map(|_| next)
    }
}

fn free_relation_names(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
    match f {
        Formula::Rel { name, .. } | Formula::RelVar { name, .. } => {
            if !bound.contains(name) {
                out.push(name.clone());
            }
        }
        Formula::Ifp { relvar, body, .. } => {
            bound.push(relvar.clone());
            free_relation_names(body, bound, out);
            bound.pop();
        }
        Formula::ExistsLog { var, body, .. } | Formula::ForallLog { var, body, .. } => {
            bound.push(var.clone());
            free_relation_names(body, bound, out);
            bound.pop();
        }
        _ => {
            for c in f.children() {
                free_relation_names(c, bound, out);
            }
        }
    }
}

/// Tuples of `rel` as a sorted vector (test and CLI convenience).
pub fn tuples_of(rel: &Relation) -> Vec<Tuple> {
    rel.iter().cloned().collect()
}
