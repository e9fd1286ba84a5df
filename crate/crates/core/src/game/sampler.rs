//! Random sentences inside the fragment a game bounds, used to look for a
//! sentence separating two structures.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{game_winner, GameError, GameParams, Winner};
use crate::eval::Evaluator;
use crate::eval::Assignment;
use crate::formula::{metrics, Formula, Term};
use crate::structure::{Signature, Structure};

const NAMES: [&str; 6] = ["x", "y", "z", "u", "v", "w"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplerReport {
    pub winner: Winner,
    /// Sampled sentences true in exactly one structure, without repeats.
    pub distinguishing: Vec<String>,
    pub sampled: usize,
}

/// A random sentence over `sig` with at most `s` element variable names,
/// log-quantifier rank `≤ m`, arities `≤ r` and exponents `≤ k`.
pub fn random_sentence<R: Rng>(rng: &mut R, sig: &Signature, p: GameParams) -> Formula {
    let pool: Vec<String> = if p.s <= NAMES.len() {
        NAMES[..p.s].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=p.s).map(|i| format!("x{i}")).collect()
    };
    let mut g = Gen {
        rng,
        sig,
        p,
        pool,
        fresh: 0,
    };
    let f = g.formula(5, &mut Vec::new(), &mut Vec::new(), p.m, true);
    debug_assert!({
        let mm = metrics(&f);
        mm.lqr <= p.m && mm.mva <= p.r && mm.height <= p.k && mm.num_element_vars <= p.s
    });
    f
}

struct Gen<'a, R> {
    rng: &'a mut R,
    sig: &'a Signature,
    p: GameParams,
    pool: Vec<String>,
    fresh: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn formula(
        &mut self,
        depth: usize,
        scope: &mut Vec<String>,
        relvars: &mut Vec<(String, usize)>,
        lq_left: usize,
        ifp_ok: bool,
    ) -> Formula {
        if depth == 0 {
            return self.closed_atom(scope, relvars);
        }
        let roll = self.rng.gen_range(0..100);
        match roll {
            0..=14 => self.closed_atom(scope, relvars),
            15..=24 => Formula::not(self.formula(depth - 1, scope, relvars, lq_left, ifp_ok)),
            25..=39 => {
                let a = self.formula(depth - 1, scope, relvars, lq_left, ifp_ok);
                Formula::and(a, self.formula(depth - 1, scope, relvars, lq_left, ifp_ok))
            }
            40..=49 => {
                let a = self.formula(depth - 1, scope, relvars, lq_left, ifp_ok);
                Formula::or(a, self.formula(depth - 1, scope, relvars, lq_left, ifp_ok))
            }
            50..=54 => {
                let a = self.formula(depth - 1, scope, relvars, lq_left, ifp_ok);
                Formula::implies(a, self.formula(depth - 1, scope, relvars, lq_left, ifp_ok))
            }
            55..=79 => {
                let var = self.quantified_name(scope);
                scope.push(var.clone());
                let body = self.formula(depth - 1, scope, relvars, lq_left, ifp_ok);
                scope.pop();
                if roll < 70 {
                    Formula::exists(var, body)
                } else {
                    Formula::forall(var, body)
                }
            }
            80..=94 if lq_left > 0 => {
                let arity = self.rng.gen_range(1..=self.p.r);
                let k = self.rng.gen_range(1..=self.p.k);
                self.fresh += 1;
                let var = format!("X{}", self.fresh);
                relvars.push((var.clone(), arity));
                let body = Box::new(self.formula(depth - 1, scope, relvars, lq_left - 1, ifp_ok));
                relvars.pop();
                if self.rng.gen_bool(0.5) {
                    Formula::ExistsLog { k, var, arity, body }
                } else {
                    Formula::ForallLog { k, var, arity, body }
                }
            }
            95..=99 if ifp_ok && !scope.is_empty() => {
                // a small unary fixed point; log-quantifiers stay outside it
                let v = self.quantified_name(scope);
                self.fresh += 1;
                let relvar = format!("Y{}", self.fresh);
                let mut inner = scope.clone();
                inner.push(v.clone());
                relvars.push((relvar.clone(), 1));
                let body = self.formula(depth.min(2) - 1, &mut inner, relvars, 0, false);
                relvars.pop();
                let arg = Term::Var(scope.choose(self.rng).expect("nonempty").clone());
                Formula::Ifp {
                    vars: vec![v],
                    relvar,
                    body: Box::new(body),
                    args: vec![arg],
                }
            }
            _ => self.closed_atom(scope, relvars),
        }
    }

    /// Prefers a name not already bound, so that sentences actually relate
    /// several elements; reuses one when all `s` names are taken.
    fn quantified_name(&mut self, scope: &[String]) -> String {
        let unused: Vec<&String> = self.pool.iter().filter(|v| !scope.contains(v)).collect();
        match unused.choose(self.rng) {
            Some(v) => (*v).clone(),
            None => self.pool.choose(self.rng).expect("s >= 1").clone(),
        }
    }

    /// An atom over the variables in scope, existentially closed if there
    /// are none.
    fn closed_atom(&mut self, scope: &[String], relvars: &[(String, usize)]) -> Formula {
        if scope.is_empty() {
            let v = self.pool[0].clone();
            let atom = self.atom(std::slice::from_ref(&v), relvars);
            return Formula::exists(v, atom);
        }
        self.atom(scope, relvars)
    }

    fn atom(&mut self, scope: &[String], relvars: &[(String, usize)]) -> Formula {
        let term = |g: &mut Self| Term::Var(scope.choose(g.rng).expect("nonempty").clone());
        let rels = self.sig.relations();
        let choices = rels.len() + relvars.len() + 1 + usize::from(self.sig.is_ordered());
        let pick = self.rng.gen_range(0..choices);
        if pick < rels.len() {
            let (name, arity) = rels[pick].clone();
            let args: Vec<Term> = (0..arity).map(|_| term(self)).collect();
            return Formula::rel(name, args);
        }
        let pick = pick - rels.len();
        if pick < relvars.len() {
            let (name, arity) = relvars[pick].clone();
            let args: Vec<Term> = (0..arity).map(|_| term(self)).collect();
            return Formula::relvar(name, args);
        }
        let (a, b) = (term(self), term(self));
        if pick == relvars.len() {
            Formula::eq(a, b)
        } else {
            Formula::Less(a, b)
        }
    }
}

/// Decides the game, then evaluates `trials` seeded random sentences on
/// both structures and collects those that separate them.
pub fn equivalence_sampler(
    a: &Structure,
    b: &Structure,
    p: GameParams,
    trials: usize,
    seed: u64,
) -> Result<SamplerReport, GameError> {
    let outcome = game_winner(a, b, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ea, eb) = (Evaluator::new(a), Evaluator::new(b));
    let alpha = Assignment::new();
    let mut distinguishing: Vec<String> = Vec::new();
    for _ in 0..trials {
        let f = random_sentence(&mut rng, a.signature(), p);
        let va = ea.evaluate(&f, &alpha).map_err(|e| GameError::Eval(e.to_string()))?;
        let vb = eb.evaluate(&f, &alpha).map_err(|e| GameError::Eval(e.to_string()))?;
        if va != vb {
            let text = f.to_string();
            if !distinguishing.contains(&text) {
                distinguishing.push(text);
            }
        }
    }
    Ok(SamplerReport {
        winner: outcome.winner,
        distinguishing,
        sampled: trials,
    })
}
