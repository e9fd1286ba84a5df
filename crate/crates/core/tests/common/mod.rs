//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;
use std::path::PathBuf;

use logq::formula::{Formula, Term};
use logq::interp::{Defining, Interpretation, TargetOrder};
use logq::structure::{Relation, Signature, StringStructure, Structure, Symbol};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn graph_signature() -> Signature {
    Signature::new([("E", 2)], false).unwrap()
}

pub fn digraph(n: usize, edges: &[(usize, usize)]) -> Structure {
    let tuples = edges.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>();
    Structure::new(graph_signature(), n, [("E", tuples)]).unwrap()
}

pub fn edgeless(n: usize) -> Structure {
    digraph(n, &[])
}

/// Digraph number `code` on `n` vertices: bit `i·n + j` is the edge `(i, j)`.
pub fn digraph_from_code(n: usize, code: u64, ordered: bool) -> Structure {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if code >> (i * n + j) & 1 == 1 {
                edges.push(vec![i, j]);
            }
        }
    }
    Structure::new(Signature::new([("E", 2)], ordered).unwrap(), n, [("E", edges)]).unwrap()
}

pub fn random_relation<R: Rng>(rng: &mut R, n: usize, arity: usize, density: f64) -> Vec<Vec<usize>> {
    let total = n.pow(arity as u32);
    (0..total)
        .filter(|_| rng.gen_bool(density))
        .map(|mut code| {
            let mut t = vec![0; arity];
            for e in t.iter_mut().rev() {
                *e = code % n;
                code /= n;
            }
            t
        })
        .collect()
}

pub fn random_structure<R: Rng>(rng: &mut R, sig: &Signature, n: usize) -> Structure {
    let density = rng.gen_range(0.1..0.6);
    let rels: Vec<(String, Vec<Vec<usize>>)> = sig
        .relations()
        .iter()
        .map(|(name, arity)| (name.clone(), random_relation(rng, n, *arity, density)))
        .collect();
    Structure::new(sig.clone(), n, rels).unwrap()
}

pub fn random_bits<R: Rng>(rng: &mut R, len: usize) -> String {
    (0..len).map(|_| if rng.gen_bool(0.5) { '1' } else { '0' }).collect()
}

pub fn random_string<R: Rng>(rng: &mut R, len: usize) -> StringStructure {
    StringStructure::from_text(&random_bits(rng, len)).unwrap()
}

/// Pairs `(s, t)` joined by a path of length at least one.
pub fn reachability(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for s in 0..n {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for &(a, b) in edges {
            if a == s && !seen[b] {
                seen[b] = true;
                queue.push_back(b);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &(a, b) in edges {
                if a == v && !seen[b] {
                    seen[b] = true;
                    queue.push_back(b);
                }
            }
        }
        out.extend((0..n).filter(|&t| seen[t]).map(|t| (s, t)));
    }
    out
}

/// Random first-order formulas whose free variables lie in `free`, with
/// bound variables drawn from `extra`.
pub struct FoGen<'a> {
    pub sig: &'a Signature,
    pub free: Vec<String>,
    pub extra: Vec<String>,
}

impl FoGen<'_> {
    pub fn formula<R: Rng>(&self, rng: &mut R, depth: usize) -> Formula {
        let mut scope = self.free.clone();
        self.go(rng, depth, &mut scope)
    }

    fn go<R: Rng>(&self, rng: &mut R, depth: usize, scope: &mut Vec<String>) -> Formula {
        if depth == 0 || rng.gen_bool(0.25) {
            return self.atom(rng, scope);
        }
        match rng.gen_range(0..6) {
            0 => Formula::not(self.go(rng, depth - 1, scope)),
            1 => Formula::and(self.go(rng, depth - 1, scope), self.go(rng, depth - 1, scope)),
            2 => Formula::or(self.go(rng, depth - 1, scope), self.go(rng, depth - 1, scope)),
            3 => Formula::implies(self.go(rng, depth - 1, scope), self.go(rng, depth - 1, scope)),
            q => {
                let v = self.extra.choose(rng).unwrap().clone();
                scope.push(v.clone());
                let body = self.go(rng, depth - 1, scope);
                scope.pop();
                if q == 4 {
                    Formula::exists(v, body)
                } else {
                    Formula::forall(v, body)
                }
            }
        }
    }

    fn atom<R: Rng>(&self, rng: &mut R, scope: &[String]) -> Formula {
        if scope.is_empty() {
            let v = self.extra[0].clone();
            return Formula::exists(v.clone(), self.atom(rng, &[v]));
        }
        let rels = self.sig.relations();
        let pick = rng.gen_range(0..rels.len() + 1);
        let mut term = || Term::var(scope.choose(rng).unwrap().clone());
        if pick == rels.len() {
            let (a, b) = (term(), term());
            return Formula::eq(a, b);
        }
        let (name, arity) = &rels[pick];
        let args: Vec<Term> = (0..*arity).map(|_| term()).collect();
        Formula::rel(name.clone(), args)
    }
}

/// A random interpretation of `target` (unordered) in `source`.
pub fn random_interpretation<R: Rng>(
    rng: &mut R,
    source: &Signature,
    target: &Signature,
    width: usize,
) -> Interpretation {
    let vars = |prefix: &str, count: usize| (1..=count).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
    let extra = vec!["q".to_string(), "p".to_string()];
    let uni_vars = vars("a", width);
    let uni = FoGen {
        sig: source,
        free: uni_vars.clone(),
        extra: extra.clone(),
    };
    // a universe formula that is mostly true keeps the targets nontrivial
    let uni_formula = Formula::or(uni.formula(rng, 2), uni.formula(rng, 1));
    let rels = target
        .relations()
        .iter()
        .map(|(name, arity)| {
            let vs = vars("b", arity * width);
            let g = FoGen {
                sig: source,
                free: vs.clone(),
                extra: extra.clone(),
            };
            (
                name.clone(),
                Defining {
                    vars: vs,
                    formula: g.formula(rng, 3),
                },
            )
        })
        .collect();
    let order = target.is_ordered().then_some(TargetOrder::Lexicographic);
    Interpretation::new(
        width,
        source.clone(),
        target.clone(),
        Defining {
            vars: uni_vars,
            formula: uni_formula,
        },
        rels,
        order,
    )
    .unwrap()
}

pub fn bits_of(s: &str) -> Vec<Symbol> {
    s.chars().map(|c| Symbol::from_char(c).unwrap()).collect()
}

pub fn relation(arity: usize, tuples: &[&[usize]]) -> Relation {
    Relation::from_tuples(arity, tuples.iter().map(|t| t.to_vec())).unwrap()
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// One recorded invocation: its name and its arguments, with `{dir}`
/// standing for the golden directory.
#[derive(serde::Deserialize)]
pub struct GoldenCase {
    pub name: String,
    pub args: Vec<String>,
}

pub fn golden_cases() -> Vec<GoldenCase> {
    let text = std::fs::read_to_string(golden_dir().join("cases.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Exit code and output as stored in a `.out` file.
pub fn run_golden(case: &GoldenCase) -> String {
    let dir = golden_dir().display().to_string();
    let mut argv = vec!["logq".to_string()];
    argv.extend(case.args.iter().map(|a| a.replace("{dir}", &dir)));
    let (code, out) = logq::cli::run_command(argv);
    format!("exit={code}\n{out}")
}
