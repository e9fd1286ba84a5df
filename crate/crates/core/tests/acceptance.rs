//! End-to-end acceptance checks, one line of verdict per criterion.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use common::*;
use logq::encode::{concat_hash, dec_structure, enc_structure, j_encode, j_encode_sequence, j_preimage, BitString};
use logq::eval::{evaluate, evaluate_via_bitstrings, query, Assignment};
use logq::formula::{metrics, resolve, Formula, LogBinder, Term};
use logq::game::{
    equivalence_sampler, even_instance, game_winner, pebble_game_winner, verify_fresh_strategy, ExpandedStructure,
    GameParams, Winner,
};
use logq::interp::{apply_interpretation, build_j_reduction, j_reduction_input, transform_formula, JLayout};
use logq::structure::{Relation, Signature, StringStructure, Structure};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pairs_relation(pairs: &[(usize, usize)]) -> Relation {
    Relation::from_tuples(2, pairs.iter().map(|&(a, b)| vec![a, b])).unwrap()
}

fn c1_worked_example() -> Verdict {
    let bits = j_encode_sequence(8, &[(1, 3), (1, 0), (2, 0)]).map_err(|e| e.to_string())?;
    ensure(bits.to_string() == "110000", || format!("got {bits}"))?;
    Ok(format!("J = {bits}"))
}

fn c2_surjectivity() -> Verdict {
    let (n, k) = (8, 1);
    // independent oracle: every 0/1 word of length 0, 2, 4, 6
    let mut expected = BTreeSet::new();
    for len in [0usize, 2, 4, 6] {
        for code in 0u32..1 << len {
            expected.insert((0..len).map(|i| if code >> i & 1 == 1 { '1' } else { '0' }).collect::<String>());
        }
    }
    let tuples: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
    let mut image = BTreeSet::new();
    let mut stack: Vec<(usize, Vec<(usize, usize)>)> = vec![(0, Vec::new())];
    while let Some((start, chosen)) = stack.pop() {
        image.insert(j_encode(n, &pairs_relation(&chosen)).unwrap().to_string());
        if chosen.len() < 3 {
            for (i, &t) in tuples.iter().enumerate().skip(start) {
                let mut next = chosen.clone();
                next.push(t);
                stack.push((i + 1, next));
            }
        }
    }
    ensure(image == expected, || {
        format!("image has {} words, expected {}", image.len(), expected.len())
    })?;
    for w in &expected {
        let word = BitString::parse_bits(w).unwrap();
        let back = j_encode(n, &j_preimage(n, &word, k).map_err(|e| e.to_string())?).unwrap();
        ensure(back.to_string() == *w, || format!("{w} came back as {back}"))?;
    }
    for odd in ["0", "101", "11111"] {
        ensure(j_preimage(n, &BitString::parse_bits(odd).unwrap(), k).is_err(), || {
            format!("odd-length word {odd} was accepted")
        })?;
    }
    Ok(format!("{} words of even length, odd lengths unreachable", image.len()))
}

fn c3_round_trip() -> Verdict {
    let sig = Signature::new([("E", 2)], true).unwrap();
    for code in 0u64..1 << 16 {
        let a = digraph_from_code(4, code, true);
        let back = dec_structure(&enc_structure(&a).unwrap(), &sig).map_err(|e| e.to_string())?;
        ensure(back == a, || format!("digraph {code:#06x} changed"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..200 {
        let sig = Signature::new([("R", rng.gen_range(1..=3)), ("S", rng.gen_range(1..=3))], true).unwrap();
        // encodings need a width of at least one bit
        let n = rng.gen_range(2..=8);
        let a = random_structure(&mut rng, &sig, n);
        let back = dec_structure(&enc_structure(&a).unwrap(), &sig).map_err(|e| e.to_string())?;
        ensure(back == a, || format!("random structure {i} changed"))?;
    }
    Ok("65536 digraphs and 200 random structures".into())
}

fn c4_transitive_closure() -> Verdict {
    let f = logq::formula::parse_formula("ifp[T(u,v) <- E(u,v) | Ez. (T(u,z) & E(z,v))](x,y)").unwrap();
    let f = resolve(&f, &graph_signature());
    let vars = ["x".to_string(), "y".to_string()];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..200 {
        let n = rng.gen_range(1..=8);
        let density = rng.gen_range(0.05..0.4);
        let edges: Vec<(usize, usize)> = random_relation(&mut rng, n, 2, density)
            .into_iter()
            .map(|t| (t[0], t[1]))
            .collect();
        let g = digraph(n, &edges);
        let got: Vec<(usize, usize)> = query(&g, &f, &vars, &Assignment::new())
            .unwrap()
            .iter()
            .map(|t| (t[0], t[1]))
            .collect();
        let want = reachability(n, &edges);
        ensure(got == want, || format!("graph {i}: {got:?} vs {want:?}"))?;
    }
    Ok("200 graphs, all pairs".into())
}

/// `Q x Q y (ifp[T(u,v) <- ψ₁(u,v) | ∃z (T(u,z) ∧ ψ₂(z,v))](x,y) ∘ χ)`.
fn single_ifp_sentence<R: Rng>(rng: &mut R, sig: &Signature) -> Formula {
    let extra = vec!["z".to_string(), "w".to_string()];
    let g = |free: &[&str]| FoGen {
        sig,
        free: free.iter().map(|s| s.to_string()).collect(),
        extra: extra.clone(),
    };
    let psi1 = g(&["u", "v"]).formula(rng, 2);
    let psi2 = g(&["z", "v"]).formula(rng, 1);
    let body = Formula::or(
        psi1,
        Formula::exists(
            "z",
            Formula::and(Formula::relvar("T", [Term::var("u"), Term::var("z")]), psi2),
        ),
    );
    let ifp = Formula::Ifp {
        vars: vec!["u".into(), "v".into()],
        relvar: "T".into(),
        body: Box::new(body),
        args: vec![Term::var("x"), Term::var("y")],
    };
    let chi = g(&["x", "y"]).formula(rng, 2);
    let inner = if rng.gen_bool(0.5) {
        Formula::and(ifp, chi)
    } else {
        Formula::or(ifp, Formula::not(chi))
    };
    let quant = |rng: &mut R, v: &str, f: Formula| {
        if rng.gen_bool(0.5) {
            Formula::exists(v, f)
        } else {
            Formula::forall(v, f)
        }
    };
    let inner = quant(rng, "y", inner);
    quant(rng, "x", inner)
}

fn c5_fundamental_property() -> Verdict {
    let source = Signature::new([("E", 2), ("P", 1)], false).unwrap();
    let target = Signature::new([("F", 2)], false).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut checked, mut with_ifp, mut skipped) = (0, 0, 0);
    while checked < 200 {
        let width = rng.gen_range(1..=2);
        let i = random_interpretation(&mut rng, &source, &target, width);
        let n = rng.gen_range(1..=5);
        let a = random_structure(&mut rng, &source, n);
        let uses_ifp = checked % 2 == 1;
        let phi = if !uses_ifp {
            FoGen {
                sig: &target,
                free: Vec::new(),
                extra: vec!["x".into(), "y".into(), "z".into()],
            }
            .formula(&mut rng, 4)
        } else {
            single_ifp_sentence(&mut rng, &target)
        };
        let ia = match apply_interpretation(&i, &a) {
            Ok(s) => s,
            Err(logq::interp::InterpError::EmptyUniverse) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e.to_string()),
        };
        let back = transform_formula(&phi, &i).map_err(|e| e.to_string())?;
        let lhs = evaluate(&a, &back, &Assignment::new()).map_err(|e| e.to_string())?;
        let rhs = evaluate(&ia, &phi, &Assignment::new()).map_err(|e| e.to_string())?;
        ensure(lhs == rhs, || format!("triple {checked}: {phi} gives {rhs} on I(A) but {back} gives {lhs}"))?;
        checked += 1;
        with_ifp += usize::from(uses_ifp);
    }
    Ok(format!("{checked} triples ({with_ifp} with a fixed point, {skipped} empty universes skipped)"))
}

fn c6_reduction() -> Verdict {
    let grouped = build_j_reduction(1, JLayout::Grouped);
    let literal = build_j_reduction(1, JLayout::AsWritten);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut literal_failure = None;
    let total = 520;
    for i in 0..total {
        let len = 5 + i % 4;
        let u = random_string(&mut rng, len);
        let w = logq::eval::ceil_log(len).unwrap();
        let size = rng.gen_range(0..=w);
        let mut all: Vec<(usize, usize)> = (0..len).flat_map(|a| (0..len).map(move |b| (a, b))).collect();
        all.shuffle(&mut rng);
        let r = pairs_relation(&all[..size]);
        let expected = concat_hash(&[u.symbols(), j_encode(len, &r).unwrap().symbols()]).unwrap();
        let input = j_reduction_input(&u, std::slice::from_ref(&r)).unwrap();
        let out = apply_interpretation(&grouped, &input).map_err(|e| e.to_string())?;
        let got = StringStructure::try_from(&out).map_err(|e| e.to_string())?;
        ensure(got == expected, || {
            format!("u={} R={r}: got {} expected {}", u.render(), got.render(), expected.render())
        })?;
        if literal_failure.is_none() {
            let lit = apply_interpretation(&literal, &input).map_err(|e| e.to_string())?;
            let lit = StringStructure::try_from(&lit).map(|s| s.render()).unwrap_or_else(|e| e.to_string());
            if lit != expected.render() {
                literal_failure = Some(format!("u={} R={r}: {lit} vs {}", u.render(), expected.render()));
            }
        }
    }
    let note = literal_failure.map_or("literal layout agreed".to_string(), |f| format!("literal layout first fails at {f}"));
    Ok(format!("{total} pairs; {note}"))
}

/// `∃^{log} X₁:2 … ∃^{log} X_m:2 . matrix` with a random first-order matrix.
fn prenex_sentence<R: Rng>(rng: &mut R, m: usize) -> Formula {
    let string_sig = Signature::string();
    let names: Vec<String> = (1..=m).map(|i| format!("X{i}")).collect();
    let with_vars = string_sig
        .extended(names.iter().map(|n| (n.clone(), 2)))
        .unwrap();
    let matrix = FoGen {
        sig: &with_vars,
        free: Vec::new(),
        extra: vec!["x".into(), "y".into(), "z".into()],
    }
    .formula(rng, 4);
    let mut f = matrix;
    for name in names.iter().rev() {
        f = Formula::ExistsLog {
            k: 1,
            var: name.clone(),
            arity: 2,
            body: Box::new(f),
        };
    }
    resolve(&f, &string_sig)
}

fn c7_two_paths() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let total = 120;
    let mut truths = 0;
    for i in 0..total {
        // two relation variables only on short strings keeps the direct
        // enumeration small
        let (m, len) = if i % 3 == 0 {
            (2, rng.gen_range(3..=4))
        } else {
            (1, rng.gen_range(3..=8))
        };
        let f = prenex_sentence(&mut rng, m);
        let mm = metrics(&f);
        ensure(mm.prenex_existential && mm.mva == 2 && mm.height == 1, || format!("{f} left the fragment"))?;
        let (binders, _): (Vec<LogBinder>, _) = f.existential_log_prefix();
        ensure(binders.len() == m, || format!("{f} has the wrong prefix"))?;
        let u = random_string(&mut rng, len);
        let direct = evaluate(u.as_structure(), &f, &Assignment::new()).map_err(|e| e.to_string())?;
        let via = evaluate_via_bitstrings(&u, &f).map_err(|e| e.to_string())?;
        ensure(direct == via, || format!("{f} on {}: {direct} vs {via}", u.render()))?;
        truths += usize::from(direct);
    }
    Ok(format!("{total} sentences, {truths} true"))
}

fn c8_even_instance() -> Verdict {
    let p = GameParams::new(1, 1, 1, 1).unwrap();
    let (na, nb) = even_instance(p);
    ensure((na, nb) == (10, 11), || format!("instance ({na},{nb})"))?;
    let out = game_winner(&edgeless(na), &edgeless(nb), p).map_err(|e| e.to_string())?;
    ensure(out.winner == Winner::Duplicator, || format!("winner {}", out.winner))?;
    let ok = verify_fresh_strategy(&edgeless(na), &edgeless(nb), p).map_err(|e| e.to_string())?;
    ensure(ok, || "fresh strategy failed".into())?;
    Ok(format!("(10,11), Duplicator after {} nodes, strategy verified", out.nodes))
}

fn random_pair<R: Rng>(rng: &mut R, case: usize) -> (Structure, Structure) {
    let sig = if case.is_multiple_of(2) {
        graph_signature()
    } else {
        Signature::new([("P", 1)], false).unwrap()
    };
    let n = rng.gen_range(1..=5);
    let a = random_structure(rng, &sig, n);
    match case % 5 {
        // an isomorphic copy
        0 | 1 => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(rng);
            let b = a.permuted(&perm);
            (a, b)
        }
        // one tuple toggled
        2 => {
            let (name, arity) = sig.relations()[0].clone();
            let t: Vec<usize> = (0..arity).map(|_| rng.gen_range(0..n)).collect();
            let mut tuples: Vec<Vec<usize>> = a.relation(&name).unwrap().iter().cloned().collect();
            match tuples.iter().position(|x| *x == t) {
                Some(i) => {
                    tuples.remove(i);
                }
                None => tuples.push(t),
            }
            let b = Structure::new(sig.clone(), n, [(name, tuples)]).unwrap();
            (a, b)
        }
        _ => {
            let m = rng.gen_range(1..=5);
            let b = random_structure(rng, &sig, m);
            (a, b)
        }
    }
}

fn c9_sampler_consistency() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut tally = [0usize; 2];
    let mut separated = 0;
    for case in 0..50 {
        let (a, b) = random_pair(&mut rng, case);
        let p = GameParams::new(rng.gen_range(0..=1), rng.gen_range(1..=2), 1, rng.gen_range(1..=2)).unwrap();
        let report = equivalence_sampler(&a, &b, p, 500, case as u64).map_err(|e| format!("pair {case}: {e}"))?;
        let found = !report.distinguishing.is_empty();
        ensure(!(report.winner == Winner::Duplicator && found), || {
            format!("pair {case}: Duplicator but {} separates", report.distinguishing[0])
        })?;
        ensure(!found || report.winner == Winner::Spoiler, || format!("pair {case}: separated without a Spoiler win"))?;
        tally[usize::from(report.winner == Winner::Duplicator)] += 1;
        separated += usize::from(found);
    }
    Ok(format!(
        "50 pairs: {} Spoiler ({separated} separated by a sample), {} Duplicator",
        tally[0], tally[1]
    ))
}

fn c10_pebble_sanity() -> Verdict {
    let mut games = 0;
    for n in 1..=4usize {
        for code in 0u64..1 << (n * n) {
            let a = ExpandedStructure::bare(digraph_from_code(n, code, false));
            for s in 1..=3 {
                let w = pebble_game_winner(&a, &a, s).map_err(|e| e.to_string())?.winner;
                ensure(w == Winner::Duplicator, || format!("n={n} code={code} s={s}: {w}"))?;
                games += 1;
            }
        }
    }
    let (e2, e3) = (ExpandedStructure::bare(edgeless(2)), ExpandedStructure::bare(edgeless(3)));
    let edge = ExpandedStructure::bare(digraph(2, &[(0, 1)]));
    let checks = [
        (pebble_game_winner(&e2, &e3, 2), Winner::Duplicator, "PG2(E2,E3)"),
        (pebble_game_winner(&e2, &e3, 3), Winner::Spoiler, "PG3(E2,E3)"),
        (pebble_game_winner(&edge, &e2, 2), Winner::Spoiler, "PG2(edge,E2)"),
    ];
    for (got, want, label) in checks {
        let got = got.map_err(|e| e.to_string())?.winner;
        ensure(got == want, || format!("{label}: {got}"))?;
    }
    Ok(format!("{games} self-games and 3 fixed verdicts"))
}

fn c11_golden() -> Verdict {
    let cases = golden_cases();
    for case in &cases {
        let first = run_golden(case);
        let second = run_golden(case);
        ensure(first == second, || format!("{} differs between runs", case.name))?;
        let recorded = std::fs::read_to_string(golden_dir().join(format!("{}.out", case.name)))
            .map_err(|e| format!("{}: {e}", case.name))?;
        ensure(first == recorded, || format!("{} differs from its recording", case.name))?;
    }
    Ok(format!("{} transcripts", cases.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 11] = [
        ("worked J example", c1_worked_example),
        ("J surjectivity", c2_surjectivity),
        ("encoding round trip", c3_round_trip),
        ("fixed point vs reachability", c4_transitive_closure),
        ("interpretation fundamental property", c5_fundamental_property),
        ("J reduction equation", c6_reduction),
        ("two evaluation paths", c7_two_paths),
        ("edgeless instance", c8_even_instance),
        ("sampler consistency", c9_sampler_consistency),
        ("pebble sanity", c10_pebble_sanity),
        ("CLI transcripts", c11_golden),
    ];
    let results: Vec<(Verdict, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(_, check)| {
                scope.spawn(move || {
                    let start = Instant::now();
                    let verdict = std::panic::catch_unwind(check)
                        .unwrap_or_else(|_| Err("panicked".to_string()));
                    (verdict, start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = Vec::new();
    for (i, ((name, _), (verdict, secs))) in criteria.iter().zip(&results).enumerate() {
        match verdict {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.1}s]", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
