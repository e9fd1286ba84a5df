mod common;

use common::*;
use logq::encode::{dec_structure, enc_structure, j_encode, j_preimage, BitString};
use logq::eval::{
    all_tuples, ceil_log, count_bounded_relations, evaluate, evaluate_via_bitstrings, gc_check, gc_search_space,
    log_pow, query, Assignment, BoundedRelations,
};
use logq::formula::{metrics, parse_formula, resolve, Formula};
use logq::game::{
    game_winner, game_winner_with, pebble_game_winner, random_sentence, ExpandedStructure, GameOptions, GameParams,
    Winner,
};
use logq::interp::{apply_interpretation, transform_formula, Interpretation, InterpError};
use logq::structure::{isomorphic, Signature, StringStructure, Structure};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn two_relations() -> Signature {
    Signature::new([("E", 2), ("P", 1)], false).unwrap()
}

fn params(m: usize, r: usize, k: u32, s: usize) -> GameParams {
    GameParams::new(m, r, k, s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printing_then_parsing_is_the_identity(seed in any::<u64>(), m in 0usize..3, s in 1usize..4) {
        let sig = Signature::new([("E", 2), ("P", 1)], true).unwrap();
        let f = random_sentence(&mut rng(seed), &sig, params(m, 2, 2, s));
        let back = resolve(&parse_formula(&f.to_string()).unwrap(), &sig);
        prop_assert_eq!(back, f);
    }

    #[test]
    fn sampled_sentences_respect_their_bounds(seed in any::<u64>(), m in 0usize..3, r in 1usize..3, k in 1u32..3, s in 1usize..4) {
        let f = random_sentence(&mut rng(seed), &two_relations(), params(m, r, k, s));
        let mm = metrics(&f);
        prop_assert!(mm.lqr <= m && mm.mva <= r && mm.height <= k && mm.num_element_vars <= s);
    }

    #[test]
    fn quantifiers_are_dual(seed in any::<u64>(), n in 1usize..5) {
        let mut g = rng(seed);
        let sig = two_relations();
        let a = random_structure(&mut g, &sig, n);
        let f = random_sentence(&mut g, &sig, params(1, 1, 1, 2));
        let alpha = Assignment::new();
        let v = evaluate(&a, &f, &alpha).unwrap();
        prop_assert_eq!(evaluate(&a, &Formula::not(f.clone()), &alpha).unwrap(), !v);
        let ex = Formula::exists("x", Formula::or(f.clone(), Formula::rel("P", [logq::formula::Term::var("x")])));
        let fa = Formula::not(Formula::forall("x", Formula::not(match &ex {
            Formula::Exists(_, body) => (**body).clone(),
            _ => unreachable!(),
        })));
        prop_assert_eq!(evaluate(&a, &ex, &alpha).unwrap(), evaluate(&a, &fa, &alpha).unwrap());
        let elog = Formula::ExistsLog { k: 1, var: "X".into(), arity: 1, body: Box::new(f.clone()) };
        let alog = Formula::not(Formula::ForallLog { k: 1, var: "X".into(), arity: 1, body: Box::new(Formula::not(f)) });
        prop_assert_eq!(evaluate(&a, &elog, &alpha).unwrap(), evaluate(&a, &alog, &alpha).unwrap());
    }

    #[test]
    fn truth_is_invariant_under_isomorphism(seed in any::<u64>(), n in 1usize..6) {
        let mut g = rng(seed);
        let sig = two_relations();
        let a = random_structure(&mut g, &sig, n);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut g);
        let b = a.permuted(&perm);
        prop_assert!(isomorphic(&a, &b).unwrap());
        for _ in 0..4 {
            let f = random_sentence(&mut g, &sig, params(1, 2, 1, 3));
            prop_assert_eq!(
                evaluate(&a, &f, &Assignment::new()).unwrap(),
                evaluate(&b, &f, &Assignment::new()).unwrap()
            );
        }
    }

    #[test]
    fn closure_fixed_point_is_reachability(n in 1usize..8, edges in proptest::collection::vec((0usize..8, 0usize..8), 0..20)) {
        let edges: Vec<(usize, usize)> = edges.into_iter().filter(|&(a, b)| a < n && b < n).collect();
        let g = digraph(n, &edges);
        let f = resolve(
            &parse_formula("ifp[T(u,v) <- E(u,v) | Ez. (T(u,z) & E(z,v))](x,y)").unwrap(),
            &graph_signature(),
        );
        let got: Vec<(usize, usize)> = query(&g, &f, &["x".into(), "y".into()], &Assignment::new())
            .unwrap()
            .iter()
            .map(|t| (t[0], t[1]))
            .collect();
        prop_assert_eq!(got, reachability(n, &edges));
    }

    #[test]
    fn pruned_query_agrees_with_filtering(seed in any::<u64>(), n in 1usize..5) {
        let mut g = rng(seed);
        let sig = two_relations();
        let a = random_structure(&mut g, &sig, n);
        let vars = vec!["a1".to_string(), "a2".to_string()];
        let f = FoGen { sig: &sig, free: vars.clone(), extra: vec!["q".into()] }.formula(&mut g, 3);
        let got = query(&a, &f, &vars, &Assignment::new()).unwrap();
        let want: Vec<Vec<usize>> = all_tuples(n, 2)
            .filter(|t| {
                let alpha = Assignment::new().with_element("a1", t[0]).with_element("a2", t[1]);
                evaluate(&a, &f, &alpha).unwrap()
            })
            .collect();
        prop_assert_eq!(got.iter().cloned().collect::<Vec<_>>(), want);
    }

    #[test]
    fn encoding_round_trips_with_the_predicted_length(seed in any::<u64>(), n in 2usize..9, r1 in 1usize..4, r2 in 1usize..4) {
        let sig = Signature::new([("R", r1), ("S", r2)], true).unwrap();
        let a = random_structure(&mut rng(seed), &sig, n);
        let bits = enc_structure(&a).unwrap();
        prop_assert_eq!(&dec_structure(&bits, &sig).unwrap(), &a);
        let w = ceil_log(n).unwrap();
        let rels: usize = a.relation_list().iter().map(|r| 2 + r.len() * (2 + r.arity() * (w + 2))).sum();
        prop_assert_eq!(bits.len(), 2 + (2 + n * (w + 2)) + rels);
    }

    #[test]
    fn j_words_round_trip(n in 3usize..17, chunks in proptest::collection::vec(any::<u8>(), 0..4)) {
        let w = ceil_log(n).unwrap();
        let chunk = w - 1;
        let word: String = chunks
            .iter()
            .flat_map(|c| (0..chunk).map(move |i| if c >> i & 1 == 1 { '1' } else { '0' }))
            .collect();
        let bits = BitString::parse_bits(&word).unwrap();
        let k = 2;
        match j_preimage(n, &bits, k) {
            Ok(rel) => {
                prop_assert!(rel.len() <= log_pow(n, k).unwrap());
                prop_assert_eq!(j_encode(n, &rel).unwrap().to_string(), word);
            }
            Err(e) => prop_assert!(chunks.len() > log_pow(n, k).unwrap(), "{e}"),
        }
    }

    #[test]
    fn j_length_counts_tuples(n in 3usize..12, pairs in proptest::collection::vec((0usize..12, 0usize..12), 0..6)) {
        let pairs: Vec<Vec<usize>> = pairs.into_iter().filter(|&(a, b)| a < n && b < n).map(|(a, b)| vec![a, b]).collect();
        let rel = logq::structure::Relation::from_tuples(2, pairs).unwrap();
        let w = ceil_log(n).unwrap();
        prop_assert_eq!(j_encode(n, &rel).unwrap().len(), rel.len() * (w - 1));
    }

    #[test]
    fn bounded_relations_are_listed_once(n in 1usize..4, arity in 1usize..3, bound in 0usize..4) {
        let listed: Vec<_> = BoundedRelations::new(n, arity, bound).collect();
        prop_assert_eq!(listed.len() as u128, count_bounded_relations(n, arity, bound));
        let distinct: std::collections::BTreeSet<Vec<Vec<usize>>> =
            listed.iter().map(|r| r.iter().cloned().collect()).collect();
        prop_assert_eq!(distinct.len(), listed.len());
        prop_assert!(listed.iter().all(|r| r.len() <= bound && r.arity() == arity));
    }

    #[test]
    fn interpretations_commute_with_truth(seed in any::<u64>(), width in 1usize..3, n in 1usize..5) {
        let mut g = rng(seed);
        let source = two_relations();
        let target = Signature::new([("F", 2)], false).unwrap();
        let i = random_interpretation(&mut g, &source, &target, width);
        prop_assert_eq!(&Interpretation::from_json(&i.to_json()).unwrap(), &i);
        let a = random_structure(&mut g, &source, n);
        let phi = FoGen { sig: &target, free: Vec::new(), extra: vec!["x".into(), "y".into()] }.formula(&mut g, 3);
        match apply_interpretation(&i, &a) {
            Ok(ia) => {
                let back = transform_formula(&phi, &i).unwrap();
                prop_assert_eq!(
                    evaluate(&a, &back, &Assignment::new()).unwrap(),
                    evaluate(&ia, &phi, &Assignment::new()).unwrap()
                );
            }
            Err(InterpError::EmptyUniverse) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn structures_survive_json(seed in any::<u64>(), n in 1usize..6, ordered in any::<bool>()) {
        let sig = two_relations().with_order(ordered);
        let a = random_structure(&mut rng(seed), &sig, n);
        prop_assert_eq!(Structure::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn guessing_bits_agrees_with_direct_evaluation(seed in any::<u64>(), len in 3usize..6) {
        let mut g = rng(seed);
        let u = random_string(&mut g, len);
        let string = Signature::string();
        let with_x = string.extended([("X1", 2)]).unwrap();
        let matrix = FoGen { sig: &with_x, free: Vec::new(), extra: vec!["x".into(), "y".into()] }.formula(&mut g, 3);
        let f = resolve(
            &Formula::ExistsLog { k: 1, var: "X1".into(), arity: 2, body: Box::new(matrix) },
            &string,
        );
        prop_assert_eq!(
            evaluate(u.as_structure(), &f, &Assignment::new()).unwrap(),
            evaluate_via_bitstrings(&u, &f).unwrap()
        );
    }

    #[test]
    fn guess_then_check_finds_the_first_witness(bits in "[01]{2,5}", target in "[01]{0,3}") {
        let u = StringStructure::from_text(&bits).unwrap();
        let out = gc_check(&u, 1, 1, |joined| joined.render().ends_with(&format!("#{target}")));
        let bound = log_pow(bits.len(), 1).unwrap();
        prop_assert!(out.candidates_tried <= gc_search_space(bits.len(), 1, 1));
        prop_assert_eq!(out.accepted, target.len() <= bound);
        if out.accepted {
            prop_assert_eq!(out.witness.as_deref(), Some(target.as_str()));
            // shorter words come first, then lexicographic order
            let rank = (1u128 << target.len()) - 1 + u128::from_str_radix(&format!("0{target}"), 2).unwrap();
            prop_assert_eq!(out.candidates_tried, rank + 1);
        }
    }

    #[test]
    fn pebble_verdicts_are_symmetric_and_monotone(a_code in 0u64..512, b_code in 0u64..512, s in 1usize..3) {
        let a = ExpandedStructure::bare(digraph_from_code(3, a_code, false));
        let b = ExpandedStructure::bare(digraph_from_code(3, b_code, false));
        let ab = pebble_game_winner(&a, &b, s).unwrap().winner;
        prop_assert_eq!(ab, pebble_game_winner(&b, &a, s).unwrap().winner);
        if ab == Winner::Spoiler {
            prop_assert_eq!(pebble_game_winner(&a, &b, s + 1).unwrap().winner, Winner::Spoiler);
        }
        if isomorphic(a.base(), b.base()).unwrap() {
            prop_assert_eq!(ab, Winner::Duplicator);
        }
        // three pebbles on three elements decide isomorphism
        prop_assert_eq!(
            pebble_game_winner(&a, &b, 3).unwrap().winner == Winner::Duplicator,
            isomorphic(a.base(), b.base()).unwrap()
        );
    }

    #[test]
    fn relation_moves_only_help_the_spoiler(na in 1usize..4, nb in 1usize..4, a_code in 0u64..8, b_code in 0u64..8, s in 1usize..3) {
        let sig = Signature::new([("P", 1)], false).unwrap();
        let unary = |n: usize, code: u64| {
            let tuples: Vec<Vec<usize>> = (0..n).filter(|i| code >> i & 1 == 1).map(|i| vec![i]).collect();
            Structure::new(sig.clone(), n, [("P", tuples)]).unwrap()
        };
        let (a, b) = (unary(na, a_code), unary(nb, b_code));
        let g0 = game_winner(&a, &b, params(0, 1, 1, s)).unwrap().winner;
        let g1 = game_winner(&a, &b, params(1, 1, 1, s)).unwrap().winner;
        let pg = pebble_game_winner(&ExpandedStructure::bare(a.clone()), &ExpandedStructure::bare(b.clone()), s)
            .unwrap()
            .winner;
        prop_assert_eq!(g0, pg);
        if g0 == Winner::Spoiler {
            prop_assert_eq!(g1, Winner::Spoiler);
        }
        let early = GameOptions { stop_early: true, ..GameOptions::default() };
        prop_assert_eq!(game_winner_with(&a, &b, params(1, 1, 1, s), early).unwrap().winner, g1);
    }

    #[test]
    fn duplicator_verdicts_survive_sampling(seed in any::<u64>(), n in 1usize..4) {
        let mut g = rng(seed);
        let sig = graph_signature();
        let a = random_structure(&mut g, &sig, n);
        let b = random_structure(&mut g, &sig, n);
        let p = params(0, 1, 1, 2);
        let report = logq::game::equivalence_sampler(&a, &b, p, 100, seed).unwrap();
        if report.winner == Winner::Duplicator {
            prop_assert!(report.distinguishing.is_empty(), "{:?}", report.distinguishing);
        }
    }
}
