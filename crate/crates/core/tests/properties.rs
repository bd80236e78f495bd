use nclab::decision::transposed::decide_transposed;
use nclab::instances::{full_scenario, with_identity_block};
use nclab::quantum::cross_check_with_model;
use nclab::random::*;
use nclab::rational::{int, ratio};
use nclab::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn no_shortcut() -> DecisionConfig {
    DecisionConfig {
        faithfulness_shortcut: false,
        ..DecisionConfig::default()
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn prob_is_bilinear(seed in any::<u64>(), a in 0i64..=6) {
        let mut r = rng(seed);
        let t = small_table(&mut r);
        let preps = t.preparations();
        let p = &preps[r.random_range(0..preps.len())];
        let q = &preps[r.random_range(0..preps.len())];
        let effects = t.atomic_effects();
        let e = effects[r.random_range(0..effects.len())].clone();
        let f = effects[r.random_range(0..effects.len())].clone();
        let w = ratio(a, 6);
        let one = int(1);
        let at = |e: &EffectRef, p: &str| prob(&t, &EffectDensity::point(e.clone()), &PrepDensity::point(p)).unwrap();

        let mixed = if p == q {
            PrepDensity::point(p)
        } else {
            PrepDensity::from_pairs(&[(p, w.clone()), (q, &one - &w)])
        };
        let lhs = prob(&t, &EffectDensity::point(e.clone()), &mixed).unwrap();
        prop_assert_eq!(lhs, &w * at(&e, p) + (&one - &w) * at(&e, q));

        let mixed = if e == f {
            EffectDensity::point(e.clone())
        } else {
            EffectDensity::from_pairs(vec![(e.clone(), w.clone()), (f.clone(), &one - &w)])
        };
        let lhs = prob(&t, &mixed, &PrepDensity::point(p)).unwrap();
        prop_assert_eq!(lhs, &w * at(&e, p) + (&one - &w) * at(&f, p));
    }

    #[test]
    fn preorder_is_reflexive_transitive_and_follows_refinement(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = small_table(&mut r);
        let s = random_scenario(&mut r, &t, false);
        let a = random_reference(&mut r, &t);
        let b = random_refinement(&mut r, &t, &a);
        let c = random_refinement(&mut r, &t, &b);
        prop_assert!(preorder_leq(&t, &s, &a, &a).unwrap());
        prop_assert!(preorder_leq(&t, &s, &a, &b).unwrap());
        prop_assert!(preorder_leq(&t, &s, &b, &c).unwrap());
        prop_assert!(preorder_leq(&t, &s, &a, &c).unwrap());
        // the scenario is always below the full table
        prop_assert!(preorder_leq(&t, &s, &s.as_reference(), &full_scenario(&t).as_reference()).unwrap());
    }

    #[test]
    fn unfaithful_references_are_never_noncontextual(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = small_table(&mut r);
        let s = random_scenario(&mut r, &t, false);
        let reference = random_reference(&mut r, &t);
        let faithful = is_faithful(&t, &s, &reference).unwrap().faithful;
        let d = decide_rnc_with(&t, &s, &reference, &no_shortcut()).unwrap();
        prop_assert!(faithful || !d.verdict.is_noncontextual());
    }

    #[test]
    fn refining_a_noncontextual_reference_keeps_it_noncontextual(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = small_table(&mut r);
        let s = random_scenario(&mut r, &t, false);
        let a = random_refinement(&mut r, &t, &s.as_reference());
        let b = random_refinement(&mut r, &t, &a);
        prop_assert!(preorder_leq(&t, &s, &a, &b).unwrap());
        let va = decide_rnc(&t, &s, &a).unwrap().verdict.is_noncontextual();
        let vb = decide_rnc(&t, &s, &b).unwrap().verdict.is_noncontextual();
        prop_assert!(!va || vb);
    }

    #[test]
    fn identity_block_gives_one_ontic_state_per_preparation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let base = small_table(&mut r);
        let t = with_identity_block(&base, "D");
        let s = full_scenario(&base);
        let mut reference = s.as_reference();
        reference.effects.extend(t.measurement_effects("D").unwrap());
        let d = decide_rnc(&t, &s, &reference).unwrap();
        let cert = d.verdict.certificate().expect("noncontextual");
        prop_assert!(verify_model(cert, &t, &s, &reference).is_empty());
        let mut support = std::collections::BTreeSet::new();
        for dist in cert.mu.values() {
            let live: Vec<&String> = dist.iter().filter(|(_, w)| **w > int(0)).map(|(l, _)| l).collect();
            prop_assert_eq!(live.len(), 1);
            support.insert(live[0].clone());
        }
        prop_assert_eq!(support.len(), t.preparations().len());
    }

    #[test]
    fn transposed_route_agrees(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = small_table(&mut r);
        let s = random_scenario(&mut r, &t, false);
        let reference = if r.random_bool(0.5) { s.as_reference() } else { random_reference(&mut r, &t) };
        let main = decide_rnc_with(&t, &s, &reference, &no_shortcut()).unwrap();
        let other = decide_transposed(&t, &s, &reference, &no_shortcut()).unwrap();
        prop_assert_eq!(main.verdict.is_noncontextual(), other.noncontextual);
    }

    #[test]
    fn projection_matches_indistinguishability(seed in any::<u64>(), related in any::<bool>(), prep_side in any::<bool>()) {
        let mut r = rng(seed);
        let t = small_table(&mut r);
        let s = random_scenario(&mut r, &t, false);
        let qm = diagonal_model(&t, &s).unwrap();
        let side = if prep_side { Side::Preparation } else { Side::Effect };
        let (d1, d2) = random_density_pair(&mut r, &t, &s, side, related);
        let projected = projection_indist_check(&qm, &t, &s, &d1, &d2).unwrap();
        let operational = are_indistinguishable(&t, &d1, &d2, &s.as_reference()).unwrap();
        prop_assert_eq!(projected, operational);
        if related {
            prop_assert!(operational);
        }
    }

    #[test]
    fn quantum_fragment_agrees_with_operational_verdict(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = small_table(&mut r);
        let s = random_scenario(&mut r, &t, true);
        let qm = diagonal_model(&t, &s).unwrap();
        let check = cross_check_with_model(&qm, &t, &s, &DecisionConfig::default()).unwrap();
        prop_assert!(check.agree);
    }
}
