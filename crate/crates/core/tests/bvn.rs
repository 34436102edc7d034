mod common;

use common::*;
use lottery_core::bvn::{decompose_md, decompose_md_traced, decompose_robust, md_upper_bound};
use lottery_core::datagen::{generate, GenParams};
use lottery_core::mechanisms::probabilistic_serial;
use lottery_core::{
    ceil_to_u64, floor_to_u64, is_pareto_efficient, rat, ConstraintStructure, Decomposition, Instance,
    Matching, ProbabilisticAssignment, Rat,
};
use proptest::prelude::*;

fn check_md(inst: &Instance, x: &ProbabilisticAssignment, d: &Decomposition) {
    assert_eq!(&d.recompose(), x, "recomposition must be exact");
    let lo = floor_to_u64(&x.mu()) as usize;
    let hi = ceil_to_u64(&x.mu()) as usize;
    for m in d.matchings() {
        let c = m.cardinality();
        assert!(c == lo || c == hi, "cardinality {c} outside [{lo}, {hi}]");
        assert!(m.is_feasible(inst).unwrap());
    }
    assert!(d.len() <= ConstraintStructure::for_instance(inst).len());
}

#[test]
fn three_object_rsd_decomposes_into_cardinality_three() {
    let inst = three_object_instance();
    let x = three_object_rsd();
    let d = decompose_md(&inst, &x).unwrap();
    check_md(&inst, &x, &d);
    assert!(d.matchings().all(|m| m.cardinality() == 3));
    assert_eq!(md_upper_bound(&x), 3);
}

#[test]
fn two_object_assignment_decomposes_into_cardinality_three() {
    let inst = two_object_instance();
    let x = two_object_assignment();
    let d = decompose_md(&inst, &x).unwrap();
    check_md(&inst, &x, &d);
    assert!(d.matchings().all(|m| m.cardinality() == 3));
}

#[test]
fn every_round_makes_progress() {
    let (_, rounds) = decompose_md_traced(&three_object_instance(), &three_object_rsd()).unwrap();
    for w in rounds.windows(2) {
        assert!(w[1].tau > w[0].tau);
    }
    assert!(rounds.iter().all(|r| r.lambda > rat(0, 1)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn random_lotteries_decompose_exactly(inst in small_instance(5, 4), seed in any::<u64>()) {
        let x = random_assignment(&inst, seed);
        let d = decompose_md(&inst, &x).unwrap();
        check_md(&inst, &x, &d);
        let total: Rat = d.terms().iter().map(|(w, _)| w.clone()).sum();
        prop_assert_eq!(total, rat(1, 1));
    }
}

#[test]
fn robust_decomposition_of_ps_is_efficient() {
    for seed in 0..30 {
        let n_agents = 12 + (seed as usize % 19);
        let inst = generate(&GenParams {
            n_agents,
            // keep at least three objects for the default mean list length
            ratio: (n_agents as f64 / 3.0).min(10.0),
            seed,
            ..Default::default()
        })
        .unwrap();
        let x = probabilistic_serial(&inst);
        let d = decompose_robust(&inst, &x).unwrap();
        check_md(&inst, &x, &d);
        assert!(d.matchings().all(|m| is_pareto_efficient(&inst, m)));
    }
}

#[test]
fn robust_decomposition_rejects_inefficient_input() {
    // a matching where agent 1 holds c while b is free
    let inst = three_object_instance();
    let m = Matching::new(vec![Some(0), Some(2), Some(0), None]);
    let err = decompose_robust(&inst, &m.to_assignment(3)).unwrap_err();
    assert!(err.to_string().to_lowercase().contains("pareto"));
}

#[test]
fn infeasible_input_is_rejected() {
    let inst = three_object_instance();
    let mut x = ProbabilisticAssignment::zeros(4, 3);
    x.set(2, 1, rat(1, 2)); // agent 3 does not accept b
    assert!(decompose_md(&inst, &x).is_err());
}
