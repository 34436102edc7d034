mod common;

use common::*;
use lottery_core::datagen::{generate, GenParams};
use lottery_core::mechanisms::{
    is_envy_free, probabilistic_serial, rsd_exact, rsd_exact_lottery, rsd_sampled, sample_sd_lottery,
};
use lottery_core::{is_pareto_efficient, rat, Instance, Rat};
use proptest::prelude::*;

#[test]
fn exact_rsd_reproduces_three_object_instance() {
    let est = rsd_exact(&three_object_instance()).unwrap();
    assert!(est.exact);
    assert_eq!(est.sample_count, 24);
    assert_eq!(est.assignment, three_object_rsd());
}

#[test]
fn exact_rsd_lottery_weights_sum_to_one() {
    let lot = rsd_exact_lottery(&three_object_instance()).unwrap();
    assert_eq!(lot.total, 24);
    assert_eq!(lot.outcomes.iter().map(|(_, c)| c).sum::<u64>(), 24);
    let total: Rat = lot.weighted().into_iter().map(|(w, _)| w).sum();
    assert_eq!(total, rat(1, 1));
    assert_eq!(lot.assignment(3), three_object_rsd());
}

#[test]
fn sampled_rsd_is_close_to_exact_and_seeded() {
    let inst = three_object_instance();
    let a = rsd_sampled(&inst, 20_000, 7).unwrap();
    let b = rsd_sampled(&inst, 20_000, 7).unwrap();
    assert_eq!(a.assignment, b.assignment);
    assert!(!a.exact);
    assert!(a.assignment.max_abs_diff(&three_object_rsd()) < 0.02);
    // every sampled outcome is an SD outcome, hence efficient
    for (m, _) in sample_sd_lottery(&inst, 200, 3).outcomes {
        assert!(is_pareto_efficient(&inst, &m));
    }
}

#[test]
fn ps_on_three_object_instance() {
    let inst = three_object_instance();
    let x = probabilistic_serial(&inst);
    // all four eat a at rate 1 until it runs out at t = 1/2; agents 1 and 2
    // then split b and, after it runs out, c
    let h = rat(1, 2);
    let z = rat(0, 1);
    let expected = lottery_core::ProbabilisticAssignment::from_rows(vec![
        vec![h.clone(), h.clone(), z.clone()],
        vec![h.clone(), h.clone(), z.clone()],
        vec![h.clone(), z.clone(), z.clone()],
        vec![h, z.clone(), z],
    ])
    .unwrap();
    assert_eq!(x, expected);
    assert!(is_envy_free(&inst, &x));
}

#[test]
fn ps_is_feasible_and_envy_free_on_generated_instances() {
    for seed in 0..20 {
        let inst = generate(&GenParams {
            n_agents: 20,
            ratio: 4.0,
            seed,
            ..Default::default()
        })
        .unwrap();
        let x = probabilistic_serial(&inst);
        x.check_feasible(&inst).unwrap();
        assert!(is_envy_free(&inst, &x), "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_rsd_matches_permutation_average(inst in small_instance(5, 4)) {
        prop_assert_eq!(rsd_exact(&inst).unwrap().assignment, rsd_by_permutations(&inst));
    }

    #[test]
    fn ps_rows_and_columns_respect_bounds(inst in small_instance(5, 4)) {
        let x = probabilistic_serial(&inst);
        prop_assert!(x.check_feasible(&inst).is_ok());
        prop_assert!(is_envy_free(&inst, &x));
        // PS never leaves an agent short while an acceptable object has
        // capacity left
        for i in 0..inst.n_agents() {
            if x.row_sum(i) < rat(1, 1) {
                for &j in inst.prefs(i) {
                    prop_assert_eq!(x.col_sum(j), Rat::from_integer(inst.capacity(j).into()));
                }
            }
        }
    }
}

#[test]
fn single_agent_single_object() {
    let inst = Instance::from_lists(&[1], &[vec![0]]).unwrap();
    assert_eq!(rsd_exact(&inst).unwrap().assignment.get(0, 0), &rat(1, 1));
    assert_eq!(probabilistic_serial(&inst).get(0, 0), &rat(1, 1));
}
