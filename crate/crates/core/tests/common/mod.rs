//! Brute-force oracles shared by the integration tests. Everything here is
//! deliberately naive and independent of the library's algorithms.

#![allow(dead_code)]

use std::collections::BTreeSet;

use lottery_core::efficiency::enumerate_pe_matchings;
use lottery_core::rng::seeded;
use lottery_core::{rat, serial_dictatorship, Instance, Matching, ProbabilisticAssignment, Rat};
use proptest::prelude::*;
use rand::Rng;

/// Every feasible matching: each agent takes an acceptable object or
/// nothing, capacities respected.
pub fn all_matchings(inst: &Instance) -> Vec<Matching> {
    let mut out = Vec::new();
    let mut cur = vec![None; inst.n_agents()];
    let mut loads = vec![0u32; inst.n_objects()];
    fill(inst, 0, &mut cur, &mut loads, &mut |m| out.push(Matching::new(m.to_vec())), &|_, _| true);
    out
}

fn fill(
    inst: &Instance,
    i: usize,
    cur: &mut Vec<Option<usize>>,
    loads: &mut Vec<u32>,
    emit: &mut dyn FnMut(&[Option<usize>]),
    admit: &dyn Fn(usize, Option<usize>) -> bool,
) {
    if i == inst.n_agents() {
        emit(cur);
        return;
    }
    if admit(i, None) {
        cur[i] = None;
        fill(inst, i + 1, cur, loads, emit, admit);
    }
    for &j in inst.prefs(i) {
        if loads[j] < inst.capacity(j) && admit(i, Some(j)) {
            loads[j] += 1;
            cur[i] = Some(j);
            fill(inst, i + 1, cur, loads, emit, admit);
            loads[j] -= 1;
        }
    }
    cur[i] = None;
}

/// Pareto efficiency by definition: no feasible matching leaves every agent
/// weakly better off and one strictly better off.
pub fn brute_force_pe(inst: &Instance, m: &Matching) -> bool {
    let mut dominated = false;
    let mut cur = vec![None; inst.n_agents()];
    let mut loads = vec![0u32; inst.n_objects()];
    let weakly_better = |i: usize, a: Option<usize>| !inst.prefers(i, m.get(i), a);
    fill(
        inst,
        0,
        &mut cur,
        &mut loads,
        &mut |other| {
            if (0..other.len()).any(|i| inst.prefers(i, other[i], m.get(i))) {
                dominated = true;
            }
        },
        &weakly_better,
    );
    !dominated
}

/// Distinct outcomes of serial dictatorship over all orderings.
pub fn sd_outcomes(inst: &Instance) -> BTreeSet<Matching> {
    let mut order: Vec<usize> = (0..inst.n_agents()).collect();
    let mut out = BTreeSet::new();
    permutations(&mut order, 0, &mut |o| {
        out.insert(serial_dictatorship(inst, o).unwrap());
    });
    out
}

pub fn permutations(items: &mut [usize], k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for t in k..items.len() {
        items.swap(k, t);
        permutations(items, k + 1, f);
        items.swap(k, t);
    }
}

/// Exact RSD by averaging serial dictatorship over all orderings.
pub fn rsd_by_permutations(inst: &Instance) -> ProbabilisticAssignment {
    let mut x = ProbabilisticAssignment::zeros(inst.n_agents(), inst.n_objects());
    let mut count = 0i64;
    let mut order: Vec<usize> = (0..inst.n_agents()).collect();
    permutations(&mut order, 0, &mut |o| {
        count += 1;
        let m = serial_dictatorship(inst, o).unwrap();
        for i in 0..inst.n_agents() {
            if let Some(j) = m.get(i) {
                x.add(i, j, &rat(1, 1));
            }
        }
    });
    let mut out = ProbabilisticAssignment::zeros(inst.n_agents(), inst.n_objects());
    for i in 0..inst.n_agents() {
        for j in 0..inst.n_objects() {
            out.set(i, j, x.get(i, j) / Rat::from_integer(count.into()));
        }
    }
    out
}

/// The unpopularity margin by definition, over every feasible rival.
pub fn brute_force_margin(inst: &Instance, m: &Matching) -> u64 {
    all_matchings(inst)
        .iter()
        .map(|other| {
            let mut score = 0i64;
            for i in 0..inst.n_agents() {
                if inst.prefers(i, other.get(i), m.get(i)) {
                    score += 1;
                } else if inst.prefers(i, m.get(i), other.get(i)) {
                    score -= 1;
                }
            }
            score
        })
        .max()
        .unwrap_or(0)
        .max(0) as u64
}

/// Random instance with up to `max_agents` agents and `max_objects`
/// objects of capacity 1 or 2; lists are random orderings of random
/// subsets and may be empty.
pub fn small_instance(max_agents: usize, max_objects: usize) -> impl Strategy<Value = Instance> {
    (1..=max_objects).prop_flat_map(move |m| {
        (
            proptest::collection::vec(1u32..=2, m),
            proptest::collection::vec(proptest::collection::vec(0..m, 0..=m), 1..=max_agents),
        )
            .prop_map(|(caps, raw)| {
                let lists: Vec<Vec<usize>> = raw
                    .into_iter()
                    .map(|l| {
                        let mut seen = BTreeSet::new();
                        l.into_iter().filter(|j| seen.insert(*j)).collect()
                    })
                    .collect();
                Instance::from_lists(&caps, &lists).unwrap()
            })
    })
}

/// Capacities (2, 1, 1); agents 1, 2 rank a > b > c, agents 3, 4
/// accept only a.
pub fn three_object_instance() -> Instance {
    Instance::from_lists(&[2, 1, 1], &[vec![0, 1, 2], vec![0, 1, 2], vec![0], vec![0]]).unwrap()
}

pub fn three_object_rsd() -> ProbabilisticAssignment {
    let r = |a, b| rat(a, b);
    ProbabilisticAssignment::from_rows(vec![
        vec![r(1, 2), r(5, 12), r(1, 12)],
        vec![r(1, 2), r(5, 12), r(1, 12)],
        vec![r(1, 2), r(0, 1), r(0, 1)],
        vec![r(1, 2), r(0, 1), r(0, 1)],
    ])
    .unwrap()
}

/// Capacities (2, 2); agents 1, 2 rank a > b, agents 3, 4
/// accept only a.
pub fn two_object_instance() -> Instance {
    Instance::from_lists(&[2, 2], &[vec![0, 1], vec![0, 1], vec![0], vec![0]]).unwrap()
}

pub fn two_object_assignment() -> ProbabilisticAssignment {
    let h = rat(1, 2);
    let z = rat(0, 1);
    ProbabilisticAssignment::from_rows(vec![
        vec![h.clone(), h.clone()],
        vec![h.clone(), h.clone()],
        vec![h.clone(), z.clone()],
        vec![h, z],
    ])
    .unwrap()
}

/// Whether `x` lies in the convex hull of `columns`, by one direct LP over
/// all of them (no column generation).
pub fn in_convex_hull(x: &ProbabilisticAssignment, columns: &[Matching]) -> bool {
    use lottery_core::lp::{solve_lp, LinearProgramSpec, Relation, Sense};
    if columns.is_empty() {
        return false;
    }
    let n_obj = x.n_objects();
    let target = x.to_f64();
    let mut spec = LinearProgramSpec::new(Sense::Min);
    let vars: Vec<usize> = (0..columns.len())
        .map(|t| spec.add_var(format!("l{t}"), 0.0, f64::INFINITY, 0.0))
        .collect();
    spec.add_constraint("convex", vars.iter().map(|&v| (v, 1.0)).collect(), Relation::Eq, 1.0);
    for i in 0..x.n_agents() {
        for j in 0..n_obj {
            let coeffs: Vec<(usize, f64)> = columns
                .iter()
                .zip(&vars)
                .filter(|(m, _)| m.holds(i, j))
                .map(|(_, &v)| (v, 1.0))
                .collect();
            spec.add_constraint(format!("c{i}_{j}"), coeffs, Relation::Eq, target[i * n_obj + j]);
        }
    }
    solve_lp(&spec).map(|r| r.is_optimal()).unwrap_or(false)
}

/// The best worst-case cardinality over lotteries of efficient matchings
/// implementing `x`, by scanning `k` downward with [`in_convex_hull`].
pub fn brute_force_z(inst: &Instance, x: &ProbabilisticAssignment) -> Option<usize> {
    let pe: Vec<Matching> = all_matchings(inst).into_iter().filter(|m| brute_force_pe(inst, m)).collect();
    (0..=inst.n_agents()).rev().find(|&k| {
        let cols: Vec<Matching> = pe.iter().filter(|m| m.cardinality() >= k).cloned().collect();
        in_convex_hull(x, &cols)
    })
}

/// A random lottery over Pareto-efficient matchings, so that some `k` is
/// always decomposable.
pub fn random_pe_lottery(inst: &Instance, seed: u64) -> ProbabilisticAssignment {
    let all = enumerate_pe_matchings(inst).unwrap();
    let mut rng = seeded(seed);
    let k = rng.random_range(1..=3);
    let picks: Vec<(i64, &Matching)> =
        (0..k).map(|_| (rng.random_range(1..=6), &all[rng.random_range(0..all.len())])).collect();
    let total: i64 = picks.iter().map(|p| p.0).sum();
    let mut x = ProbabilisticAssignment::zeros(inst.n_agents(), inst.n_objects());
    for (w, m) in picks {
        for i in 0..inst.n_agents() {
            if let Some(j) = m.get(i) {
                x.add(i, j, &rat(w, total));
            }
        }
    }
    x
}

/// A random lottery over random feasible matchings with random rational
/// weights.
pub fn random_assignment(inst: &Instance, seed: u64) -> ProbabilisticAssignment {
    let all = all_matchings(inst);
    let mut rng = seeded(seed);
    let k = rng.random_range(1..=4);
    let picks: Vec<(u32, &Matching)> = (0..k)
        .map(|_| (rng.random_range(1..=12), &all[rng.random_range(0..all.len())]))
        .collect();
    let total: u32 = picks.iter().map(|p| p.0).sum();
    let mut x = ProbabilisticAssignment::zeros(inst.n_agents(), inst.n_objects());
    for (w, m) in picks {
        let w = rat(w as i64, total as i64);
        for i in 0..inst.n_agents() {
            if let Some(j) = m.get(i) {
                x.add(i, j, &w);
            }
        }
    }
    x
}
