//! Cheap pricing: local search over SD orderings. Every SD outcome is
//! Pareto efficient, so any ordering whose outcome has a negative reduced
//! cost is a valid column. The exact integer program is only needed to show
//! that none exists.

use std::collections::HashSet;

use crate::assignment::Matching;
use crate::efficiency::sd_into;
use crate::instance::Instance;
use crate::rng::{random_permutation, seeded};

const MAX_PASSES: usize = 25;
const RANDOM_STARTS: usize = 2;

/// Searches orderings for SD outcomes with `Σ cost(i, M(i)) + constant`
/// below `-tol` and at least `min_card` agents assigned. `cost` is dense,
/// indexed `i * |O| + j`. Returns up to `max_columns` of the best found,
/// most negative first.
pub(crate) fn sd_local_search(
    inst: &Instance,
    cost: &[f64],
    constant: f64,
    min_card: usize,
    tol: f64,
    max_columns: usize,
    seed: u64,
) -> Vec<(Matching, f64)> {
    let n = inst.n_agents();
    let n_obj = inst.n_objects();
    if n == 0 {
        return Vec::new();
    }
    let mut loads = vec![0u32; n_obj];
    let mut scratch = Matching::unassigned(n);
    let mut found: Vec<(Matching, f64)> = Vec::new();
    let mut seen: HashSet<Matching> = HashSet::new();

    let mut evaluate = |order: &[usize], found: &mut Vec<(Matching, f64)>| -> f64 {
        sd_into(inst, order, &mut loads, &mut scratch);
        let mut v = constant;
        for (i, a) in scratch.assignment().iter().enumerate() {
            if let Some(j) = a {
                v += cost[i * n_obj + j];
            }
        }
        if scratch.cardinality() < min_card {
            return f64::INFINITY;
        }
        if v < -tol && seen.insert(scratch.clone()) {
            found.push((scratch.clone(), v));
        }
        v
    };

    let best_cell = |i: usize| {
        inst.prefs(i)
            .iter()
            .map(|&j| cost[i * n_obj + j])
            .fold(f64::INFINITY, f64::min)
    };
    let mut starts: Vec<Vec<usize>> = Vec::new();
    let mut by_best: Vec<usize> = (0..n).collect();
    by_best.sort_by(|&a, &b| best_cell(a).total_cmp(&best_cell(b)).then(a.cmp(&b)));
    starts.push(by_best);
    let mut by_top: Vec<usize> = (0..n).collect();
    let top = |i: usize| inst.prefs(i).first().map_or(f64::INFINITY, |&j| cost[i * n_obj + j]);
    by_top.sort_by(|&a, &b| top(a).total_cmp(&top(b)).then(a.cmp(&b)));
    starts.push(by_top);
    let mut rng = seeded(seed);
    for _ in 0..RANDOM_STARTS {
        starts.push(random_permutation(n, &mut rng));
    }

    for mut order in starts {
        let mut value = evaluate(&order, &mut found);
        for _ in 0..MAX_PASSES {
            let mut improved = false;
            // move one agent to the front
            for pos in 1..n {
                let mut cand = order.clone();
                let a = cand.remove(pos);
                cand.insert(0, a);
                let v = evaluate(&cand, &mut found);
                if v < value - 1e-12 {
                    order = cand;
                    value = v;
                    improved = true;
                }
            }
            // adjacent swaps
            for pos in 0..n - 1 {
                order.swap(pos, pos + 1);
                let v = evaluate(&order, &mut found);
                if v < value - 1e-12 {
                    value = v;
                    improved = true;
                } else {
                    order.swap(pos, pos + 1);
                }
            }
            if !improved {
                break;
            }
        }
    }

    found.sort_by(|a, b| a.1.total_cmp(&b.1));
    found.truncate(max_columns);
    found
}
