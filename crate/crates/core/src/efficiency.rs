//! Serial dictatorship and Pareto efficiency.
//!
//! A matching is Pareto efficient iff it is maximal and admits integer
//! competitive-equilibrium prices: objects with spare capacity cost zero, and
//! whenever an agent holding `j` prefers `k`, `k` is strictly more expensive.
//! Such prices exist iff the envy graph on objects is acyclic and no envy
//! edge points into an object with spare capacity, which is what
//! [`competitive_prices`] checks.

use std::collections::{BTreeSet, HashSet};

use crate::assignment::Matching;
use crate::colgen::heuristic::sd_local_search;
use crate::colgen::pricing::{PeModel, PeModelOptions};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::colgen::orders::OrderSolver;
use crate::lp::{MipLimits, Sense};

/// Default cap on the number of agents for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 8;

/// Runs serial dictatorship: agents pick, in `order`, their most preferred
/// acceptable object with capacity left.
pub fn serial_dictatorship(inst: &Instance, order: &[usize]) -> Result<Matching> {
    let n = inst.n_agents();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
        return Err(Error::Precondition(format!(
            "ordering {order:?} is not a permutation of {n} agents"
        )));
    }
    let mut loads = vec![0; inst.n_objects()];
    let mut out = Matching::unassigned(n);
    sd_into(inst, order, &mut loads, &mut out);
    Ok(out)
}

/// Allocation-free serial dictatorship for hot loops. `loads` and `out` are
/// overwritten.
pub(crate) fn sd_into(inst: &Instance, order: &[usize], loads: &mut [u32], out: &mut Matching) {
    loads.iter_mut().for_each(|l| *l = 0);
    for &i in order {
        let pick = inst
            .prefs(i)
            .iter()
            .copied()
            .find(|&j| loads[j] < inst.capacity(j));
        if let Some(j) = pick {
            loads[j] += 1;
        }
        out.set(i, pick);
    }
}

/// Integer prices in `0..=|O|` certifying that `(m, prices)` is a
/// competitive equilibrium, or `None` when `m` is not Pareto efficient.
pub fn competitive_prices(inst: &Instance, m: &Matching) -> Option<Vec<u32>> {
    let n_obj = inst.n_objects();
    let loads = m.loads(n_obj);
    let full: Vec<bool> = (0..n_obj).map(|j| loads[j] >= inst.capacity(j)).collect();

    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n_obj];
    for i in 0..inst.n_agents() {
        match m.get(i) {
            None => {
                // maximality
                if inst.prefs(i).iter().any(|&j| !full[j]) {
                    return None;
                }
            }
            Some(j) => {
                let r = inst.rank(i, j)?;
                for &k in &inst.prefs(i)[..r] {
                    if !full[k] {
                        return None;
                    }
                    succ[j].insert(k);
                }
            }
        }
    }

    // Kahn's algorithm; prices are longest-path depths.
    let mut indeg = vec![0usize; n_obj];
    for s in &succ {
        for &k in s {
            indeg[k] += 1;
        }
    }
    let mut queue: Vec<usize> = (0..n_obj).filter(|&j| indeg[j] == 0).collect();
    let mut prices = vec![0u32; n_obj];
    let mut visited = 0;
    while let Some(j) = queue.pop() {
        visited += 1;
        for &k in &succ[j] {
            prices[k] = prices[k].max(prices[j] + 1);
            indeg[k] -= 1;
            if indeg[k] == 0 {
                queue.push(k);
            }
        }
    }
    (visited == n_obj).then_some(prices)
}

/// Whether `m` is (ex-post) Pareto efficient for `inst`.
pub fn is_pareto_efficient(inst: &Instance, m: &Matching) -> bool {
    competitive_prices(inst, m).is_some()
}

/// All Pareto-efficient matchings, obtained as the distinct outcomes of
/// serial dictatorship over every ordering. Sorted and deduplicated.
pub fn enumerate_pe_matchings(inst: &Instance) -> Result<Vec<Matching>> {
    enumerate_pe_matchings_with_limit(inst, DEFAULT_ENUMERATION_LIMIT)
}

pub fn enumerate_pe_matchings_with_limit(inst: &Instance, limit: usize) -> Result<Vec<Matching>> {
    let n = inst.n_agents();
    if n > limit || n >= 64 {
        return Err(Error::EnumerationLimit { agents: n, limit });
    }
    let mut found = BTreeSet::new();
    let mut visited = HashSet::new();
    let mut loads = vec![0u32; inst.n_objects()];
    let mut partial = Matching::unassigned(n);
    let all = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
    sd_tree(inst, all, &mut loads, &mut partial, &mut visited, &mut found);
    Ok(found.into_iter().collect())
}

// Depth-first search over "which agent picks next", memoized on the set of
// agents still to pick plus the partial matching.
fn sd_tree(
    inst: &Instance,
    remaining: u64,
    loads: &mut Vec<u32>,
    partial: &mut Matching,
    visited: &mut HashSet<(u64, Matching)>,
    found: &mut BTreeSet<Matching>,
) {
    if remaining == 0 {
        found.insert(partial.clone());
        return;
    }
    if !visited.insert((remaining, partial.clone())) {
        return;
    }
    let mut rest = remaining;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let pick = inst
            .prefs(i)
            .iter()
            .copied()
            .find(|&j| loads[j] < inst.capacity(j));
        if let Some(j) = pick {
            loads[j] += 1;
        }
        partial.set(i, pick);
        sd_tree(inst, remaining & !(1u64 << i), loads, partial, visited, found);
        partial.set(i, None);
        if let Some(j) = pick {
            loads[j] -= 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

/// `p⁻(I)` or `p⁺(I)`: the smallest or largest cardinality of a
/// Pareto-efficient matching, solved as an integer program over the
/// competitive-equilibrium formulation.
pub fn extreme_pe_cardinality(inst: &Instance, direction: Direction) -> Result<usize> {
    extreme_pe_matching(inst, direction, &MipLimits::default()).map(|m| m.cardinality())
}

/// The matching attaining [`extreme_pe_cardinality`].
///
/// With few objects the extremes come from enumerating full sets and price
/// orders (see [`crate::colgen::orders`]). Otherwise a local search over SD orderings supplies the starting bound
/// and the integer program only looks for strictly better matchings.
pub fn extreme_pe_matching(
    inst: &Instance,
    direction: Direction,
    limits: &MipLimits,
) -> Result<Matching> {
    if let Some(mut solver) = OrderSolver::new(inst, 0, &[]) {
        let sense = match direction {
            Direction::Min => Sense::Min,
            Direction::Max => Sense::Max,
        };
        let ones = vec![1.0; inst.n_agents() * inst.n_objects()];
        if let Some(found) = solver.optimize(&ones, sense, &limits.deadline) {
            return Ok(found.into_iter().next().expect("SD outcomes are Pareto efficient").0);
        }
    }
    extreme_by_integer_program(inst, direction, limits)
}

pub(crate) fn extreme_by_integer_program(
    inst: &Instance,
    direction: Direction,
    limits: &MipLimits,
) -> Result<Matching> {
    let n = inst.n_agents();
    let sign = match direction {
        Direction::Min => 1.0,
        Direction::Max => -1.0,
    };
    let cost = vec![sign; n * inst.n_objects()];
    // shift so every value is negative and the search keeps the best one
    let shift = -(n as f64) - 1.0;
    let (heuristic, value) = sd_local_search(inst, &cost, shift, 0, 0.0, 1, 0)
        .into_iter()
        .next()
        .map(|(m, v)| (m, v - shift))
        .expect("some SD outcome always exists");
    let mut model = PeModel::new(inst, &PeModelOptions::default());
    model.set_objective(|_, _| sign, 0.0);
    let limits = MipLimits {
        cutoff: Some(value),
        ..*limits
    };
    match model.solve(&limits)? {
        Some((m, _)) => Ok(m),
        None => Ok(heuristic),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn three_object_instance() -> Instance {
        Instance::from_lists(&[2, 1, 1], &[vec![0, 1, 2], vec![0, 1, 2], vec![0], vec![0]]).unwrap()
    }

    fn m(v: &[Option<usize>]) -> Matching {
        Matching::new(v.to_vec())
    }

    #[test]
    fn sd_on_three_objects() {
        let inst = three_object_instance();
        let a = serial_dictatorship(&inst, &[0, 1, 2, 3]).unwrap();
        assert_eq!(a, m(&[Some(0), Some(0), None, None]));
        assert_eq!(a.cardinality(), 2);
        let b = serial_dictatorship(&inst, &[2, 3, 0, 1]).unwrap();
        assert_eq!(b, m(&[Some(1), Some(2), Some(0), Some(0)]));
        assert_eq!(b.cardinality(), 4);
    }

    #[test]
    fn sd_rejects_non_permutations() {
        let inst = three_object_instance();
        assert!(serial_dictatorship(&inst, &[0, 0, 1, 2]).is_err());
        assert!(serial_dictatorship(&inst, &[0, 1, 2]).is_err());
    }

    #[test]
    fn sd_single_agent() {
        let inst = Instance::from_lists(&[1], &[vec![0]]).unwrap();
        assert_eq!(serial_dictatorship(&inst, &[0]).unwrap(), m(&[Some(0)]));
    }

    #[test]
    fn example_matchings_efficiency() {
        let inst = three_object_instance();
        let m1 = m(&[Some(1), Some(0), Some(0), None]);
        let m2 = m(&[Some(0), Some(1), None, Some(0)]);
        let m3 = m(&[Some(0), Some(2), Some(0), None]);
        let m4 = m(&[Some(2), Some(0), None, Some(0)]);
        assert!(is_pareto_efficient(&inst, &m1));
        assert!(is_pareto_efficient(&inst, &m2));
        assert!(!is_pareto_efficient(&inst, &m3));
        assert!(!is_pareto_efficient(&inst, &m4));

        let all = enumerate_pe_matchings(&inst).unwrap();
        assert!(all.contains(&m1) && all.contains(&m2));
        assert!(!all.contains(&m3) && !all.contains(&m4));
    }

    #[test]
    fn empty_preferences_make_the_empty_matching_efficient() {
        let inst = Instance::from_lists(&[1, 2], &[vec![], vec![]]).unwrap();
        assert!(is_pareto_efficient(&inst, &Matching::unassigned(2)));
        assert_eq!(enumerate_pe_matchings(&inst).unwrap().len(), 1);
    }

    #[test]
    fn prices_respect_envy() {
        let inst = three_object_instance();
        let m1 = m(&[Some(1), Some(0), Some(0), None]);
        let p = competitive_prices(&inst, &m1).unwrap();
        // agent 1 holds b and envies a
        assert!(p[0] > p[1]);
        // c has spare capacity
        assert_eq!(p[2], 0);
        assert!(p.iter().all(|&x| x as usize <= inst.n_objects()));
    }

    #[test]
    fn enumeration_limit() {
        let inst = Instance::from_lists(&[1], &vec![vec![0]; 9]).unwrap();
        assert!(matches!(
            enumerate_pe_matchings(&inst),
            Err(Error::EnumerationLimit { agents: 9, limit: 8 })
        ));
        assert_eq!(enumerate_pe_matchings_with_limit(&inst, 9).unwrap().len(), 9);
    }

    #[test]
    fn single_agent_single_object_enumeration() {
        let inst = Instance::from_lists(&[1], &[vec![0]]).unwrap();
        assert_eq!(enumerate_pe_matchings(&inst).unwrap(), vec![m(&[Some(0)])]);
    }
}
