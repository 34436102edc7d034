//! Unpopularity margins.
//!
//! `φ(M, M')` counts agents who strictly prefer their allocation under `M`
//! to the one under `M'`; the margin of `M` is `max_M' φ(M', M) - φ(M, M')`.
//! It is the optimum of an assignment LP over rival matchings where every
//! agent is placed somewhere, the outside option `∅` being a pseudo-object
//! of capacity `|N|`. Its dual gives a linear block that bounds the margin of
//! the matching chosen by the pricing program.

use serde::{Deserialize, Serialize};

use crate::assignment::{Decomposition, Matching, ProbabilisticAssignment};
use crate::clock::Stopwatch;
use crate::colgen::pool::{initial_columns, ColumnPool};
use crate::colgen::rmp::{run_rmp, Pricer, Target};
use crate::colgen::{Budget, MdsdStatus, PeModel, PeModelOptions, TraceEntry};
use crate::error::Result;
use crate::instance::Instance;
use crate::lp::{solve_lp, LinearProgramSpec, Relation, Sense};

/// `ν_M(i, j)` in `{-1, 0, +1}` for every agent and every acceptable object
/// or the outside option: +1 when `i` prefers `j` to `M(i)`, -1 when `i`
/// prefers `M(i)`, 0 when they coincide.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonWeights {
    n_objects: usize,
    // row-major over objects plus a trailing outside-option column
    nu: Vec<i8>,
}

impl ComparisonWeights {
    pub fn new(inst: &Instance, m: &Matching) -> Self {
        let w = inst.n_objects() + 1;
        let mut nu = vec![0i8; inst.n_agents() * w];
        for i in 0..inst.n_agents() {
            let cur = m.get(i);
            let cell = |alloc: Option<usize>| {
                if inst.prefers(i, alloc, cur) {
                    1
                } else if inst.prefers(i, cur, alloc) {
                    -1
                } else {
                    0
                }
            };
            for j in 0..inst.n_objects() {
                nu[i * w + j] = if inst.is_acceptable(i, j) { cell(Some(j)) } else { 0 };
            }
            nu[i * w + inst.n_objects()] = cell(None);
        }
        ComparisonWeights {
            n_objects: inst.n_objects(),
            nu,
        }
    }

    /// `ν(i, j)`, with `None` for the outside option.
    pub fn get(&self, i: usize, j: Option<usize>) -> i8 {
        self.nu[i * (self.n_objects + 1) + j.unwrap_or(self.n_objects)]
    }
}

/// Number of agents strictly preferring their allocation under `m` to the
/// one under `other`.
pub fn phi(inst: &Instance, m: &Matching, other: &Matching) -> usize {
    (0..inst.n_agents())
        .filter(|&i| inst.prefers(i, m.get(i), other.get(i)))
        .count()
}

/// The unpopularity margin of `m`, from the rival-matching LP. The
/// assignment polytope is integral, so the optimum is an integer.
pub fn unpopularity_margin(inst: &Instance, m: &Matching) -> u64 {
    let nu = ComparisonWeights::new(inst, m);
    let n = inst.n_agents();
    let mut spec = LinearProgramSpec::new(Sense::Max);
    let mut by_object: Vec<Vec<(usize, f64)>> = vec![Vec::new(); inst.n_objects()];
    for i in 0..n {
        let mut row = Vec::new();
        for &j in inst.prefs(i) {
            let v = spec.add_var(format!("m_{i}_{j}"), 0.0, 1.0, nu.get(i, Some(j)) as f64);
            row.push((v, 1.0));
            by_object[j].push((v, 1.0));
        }
        let out = spec.add_var(format!("m_{i}_out"), 0.0, 1.0, nu.get(i, None) as f64);
        row.push((out, 1.0));
        spec.add_constraint(format!("agent_{i}"), row, Relation::Eq, 1.0);
    }
    for (j, col) in by_object.into_iter().enumerate() {
        if col.len() > inst.capacity(j) as usize {
            spec.add_constraint(format!("cap_{j}"), col, Relation::Le, inst.capacity(j) as f64);
        }
    }
    // the outside option (capacity |N|) never binds
    let r = solve_lp(&spec).expect("the margin LP has no integer variables");
    assert!(r.is_optimal(), "the margin LP is feasible and bounded");
    r.objective.round().max(0.0) as u64
}

/// Adds the dual of the margin LP with objective at most `omega`, where
/// `ν` is expressed through the matching variables `var[i * |O| + j]`:
/// `ν(i, j) = 1 - m_ij - 2 Σ_(l >_i j) m_il` and `ν(i, ∅) = -Σ_l m_il`.
pub(crate) fn attach_margin_block(
    spec: &mut LinearProgramSpec,
    inst: &Instance,
    var: &[Option<usize>],
    omega: u64,
) {
    let n = inst.n_agents();
    let n_obj = inst.n_objects();
    let a_agent: Vec<usize> = (0..n)
        .map(|i| spec.add_var(format!("alpha_agent_{i}"), f64::NEG_INFINITY, f64::INFINITY, 0.0))
        .collect();
    let a_obj: Vec<usize> = (0..n_obj)
        .map(|j| spec.add_var(format!("alpha_obj_{j}"), 0.0, f64::INFINITY, 0.0))
        .collect();
    let a_out = spec.add_var("alpha_out", 0.0, f64::INFINITY, 0.0);

    let mut bound: Vec<(usize, f64)> = a_agent.iter().map(|&v| (v, 1.0)).collect();
    bound.extend(a_obj.iter().enumerate().map(|(j, &v)| (v, inst.capacity(j) as f64)));
    bound.push((a_out, n as f64));
    spec.add_constraint("margin_bound", bound, Relation::Le, omega as f64);

    for i in 0..n {
        let list = inst.prefs(i);
        for (r, &j) in list.iter().enumerate() {
            let mut c = vec![(a_agent[i], 1.0), (a_obj[j], 1.0)];
            c.push((var[i * n_obj + j].expect("acceptable pair"), 1.0));
            for &l in &list[..r] {
                c.push((var[i * n_obj + l].expect("acceptable pair"), 2.0));
            }
            spec.add_constraint(format!("margin_dual_{i}_{j}"), c, Relation::Ge, 1.0);
        }
        let mut c = vec![(a_agent[i], 1.0), (a_out, 1.0)];
        c.extend(list.iter().map(|&l| (var[i * n_obj + l].expect("acceptable pair"), 1.0)));
        spec.add_constraint(format!("margin_dual_{i}_out"), c, Relation::Ge, 0.0);
    }
}

/// The Pareto-efficient matching program restricted to margins at most
/// `omega`.
pub fn bounded_margin_block(inst: &Instance, omega: u64) -> PeModel {
    PeModel::new(
        inst,
        &PeModelOptions {
            margin_bound: Some(omega),
            ..Default::default()
        },
    )
}

#[derive(Debug, Clone)]
pub struct MarginResult {
    /// Smallest certified worst-case margin.
    pub omega: u64,
    /// Largest margin known to fail plus one; equals `omega` when optimal.
    pub lower: u64,
    pub status: MdsdStatus,
    pub decomposition: Option<Decomposition>,
    /// Entries keyed by the tested margin bound.
    pub trace: Vec<TraceEntry>,
    pub seconds: f64,
}

/// Minimizes the largest unpopularity margin over lotteries of
/// Pareto-efficient matchings implementing `x`, bisecting the bound with the
/// slack master.
pub fn binary_search_margin(
    inst: &Instance,
    x: &ProbabilisticAssignment,
    budget: &Budget,
    pool: Option<ColumnPool>,
    samples: u64,
    seed: u64,
) -> Result<MarginResult> {
    x.check_feasible(inst)?;
    let clock = Stopwatch::start();
    let mut pool = pool.unwrap_or_else(|| initial_columns(inst, 0, samples.max(1), seed));
    let mut margins: Vec<u64> = Vec::new();
    let mut trace = Vec::new();

    let test = |omega: u64,
                    pool: &mut ColumnPool,
                    margins: &mut Vec<u64>,
                    trace: &mut Vec<TraceEntry>|
     -> Result<(Option<bool>, Option<Decomposition>)> {
        while margins.len() < pool.len() {
            margins.push(unpopularity_margin(inst, pool.get(margins.len())));
        }
        let members: Vec<usize> = (0..pool.len()).filter(|&t| margins[t] <= omega).collect();
        let mut pricer = Pricer::new(inst, Some(x), Target::Margin(omega));
        let o = run_rmp(inst, x, pool, members, &mut pricer, budget)?;
        trace.push(TraceEntry {
            k: omega as usize,
            value: o.s,
            feasible: o.feasible,
            iterations: o.stats.iterations,
            columns_generated: o.stats.columns_generated,
        });
        let d = if o.feasible == Some(true) { o.decomposition } else { None };
        Ok((o.feasible, d))
    };

    let n = inst.n_agents() as u64;
    let finish = |omega, lower, status, decomposition, trace| MarginResult {
        omega,
        lower,
        status,
        decomposition,
        trace,
        seconds: clock.elapsed_secs(),
    };
    let worst = |d: &Decomposition| {
        d.matchings().map(|m| unpopularity_margin(inst, m)).max().unwrap_or(0)
    };

    let (feasible, decomposition) = test(n, &mut pool, &mut margins, &mut trace)?;
    let mut best = match (feasible, decomposition) {
        (Some(true), Some(d)) => d,
        (Some(false), _) => return Ok(finish(0, 0, MdsdStatus::NotDecomposable, None, trace)),
        _ => return Ok(finish(n, 0, MdsdStatus::BudgetExhausted, None, trace)),
    };
    // hi feasible, lo infeasible (-1: nothing known)
    let mut hi = worst(&best) as i64;
    let mut lo: i64 = -1;
    while hi - lo > 1 {
        let mid = (lo + hi).div_euclid(2).max(0);
        match test(mid as u64, &mut pool, &mut margins, &mut trace)? {
            (Some(true), Some(d)) => {
                hi = worst(&d).min(mid as u64) as i64;
                best = d;
            }
            (Some(false), _) => lo = mid,
            _ => {
                return Ok(finish(
                    hi as u64,
                    (lo + 1) as u64,
                    MdsdStatus::BudgetExhausted,
                    Some(best),
                    trace,
                ))
            }
        }
    }
    Ok(finish(hi as u64, hi as u64, MdsdStatus::Optimal, Some(best), trace))
}
