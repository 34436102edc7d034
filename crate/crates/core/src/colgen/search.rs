use serde::{Deserialize, Serialize};

use crate::assignment::{Decomposition, ProbabilisticAssignment};
use crate::clock::Stopwatch;
use crate::colgen::alpha::solve_mdsd_alpha;
use crate::colgen::pool::{initial_columns, ColumnPool};
use crate::colgen::rmp::solve_mdsd_rmp;
use crate::colgen::Budget;
use crate::error::Result;
use crate::instance::Instance;
use crate::rational::floor_to_u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Framework {
    #[default]
    Rmp,
    Alpha,
}

impl std::str::FromStr for Framework {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "rmp" => Ok(Framework::Rmp),
            "alpha" => Ok(Framework::Alpha),
            other => Err(format!("unknown framework `{other}` (expected rmp or alpha)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MdsdStatus {
    Optimal,
    BudgetExhausted,
    NotDecomposable,
}

/// One tested cardinality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub k: usize,
    /// `s*` for the slack master, `α*` for the alpha master.
    pub value: f64,
    /// `None` when the budget ran out at this `k`.
    pub feasible: Option<bool>,
    pub iterations: usize,
    pub columns_generated: usize,
}

#[derive(Debug, Clone)]
pub struct MdsdResult {
    /// Largest certified cardinality (meaningful unless not decomposable).
    pub z: usize,
    /// Smallest cardinality known to fail, or `⌊μ(X)⌋` when none failed.
    /// Equals `z` when optimal.
    pub upper: usize,
    pub status: MdsdStatus,
    pub decomposition: Option<Decomposition>,
    pub trace: Vec<TraceEntry>,
    pub columns: usize,
    pub seconds: f64,
}

impl MdsdResult {
    pub fn iterations(&self) -> usize {
        self.trace.iter().map(|t| t.iterations).sum()
    }

    pub fn columns_generated(&self) -> usize {
        self.trace.iter().map(|t| t.columns_generated).sum()
    }
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub framework: Framework,
    pub budget: Budget,
    /// A cardinality known to be feasible, such as `p⁻` when `X` is an
    /// exact RSD assignment. Without one the search starts from 0.
    pub known_feasible: Option<usize>,
    /// Starting columns; sampled from SD otherwise.
    pub pool: Option<ColumnPool>,
    pub samples: u64,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            framework: Framework::Rmp,
            budget: Budget::default(),
            known_feasible: None,
            pool: None,
            samples: crate::DEFAULT_SAMPLES as u64,
            seed: 0,
        }
    }
}

struct Test {
    feasible: Option<bool>,
    decomposition: Option<Decomposition>,
}

fn test_k(
    inst: &Instance,
    x: &ProbabilisticAssignment,
    k: usize,
    pool: &mut ColumnPool,
    opts: &SearchOptions,
    trace: &mut Vec<TraceEntry>,
) -> Result<Test> {
    let (feasible, value, stats, decomposition) = match opts.framework {
        Framework::Rmp => {
            let o = solve_mdsd_rmp(inst, x, k, pool, &opts.budget)?;
            (o.feasible, o.s, o.stats, o.decomposition)
        }
        Framework::Alpha => {
            let o = solve_mdsd_alpha(inst, x, k, pool, &opts.budget)?;
            (o.feasible, o.alpha, o.stats, o.decomposition)
        }
    };
    trace.push(TraceEntry {
        k,
        value,
        feasible,
        iterations: stats.iterations,
        columns_generated: stats.columns_generated,
    });
    Ok(Test {
        feasible,
        decomposition: if feasible == Some(true) { decomposition } else { None },
    })
}

/// `z(X)`: the largest `k` such that `X` is a lottery over Pareto-efficient
/// matchings of cardinality at least `k`.
///
/// Tests `⌊μ(X)⌋` first, then bisects below it. Feasibility is monotone in
/// `k`, so the bracket `[last feasible, first infeasible)` shrinks by half
/// per test.
pub fn binary_search_z(
    inst: &Instance,
    x: &ProbabilisticAssignment,
    opts: &SearchOptions,
) -> Result<MdsdResult> {
    x.check_feasible(inst)?;
    let clock = Stopwatch::start();
    let mut pool = match &opts.pool {
        Some(p) => p.clone(),
        None => initial_columns(inst, 0, opts.samples.max(1), opts.seed),
    };
    let ub = floor_to_u64(&x.mu()) as usize;
    let mut trace = Vec::new();
    let done = |z: usize,
                upper: usize,
                status: MdsdStatus,
                decomposition: Option<Decomposition>,
                trace: Vec<TraceEntry>,
                pool: &ColumnPool| MdsdResult {
        z,
        upper,
        status,
        decomposition,
        trace,
        columns: pool.len(),
        seconds: clock.elapsed_secs(),
    };

    let top = test_k(inst, x, ub, &mut pool, opts, &mut trace)?;
    match top.feasible {
        Some(true) => {
            return Ok(done(ub, ub, MdsdStatus::Optimal, top.decomposition, trace, &pool));
        }
        None => {
            let lo = opts.known_feasible.unwrap_or(0).min(ub);
            return Ok(done(lo, ub, MdsdStatus::BudgetExhausted, None, trace, &pool));
        }
        Some(false) => {}
    }

    // lo: feasible (or -1 when nothing is known), hi: infeasible
    let mut lo: i64 = opts.known_feasible.map_or(-1, |k| k.min(ub.saturating_sub(1)) as i64);
    let mut hi: i64 = ub as i64;
    let mut best: Option<Decomposition> = None;
    while hi - lo > 1 {
        let mid = (lo + hi).div_euclid(2).max(0);
        let t = test_k(inst, x, mid as usize, &mut pool, opts, &mut trace)?;
        match t.feasible {
            Some(true) => {
                lo = mid;
                best = t.decomposition;
            }
            Some(false) => hi = mid,
            None => {
                let z = lo.max(0) as usize;
                return Ok(done(z, hi as usize, MdsdStatus::BudgetExhausted, best, trace, &pool));
            }
        }
    }
    if lo < 0 {
        return Ok(done(0, 0, MdsdStatus::NotDecomposable, None, trace, &pool));
    }
    let z = lo as usize;
    if best.is_none() {
        // `lo` came from the caller's witness; fetch its decomposition
        let t = test_k(inst, x, z, &mut pool, opts, &mut trace)?;
        match t.feasible {
            Some(true) => best = t.decomposition,
            Some(false) => {
                return Err(crate::error::Error::Internal(format!(
                    "cardinality {z} was declared feasible but column generation refutes it"
                )))
            }
            None => return Ok(done(z, hi as usize, MdsdStatus::BudgetExhausted, None, trace, &pool)),
        }
    }
    Ok(done(z, z, MdsdStatus::Optimal, best, trace, &pool))
}

/// [`binary_search_z`] with default options for the given framework.
pub fn solve_mdsd(
    inst: &Instance,
    x: &ProbabilisticAssignment,
    framework: Framework,
    budget: Budget,
) -> Result<MdsdResult> {
    binary_search_z(
        inst,
        x,
        &SearchOptions {
            framework,
            budget,
            ..Default::default()
        },
    )
}
