//! Column generation for the maximin decomposition over Pareto-efficient
//! matchings.
//!
//! Two restricted master problems are provided. The slack master ([`rmp`])
//! minimizes the largest overshoot `s` of a lottery over columns of
//! cardinality at least `k`, with an all-ones super-column keeping it
//! feasible; `X` decomposes at `k` iff the optimum is zero. The alpha master
//! ([`alpha`]) reproduces `X` exactly and maximizes the weight `α` on columns
//! of cardinality at least `k`; `X` decomposes at `k` iff `α* = 1`. Both are
//! driven by [`binary_search_z`].

pub mod alpha;
pub(crate) mod heuristic;
pub mod orders;
pub mod pool;
pub mod pricing;
pub mod rmp;
mod search;

pub use alpha::{solve_mdsd_alpha, AlphaOutcome};
pub use pool::{initial_columns, ColumnPool};
pub use pricing::{MipOutcome, PeModel, PeModelOptions};
pub use rmp::{price_pe_matching, solve_mdsd_rmp, solve_rmp, RmpDuals, RmpOutcome, RmpSolution};
pub use search::{
    binary_search_z, solve_mdsd, Framework, MdsdResult, MdsdStatus, SearchOptions, TraceEntry,
};

use serde::{Deserialize, Serialize};

use crate::assignment::{Decomposition, Matching};
use crate::clock::Deadline;
use crate::error::Result;
use crate::lp::MipLimits;
use crate::rational::normalize_weights;

/// Limits for one column-generation run.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub deadline: Deadline,
    /// Master iterations allowed per tested `k`.
    pub max_iterations: usize,
    /// Threshold for `s* = 0`, `α* = 1` and negative reduced costs.
    pub tolerance: f64,
    /// Node limit of each pricing integer program.
    pub max_nodes: usize,
    /// Columns added per master iteration, at most.
    pub columns_per_iteration: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            deadline: Deadline::none(),
            max_iterations: 5_000,
            tolerance: crate::TOLERANCE,
            max_nodes: 200_000,
            columns_per_iteration: 5,
        }
    }
}

impl Budget {
    pub fn with_time_limit(secs: f64) -> Self {
        Budget {
            deadline: Deadline::after_secs(secs),
            ..Default::default()
        }
    }

    /// Reduced-cost threshold for pricing, well below `tolerance` so that
    /// convergence pins the master optimum to within it.
    pub fn pricing_tolerance(&self) -> f64 {
        self.tolerance * 1e-3
    }

    pub(crate) fn mip_limits(&self) -> MipLimits {
        MipLimits {
            max_nodes: self.max_nodes,
            deadline: self.deadline,
            ..Default::default()
        }
    }
}

/// Work done by one column-generation run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CgStats {
    pub iterations: usize,
    pub columns_generated: usize,
    pub exact_pricing_calls: usize,
}

/// Builds a decomposition from float weights over pool columns, dropping
/// weights that round away.
pub(crate) fn decomposition_from_weights(
    n_objects: usize,
    columns: &[Matching],
    weights: &[(usize, f64)],
) -> Result<Decomposition> {
    let kept: Vec<(usize, f64)> = weights.iter().copied().filter(|&(_, w)| w > 1e-9).collect();
    let rats = normalize_weights(&kept.iter().map(|&(_, w)| w).collect::<Vec<_>>());
    let terms = kept
        .iter()
        .zip(rats)
        .filter(|(_, r)| *r > crate::Rat::from_integer(0.into()))
        .map(|(&(t, _), r)| (r, columns[t].clone()))
        .collect();
    Decomposition::new(n_objects, terms)
}
