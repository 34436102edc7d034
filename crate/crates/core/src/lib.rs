//! Decomposing probabilistic one-sided matching assignments into lotteries
//! over Pareto-efficient matchings while maximizing the worst-case number of
//! assigned agents.
//!
//! The crate is organized bottom-up:
//!
//! - [`instance`] and [`assignment`]: the domain model (instances, matchings,
//!   probabilistic assignments, decompositions).
//! - [`efficiency`]: serial dictatorship, Pareto-efficiency certification and
//!   enumeration of all Pareto-efficient matchings of small instances.
//! - [`mechanisms`]: random serial dictatorship (exact and sampled) and the
//!   probabilistic serial eating mechanism.
//! - [`bvn`]: the polynomial maximin decomposition built on cycle canceling.
//! - [`lp`]: a self-contained bounded simplex and branch-and-bound solver.
//! - [`colgen`]: the two column-generation frameworks and the binary search
//!   for the best worst-case cardinality over Pareto-efficient matchings.
//! - [`popularity`]: unpopularity margins and the bounded-margin pricing block.
//! - [`datagen`]: the parameterized instance generator and the two adversarial
//!   instance families.
//! - [`io`]: the JSON file formats shared with the command-line tool.

pub mod assignment;
pub mod bvn;
pub mod clock;
pub mod colgen;
pub mod datagen;
pub mod efficiency;
pub mod error;
pub mod instance;
pub mod io;
pub mod lp;
pub mod mechanisms;
pub mod popularity;
pub mod rng;

mod rational;

pub use assignment::{ConstraintStructure, Decomposition, Matching, ProbabilisticAssignment};
pub use efficiency::{
    enumerate_pe_matchings, extreme_pe_cardinality, is_pareto_efficient, serial_dictatorship,
    Direction,
};
pub use error::{Error, Result};
pub use instance::{Instance, RawInstance};
pub use rational::{ceil_to_u64, floor_to_u64, rat, to_f64 as rat_to_f64, Rat};

/// Default tolerance used by every floating-point decision (LP feasibility,
/// reduced-cost sign tests, decomposition acceptance).
pub const TOLERANCE: f64 = 1e-4;

/// Default number of sampled orderings for RSD estimates and initial columns.
pub const DEFAULT_SAMPLES: usize = 10_000;
