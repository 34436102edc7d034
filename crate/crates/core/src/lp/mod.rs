//! A self-contained LP/MIP solver: bounded revised simplex plus
//! branch-and-bound, behind a small backend trait so an external engine can
//! be swapped in.

mod lpfile;
mod mip;
mod model;
mod simplex;

pub use lpfile::to_lp_format;
pub use mip::{branch_and_bound, branch_and_bound_with, MipLimits, NodeVerdict};
pub use model::{
    Constraint, LinearProgramSpec, Relation, Sense, SolveResult, SolveStats, Status, Variable,
};
pub use simplex::{solve_relaxation, BasisSnapshot, Simplex};

use crate::clock::Deadline;
use crate::error::{Error, Result};

/// Anything that can solve the programs built by the column-generation and
/// pricing layers.
pub trait LpBackend {
    fn name(&self) -> &str;
    fn solve_lp(&self, spec: &LinearProgramSpec) -> Result<SolveResult>;
    fn solve_mip(&self, spec: &LinearProgramSpec, limits: &MipLimits) -> Result<SolveResult>;
}

/// The built-in simplex and branch-and-bound.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinBackend;

impl LpBackend for BuiltinBackend {
    fn name(&self) -> &str {
        "builtin"
    }

    fn solve_lp(&self, spec: &LinearProgramSpec) -> Result<SolveResult> {
        solve_lp(spec)
    }

    fn solve_mip(&self, spec: &LinearProgramSpec, limits: &MipLimits) -> Result<SolveResult> {
        spec.validate()?;
        Ok(branch_and_bound(spec, limits))
    }
}

/// Solves a continuous LP.
pub fn solve_lp(spec: &LinearProgramSpec) -> Result<SolveResult> {
    spec.validate()?;
    if spec.has_integers() {
        return Err(Error::Precondition(
            "solve_lp called on a program with integer variables".into(),
        ));
    }
    let mut s = Simplex::new(spec);
    let status = s.solve(&Deadline::none());
    Ok(s.result(status))
}

/// Solves a mixed-integer program with default limits.
pub fn solve_mip(spec: &LinearProgramSpec) -> Result<SolveResult> {
    BuiltinBackend.solve_mip(spec, &MipLimits::default())
}
