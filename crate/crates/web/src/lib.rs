//! WebAssembly bindings for the single-page demo in `www/`.
//!
//! Three operations, each taking and returning JSON strings in the same
//! formats as the command-line tool:
//!
//! - [`assign`]: the RSD (exact or sampled) or PS assignment of an instance;
//! - [`decompose`]: a lottery over arbitrary matchings of cardinality
//!   `⌊μ⌋` or `⌈μ⌉`;
//! - [`solve`]: the lottery over Pareto-efficient matchings with the best
//!   worst-case cardinality.
//!
//! The `*_json` functions hold the logic and are usable natively; the
//! exported wrappers only convert errors for JavaScript.

use lottery_core::bvn::decompose_md;
use lottery_core::colgen::{binary_search_z, Budget, ColumnPool, Framework, MdsdStatus, SearchOptions};
use lottery_core::efficiency::{extreme_pe_cardinality, Direction};
use lottery_core::io::{parse_assignment, parse_instance, DecompositionFile, MatrixFile};
use lottery_core::mechanisms::{probabilistic_serial, rsd_exact_lottery, rsd_sampled, RSD_EXACT_LIMIT};
use lottery_core::{floor_to_u64, rat_to_f64, Instance, ProbabilisticAssignment};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Orderings sampled when the instance is too large to enumerate.
const DEMO_SAMPLES: u64 = 2_000;

#[derive(Serialize)]
struct Assigned {
    mechanism: &'static str,
    exact: bool,
    orderings: u64,
    mu: String,
    mu_value: f64,
    assignment: MatrixFile,
}

#[derive(Serialize)]
struct Decomposed {
    mu: String,
    worst_case: usize,
    decomposition: DecompositionFile,
}

#[derive(Serialize)]
struct Solved {
    status: &'static str,
    z: usize,
    upper: usize,
    floor_mu: u64,
    p_min: usize,
    p_max: usize,
    iterations: usize,
    decomposition: Option<DecompositionFile>,
}

fn text<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(text)
}

/// Exact RSD when the agents can be enumerated, sampled otherwise, and the
/// SD outcomes as starting columns when exact.
fn rsd_with_pool(inst: &Instance, seed: u64) -> Result<(ProbabilisticAssignment, bool, u64, Option<ColumnPool>), String> {
    if inst.n_agents() <= RSD_EXACT_LIMIT {
        let lottery = rsd_exact_lottery(inst).map_err(text)?;
        let mut pool = ColumnPool::new();
        for (m, _) in &lottery.outcomes {
            pool.insert(inst, m.clone()).map_err(text)?;
        }
        Ok((lottery.assignment(inst.n_objects()), true, lottery.total, Some(pool)))
    } else {
        let est = rsd_sampled(inst, DEMO_SAMPLES, seed).map_err(text)?;
        Ok((est.assignment, false, est.sample_count, None))
    }
}

/// `mechanism` is `"rsd"` or `"ps"`.
pub fn assign_json(instance: &str, mechanism: &str, seed: u64) -> Result<String, String> {
    let inst = parse_instance(instance).map_err(text)?;
    let (name, x, exact, orderings) = match mechanism {
        "rsd" => {
            let (x, exact, n, _) = rsd_with_pool(&inst, seed)?;
            ("rsd", x, exact, n)
        }
        "ps" => ("ps", probabilistic_serial(&inst), true, 0),
        other => return Err(format!("unknown mechanism `{other}` (expected rsd or ps)")),
    };
    let mu = x.mu();
    to_json(&Assigned {
        mechanism: name,
        exact,
        orderings,
        mu: mu.to_string(),
        mu_value: rat_to_f64(&mu),
        assignment: MatrixFile::from_assignment(&inst, &x),
    })
}

pub fn decompose_json(instance: &str, assignment: &str) -> Result<String, String> {
    let inst = parse_instance(instance).map_err(text)?;
    let x = parse_assignment(&inst, assignment).map_err(text)?;
    let d = decompose_md(&inst, &x).map_err(text)?;
    to_json(&Decomposed {
        mu: x.mu().to_string(),
        worst_case: d.worst_case_cardinality(),
        decomposition: DecompositionFile::from_decomposition(&inst, &d),
    })
}

/// Solves for `assignment`, or for the RSD assignment when it is empty.
/// `framework` is `"rmp"` or `"alpha"`.
pub fn solve_json(instance: &str, assignment: &str, framework: &str, seed: u64) -> Result<String, String> {
    let inst = parse_instance(instance).map_err(text)?;
    let framework: Framework = framework.parse()?;
    let p_min = extreme_pe_cardinality(&inst, Direction::Min).map_err(text)?;
    let p_max = extreme_pe_cardinality(&inst, Direction::Max).map_err(text)?;
    let (x, pool, known) = if assignment.trim().is_empty() {
        let (x, _, _, pool) = rsd_with_pool(&inst, seed)?;
        // SD outcomes are efficient, so p- is always attainable
        (x, pool, Some(p_min))
    } else {
        (parse_assignment(&inst, assignment).map_err(text)?, None, None)
    };
    let r = binary_search_z(
        &inst,
        &x,
        &SearchOptions {
            framework,
            budget: Budget::default(),
            known_feasible: known,
            pool,
            samples: DEMO_SAMPLES,
            seed,
        },
    )
    .map_err(text)?;
    to_json(&Solved {
        status: match r.status {
            MdsdStatus::Optimal => "optimal",
            MdsdStatus::BudgetExhausted => "budget-exhausted",
            MdsdStatus::NotDecomposable => "not-decomposable",
        },
        z: r.z,
        upper: r.upper,
        floor_mu: floor_to_u64(&x.mu()),
        p_min,
        p_max,
        iterations: r.iterations(),
        decomposition: r.decomposition.as_ref().map(|d| DecompositionFile::from_decomposition(&inst, d)),
    })
}

#[wasm_bindgen]
pub fn assign(instance: &str, mechanism: &str, seed: u64) -> Result<String, JsError> {
    assign_json(instance, mechanism, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn decompose(instance: &str, assignment: &str) -> Result<String, JsError> {
    decompose_json(instance, assignment).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn solve(instance: &str, assignment: &str, framework: &str, seed: u64) -> Result<String, JsError> {
    solve_json(instance, assignment, framework, seed).map_err(|e| JsError::new(&e))
}
