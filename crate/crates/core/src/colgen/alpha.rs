//! The alpha master: maximize `α` subject to
//!
//! - `Σ_t λ_t m^t_ij = x_ij` on acceptable cells,
//! - `Σ_(t : |M^t| >= k) λ_t - α >= 0`,
//! - `Σ_t λ_t = 1`, `λ >= 0`.
//!
//! The equality block is generally infeasible over the first columns, so the
//! master starts with a phase that minimizes artificial deviations, pricing
//! against those duals, before switching to `α`. A column `M` improves when
//! `Σ u_ij m_ij + [|M| >= k] v + w < 0`; this is checked with two pricing
//! problems, one without and one with the cardinality floor.

use crate::assignment::{Decomposition, Matching, ProbabilisticAssignment};
use crate::colgen::pool::ColumnPool;
use crate::colgen::rmp::{Priced, Pricer, Target};
use crate::colgen::{decomposition_from_weights, Budget, CgStats};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::lp::{LinearProgramSpec, Relation, Sense, Simplex, Status};
use crate::rational::to_f64;

/// Result of column generation on the alpha master.
#[derive(Debug, Clone)]
pub struct AlphaOutcome {
    /// `Some(true)` when `α* >= 1 - tol`, `Some(false)` when pricing proved
    /// otherwise (or `X` has no exact decomposition), `None` on budget
    /// exhaustion.
    pub feasible: Option<bool>,
    /// Best `α` reached (0 before the equality block is satisfied).
    pub alpha: f64,
    /// Whether the equality block was satisfied over Pareto-efficient
    /// columns; `None` when the budget ran out first.
    pub decomposable: Option<bool>,
    /// Sum of artificial deviations left by the first phase.
    pub residual: f64,
    pub decomposition: Option<Decomposition>,
    pub stats: CgStats,
}

struct AlphaMaster {
    simplex: Simplex,
    n_objects: usize,
    k: usize,
    rows: Vec<Option<usize>>,
    row_k: usize,
    row_convex: usize,
    artificials: Vec<usize>,
    members: Vec<usize>,
    first_column: usize,
}

const ALPHA_VAR: usize = 0;

impl AlphaMaster {
    fn new(inst: &Instance, x: &ProbabilisticAssignment, k: usize) -> Self {
        let (n, m) = (x.n_agents(), x.n_objects());
        let mut spec = LinearProgramSpec::new(Sense::Max);
        spec.add_var("alpha", 0.0, f64::INFINITY, 0.0);
        let mut artificials = Vec::new();
        let mut rows = vec![None; n * m];
        let mut add_eq = |spec: &mut LinearProgramSpec, name: String, rhs: f64| {
            let plus = spec.add_var(format!("{name}+"), 0.0, f64::INFINITY, -1.0);
            let minus = spec.add_var(format!("{name}-"), 0.0, f64::INFINITY, -1.0);
            artificials.push(plus);
            artificials.push(minus);
            spec.add_constraint(name, vec![(plus, 1.0), (minus, -1.0)], Relation::Eq, rhs)
        };
        for i in 0..n {
            for &j in inst.prefs(i) {
                rows[i * m + j] = Some(add_eq(&mut spec, format!("eq_{i}_{j}"), to_f64(x.get(i, j))));
            }
        }
        let row_convex = add_eq(&mut spec, "convex".into(), 1.0);
        let row_k = spec.add_constraint("at_least_k", vec![(ALPHA_VAR, -1.0)], Relation::Ge, 0.0);
        let first_column = spec.n_vars();
        AlphaMaster {
            simplex: Simplex::new(&spec),
            n_objects: m,
            k,
            rows,
            row_k,
            row_convex,
            artificials,
            members: Vec::new(),
            first_column,
        }
    }

    fn add(&mut self, column: &Matching, pool_index: usize) {
        let mut coeffs = Vec::with_capacity(column.cardinality() + 2);
        for (i, a) in column.assignment().iter().enumerate() {
            if let Some(j) = a {
                if let Some(r) = self.rows[i * self.n_objects + j] {
                    coeffs.push((r, 1.0));
                }
            }
        }
        if column.cardinality() >= self.k {
            coeffs.push((self.row_k, 1.0));
        }
        coeffs.push((self.row_convex, 1.0));
        self.simplex.add_column(0.0, 0.0, f64::INFINITY, &coeffs);
        self.members.push(pool_index);
    }

    fn solve(&mut self, budget: &Budget) -> Result<bool> {
        match self.simplex.solve(&budget.deadline) {
            Status::Optimal => Ok(true),
            Status::LimitReached => Ok(false),
            other => Err(Error::Solver(format!("alpha master ended with {other:?}"))),
        }
    }

    fn residual(&self) -> f64 {
        let x = self.simplex.primal();
        self.artificials.iter().map(|&a| x[a].max(0.0)).sum()
    }

    /// Pricing data: per-cell `u`, and the constants `w` and `v`.
    fn duals(&self) -> (Vec<f64>, f64, f64) {
        let (y, _) = self.simplex.duals_and_reduced_costs();
        let u = self.rows.iter().map(|r| r.map_or(0.0, |r| y[r])).collect();
        (u, y[self.row_convex], y[self.row_k])
    }

    fn start_second_phase(&mut self) {
        let x = self.simplex.primal().to_vec();
        for &a in &self.artificials {
            self.simplex.set_bounds(a, 0.0, x[a].max(0.0));
        }
        let mut obj = vec![0.0; self.simplex.n_structural()];
        obj[ALPHA_VAR] = 1.0;
        self.simplex.set_objective(&obj);
    }

    fn weights(&self) -> Vec<(usize, f64)> {
        let x = self.simplex.primal();
        self.members
            .iter()
            .enumerate()
            .map(|(c, &t)| (t, x[self.first_column + c].max(0.0)))
            .collect()
    }
}

/// Column generation on the alpha master at cardinality `k`. All pool
/// columns enter the master; priced columns are added to `pool`.
pub fn solve_mdsd_alpha(
    inst: &Instance,
    x: &ProbabilisticAssignment,
    k: usize,
    pool: &mut ColumnPool,
    budget: &Budget,
) -> Result<AlphaOutcome> {
    x.check_dims(inst)?;
    let tol = budget.tolerance;
    let mut master = AlphaMaster::new(inst, x, k);
    for t in 0..pool.len() {
        master.add(pool.get(t), t);
    }
    let mut free = Pricer::new(inst, Some(x), Target::Cardinality(0));
    let mut floor = Pricer::new(inst, Some(x), Target::Cardinality(k));
    let mut stats = CgStats::default();
    let mut second_phase = false;
    let mut residual = f64::INFINITY;

    let outcome = |feasible: Option<bool>,
                   decomposable: Option<bool>,
                   master: &AlphaMaster,
                   residual: f64,
                   second_phase: bool,
                   stats: CgStats,
                   pool: &ColumnPool| {
        let alpha = if second_phase { master.simplex.primal()[ALPHA_VAR] } else { 0.0 };
        let decomposition = if decomposable == Some(true) {
            decomposition_from_weights(x.n_objects(), pool.columns(), &master.weights()).ok()
        } else {
            None
        };
        AlphaOutcome {
            feasible,
            alpha,
            decomposable,
            residual,
            decomposition,
            stats,
        }
    };

    loop {
        if budget.deadline.expired() || stats.iterations >= budget.max_iterations {
            let d = second_phase.then_some(true);
            return Ok(outcome(None, d, &master, residual, second_phase, stats, pool));
        }
        if !master.solve(budget)? {
            let d = second_phase.then_some(true);
            return Ok(outcome(None, d, &master, residual, second_phase, stats, pool));
        }
        stats.iterations += 1;
        let value = master.simplex.objective();
        if !second_phase {
            residual = master.residual();
            if residual <= 1e-9 {
                master.start_second_phase();
                second_phase = true;
                continue;
            }
        } else if value >= 1.0 - tol {
            return Ok(outcome(Some(true), Some(true), &master, residual, true, stats, pool));
        }

        let (u, w, v) = master.duals();
        let seed = 0xa1fa ^ stats.iterations as u64;
        let mut columns: Vec<Matching> = Vec::new();
        let mut exact_min: Vec<Option<f64>> = Vec::new();
        let mut limited = false;
        for (pricer, constant) in [(&mut free, w), (&mut floor, w + v)] {
            match pricer.price(&u, constant, pool, budget, seed, &mut stats) {
                Priced::Columns(cols, min) => {
                    exact_min.push(min);
                    columns.extend(cols.into_iter().map(|(m, _)| m));
                }
                Priced::None(min) => exact_min.push(Some(min.unwrap_or(-budget.pricing_tolerance()))),
                Priced::Limit => {
                    limited = true;
                    exact_min.push(None);
                }
            }
        }
        // both minima known: Lagrangian bound on the full master
        if let [Some(a), Some(b)] = exact_min[..] {
            let gain = (-a.min(b)).max(0.0);
            if !second_phase && value + gain < -tol {
                return Ok(outcome(Some(false), Some(false), &master, residual, false, stats, pool));
            }
            if second_phase && value + gain < 1.0 - tol {
                return Ok(outcome(Some(false), Some(true), &master, residual, true, stats, pool));
            }
        }
        let mut added = 0;
        for m in columns {
            if pool.insert(inst, m.clone())? {
                let t = pool.position(&m).expect("just inserted");
                master.add(&m, t);
                added += 1;
            }
        }
        stats.columns_generated += added;
        if added > 0 {
            continue;
        }
        if limited {
            let d = second_phase.then_some(true);
            return Ok(outcome(None, d, &master, residual, second_phase, stats, pool));
        }
        // converged
        if !second_phase {
            if residual <= tol {
                master.start_second_phase();
                second_phase = true;
                continue;
            }
            return Ok(outcome(Some(false), Some(false), &master, residual, false, stats, pool));
        }
        return Ok(outcome(Some(value >= 1.0 - tol), Some(true), &master, residual, true, stats, pool));
    }
}
