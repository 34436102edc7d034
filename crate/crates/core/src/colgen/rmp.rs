//! The slack master: minimize `s + λ_0` subject to
//!
//! - `Σ_t λ_t m^t_ij >= x_ij` for cells with `x_ij > 0`,
//! - `Σ_t λ_t m^t_ij - s <= x_ij` for cells with `x_ij < 1`,
//! - `Σ_t λ_t = 1`, `λ >= 0`,
//!
//! over the pool columns of cardinality at least `k` plus an all-ones
//! super-column with weight `λ_0`. Charging the super-column keeps it out
//! of the basis whenever real columns do as well; otherwise it can tie with
//! them (for instance when every cell of `X` is one). The reduced cost of a column `M` is
//! `-Σ_(i,j) in M (u_ij + v_ij) - w`.

use crate::assignment::{Decomposition, Matching, ProbabilisticAssignment};
use crate::colgen::heuristic::sd_local_search;
use crate::colgen::orders::OrderSolver;
use crate::colgen::pool::ColumnPool;
use crate::colgen::pricing::{MipOutcome, PeModel, PeModelOptions};
use crate::colgen::{decomposition_from_weights, Budget, CgStats};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::lp::{LinearProgramSpec, MipLimits, Relation, Sense, Simplex, Status};
use crate::rational::to_f64;

/// Duals of the slack master, dense over `|N| x |O|` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RmpDuals {
    pub n_objects: usize,
    /// Lower-bound rows, `>= 0`.
    pub u: Vec<f64>,
    /// Upper-bound rows, `<= 0`.
    pub v: Vec<f64>,
    /// Convexity row.
    pub w: f64,
}

impl RmpDuals {
    pub fn reduced_cost(&self, m: &Matching) -> f64 {
        let mut rc = -self.w;
        for (i, a) in m.assignment().iter().enumerate() {
            if let Some(j) = a {
                let c = i * self.n_objects + j;
                rc -= self.u[c] + self.v[c];
            }
        }
        rc
    }

    /// Per-cell pricing costs `-(u_ij + v_ij)`.
    pub fn cell_costs(&self) -> Vec<f64> {
        self.u.iter().zip(&self.v).map(|(a, b)| -(a + b)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RmpSolution {
    pub s: f64,
    pub super_weight: f64,
    /// `(pool index, λ)` for every column in the master.
    pub weights: Vec<(usize, f64)>,
    pub duals: RmpDuals,
}

/// What a column-generation column must satisfy besides Pareto efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Target {
    Cardinality(usize),
    Margin(u64),
}

impl Target {
    pub(crate) fn admits(&self, inst: &Instance, m: &Matching) -> bool {
        match *self {
            Target::Cardinality(k) => m.cardinality() >= k,
            Target::Margin(w) => crate::popularity::unpopularity_margin(inst, m) <= w,
        }
    }

    fn options(&self) -> PeModelOptions {
        match *self {
            Target::Cardinality(k) => PeModelOptions::with_cardinality(k),
            Target::Margin(w) => PeModelOptions {
                margin_bound: Some(w),
                ..Default::default()
            },
        }
    }

    fn min_card(&self) -> usize {
        match *self {
            Target::Cardinality(k) => k,
            Target::Margin(_) => 0,
        }
    }
}

/// Heuristic-then-exact pricing for one target. The exact step enumerates
/// price orders when the instance has few objects and a cardinality target,
/// and solves the integer program otherwise.
pub(crate) struct Pricer<'a> {
    inst: &'a Instance,
    target: Target,
    opts: PeModelOptions,
    orders: Option<OrderSolver>,
    model: Option<PeModel>,
}

pub(crate) enum Priced {
    /// Improving columns, best first, with the exact minimum when the
    /// integer program produced them.
    Columns(Vec<(Matching, f64)>, Option<f64>),
    /// No improving column; carries the exact minimum when known.
    None(Option<f64>),
    /// The exact program hit its limits without an improving incumbent.
    Limit,
}

impl<'a> Pricer<'a> {
    pub(crate) fn new(inst: &'a Instance, x: Option<&ProbabilisticAssignment>, target: Target) -> Self {
        let mut opts = target.options();
        if let Some(x) = x {
            opts = opts.fix_from(x);
        }
        let orders = match target {
            Target::Cardinality(k) => OrderSolver::new(inst, k, &opts.fixed_cells),
            Target::Margin(_) => None,
        };
        Pricer {
            inst,
            target,
            opts,
            orders,
            model: None,
        }
    }

    /// Minimizes `Σ cost_ij m_ij + constant` over admissible PE matchings,
    /// keeping those below `-budget.pricing_tolerance()` that are not in
    /// `pool`.
    pub(crate) fn price(
        &mut self,
        cost: &[f64],
        constant: f64,
        pool: &ColumnPool,
        budget: &Budget,
        seed: u64,
        stats: &mut CgStats,
    ) -> Priced {
        let tol = budget.pricing_tolerance();
        let found: Vec<(Matching, f64)> = sd_local_search(
            self.inst,
            cost,
            constant,
            self.target.min_card(),
            tol,
            budget.columns_per_iteration * 4,
            seed,
        )
        .into_iter()
        .filter(|(m, _)| !pool.contains(m) && self.target.admits(self.inst, m))
        .take(budget.columns_per_iteration)
        .collect();
        if !found.is_empty() {
            return Priced::Columns(found, None);
        }
        stats.exact_pricing_calls += 1;
        if let Some(orders) = &mut self.orders {
            let Some(all) = orders.optimize(cost, Sense::Min, &budget.deadline) else {
                return Priced::Limit;
            };
            let Some(min) = all.first().map(|(_, v)| v + constant) else {
                return Priced::None(None);
            };
            let cols: Vec<(Matching, f64)> = all
                .into_iter()
                .map(|(m, v)| (m, v + constant))
                .filter(|(m, v)| *v < -tol && !pool.contains(m))
                .take(budget.columns_per_iteration)
                .collect();
            return if cols.is_empty() {
                Priced::None(Some(min))
            } else {
                Priced::Columns(cols, Some(min))
            };
        }
        let inst = self.inst;
        let opts = &self.opts;
        let model = self.model.get_or_insert_with(|| PeModel::new(inst, opts));
        let n_obj = inst.n_objects();
        model.set_objective(|i, j| cost[i * n_obj + j], constant);
        // only columns below -tol matter
        let limits = MipLimits {
            cutoff: Some(-tol),
            ..budget.mip_limits()
        };
        match model.solve_outcome(&limits) {
            MipOutcome::Infeasible => Priced::None(None),
            MipOutcome::Optimal(m, v) => {
                if v < -tol && !pool.contains(&m) {
                    Priced::Columns(vec![(m, v)], Some(v))
                } else {
                    Priced::None(Some(v))
                }
            }
            MipOutcome::Limit(Some((m, v))) if v < -tol && !pool.contains(&m) => {
                Priced::Columns(vec![(m, v)], None)
            }
            MipOutcome::Limit(_) => Priced::Limit,
        }
    }
}

/// The slack master with warm-started column additions.
pub(crate) struct Rmp {
    simplex: Simplex,
    n_objects: usize,
    row_a: Vec<Option<usize>>,
    row_b: Vec<Option<usize>>,
    row_c: usize,
    // simplex variable -> pool index, from variable 2 on
    members: Vec<usize>,
}

const S_VAR: usize = 0;
const SUPER_VAR: usize = 1;


impl Rmp {
    pub(crate) fn new(
        inst: &Instance,
        x: &ProbabilisticAssignment,
        pool: &ColumnPool,
        members: &[usize],
    ) -> Self {
        let n = x.n_agents();
        let m = x.n_objects();
        let mut spec = LinearProgramSpec::new(Sense::Min);
        spec.add_var("s", 0.0, f64::INFINITY, 1.0);
        spec.add_var("super", 0.0, f64::INFINITY, 1.0);
        let mut row_a = vec![None; n * m];
        let mut row_b = vec![None; n * m];
        // no real column uses an unacceptable cell, so those identical rows
        // collapse into one
        let mut unacceptable_row: Option<usize> = None;
        for i in 0..n {
            for j in 0..m {
                let v = to_f64(x.get(i, j));
                let c = i * m + j;
                if !inst.is_acceptable(i, j) {
                    let r = *unacceptable_row.get_or_insert_with(|| {
                        spec.add_constraint(
                            "hi_unacceptable",
                            vec![(SUPER_VAR, 1.0), (S_VAR, -1.0)],
                            Relation::Le,
                            0.0,
                        )
                    });
                    row_b[c] = Some(r);
                    continue;
                }
                if v > 0.0 {
                    row_a[c] = Some(spec.add_constraint(
                        format!("lo_{i}_{j}"),
                        vec![(SUPER_VAR, 1.0)],
                        Relation::Ge,
                        v,
                    ));
                }
                if v < 1.0 {
                    row_b[c] = Some(spec.add_constraint(
                        format!("hi_{i}_{j}"),
                        vec![(SUPER_VAR, 1.0), (S_VAR, -1.0)],
                        Relation::Le,
                        v,
                    ));
                }
            }
        }
        let row_c = spec.add_constraint("convex", vec![(SUPER_VAR, 1.0)], Relation::Eq, 1.0);
        let mut rmp = Rmp {
            simplex: Simplex::new(&spec),
            n_objects: m,
            row_a,
            row_b,
            row_c,
            members: Vec::new(),
        };
        for &t in members {
            rmp.add(pool.get(t), t);
        }
        rmp
    }

    pub(crate) fn add(&mut self, column: &Matching, pool_index: usize) {
        let mut coeffs = Vec::with_capacity(2 * column.cardinality() + 1);
        for (i, a) in column.assignment().iter().enumerate() {
            if let Some(j) = a {
                let c = i * self.n_objects + j;
                if let Some(r) = self.row_a[c] {
                    coeffs.push((r, 1.0));
                }
                if let Some(r) = self.row_b[c] {
                    coeffs.push((r, 1.0));
                }
            }
        }
        coeffs.push((self.row_c, 1.0));
        self.simplex.add_column(0.0, 0.0, f64::INFINITY, &coeffs);
        self.members.push(pool_index);
    }

    /// `None` when the deadline stopped the simplex.
    pub(crate) fn solve(&mut self, budget: &Budget) -> Result<Option<RmpSolution>> {
        match self.simplex.solve(&budget.deadline) {
            Status::Optimal => {}
            Status::LimitReached => return Ok(None),
            other => return Err(Error::Solver(format!("restricted master ended with {other:?}"))),
        }
        let primal = self.simplex.primal();
        let (y, _) = self.simplex.duals_and_reduced_costs();
        let pick = |rows: &[Option<usize>]| -> Vec<f64> {
            rows.iter().map(|r| r.map_or(0.0, |r| y[r])).collect()
        };
        Ok(Some(RmpSolution {
            s: primal[S_VAR].max(0.0),
            super_weight: primal[SUPER_VAR].max(0.0),
            weights: self
                .members
                .iter()
                .enumerate()
                .map(|(k, &t)| (t, primal[2 + k].max(0.0)))
                .collect(),
            duals: RmpDuals {
                n_objects: self.n_objects,
                u: pick(&self.row_a),
                v: pick(&self.row_b),
                w: y[self.row_c],
            },
        }))
    }
}

/// Solves the slack master once over the pool columns of cardinality at
/// least `k`.
pub fn solve_rmp(
    inst: &Instance,
    x: &ProbabilisticAssignment,
    pool: &ColumnPool,
    k: usize,
) -> Result<RmpSolution> {
    x.check_dims(inst)?;
    let mut rmp = Rmp::new(inst, x, pool, &pool.at_least(k));
    rmp.solve(&Budget::default())?
        .ok_or_else(|| Error::Solver("restricted master hit its limit".into()))
}

/// Exact pricing: the Pareto-efficient matching of cardinality at least `k`
/// with the most negative reduced cost, if that cost is below `-tol`.
/// `fix`, when given, pins the cells where it is 0 or 1.
pub fn price_pe_matching(
    inst: &Instance,
    duals: &RmpDuals,
    k: usize,
    fix: Option<&ProbabilisticAssignment>,
    tol: f64,
) -> Result<Option<Matching>> {
    let mut opts = PeModelOptions::with_cardinality(k);
    if let Some(x) = fix {
        opts = opts.fix_from(x);
    }
    let mut model = PeModel::new(inst, &opts);
    let cost = duals.cell_costs();
    let n_obj = inst.n_objects();
    model.set_objective(|i, j| cost[i * n_obj + j], -duals.w);
    Ok(model
        .solve(&MipLimits::default())?
        .and_then(|(m, v)| (v < -tol).then_some(m)))
}

/// Result of column generation on the slack master at one target.
#[derive(Debug, Clone)]
pub struct RmpOutcome {
    /// `Some(true)` when `s* <= tol` with a negligible super-column,
    /// `Some(false)` when pricing proved `s* > tol`, `None` on budget
    /// exhaustion.
    pub feasible: Option<bool>,
    /// Best (last) master objective.
    pub s: f64,
    pub super_weight: f64,
    /// Lottery over the real columns; exact up to `s` when feasible,
    /// approximate otherwise.
    pub decomposition: Option<Decomposition>,
    pub stats: CgStats,
}

pub(crate) fn run_rmp(
    inst: &Instance,
    x: &ProbabilisticAssignment,
    pool: &mut ColumnPool,
    members: Vec<usize>,
    pricer: &mut Pricer<'_>,
    budget: &Budget,
) -> Result<RmpOutcome> {
    let tol = budget.tolerance;
    let mut rmp = Rmp::new(inst, x, pool, &members);
    let mut stats = CgStats::default();
    let mut last: Option<RmpSolution> = None;
    let finish = |feasible: Option<bool>, last: Option<RmpSolution>, stats: CgStats, pool: &ColumnPool| {
        let (s, super_weight, decomposition) = match last {
            Some(sol) => {
                let d = decomposition_from_weights(x.n_objects(), pool.columns(), &sol.weights).ok();
                (sol.s, sol.super_weight, d)
            }
            None => (f64::INFINITY, 1.0, None),
        };
        Ok(RmpOutcome {
            feasible,
            s,
            super_weight,
            decomposition,
            stats,
        })
    };
    loop {
        if budget.deadline.expired() || stats.iterations >= budget.max_iterations {
            return finish(None, last, stats, pool);
        }
        let Some(sol) = rmp.solve(budget)? else {
            return finish(None, last, stats, pool);
        };
        stats.iterations += 1;
        if sol.s <= tol && sol.super_weight <= tol {
            return finish(Some(true), Some(sol), stats, pool);
        }
        let cost = sol.duals.cell_costs();
        let constant = -sol.duals.w;
        let seed = 0x5eed ^ stats.iterations as u64;
        let value = sol.s + sol.super_weight;
        last = Some(sol);
        match pricer.price(&cost, constant, pool, budget, seed, &mut stats) {
            Priced::Columns(cols, exact_min) => {
                if exact_min.is_some_and(|v| value + v > tol) {
                    // Lagrangian bound: the full master stays above tol
                    return finish(Some(false), last, stats, pool);
                }
                for (m, _) in cols {
                    if pool.insert(inst, m.clone())? {
                        let t = pool.position(&m).expect("just inserted");
                        rmp.add(&m, t);
                        stats.columns_generated += 1;
                    }
                }
            }
            Priced::None(_) => return finish(Some(false), last, stats, pool),
            Priced::Limit => return finish(None, last, stats, pool),
        }
    }
}

/// Column generation on the slack master at cardinality `k`, adding priced
/// columns to `pool`.
pub fn solve_mdsd_rmp(
    inst: &Instance,
    x: &ProbabilisticAssignment,
    k: usize,
    pool: &mut ColumnPool,
    budget: &Budget,
) -> Result<RmpOutcome> {
    x.check_dims(inst)?;
    let mut pricer = Pricer::new(inst, Some(x), Target::Cardinality(k));
    let members = pool.at_least(k);
    run_rmp(inst, x, pool, members, &mut pricer, budget)
}
