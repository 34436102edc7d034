//! The Pareto-efficient matching integer program used by pricing and by the
//! cardinality extremes.
//!
//! Feasibility block: binary `m_ij` on acceptable pairs, one object per
//! agent, capacities and an optional cardinality floor. Efficiency block
//! (competitive-equilibrium prices):
//!
//! - `s_jk = #{i : m_ij = 1, k >_i j}` and its indicator `t_jk`, only for
//!   ordered pairs where some agent ranks `k` above `j`;
//! - fullness flags `f_j` (`f_j = 1` iff `j` is at capacity);
//! - maximality: an agent left out forces every acceptable object full;
//! - no waste: an agent who gets something worse than `j`, or nothing,
//!   leaves `j` filled by the others;
//! - integer prices `p_j in [0, |O|]` with `p_j <= |O| f_j` and
//!   `p_k >= p_j + 1 - (|O| + 1)(1 - t_jk)`.
//!
//! Once every `m_ij` of a node is integral the matching is settled directly:
//! it is accepted when Pareto efficient (and within the margin bound) and
//! the node is pruned otherwise, so the search never branches on prices.
//!
//! An optional block bounds the unpopularity margin of the matching through
//! the dual of the margin LP.

use crate::assignment::{Matching, ProbabilisticAssignment};
use crate::error::Result;
use crate::instance::Instance;
use crate::efficiency::is_pareto_efficient;
use crate::lp::{branch_and_bound_with, LinearProgramSpec, MipLimits, NodeVerdict, Relation, Sense, Status};
use crate::popularity::unpopularity_margin;
use num_traits::{One, Zero};

/// Which optional blocks to attach to the model.
#[derive(Debug, Clone, Default)]
pub struct PeModelOptions {
    /// Cardinality floor `Σ m_ij >= k`.
    pub min_cardinality: Option<usize>,
    /// Cells pinned to one (`true`) or zero (`false`).
    pub fixed_cells: Vec<(usize, usize, bool)>,
    /// Upper bound on the unpopularity margin.
    pub margin_bound: Option<u64>,
    /// Drop the competitive-equilibrium block (any feasible matching).
    pub without_efficiency: bool,
}

impl PeModelOptions {
    pub fn with_cardinality(k: usize) -> Self {
        PeModelOptions {
            min_cardinality: Some(k),
            ..Default::default()
        }
    }

    /// Pins `m_ij` where `x_ij` is 0 or 1: every matching in a decomposition
    /// of `x` agrees with it on those cells.
    pub fn fix_from(mut self, x: &ProbabilisticAssignment) -> Self {
        for i in 0..x.n_agents() {
            for j in 0..x.n_objects() {
                let v = x.get(i, j);
                if v.is_zero() {
                    self.fixed_cells.push((i, j, false));
                } else if v.is_one() {
                    self.fixed_cells.push((i, j, true));
                }
            }
        }
        self
    }
}

#[derive(Debug, Clone)]
pub enum MipOutcome {
    Optimal(Matching, f64),
    Infeasible,
    /// Node or time limit hit; carries the incumbent if one was found.
    Limit(Option<(Matching, f64)>),
}

/// The assembled integer program.
#[derive(Debug, Clone)]
pub struct PeModel {
    spec: LinearProgramSpec,
    inst: Instance,
    efficient: bool,
    margin_bound: Option<u64>,
    n_agents: usize,
    // (agent, object, variable)
    cells: Vec<(usize, usize, usize)>,
    constant: f64,
}

impl PeModel {
    pub fn new(inst: &Instance, opts: &PeModelOptions) -> Self {
        let n = inst.n_agents();
        let n_obj = inst.n_objects();
        let big = n_obj as f64;
        let mut spec = LinearProgramSpec::new(Sense::Min);

        let mut var = vec![None; n * n_obj];
        let mut cells = Vec::new();
        for i in 0..n {
            for &j in inst.prefs(i) {
                let v = spec.add_binary(format!("m_{i}_{j}"), 0.0);
                spec.variables[v].priority = 2;
                var[i * n_obj + j] = Some(v);
                cells.push((i, j, v));
            }
        }
        for &(i, j, one) in &opts.fixed_cells {
            if let Some(v) = var.get(i * n_obj + j).copied().flatten() {
                let b = if one { 1.0 } else { 0.0 };
                spec.variables[v].lower = b;
                spec.variables[v].upper = b;
            }
        }
        let row = |i: usize| -> Vec<(usize, f64)> {
            inst.prefs(i).iter().map(|&j| (var[i * n_obj + j].unwrap(), 1.0)).collect()
        };
        let column = |j: usize| -> Vec<(usize, f64)> {
            (0..n).filter_map(|i| var[i * n_obj + j].map(|v| (v, 1.0))).collect()
        };

        for i in 0..n {
            if !inst.prefs(i).is_empty() {
                spec.add_constraint(format!("agent_{i}"), row(i), Relation::Le, 1.0);
            }
        }
        for j in 0..n_obj {
            let col = column(j);
            if col.len() > inst.capacity(j) as usize {
                spec.add_constraint(format!("cap_{j}"), col, Relation::Le, inst.capacity(j) as f64);
            }
        }
        if let Some(k) = opts.min_cardinality {
            spec.add_constraint(
                "cardinality",
                cells.iter().map(|&(_, _, v)| (v, 1.0)).collect(),
                Relation::Ge,
                k as f64,
            );
        }

        if !opts.without_efficiency {
            let f: Vec<usize> = (0..n_obj)
                .map(|j| {
                    let v = spec.add_binary(format!("f_{j}"), 0.0);
                    spec.variables[v].priority = 1;
                    v
                })
                .collect();
            let p: Vec<usize> = (0..n_obj)
                .map(|j| spec.add_int_var(format!("p_{j}"), 0.0, big, 0.0))
                .collect();
            for j in 0..n_obj {
                let q = inst.capacity(j) as f64;
                let col = column(j);
                // f_j q_j <= Σ_i m_ij
                let mut c: Vec<(usize, f64)> = col.iter().map(|&(v, _)| (v, -1.0)).collect();
                c.push((f[j], q));
                spec.add_constraint(format!("full_lo_{j}"), c, Relation::Le, 0.0);
                // f_j + q_j >= Σ_i m_ij + 1
                let mut c: Vec<(usize, f64)> = col.iter().map(|&(v, _)| (v, -1.0)).collect();
                c.push((f[j], 1.0));
                spec.add_constraint(format!("full_hi_{j}"), c, Relation::Ge, 1.0 - q);
                // p_j <= |O| f_j
                spec.add_constraint(
                    format!("price_zero_{j}"),
                    vec![(f[j], big), (p[j], -1.0)],
                    Relation::Ge,
                    0.0,
                );
            }
            for i in 0..n {
                for &j in inst.prefs(i) {
                    let mut c = row(i);
                    c.push((f[j], 1.0));
                    spec.add_constraint(format!("maximal_{i}_{j}"), c, Relation::Ge, 1.0);
                }
            }
            for i in 0..n {
                let list = inst.prefs(i);
                for (r, &j) in list.iter().enumerate() {
                    // q_j Σ_(l >=_i j) m_il + Σ_(i' != i) m_i'j >= q_j
                    let q = inst.capacity(j) as f64;
                    let mut c: Vec<(usize, f64)> =
                        list[..=r].iter().map(|&l| (var[i * n_obj + l].unwrap(), q)).collect();
                    c.extend(
                        (0..n)
                            .filter(|&a| a != i)
                            .filter_map(|a| var[a * n_obj + j].map(|v| (v, 1.0))),
                    );
                    spec.add_constraint(format!("no_waste_{i}_{j}"), c, Relation::Ge, q);
                }
            }
            // envy pairs (j, k): some agent ranks k above j
            let mut envy: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n_obj]; n_obj];
            for i in 0..n {
                let list = inst.prefs(i);
                for (r, &j) in list.iter().enumerate() {
                    for &k in &list[..r] {
                        envy[j][k].push(var[i * n_obj + j].unwrap());
                    }
                }
            }
            let n_f = n as f64;
            for j in 0..n_obj {
                for k in 0..n_obj {
                    if envy[j][k].is_empty() {
                        continue;
                    }
                    let s = spec.add_var(format!("s_{j}_{k}"), 0.0, f64::INFINITY, 0.0);
                    let t = spec.add_binary(format!("t_{j}_{k}"), 0.0);
                    let mut c: Vec<(usize, f64)> = envy[j][k].iter().map(|&v| (v, 1.0)).collect();
                    c.push((s, -1.0));
                    spec.add_constraint(format!("envy_{j}_{k}"), c, Relation::Eq, 0.0);
                    spec.add_constraint(
                        format!("ind_lo_{j}_{k}"),
                        vec![(t, 1.0), (s, -1.0)],
                        Relation::Le,
                        0.0,
                    );
                    spec.add_constraint(
                        format!("ind_hi_{j}_{k}"),
                        vec![(t, n_f), (s, -1.0)],
                        Relation::Ge,
                        0.0,
                    );
                    // (1 - t)(|O| + 1) + p_k >= p_j + 1
                    spec.add_constraint(
                        format!("order_{j}_{k}"),
                        vec![(p[k], 1.0), (p[j], -1.0), (t, -(big + 1.0))],
                        Relation::Ge,
                        -big,
                    );
                }
            }
        }

        if let Some(omega) = opts.margin_bound {
            crate::popularity::attach_margin_block(&mut spec, inst, &var, omega);
        }

        PeModel {
            spec,
            inst: inst.clone(),
            efficient: !opts.without_efficiency,
            margin_bound: opts.margin_bound,
            n_agents: n,
            cells,
            constant: 0.0,
        }
    }

    pub fn spec(&self) -> &LinearProgramSpec {
        &self.spec
    }

    /// `(agent, object)` pairs carrying a variable.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cells.iter().map(|&(i, j, _)| (i, j))
    }

    /// Sets the objective `Σ coef(i, j) m_ij + constant` (minimized).
    pub fn set_objective(&mut self, coef: impl Fn(usize, usize) -> f64, constant: f64) {
        for c in self.spec.objective.iter_mut() {
            *c = 0.0;
        }
        for &(i, j, v) in &self.cells {
            self.spec.objective[v] = coef(i, j);
        }
        self.constant = constant;
    }

    pub fn solve_outcome(&self, limits: &MipLimits) -> MipOutcome {
        let mut inspect = |x: &[f64]| {
            if self.cells.iter().any(|&(_, _, v)| (x[v] - x[v].round()).abs() > limits.integrality_tol) {
                return NodeVerdict::Branch;
            }
            let mut m = Matching::unassigned(self.n_agents);
            let mut sol = x.to_vec();
            for &(i, j, v) in &self.cells {
                sol[v] = x[v].round();
                if sol[v] > 0.5 {
                    m.set(i, Some(j));
                }
            }
            let efficient = !self.efficient || is_pareto_efficient(&self.inst, &m);
            let popular = self.margin_bound.is_none_or(|w| unpopularity_margin(&self.inst, &m) <= w);
            if efficient && popular {
                NodeVerdict::Accept(sol)
            } else {
                // other completions below this node may still be admissible
                NodeVerdict::Branch
            }
        };
        let r = branch_and_bound_with(&self.spec, limits, &mut inspect);
        let read = |x: &[f64]| {
            let mut m = Matching::unassigned(self.n_agents);
            for &(i, j, v) in &self.cells {
                if x[v] > 0.5 {
                    m.set(i, Some(j));
                }
            }
            m
        };
        match r.status {
            Status::Optimal => MipOutcome::Optimal(read(&r.primal), r.objective + self.constant),
            Status::Infeasible => MipOutcome::Infeasible,
            _ => MipOutcome::Limit(
                (!r.primal.is_empty()).then(|| (read(&r.primal), r.objective + self.constant)),
            ),
        }
    }

    /// Optimal matching and objective, `None` if infeasible. Hitting a limit
    /// is reported as a solver error.
    pub fn solve(&self, limits: &MipLimits) -> Result<Option<(Matching, f64)>> {
        match self.solve_outcome(limits) {
            MipOutcome::Optimal(m, v) => Ok(Some((m, v))),
            MipOutcome::Infeasible => Ok(None),
            MipOutcome::Limit(_) => Err(crate::error::Error::Solver(
                "integer program stopped at its node or time limit".into(),
            )),
        }
    }
}
