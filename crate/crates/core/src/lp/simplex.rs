//! Bounded primal revised simplex with an explicit dense basis inverse.
//!
//! Every row `a·x (rel) b` becomes `a·x - r = 0` with a bounded logical
//! variable `r`, so each problem is `A x - r = 0, l <= (x, r) <= u`. The
//! all-logical basis is always a valid starting point. Phase 1 minimizes the
//! sum of bound violations of the basic variables; phase 2 minimizes the
//! objective. Pricing is Dantzig's rule with a switch to Bland's rule after a
//! run of degenerate pivots, and the ratio test is Harris' two-pass test.

use crate::clock::Deadline;
use crate::lp::model::{LinearProgramSpec, Relation, Sense, SolveResult, SolveStats, Status};

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 100;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic at zero with no finite bound.
    Free,
}

/// A basis that can be reinstated after bound changes.
#[derive(Debug, Clone)]
pub struct BasisSnapshot {
    basis: Vec<usize>,
    state: Vec<VarState>,
}

#[derive(Debug, Clone)]
pub struct Simplex {
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    // internal minimization costs of the structural variables
    cost: Vec<f64>,
    sense: Sense,
    lower: Vec<f64>,
    upper: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    x: Vec<f64>,
    binv: Vec<f64>,
    factored: bool,
    since_refactor: usize,
    iterations: usize,
    pub iteration_limit: usize,
}

enum Step {
    Optimal,
    Infeasible,
    Unbounded,
    Failure,
    Pivoted,
}

impl Simplex {
    pub fn new(spec: &LinearProgramSpec) -> Self {
        let m = spec.constraints.len();
        let n = spec.variables.len();
        let mut cols = vec![Vec::new(); n];
        for (i, c) in spec.constraints.iter().enumerate() {
            for &(j, a) in &c.coeffs {
                if a != 0.0 {
                    cols[j].push((i, a));
                }
            }
        }
        // merge repeated entries
        for col in &mut cols {
            col.sort_by_key(|e| e.0);
            col.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
        }
        let sign = if spec.sense == Sense::Max { -1.0 } else { 1.0 };
        let mut lower: Vec<f64> = spec.variables.iter().map(|v| v.lower).collect();
        let mut upper: Vec<f64> = spec.variables.iter().map(|v| v.upper).collect();
        for c in &spec.constraints {
            let (l, u) = match c.relation {
                Relation::Le => (f64::NEG_INFINITY, c.rhs),
                Relation::Ge => (c.rhs, f64::INFINITY),
                Relation::Eq => (c.rhs, c.rhs),
            };
            lower.push(l);
            upper.push(u);
        }
        let mut s = Simplex {
            m,
            cols,
            cost: spec.objective.iter().map(|c| sign * c).collect(),
            sense: spec.sense,
            lower,
            upper,
            state: vec![VarState::AtLower; n + m],
            basis: (n..n + m).collect(),
            x: vec![0.0; n + m],
            binv: Vec::new(),
            factored: false,
            since_refactor: 0,
            iterations: 0,
            iteration_limit: 50_000 + 50 * (n + m),
        };
        for k in n..n + m {
            s.state[k] = VarState::Basic;
        }
        for j in 0..n {
            s.place_nonbasic(j);
        }
        s
    }

    fn n(&self) -> usize {
        self.cols.len()
    }

    pub fn n_structural(&self) -> usize {
        self.cols.len()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Appends a structural column, nonbasic at its lower bound (or upper,
    /// or zero if free). Returns its index.
    pub fn add_column(&mut self, obj: f64, lower: f64, upper: f64, coeffs: &[(usize, f64)]) -> usize {
        let j = self.n();
        let mut col: Vec<(usize, f64)> = coeffs.iter().copied().filter(|e| e.1 != 0.0).collect();
        col.sort_by_key(|e| e.0);
        // Structural variables are indexed before logicals, so every logical
        // index shifts by one.
        self.cols.push(col);
        let sign = if self.sense == Sense::Max { -1.0 } else { 1.0 };
        self.cost.push(sign * obj);
        self.lower.insert(j, lower);
        self.upper.insert(j, upper);
        self.state.insert(j, VarState::AtLower);
        self.x.insert(j, 0.0);
        for b in &mut self.basis {
            if *b >= j {
                *b += 1;
            }
        }
        self.place_nonbasic(j);
        self.recompute_primal();
        j
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
        if self.state[j] != VarState::Basic {
            self.place_nonbasic(j);
            if self.factored {
                self.recompute_primal();
            }
        }
    }

    /// Replaces the objective (in the sense of the original problem).
    pub fn set_objective(&mut self, obj: &[f64]) {
        let sign = if self.sense == Sense::Max { -1.0 } else { 1.0 };
        for (c, o) in self.cost.iter_mut().zip(obj) {
            *c = sign * o;
        }
    }

    pub fn snapshot(&self) -> BasisSnapshot {
        BasisSnapshot {
            basis: self.basis.clone(),
            state: self.state.clone(),
        }
    }

    pub fn restore(&mut self, snap: &BasisSnapshot) {
        self.basis.clone_from(&snap.basis);
        self.state.clone_from(&snap.state);
        for k in 0..self.state.len() {
            if self.state[k] != VarState::Basic {
                self.place_nonbasic(k);
            }
        }
        self.factored = false;
    }

    // Puts a nonbasic variable on a bound compatible with its current state.
    fn place_nonbasic(&mut self, k: usize) {
        let (l, u) = (self.lower[k], self.upper[k]);
        let st = match self.state[k] {
            VarState::AtUpper if u.is_finite() => VarState::AtUpper,
            _ if l.is_finite() => VarState::AtLower,
            _ if u.is_finite() => VarState::AtUpper,
            _ => VarState::Free,
        };
        self.state[k] = st;
        self.x[k] = match st {
            VarState::AtLower => l,
            VarState::AtUpper => u,
            _ => 0.0,
        };
    }

    /// Structural values.
    pub fn primal(&self) -> &[f64] {
        &self.x[..self.n()]
    }

    pub fn objective(&self) -> f64 {
        let internal: f64 = self.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum();
        match self.sense {
            Sense::Min => internal,
            Sense::Max => -internal,
        }
    }

    // --- linear algebra -------------------------------------------------

    fn column_dot(&self, k: usize, y: &[f64]) -> f64 {
        let n = self.n();
        if k < n {
            self.cols[k].iter().map(|&(i, a)| a * y[i]).sum()
        } else {
            -y[k - n]
        }
    }

    /// `B⁻¹ a_k`.
    fn ftran(&self, k: usize) -> Vec<f64> {
        let m = self.m;
        let n = self.n();
        let mut out = vec![0.0; m];
        if k < n {
            for &(i, a) in &self.cols[k] {
                for (p, o) in out.iter_mut().enumerate() {
                    *o += a * self.binv[p * m + i];
                }
            }
        } else {
            let i = k - n;
            for (p, o) in out.iter_mut().enumerate() {
                *o = -self.binv[p * m + i];
            }
        }
        out
    }

    /// `c_B^T B⁻¹`.
    fn btran(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (p, &c) in cb.iter().enumerate() {
            if c != 0.0 {
                let row = &self.binv[p * m..(p + 1) * m];
                for (yi, &b) in y.iter_mut().zip(row) {
                    *yi += c * b;
                }
            }
        }
        y
    }

    /// Inverts the basis matrix. Logical columns are unit vectors, so only
    /// the kernel formed by structural basics and the rows no basic logical
    /// covers goes through Gauss-Jordan elimination. Dependent columns are
    /// swapped for logicals of uncovered rows.
    fn refactor(&mut self) {
        let m = self.m;
        let n = self.n();
        loop {
            let mut covered = vec![false; m];
            let mut structural = Vec::new();
            for (p, &k) in self.basis.iter().enumerate() {
                if k < n {
                    structural.push(p);
                } else {
                    covered[k - n] = true;
                }
            }
            let free_rows: Vec<usize> = (0..m).filter(|&i| !covered[i]).collect();
            let k = structural.len();
            debug_assert_eq!(k, free_rows.len());
            let mut kernel_row = vec![usize::MAX; m];
            for (t, &i) in free_rows.iter().enumerate() {
                kernel_row[i] = t;
            }
            // work = [K | I], row-major with 2k columns
            let w = 2 * k;
            let mut work = vec![0.0; k * w];
            for (c, &p) in structural.iter().enumerate() {
                for &(i, a) in &self.cols[self.basis[p]] {
                    let t = kernel_row[i];
                    if t != usize::MAX {
                        work[t * w + c] = a;
                    }
                }
            }
            for t in 0..k {
                work[t * w + k + t] = 1.0;
            }
            let mut pivot_row = vec![usize::MAX; k];
            let mut used = vec![false; k];
            let mut dependent = Vec::new();
            for c in 0..k {
                let mut best = SINGULAR_TOL;
                let mut r = usize::MAX;
                for t in 0..k {
                    if !used[t] {
                        let v = work[t * w + c].abs();
                        if v > best {
                            best = v;
                            r = t;
                        }
                    }
                }
                if r == usize::MAX {
                    dependent.push(c);
                    continue;
                }
                used[r] = true;
                pivot_row[c] = r;
                let piv = work[r * w + c];
                for v in &mut work[r * w..(r + 1) * w] {
                    *v /= piv;
                }
                let (before, rest) = work.split_at_mut(r * w);
                let (prow, after) = rest.split_at_mut(w);
                for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
                    let f = row[c];
                    if f != 0.0 {
                        for (v, &pv) in row[c..].iter_mut().zip(&prow[c..]) {
                            *v -= f * pv;
                        }
                    }
                }
            }
            if !dependent.is_empty() {
                let spare: Vec<usize> = (0..k).filter(|&t| !used[t]).map(|t| free_rows[t]).collect();
                for (&c, &i) in dependent.iter().zip(&spare) {
                    let p = structural[c];
                    let out = self.basis[p];
                    self.state[out] = VarState::AtLower;
                    self.place_nonbasic(out);
                    self.basis[p] = n + i;
                    self.state[n + i] = VarState::Basic;
                }
                continue;
            }
            // B⁻¹ rows: K⁻¹ on the kernel rows for structural positions;
            // (a_r restricted to structurals)·K⁻¹ and -1 at r for logicals.
            let mut binv = vec![0.0; m * m];
            let kinv = |c: usize| &work[pivot_row[c] * w + k..(pivot_row[c] + 1) * w];
            for (c, &p) in structural.iter().enumerate() {
                let row = &mut binv[p * m..(p + 1) * m];
                for (t, &v) in kinv(c).iter().enumerate() {
                    row[free_rows[t]] = v;
                }
            }
            let mut logical_pos = vec![usize::MAX; m];
            for (p, &b) in self.basis.iter().enumerate() {
                if b >= n {
                    logical_pos[b - n] = p;
                }
            }
            for (c, &p) in structural.iter().enumerate() {
                let kc = kinv(c);
                for &(i, a) in &self.cols[self.basis[p]] {
                    let lp = logical_pos[i];
                    if lp != usize::MAX {
                        let row = &mut binv[lp * m..(lp + 1) * m];
                        for (t, &v) in kc.iter().enumerate() {
                            row[free_rows[t]] += a * v;
                        }
                    }
                }
            }
            for (i, &lp) in logical_pos.iter().enumerate() {
                if lp != usize::MAX {
                    binv[lp * m + i] = -1.0;
                }
            }
            self.binv = binv;
            break;
        }
        self.factored = true;
        self.since_refactor = 0;
        self.recompute_primal();
    }

    fn recompute_primal(&mut self) {
        if !self.factored {
            return;
        }
        let m = self.m;
        let n = self.n();
        let mut rho = vec![0.0; m];
        for k in 0..n + m {
            if self.state[k] != VarState::Basic && self.x[k] != 0.0 {
                let xv = self.x[k];
                if k < n {
                    for &(i, a) in &self.cols[k] {
                        rho[i] -= a * xv;
                    }
                } else {
                    rho[k - n] += xv;
                }
            }
        }
        for p in 0..m {
            let row = &self.binv[p * m..(p + 1) * m];
            let v: f64 = row.iter().zip(&rho).map(|(b, r)| b * r).sum();
            self.x[self.basis[p]] = v;
        }
    }

    fn infeasibility(&self, k: usize) -> f64 {
        let v = self.x[k];
        (self.lower[k] - v).max(v - self.upper[k]).max(0.0)
    }

    fn max_basic_infeasibility(&self) -> f64 {
        self.basis.iter().map(|&k| self.infeasibility(k)).fold(0.0, f64::max)
    }

    // --- main loop ------------------------------------------------------

    pub fn solve(&mut self, deadline: &Deadline) -> Status {
        if !self.factored {
            self.refactor();
        } else {
            self.recompute_primal();
        }
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut verified = false;
        loop {
            if self.iterations >= self.iteration_limit {
                return Status::LimitReached;
            }
            if self.iterations % 64 == 0 && deadline.expired() {
                return Status::LimitReached;
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor();
            }
            let phase1 = self.max_basic_infeasibility() > FEAS_TOL;
            match self.iterate(phase1, bland, &mut degenerate) {
                Step::Pivoted => {
                    verified = false;
                    bland = degenerate >= DEGENERATE_RUN;
                }
                Step::Optimal | Step::Infeasible if !verified && self.since_refactor > 0 => {
                    // confirm on a fresh factorization before declaring
                    self.refactor();
                    verified = true;
                }
                Step::Optimal => return Status::Optimal,
                Step::Infeasible => return Status::Infeasible,
                Step::Unbounded => return Status::Unbounded,
                Step::Failure => return Status::NumericalFailure,
            }
        }
    }

    fn iterate(&mut self, phase1: bool, bland: bool, degenerate: &mut usize) -> Step {
        let m = self.m;
        let n = self.n();
        let cb: Vec<f64> = self
            .basis
            .iter()
            .map(|&k| {
                if phase1 {
                    if self.x[k] < self.lower[k] - FEAS_TOL {
                        -1.0
                    } else if self.x[k] > self.upper[k] + FEAS_TOL {
                        1.0
                    } else {
                        0.0
                    }
                } else if k < n {
                    self.cost[k]
                } else {
                    0.0
                }
            })
            .collect();
        let y = self.btran(&cb);

        // pricing
        let mut entering = None;
        let mut best = 0.0;
        for k in 0..n + m {
            let st = self.state[k];
            if st == VarState::Basic || self.lower[k] == self.upper[k] {
                continue;
            }
            let c = if !phase1 && k < n { self.cost[k] } else { 0.0 };
            let d = c - self.column_dot(k, &y);
            let dir = match st {
                VarState::AtLower if d < -OPT_TOL => 1.0,
                VarState::AtUpper if d > OPT_TOL => -1.0,
                VarState::Free if d.abs() > OPT_TOL => -d.signum(),
                _ => continue,
            };
            if bland {
                entering = Some((k, dir));
                break;
            }
            if d.abs() > best {
                best = d.abs();
                entering = Some((k, dir));
            }
        }
        let Some((q, dir)) = entering else {
            return if phase1 { Step::Infeasible } else { Step::Optimal };
        };

        let alpha = self.ftran(q);
        // rate of change of each basic variable per unit step
        let delta: Vec<f64> = alpha.iter().map(|a| -dir * a).collect();

        let target = |p: usize| -> Option<f64> {
            let k = self.basis[p];
            let (l, u, v) = (self.lower[k], self.upper[k], self.x[k]);
            if delta[p] > PIVOT_TOL {
                if phase1 && v < l - FEAS_TOL {
                    Some(l)
                } else if phase1 && v > u + FEAS_TOL {
                    None
                } else if u.is_finite() {
                    Some(u)
                } else {
                    None
                }
            } else if delta[p] < -PIVOT_TOL {
                if phase1 && v > u + FEAS_TOL {
                    Some(u)
                } else if phase1 && v < l - FEAS_TOL {
                    None
                } else if l.is_finite() {
                    Some(l)
                } else {
                    None
                }
            } else {
                None
            }
        };

        let flip = if self.lower[q].is_finite() && self.upper[q].is_finite() {
            Some(self.upper[q] - self.lower[q])
        } else {
            None
        };

        let mut leave: Option<(usize, f64, f64)> = None; // (position, step, bound)
        if bland {
            for p in 0..m {
                if let Some(t) = target(p) {
                    let theta = ((t - self.x[self.basis[p]]) / delta[p]).max(0.0);
                    let better = match leave {
                        None => true,
                        Some((bp, bt, _)) => {
                            theta < bt - 1e-12
                                || (theta <= bt + 1e-12 && self.basis[p] < self.basis[bp])
                        }
                    };
                    if better {
                        leave = Some((p, theta, t));
                    }
                }
            }
        } else {
            let mut relaxed = f64::INFINITY;
            for p in 0..m {
                if let Some(t) = target(p) {
                    let slack = if delta[p] > 0.0 { FEAS_TOL } else { -FEAS_TOL };
                    let r = (t + slack - self.x[self.basis[p]]) / delta[p];
                    relaxed = relaxed.min(r.max(0.0));
                }
            }
            let mut biggest = 0.0;
            for p in 0..m {
                if let Some(t) = target(p) {
                    let theta = ((t - self.x[self.basis[p]]) / delta[p]).max(0.0);
                    if theta <= relaxed && delta[p].abs() > biggest {
                        biggest = delta[p].abs();
                        leave = Some((p, theta, t));
                    }
                }
            }
        }

        let do_flip = match (flip, leave) {
            (Some(f), Some((_, theta, _))) => f <= theta,
            (Some(_), None) => true,
            _ => false,
        };
        if leave.is_none() && !do_flip {
            return if phase1 { Step::Failure } else { Step::Unbounded };
        }

        self.iterations += 1;
        self.since_refactor += 1;
        let theta = if do_flip { flip.unwrap() } else { leave.unwrap().1 };
        if theta <= 1e-11 {
            *degenerate += 1;
        } else {
            *degenerate = 0;
        }
        for p in 0..m {
            if delta[p] != 0.0 {
                self.x[self.basis[p]] += delta[p] * theta;
            }
        }
        if do_flip {
            self.state[q] = if dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
            self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
            return Step::Pivoted;
        }
        let (r, _, bound) = leave.unwrap();
        self.x[q] += dir * theta;
        let out = self.basis[r];
        self.x[out] = bound;
        self.state[out] = if bound == self.lower[out] {
            VarState::AtLower
        } else {
            VarState::AtUpper
        };
        self.basis[r] = q;
        self.state[q] = VarState::Basic;

        // rank-one update of the inverse
        let piv = alpha[r];
        if piv.abs() < SINGULAR_TOL {
            self.refactor();
            return Step::Pivoted;
        }
        let prow: Vec<f64> = self.binv[r * m..(r + 1) * m].iter().map(|v| v / piv).collect();
        for (p, &a) in alpha.iter().enumerate() {
            if p != r && a != 0.0 {
                let row = &mut self.binv[p * m..(p + 1) * m];
                for (b, pr) in row.iter_mut().zip(&prow) {
                    *b -= a * pr;
                }
            }
        }
        self.binv[r * m..(r + 1) * m].copy_from_slice(&prow);
        Step::Pivoted
    }

    /// Duals per row and reduced costs per structural variable, in the sense
    /// of the original problem.
    pub fn duals_and_reduced_costs(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        let cb: Vec<f64> = self
            .basis
            .iter()
            .map(|&k| if k < n { self.cost[k] } else { 0.0 })
            .collect();
        let y = self.btran(&cb);
        let d: Vec<f64> = (0..n).map(|j| self.cost[j] - self.column_dot(j, &y)).collect();
        match self.sense {
            Sense::Min => (y, d),
            Sense::Max => (y.into_iter().map(|v| -v).collect(), d.into_iter().map(|v| -v).collect()),
        }
    }

    pub fn result(&self, status: Status) -> SolveResult {
        let stats = SolveStats {
            iterations: self.iterations,
            ..Default::default()
        };
        if status != Status::Optimal {
            return SolveResult::without_solution(status, stats);
        }
        let (duals, reduced_costs) = self.duals_and_reduced_costs();
        SolveResult {
            status,
            objective: self.objective(),
            primal: self.primal().to_vec(),
            duals,
            reduced_costs,
            stats,
        }
    }
}

/// Solves a continuous LP (integrality flags are ignored).
pub fn solve_relaxation(spec: &LinearProgramSpec, deadline: &Deadline) -> SolveResult {
    let mut s = Simplex::new(spec);
    let status = s.solve(deadline);
    s.result(status)
}
