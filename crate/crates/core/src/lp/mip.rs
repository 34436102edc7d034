//! Best-bound branch-and-bound over LP relaxations.
//!
//! Until a first incumbent exists the search dives depth-first, taking the
//! child on the rounding side of the branching variable first and
//! backtracking to the deepest open node; afterwards every node is taken in
//! order of its parent's relaxation bound. Branching picks
//! the most fractional integer variable. Children reuse the parent's basis.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::clock::Deadline;
use crate::lp::model::{LinearProgramSpec, Sense, SolveResult, SolveStats, Status};
use crate::lp::simplex::{BasisSnapshot, Simplex};

#[derive(Debug, Clone, Copy)]
pub struct MipLimits {
    pub max_nodes: usize,
    pub deadline: Deadline,
    /// A value within this distance of an integer counts as integral.
    pub integrality_tol: f64,
    /// Nodes whose bound is within this of the incumbent are pruned.
    pub gap_tol: f64,
    /// Only solutions strictly better than this objective value are of
    /// interest; nodes that cannot beat it are pruned.
    pub cutoff: Option<f64>,
}

impl Default for MipLimits {
    fn default() -> Self {
        MipLimits {
            max_nodes: 200_000,
            deadline: Deadline::none(),
            integrality_tol: 1e-6,
            gap_tol: 1e-9,
            cutoff: None,
        }
    }
}

impl MipLimits {
    pub fn with_deadline(deadline: Deadline) -> Self {
        MipLimits {
            deadline,
            ..Default::default()
        }
    }
}

struct Node {
    bound: f64,
    depth: usize,
    changes: Vec<(usize, f64, f64)>,
    basis: BasisSnapshot,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: smaller bound first, then deeper first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
    }
}

/// What a node inspector decides about an LP-optimal node.
#[derive(Debug, Clone)]
pub enum NodeVerdict {
    /// Carry on with ordinary branching.
    Branch,
    /// No feasible solution exists below this node.
    Prune,
    /// This solution is optimal for the node's subtree.
    Accept(Vec<f64>),
}

/// Solves a mixed-integer program. Without integer variables this is a
/// single LP solve.
pub fn branch_and_bound(spec: &LinearProgramSpec, limits: &MipLimits) -> SolveResult {
    branch_and_bound_with(spec, limits, &mut |_| NodeVerdict::Branch)
}

/// Branch-and-bound where `inspect` sees every LP-optimal node that survives
/// bounding and may settle it directly, e.g. once the variables that
/// determine the rest are integral.
pub fn branch_and_bound_with(
    spec: &LinearProgramSpec,
    limits: &MipLimits,
    inspect: &mut dyn FnMut(&[f64]) -> NodeVerdict,
) -> SolveResult {
    let mut lp = Simplex::new(spec);
    if !spec.has_integers() {
        let status = lp.solve(&limits.deadline);
        return lp.result(status);
    }
    let tol = limits.integrality_tol;
    let sign = if spec.sense == Sense::Max { -1.0 } else { 1.0 };
    let ints: Vec<usize> = (0..spec.n_vars()).filter(|&j| spec.variables[j].integer).collect();
    // an objective with integer coefficients on integer variables only takes
    // integer values, so bounds can be rounded up
    let integral_objective = spec.objective.iter().enumerate().all(|(j, &c)| {
        c == 0.0 || (spec.variables[j].integer && c.fract() == 0.0)
    });
    let cutoff = limits.cutoff.map(|c| sign * c);
    // internal minimization: a node is worth exploring iff its bound beats this
    let threshold = |incumbent: &Option<(f64, Vec<f64>)>| -> f64 {
        let best = incumbent.as_ref().map(|(b, _)| *b);
        match (best, cutoff) {
            (Some(b), Some(c)) => b.min(c),
            (Some(b), None) => b,
            (None, Some(c)) => c,
            (None, None) => f64::INFINITY,
        }
    };
    let prunable = |bound: f64, limit: f64| -> bool {
        if integral_objective {
            (bound - 1e-6).ceil() >= limit - 0.5
        } else {
            bound >= limit - limits.gap_tol
        }
    };
    let mut root = Vec::with_capacity(ints.len());
    for &j in &ints {
        let v = &spec.variables[j];
        let lo = if v.lower.is_finite() { (v.lower - tol).ceil() } else { v.lower };
        let hi = if v.upper.is_finite() { (v.upper + tol).floor() } else { v.upper };
        if lo > hi {
            return SolveResult::without_solution(Status::Infeasible, SolveStats::default());
        }
        lp.set_bounds(j, lo, hi);
        root.push((j, lo, hi));
    }

    let mut stats = SolveStats::default();
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut heap = BinaryHeap::new();
    // open nodes created before the first incumbent, deepest last
    let mut dive: Vec<Node> = Vec::new();
    // node currently loaded into `lp` without needing a restore
    let mut plunge: Option<(usize, Vec<(usize, f64, f64)>)> = Some((0, Vec::new()));
    let mut limit_hit = false;
    let mut failure = None;

    loop {
        let (depth, changes) = match plunge.take() {
            Some(p) => p,
            None => {
                if incumbent.is_some() && !dive.is_empty() {
                    heap.extend(dive.drain(..));
                }
                let next = if incumbent.is_none() { dive.pop() } else { None };
                let Some(node) = next.or_else(|| heap.pop()) else { break };
                if prunable(node.bound, threshold(&incumbent)) {
                    continue;
                }
                for &(j, lo, hi) in &root {
                    lp.set_bounds(j, lo, hi);
                }
                for &(j, lo, hi) in &node.changes {
                    lp.set_bounds(j, lo, hi);
                }
                lp.restore(&node.basis);
                (node.depth, node.changes)
            }
        };
        if stats.nodes >= limits.max_nodes || limits.deadline.expired() {
            limit_hit = true;
            break;
        }
        stats.nodes += 1;
        match lp.solve(&limits.deadline) {
            Status::Optimal => {}
            Status::Infeasible => continue,
            Status::Unbounded if stats.nodes == 1 => {
                stats.iterations = lp.iterations();
                return SolveResult::without_solution(Status::Unbounded, stats);
            }
            Status::LimitReached => {
                limit_hit = true;
                break;
            }
            other => {
                failure = Some(other);
                break;
            }
        }
        let obj = sign * lp.objective();
        if prunable(obj, threshold(&incumbent)) {
            continue;
        }
        let x = lp.primal();
        match inspect(x) {
            NodeVerdict::Branch => {}
            NodeVerdict::Prune => continue,
            NodeVerdict::Accept(sol) => {
                let value: f64 = sign * spec.objective.iter().zip(&sol).map(|(c, v)| c * v).sum::<f64>();
                if !prunable(value, threshold(&incumbent)) {
                    incumbent = Some((value, sol));
                }
                continue;
            }
        }
        let mut branch = None;
        let mut best_key = (0u32, tol);
        for &j in &ints {
            let f = x[j] - x[j].floor();
            let dist = f.min(1.0 - f);
            if dist <= tol {
                continue;
            }
            let pr = spec.variables[j].priority;
            if branch.is_none() || pr > best_key.0 || (pr == best_key.0 && dist > best_key.1) {
                best_key = (pr, dist);
                branch = Some(j);
            }
        }
        let Some(j) = branch else {
            let mut sol = x.to_vec();
            for &j in &ints {
                sol[j] = sol[j].round();
            }
            incumbent = Some((obj, sol));
            continue;
        };
        stats.branches += 1;
        let val = x[j];
        let (lo, hi) = lp.bounds(j);
        let mut down = changes.clone();
        down.push((j, lo, val.floor()));
        let mut up = changes;
        up.push((j, val.ceil(), hi));
        let snap = lp.snapshot();
        let up_first = val - val.floor() >= 0.5;
        let (near, far) = if up_first { (up, down) } else { (down, up) };
        let far = Node {
            bound: obj,
            depth: depth + 1,
            changes: far,
            basis: snap.clone(),
        };
        if incumbent.is_none() {
            dive.push(far);
            let &(bj, blo, bhi) = near.last().unwrap();
            lp.set_bounds(bj, blo, bhi);
            plunge = Some((depth + 1, near));
        } else {
            heap.push(far);
            heap.push(Node {
                bound: obj,
                depth: depth + 1,
                changes: near,
                basis: snap,
            });
        }
    }

    stats.iterations = lp.iterations();
    let status = if let Some(f) = failure {
        f
    } else if limit_hit {
        Status::LimitReached
    } else if incumbent.is_some() {
        Status::Optimal
    } else {
        Status::Infeasible
    };
    match incumbent {
        Some((obj, x)) => SolveResult {
            status,
            objective: sign * obj,
            primal: x,
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            stats,
        },
        None => SolveResult::without_solution(status, stats),
    }
}
