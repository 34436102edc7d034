//! Exact optimization over Pareto-efficient matchings for instances with few
//! objects.
//!
//! Every Pareto-efficient matching has integer competitive prices. Record
//! the set `F` of full objects and the order of their prices (objects outside
//! `F` cost zero); then an agent holds `j` only if everything it prefers to
//! `j` lies in `F` and is priced above `j`, an agent with an acceptable
//! object outside `F` is assigned, objects in `F` are filled and the others
//! are not. Conversely every matching meeting those rules for some pair is
//! Pareto efficient. For a fixed pair the rules, plus a cardinality floor,
//! describe a flow polytope with integral vertices, so a linear cost is
//! minimized by one LP per distinct pair. The LPs keep their bases between
//! calls, which makes repeated pricing cheap.

use std::collections::HashSet;

use crate::assignment::Matching;
use crate::clock::Deadline;
use crate::instance::Instance;
use crate::lp::{LinearProgramSpec, Relation, Sense, Simplex, Status};

/// Upper limit on `Σ_k |O|!/(|O|-k)!`, the number of (full set, order)
/// pairs, for the enumeration to be used.
pub const PRICE_ORDER_LIMIT: u64 = 2_000;

/// Number of pairs `(F, order of F)` over subsets `F` of `n` objects.
pub fn price_order_count(n: usize) -> u64 {
    let mut total = 0u64;
    let mut term = 1u64;
    for k in 0..=n {
        total = total.saturating_add(term);
        term = term.saturating_mul((n - k) as u64);
    }
    total
}

struct Piece {
    lp: Simplex,
    // (agent, object, LP variable)
    cells: Vec<(usize, usize, usize)>,
}

/// One warm LP per distinct admissible (full set, order) pair.
pub struct OrderSolver {
    n_agents: usize,
    n_objects: usize,
    pieces: Vec<Piece>,
}

impl OrderSolver {
    /// `None` when the instance has too many objects. `fixed` pins cells to
    /// one (`true`) or zero (`false`).
    pub fn new(inst: &Instance, min_card: usize, fixed: &[(usize, usize, bool)]) -> Option<Self> {
        let n_obj = inst.n_objects();
        if price_order_count(n_obj) > PRICE_ORDER_LIMIT {
            return None;
        }
        let mut pinned = vec![None; inst.n_agents() * n_obj];
        for &(i, j, one) in fixed {
            pinned[i * n_obj + j] = Some(one);
        }
        let mut seen = HashSet::new();
        let mut pieces = Vec::new();
        for full in 0u64..(1 << n_obj) {
            let in_f = |j: usize| full >> j & 1 == 1;
            if (0..n_obj).any(|j| inst.capacity(j) == 0 && !in_f(j)) {
                continue;
            }
            let mut order: Vec<usize> = (0..n_obj).filter(|&j| in_f(j)).collect();
            for_each_permutation(&mut order, 0, &mut |order| {
                let mut pos = vec![-1i64; n_obj];
                for (p, &j) in order.iter().enumerate() {
                    pos[j] = p as i64;
                }
                let allowed: Vec<bool> = (0..inst.n_agents())
                    .flat_map(|i| {
                        let list = inst.prefs(i);
                        let pos = &pos;
                        (0..list.len()).map(move |r| list[..r].iter().all(|&k| pos[k] > pos[list[r]]))
                    })
                    .collect();
                if seen.insert((full, allowed.clone())) {
                    if let Some(p) = Piece::build(inst, full, &allowed, min_card, &pinned) {
                        pieces.push(p);
                    }
                }
            });
        }
        Some(OrderSolver {
            n_agents: inst.n_agents(),
            n_objects: n_obj,
            pieces,
        })
    }

    /// Optimizes `Σ cost_ij m_ij` (dense costs, `i * |O| + j`) in every
    /// piece. Returns the distinct optimal matchings with their values, best
    /// first, or `None` if the deadline passed or an LP misbehaved.
    pub fn optimize(
        &mut self,
        cost: &[f64],
        sense: Sense,
        deadline: &Deadline,
    ) -> Option<Vec<(Matching, f64)>> {
        let mut out: Vec<(Matching, f64)> = Vec::new();
        let mut seen = HashSet::new();
        // the piece LPs minimize
        let sign = if sense == Sense::Max { -1.0 } else { 1.0 };
        for piece in &mut self.pieces {
            if deadline.expired() {
                return None;
            }
            let mut obj = vec![0.0; piece.lp.n_structural()];
            for &(i, j, v) in &piece.cells {
                obj[v] = sign * cost[i * self.n_objects + j];
            }
            piece.lp.set_objective(&obj);
            match piece.lp.solve(deadline) {
                Status::Optimal => {}
                Status::Infeasible => continue,
                _ => return None,
            }
            let x = piece.lp.primal();
            let mut m = Matching::unassigned(self.n_agents);
            let mut value = 0.0;
            for &(i, j, v) in &piece.cells {
                if (x[v] - x[v].round()).abs() > 1e-6 {
                    return None;
                }
                if x[v] > 0.5 {
                    m.set(i, Some(j));
                    value += cost[i * self.n_objects + j];
                }
            }
            if seen.insert(m.clone()) {
                out.push((m, value));
            }
        }
        match sense {
            Sense::Min => out.sort_by(|a, b| a.1.total_cmp(&b.1)),
            Sense::Max => out.sort_by(|a, b| b.1.total_cmp(&a.1)),
        }
        Some(out)
    }
}

impl Piece {
    fn build(
        inst: &Instance,
        full: u64,
        allowed: &[bool],
        min_card: usize,
        pinned: &[Option<bool>],
    ) -> Option<Piece> {
        let n_obj = inst.n_objects();
        let mut spec = LinearProgramSpec::new(Sense::Min);
        let mut by_object: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_obj];
        let mut cells = Vec::new();
        let mut t = 0;
        for i in 0..inst.n_agents() {
            let list = inst.prefs(i);
            let mut row = Vec::new();
            for &j in list {
                let ok = allowed[t];
                t += 1;
                let pin = pinned[i * n_obj + j];
                if !ok {
                    if pin == Some(true) {
                        return None;
                    }
                    continue;
                }
                let lo = if pin == Some(true) { 1.0 } else { 0.0 };
                let hi = if pin == Some(false) { 0.0 } else { 1.0 };
                let v = spec.add_var(format!("m_{i}_{j}"), lo, hi, 0.0);
                row.push((v, 1.0));
                by_object[j].push((v, 1.0));
                cells.push((i, j, v));
            }
            let must = list.iter().any(|&j| full >> j & 1 == 0);
            if must && row.is_empty() {
                return None;
            }
            if !row.is_empty() {
                let rel = if must { Relation::Eq } else { Relation::Le };
                spec.add_constraint(format!("agent_{i}"), row, rel, 1.0);
            }
        }
        for (j, col) in by_object.into_iter().enumerate() {
            let q = inst.capacity(j) as usize;
            if full >> j & 1 == 1 {
                if col.len() < q {
                    return None;
                }
                spec.add_constraint(format!("object_{j}"), col, Relation::Eq, q as f64);
            } else if col.len() >= q {
                spec.add_constraint(format!("object_{j}"), col, Relation::Le, q as f64 - 1.0);
            }
        }
        if min_card > 0 {
            if cells.len() < min_card {
                return None;
            }
            let all = cells.iter().map(|&(_, _, v)| (v, 1.0)).collect();
            spec.add_constraint("cardinality", all, Relation::Ge, min_card as f64);
        }
        Some(Piece {
            lp: Simplex::new(&spec),
            cells,
        })
    }
}

fn for_each_permutation(items: &mut [usize], k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for t in k..items.len() {
        items.swap(k, t);
        for_each_permutation(items, k + 1, f);
        items.swap(k, t);
    }
}
