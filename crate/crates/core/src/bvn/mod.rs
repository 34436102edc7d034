//! Maximin decomposition of a probabilistic assignment into matchings that
//! each assign `⌊μ(X)⌋` or `⌈μ(X)⌉` agents.
//!
//! Each round extracts a matching `M` that agrees with `X` on every
//! integral row, column and cell sum and has the same cardinality, then
//! moves `X` away from `M` as far as the assignment polytope allows. The
//! move makes at least one more constraint set integral, so after at most
//! `|N||O| + |N| + |O|` rounds `X` is itself a matching.

mod graph;

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::assignment::{ConstraintStructure, Decomposition, Matching, ProbabilisticAssignment};
use crate::efficiency::is_pareto_efficient;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::{floor_to_u64, format_rat, is_integral, Rat};

pub use graph::FractionalityGraph;

/// Dense working copy of an assignment together with its capacities.
#[derive(Clone)]
pub(crate) struct Frac {
    pub n: usize,
    pub m: usize,
    pub caps: Vec<u32>,
    pub x: Vec<Rat>,
}

impl Frac {
    fn from_assignment(inst: &Instance, x: &ProbabilisticAssignment) -> Self {
        let n = x.n_agents();
        let m = x.n_objects();
        let mut cells = Vec::with_capacity(n * m);
        for i in 0..n {
            cells.extend(x.row(i).iter().cloned());
        }
        Frac {
            n,
            m,
            caps: inst.capacities().to_vec(),
            x: cells,
        }
    }

    fn get(&self, i: usize, j: usize) -> &Rat {
        &self.x[i * self.m + j]
    }

    pub fn row_sum(&self, i: usize) -> Rat {
        self.x[i * self.m..(i + 1) * self.m].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> Rat {
        (0..self.n).map(|i| self.get(i, j)).sum()
    }

    fn mu(&self) -> Rat {
        self.x.iter().sum()
    }

    fn is_integral(&self) -> bool {
        self.x.iter().all(is_integral)
    }

    /// Sum of the entries of every constraint set with its quota, in the
    /// order cells, rows, columns.
    fn set_sums(&self) -> Vec<(Rat, u32)> {
        let mut out = Vec::with_capacity(self.n * self.m + self.n + self.m);
        out.extend(self.x.iter().map(|v| (v.clone(), 1)));
        out.extend((0..self.n).map(|i| (self.row_sum(i), 1)));
        out.extend((0..self.m).map(|j| (self.col_sum(j), self.caps[j])));
        out
    }

    fn tau(&self) -> usize {
        self.set_sums().iter().filter(|(v, _)| is_integral(v)).count()
    }

    fn to_matching(&self) -> Matching {
        let mut assign = vec![None; self.n];
        for (i, slot) in assign.iter_mut().enumerate() {
            *slot = (0..self.m).find(|&j| self.get(i, j).is_one());
        }
        Matching::new(assign)
    }

    fn matching_sums(&self, mt: &Matching) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.n * self.m + self.n + self.m);
        for i in 0..self.n {
            for j in 0..self.m {
                out.push(u32::from(mt.holds(i, j)));
            }
        }
        out.extend((0..self.n).map(|i| u32::from(mt.get(i).is_some())));
        out.extend(mt.loads(self.m));
        out
    }
}

fn check_input(inst: &Instance, x: &ProbabilisticAssignment) -> Result<()> {
    x.check_feasible(inst)
}

/// Extracts a matching `M` with `μ(M) = μ(X)` that agrees with `X` on every
/// constraint set whose sum is integral.
pub fn extract_matching(inst: &Instance, x: &ProbabilisticAssignment) -> Result<Matching> {
    check_input(inst, x)?;
    let frac = Frac::from_assignment(inst, x);
    if !is_integral(&frac.mu()) {
        return Err(Error::Precondition(format!(
            "expected number of assigned agents {} is not an integer",
            format_rat(&frac.mu())
        )));
    }
    extract(&frac)
}

pub(crate) fn extract(frac: &Frac) -> Result<Matching> {
    let mut g = FractionalityGraph::build(frac);
    g.round()?;
    Ok(g.into_matching())
}

/// Largest `λ >= 0` such that `X + λ(X - M)` stays in the assignment
/// polytope: every cell in `[0, 1]`, row in `[0, 1]`, column in `[0, q_j]`.
pub fn lambda_max(inst: &Instance, x: &ProbabilisticAssignment, m: &Matching) -> Result<Rat> {
    x.check_dims(inst)?;
    if m.n_agents() != x.n_agents() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} agents", x.n_agents()),
            found: format!("{} agents", m.n_agents()),
        });
    }
    let frac = Frac::from_assignment(inst, x);
    step_size(&frac, m)
}

fn step_size(frac: &Frac, m: &Matching) -> Result<Rat> {
    let sums = frac.set_sums();
    let msums = frac.matching_sums(m);
    let mut best: Option<Rat> = None;
    for ((xs, q), ms) in sums.iter().zip(msums) {
        let ms = Rat::from_integer(ms.into());
        let diff = xs - &ms;
        let limit = if diff > Rat::zero() {
            (Rat::from_integer((*q).into()) - xs) / diff
        } else if diff < Rat::zero() {
            xs / -diff
        } else {
            continue;
        };
        if best.as_ref().is_none_or(|b| limit < *b) {
            best = Some(limit);
        }
    }
    best.ok_or_else(|| Error::Precondition("X equals M, the step direction is zero".into()))
}

/// One round of the iteration, for inspection and tests.
#[derive(Debug, Clone)]
pub struct Round {
    pub lambda: Rat,
    pub matching: Matching,
    /// Integral constraint sets before the round.
    pub tau: usize,
}

/// Decomposes `x` into matchings assigning `⌊μ(X)⌋` or `⌈μ(X)⌉` agents.
pub fn decompose_md(inst: &Instance, x: &ProbabilisticAssignment) -> Result<Decomposition> {
    decompose_md_traced(inst, x).map(|(d, _)| d)
}

/// [`decompose_md`] plus the per-round trace of the (possibly augmented)
/// iteration.
pub fn decompose_md_traced(
    inst: &Instance,
    x: &ProbabilisticAssignment,
) -> Result<(Decomposition, Vec<Round>)> {
    check_input(inst, x)?;
    let mut frac = Frac::from_assignment(inst, x);
    let (n, m) = (frac.n, frac.m);
    let mu = frac.mu();

    // A fractional μ gets a dummy agent holding a unit-capacity dummy
    // object with the missing probability.
    let dummy = !is_integral(&mu);
    if dummy {
        let missing = mu.ceil() - &mu;
        let mut cells = Vec::with_capacity((n + 1) * (m + 1));
        for i in 0..n {
            cells.extend(frac.x[i * m..(i + 1) * m].iter().cloned());
            cells.push(Rat::zero());
        }
        cells.extend(std::iter::repeat_n(Rat::zero(), m));
        cells.push(missing);
        let mut caps = frac.caps.clone();
        caps.push(1);
        frac = Frac {
            n: n + 1,
            m: m + 1,
            caps,
            x: cells,
        };
    }

    let limit = frac.n * frac.m + frac.n + frac.m + 1;
    let mut rounds: Vec<Round> = Vec::new();
    let last = loop {
        if frac.is_integral() {
            break frac.to_matching();
        }
        if rounds.len() > limit {
            return Err(Error::Internal("decomposition did not terminate".into()));
        }
        let tau = frac.tau();
        let mt = extract(&frac)?;
        let lambda = step_size(&frac, &mt)?;
        // X <- X + λ (X - M)
        for i in 0..frac.n {
            for j in 0..frac.m {
                let cell = &mut frac.x[i * frac.m + j];
                let mij = if mt.holds(i, j) { Rat::one() } else { Rat::zero() };
                let delta = (&*cell - mij) * &lambda;
                *cell += delta;
            }
        }
        if frac.tau() <= tau {
            return Err(Error::Internal(
                "a decomposition round did not make a new constraint set integral".into(),
            ));
        }
        rounds.push(Round {
            lambda,
            matching: mt,
            tau,
        });
    };

    // λ̂_t = λ_t / (1 + λ_t) · Π_{u<t} 1 / (1 + λ_u); the final matching gets
    // the remaining product.
    let mut terms: Vec<(Rat, Matching)> = Vec::with_capacity(rounds.len() + 1);
    let mut carry = Rat::one();
    for r in &rounds {
        let denom = Rat::one() + &r.lambda;
        terms.push((&carry * &r.lambda / &denom, r.matching.clone()));
        carry /= denom;
    }
    terms.push((carry, last));

    let strip = |mt: &Matching| -> Matching {
        if !dummy {
            return mt.clone();
        }
        Matching::new(
            mt.assignment()[..n]
                .iter()
                .map(|a| a.filter(|&j| j < m))
                .collect(),
        )
    };
    let mut index: HashMap<Matching, usize> = HashMap::new();
    let mut merged: Vec<(Rat, Matching)> = Vec::new();
    for (w, mt) in terms {
        if w.is_zero() {
            continue;
        }
        let s = strip(&mt);
        match index.get(&s) {
            Some(&k) => merged[k].0 += w,
            None => {
                index.insert(s.clone(), merged.len());
                merged.push((w, s));
            }
        }
    }
    Ok((Decomposition::new(m, merged)?, rounds))
}

/// Decomposes an assignment that is expected to be robust ex-post
/// efficient, certifying that every matching is Pareto efficient.
pub fn decompose_robust(inst: &Instance, x: &ProbabilisticAssignment) -> Result<Decomposition> {
    let d = decompose_md(inst, x)?;
    if let Some(bad) = d.matchings().find(|mt| !is_pareto_efficient(inst, mt)) {
        return Err(Error::NotParetoEfficient {
            matching: bad.clone(),
        });
    }
    Ok(d)
}

/// `⌊μ(X)⌋`, the best possible worst-case cardinality.
pub fn md_upper_bound(x: &ProbabilisticAssignment) -> u64 {
    floor_to_u64(&x.mu())
}

/// Whether `d` preserves every integral constraint-set sum of `x`; used by
/// tests to check extraction property (ii).
pub fn preserves_integral_sets(inst: &Instance, x: &ProbabilisticAssignment, m: &Matching) -> bool {
    let h = ConstraintStructure::for_instance(inst);
    let mx = m.to_assignment(inst.n_objects());
    h.sets().iter().all(|&(kind, _)| {
        let v = ConstraintStructure::value(x, kind);
        !is_integral(&v) || v == ConstraintStructure::value(&mx, kind)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn three_object_instance() -> (Instance, ProbabilisticAssignment) {
        let inst =
            Instance::from_lists(&[2, 1, 1], &[vec![0, 1, 2], vec![0, 1, 2], vec![0], vec![0]]).unwrap();
        let z = rat(0, 1);
        let x = ProbabilisticAssignment::from_rows(vec![
            vec![rat(1, 2), rat(5, 12), rat(1, 12)],
            vec![rat(1, 2), rat(5, 12), rat(1, 12)],
            vec![rat(1, 2), z.clone(), z.clone()],
            vec![rat(1, 2), z.clone(), z],
        ])
        .unwrap();
        (inst, x)
    }

    fn example_three() -> (Instance, ProbabilisticAssignment) {
        let inst = Instance::from_lists(&[2, 2], &[vec![0, 1], vec![0, 1], vec![0], vec![0]]).unwrap();
        let h = rat(1, 2);
        let z = rat(0, 1);
        let x = ProbabilisticAssignment::from_rows(vec![
            vec![h.clone(), h.clone()],
            vec![h.clone(), h.clone()],
            vec![h.clone(), z.clone()],
            vec![h, z],
        ])
        .unwrap();
        (inst, x)
    }

    #[test]
    fn extraction_keeps_integral_sets() {
        let (inst, x) = three_object_instance();
        let m = extract_matching(&inst, &x).unwrap();
        assert_eq!(m.cardinality(), 3);
        assert!(m.is_feasible(&inst).unwrap());
        assert!(preserves_integral_sets(&inst, &x, &m));
        let (inst, x) = example_three();
        assert_eq!(extract_matching(&inst, &x).unwrap().cardinality(), 3);
    }

    #[test]
    fn extraction_of_integral_input_is_identity() {
        let (inst, _) = three_object_instance();
        let m = Matching::new(vec![Some(1), Some(0), Some(0), None]);
        assert_eq!(extract_matching(&inst, &m.to_assignment(3)).unwrap(), m);
    }

    #[test]
    fn extraction_rejects_fractional_mu() {
        let inst = Instance::from_lists(&[1], &[vec![0]]).unwrap();
        let x = ProbabilisticAssignment::from_rows(vec![vec![rat(1, 2)]]).unwrap();
        assert!(matches!(extract_matching(&inst, &x), Err(Error::Precondition(_))));
    }

    #[test]
    fn lambda_on_a_single_cell() {
        let inst = Instance::from_lists(&[1], &[vec![0]]).unwrap();
        let x = ProbabilisticAssignment::from_rows(vec![vec![rat(1, 2)]]).unwrap();
        let m = Matching::new(vec![Some(0)]);
        assert_eq!(lambda_max(&inst, &x, &m).unwrap(), rat(1, 1));
        let same = m.to_assignment(1);
        assert!(lambda_max(&inst, &same, &m).is_err());
    }

    #[test]
    fn example_decompositions_assign_three() {
        for (inst, x) in [three_object_instance(), example_three()] {
            let (d, rounds) = decompose_md_traced(&inst, &x).unwrap();
            assert_eq!(d.recompose(), x);
            assert!(d.matchings().all(|m| m.cardinality() == 3));
            assert!(d.len() <= inst.constraint_set_count());
            for w in rounds.windows(2) {
                assert!(w[1].tau > w[0].tau);
            }
        }
    }

    #[test]
    fn a_matching_decomposes_to_itself() {
        let (inst, _) = three_object_instance();
        let m = Matching::new(vec![Some(0), Some(1), None, Some(0)]);
        let d = decompose_md(&inst, &m.to_assignment(3)).unwrap();
        assert_eq!(d.terms(), &[(rat(1, 1), m)]);
    }

    #[test]
    fn fractional_mu_uses_floor_and_ceil() {
        let inst = Instance::from_lists(&[1, 1], &[vec![0, 1], vec![0]]).unwrap();
        let x = ProbabilisticAssignment::from_rows(vec![
            vec![rat(1, 3), rat(1, 3)],
            vec![rat(1, 2), rat(0, 1)],
        ])
        .unwrap();
        let d = decompose_md(&inst, &x).unwrap();
        assert_eq!(d.recompose(), x);
        assert!(d.matchings().all(|m| m.cardinality() == 1 || m.cardinality() == 2));
        assert!(d.matchings().all(|m| m.n_agents() == 2));
    }

    #[test]
    fn robust_path_on_ps_output() {
        let (inst, _) = three_object_instance();
        let x = crate::mechanisms::probabilistic_serial(&inst);
        let d = decompose_robust(&inst, &x).unwrap();
        assert!(d.matchings().all(|m| m.cardinality() == 3));
        assert_eq!(md_upper_bound(&x), 3);
    }
}
