//! Matchings, probabilistic assignments and their decompositions.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::{format_rat, is_integral, to_f64, Rat};

/// An integral assignment: each agent holds at most one object.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    assign: Vec<Option<usize>>,
}

impl Matching {
    pub fn new(assign: Vec<Option<usize>>) -> Self {
        Matching { assign }
    }

    pub fn unassigned(n_agents: usize) -> Self {
        Matching {
            assign: vec![None; n_agents],
        }
    }

    pub fn n_agents(&self) -> usize {
        self.assign.len()
    }

    pub fn get(&self, agent: usize) -> Option<usize> {
        self.assign[agent]
    }

    pub fn set(&mut self, agent: usize, object: Option<usize>) {
        self.assign[agent] = object;
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.assign
    }

    /// Number of assigned agents.
    pub fn cardinality(&self) -> usize {
        self.assign.iter().filter(|a| a.is_some()).count()
    }

    pub fn holds(&self, agent: usize, object: usize) -> bool {
        self.assign[agent] == Some(object)
    }

    /// Number of agents holding each object.
    pub fn loads(&self, n_objects: usize) -> Vec<u32> {
        let mut loads = vec![0; n_objects];
        for j in self.assign.iter().flatten() {
            loads[*j] += 1;
        }
        loads
    }

    /// Capacity-respecting, and every agent holds an acceptable object or
    /// nothing.
    pub fn is_feasible(&self, inst: &Instance) -> Result<bool> {
        if self.assign.len() != inst.n_agents() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} agents", inst.n_agents()),
                found: format!("{} agents", self.assign.len()),
            });
        }
        if let Some(&j) = self.assign.iter().flatten().find(|&&j| j >= inst.n_objects()) {
            return Err(Error::DimensionMismatch {
                expected: format!("{} objects", inst.n_objects()),
                found: format!("object index {j}"),
            });
        }
        let acceptable = self
            .assign
            .iter()
            .enumerate()
            .all(|(i, a)| a.map_or(true, |j| inst.is_acceptable(i, j)));
        let within = self
            .loads(inst.n_objects())
            .iter()
            .enumerate()
            .all(|(j, &l)| l <= inst.capacity(j));
        Ok(acceptable && within)
    }

    pub fn to_assignment(&self, n_objects: usize) -> ProbabilisticAssignment {
        let mut x = ProbabilisticAssignment::zeros(self.assign.len(), n_objects);
        for (i, a) in self.assign.iter().enumerate() {
            if let Some(j) = *a {
                x.set(i, j, Rat::one());
            }
        }
        x
    }

    /// `agent -> object` pairs with identifiers, for display and files.
    pub fn pairs<'a>(&'a self, inst: &'a Instance) -> impl Iterator<Item = (&'a str, &'a str)> {
        self.assign.iter().enumerate().filter_map(move |(i, a)| {
            a.map(|j| (inst.agent_ids()[i].as_str(), inst.object_ids()[j].as_str()))
        })
    }
}

impl fmt::Debug for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, a) in self.assign.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match a {
                Some(j) => write!(f, "{i}:{j}")?,
                None => write!(f, "{i}:-")?,
            }
        }
        f.write_str("]")
    }
}

/// A matrix of exact assignment probabilities indexed by (agent, object).
#[derive(Clone, PartialEq, Eq)]
pub struct ProbabilisticAssignment {
    n: usize,
    m: usize,
    probs: Vec<Rat>,
}

impl ProbabilisticAssignment {
    pub fn zeros(n_agents: usize, n_objects: usize) -> Self {
        ProbabilisticAssignment {
            n: n_agents,
            m: n_objects,
            probs: vec![Rat::zero(); n_agents * n_objects],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if let Some(r) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: format!("{m} columns"),
                found: format!("{} columns", r.len()),
            });
        }
        Ok(ProbabilisticAssignment {
            n,
            m,
            probs: rows.into_iter().flatten().collect(),
        })
    }

    pub fn n_agents(&self) -> usize {
        self.n
    }

    pub fn n_objects(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.probs[i * self.m + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rat) {
        self.probs[i * self.m + j] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, value: &Rat) {
        self.probs[i * self.m + j] += value;
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.probs[i * self.m..(i + 1) * self.m]
    }

    pub fn row_sum(&self, i: usize) -> Rat {
        self.row(i).iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> Rat {
        (0..self.n).map(|i| self.get(i, j)).sum()
    }

    /// Expected number of assigned agents.
    pub fn mu(&self) -> Rat {
        self.probs.iter().sum()
    }

    pub fn is_integral(&self) -> bool {
        self.probs.iter().all(is_integral)
    }

    /// Reads the matrix as a matching, if every entry is 0 or 1 and rows sum
    /// to at most one.
    pub fn as_matching(&self) -> Option<Matching> {
        let mut assign = vec![None; self.n];
        for (i, slot) in assign.iter_mut().enumerate() {
            for j in 0..self.m {
                let v = self.get(i, j);
                if v.is_one() {
                    if slot.is_some() {
                        return None;
                    }
                    *slot = Some(j);
                } else if !v.is_zero() {
                    return None;
                }
            }
        }
        Some(Matching::new(assign))
    }

    pub fn check_dims(&self, inst: &Instance) -> Result<()> {
        if self.n != inst.n_agents() || self.m != inst.n_objects() {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", inst.n_agents(), inst.n_objects()),
                found: format!("{}x{}", self.n, self.m),
            });
        }
        Ok(())
    }

    /// Entries in [0, 1], row sums at most one, column sums within capacity
    /// and positive mass only on acceptable pairs.
    pub fn check_feasible(&self, inst: &Instance) -> Result<()> {
        self.check_dims(inst)?;
        let one = Rat::one();
        for i in 0..self.n {
            for j in 0..self.m {
                let v = self.get(i, j);
                if *v < Rat::zero() || *v > one {
                    return Err(Error::Infeasible(format!(
                        "entry ({i}, {j}) = {} outside [0, 1]",
                        format_rat(v)
                    )));
                }
                if !v.is_zero() && !inst.is_acceptable(i, j) {
                    return Err(Error::Infeasible(format!(
                        "agent {} has positive probability for unacceptable object {}",
                        inst.agent_ids()[i],
                        inst.object_ids()[j]
                    )));
                }
            }
            if self.row_sum(i) > one {
                return Err(Error::Infeasible(format!("row {i} sums above 1")));
            }
        }
        for j in 0..self.m {
            if self.col_sum(j) > Rat::from_integer(inst.capacity(j).into()) {
                return Err(Error::Infeasible(format!(
                    "column {j} exceeds capacity {}",
                    inst.capacity(j)
                )));
            }
        }
        Ok(())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.probs.iter().map(to_f64).collect()
    }

    pub fn max_abs_diff(&self, other: &ProbabilisticAssignment) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (to_f64(a) - to_f64(b)).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for ProbabilisticAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(format_rat).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// `μ(X)`: the expected number of assigned agents.
pub fn mu(x: &ProbabilisticAssignment) -> Rat {
    x.mu()
}

/// Whether `m` is a feasible matching of `inst`.
pub fn is_feasible(inst: &Instance, m: &Matching) -> Result<bool> {
    m.is_feasible(inst)
}

/// A lottery over matchings: positive weights summing to exactly one.
#[derive(Clone, PartialEq, Eq)]
pub struct Decomposition {
    n_objects: usize,
    terms: Vec<(Rat, Matching)>,
}

impl Decomposition {
    pub fn new(n_objects: usize, terms: Vec<(Rat, Matching)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::EmptyDecomposition);
        }
        if let Some((w, _)) = terms.iter().find(|(w, _)| *w <= Rat::zero()) {
            return Err(Error::Precondition(format!(
                "weight {} is not positive",
                format_rat(w)
            )));
        }
        let total: Rat = terms.iter().map(|(w, _)| w).sum();
        if !total.is_one() {
            return Err(Error::WeightsDoNotSumToOne(format_rat(&total)));
        }
        let n = terms[0].1.n_agents();
        if terms.iter().any(|(_, m)| m.n_agents() != n) {
            return Err(Error::DimensionMismatch {
                expected: format!("{n} agents in every matching"),
                found: "matchings of different sizes".into(),
            });
        }
        Ok(Decomposition { n_objects, terms })
    }

    /// A single matching with weight one.
    pub fn single(n_objects: usize, m: Matching) -> Self {
        Decomposition {
            n_objects,
            terms: vec![(Rat::one(), m)],
        }
    }

    pub fn terms(&self) -> &[(Rat, Matching)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    pub fn matchings(&self) -> impl Iterator<Item = &Matching> {
        self.terms.iter().map(|(_, m)| m)
    }

    /// `Σ λ^t M^t`, computed exactly.
    pub fn recompose(&self) -> ProbabilisticAssignment {
        let n = self.terms[0].1.n_agents();
        let mut x = ProbabilisticAssignment::zeros(n, self.n_objects);
        for (w, m) in &self.terms {
            for (i, a) in m.assignment().iter().enumerate() {
                if let Some(j) = *a {
                    x.add(i, j, w);
                }
            }
        }
        x
    }

    /// Smallest cardinality over the support.
    pub fn worst_case_cardinality(&self) -> usize {
        self.matchings().map(Matching::cardinality).min().unwrap_or(0)
    }

    pub fn check_feasible(&self, inst: &Instance) -> Result<()> {
        for m in self.matchings() {
            if !m.is_feasible(inst)? {
                return Err(Error::Infeasible(format!("matching {m:?} is infeasible")));
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (w, m) in &self.terms {
            writeln!(f, "{} x {m:?}", format_rat(w))?;
        }
        Ok(())
    }
}

/// Kind of a constraint set in the rows/columns/cells structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetKind {
    Cell(usize, usize),
    Row(usize),
    Col(usize),
}

/// The constraint structure whose sets are every single cell (quota 1),
/// every agent row (quota 1) and every object column (quota = capacity).
#[derive(Debug, Clone)]
pub struct ConstraintStructure {
    sets: Vec<(SetKind, u32)>,
}

impl ConstraintStructure {
    pub fn new(n_agents: usize, capacities: &[u32]) -> Self {
        let m = capacities.len();
        let mut sets = Vec::with_capacity(n_agents * m + n_agents + m);
        for i in 0..n_agents {
            for j in 0..m {
                sets.push((SetKind::Cell(i, j), 1));
            }
        }
        sets.extend((0..n_agents).map(|i| (SetKind::Row(i), 1)));
        sets.extend(capacities.iter().enumerate().map(|(j, &q)| (SetKind::Col(j), q)));
        ConstraintStructure { sets }
    }

    pub fn for_instance(inst: &Instance) -> Self {
        Self::new(inst.n_agents(), inst.capacities())
    }

    pub fn sets(&self) -> &[(SetKind, u32)] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn value(x: &ProbabilisticAssignment, kind: SetKind) -> Rat {
        match kind {
            SetKind::Cell(i, j) => x.get(i, j).clone(),
            SetKind::Row(i) => x.row_sum(i),
            SetKind::Col(j) => x.col_sum(j),
        }
    }

    /// Number of sets whose sum is an integer.
    pub fn tau(&self, x: &ProbabilisticAssignment) -> usize {
        self.sets
            .iter()
            .filter(|(k, _)| is_integral(&Self::value(x, *k)))
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn x1() -> ProbabilisticAssignment {
        let r = |a, b| rat(a, b);
        ProbabilisticAssignment::from_rows(vec![
            vec![r(1, 2), r(5, 12), r(1, 12)],
            vec![r(1, 2), r(5, 12), r(1, 12)],
            vec![r(1, 2), r(0, 1), r(0, 1)],
            vec![r(1, 2), r(0, 1), r(0, 1)],
        ])
        .unwrap()
    }

    #[test]
    fn mu_of_example_matrix_is_three() {
        assert_eq!(x1().mu(), rat(3, 1));
        assert_eq!(ProbabilisticAssignment::zeros(3, 2).mu(), rat(0, 1));
    }

    #[test]
    fn four_term_decomposition_recomposes_exactly() {
        let m = |v: [Option<usize>; 4]| Matching::new(v.to_vec());
        let d = Decomposition::new(
            3,
            vec![
                (rat(5, 12), m([Some(1), Some(0), Some(0), None])),
                (rat(5, 12), m([Some(0), Some(1), None, Some(0)])),
                (rat(1, 12), m([Some(0), Some(2), Some(0), None])),
                (rat(1, 12), m([Some(2), Some(0), None, Some(0)])),
            ],
        )
        .unwrap();
        assert_eq!(d.recompose(), x1());
        assert_eq!(d.worst_case_cardinality(), 3);
    }

    #[test]
    fn single_matching_recomposes_to_its_indicator() {
        let m = Matching::new(vec![Some(1), None]);
        let d = Decomposition::single(2, m.clone());
        assert_eq!(d.recompose(), m.to_assignment(2));
        assert_eq!(d.recompose().as_matching(), Some(m));
    }

    #[test]
    fn weights_must_sum_to_one() {
        let m = Matching::new(vec![Some(0)]);
        let err = Decomposition::new(1, vec![(rat(1, 2), m.clone()), (rat(1, 3), m)]).unwrap_err();
        assert!(matches!(err, Error::WeightsDoNotSumToOne(_)));
        assert!(matches!(
            Decomposition::new(1, vec![]).unwrap_err(),
            Error::EmptyDecomposition
        ));
    }

    #[test]
    fn constraint_structure_size_and_tau() {
        let h = ConstraintStructure::new(4, &[2, 1, 1]);
        assert_eq!(h.len(), 4 * 3 + 4 + 3);
        let x = x1();
        // integral: 4 zero cells, rows 1 and 2, column a
        assert_eq!(h.tau(&x), 4 + 2 + 1);
        let m = Matching::new(vec![Some(0), Some(1), None, Some(0)]).to_assignment(3);
        assert_eq!(h.tau(&m), h.len());
    }
}
