use std::collections::HashMap;

use crate::assignment::Matching;
use crate::efficiency::is_pareto_efficient;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::mechanisms::sample_sd_lottery;

/// Deduplicated Pareto-efficient columns with cached cardinalities.
#[derive(Debug, Clone, Default)]
pub struct ColumnPool {
    columns: Vec<Matching>,
    cards: Vec<usize>,
    index: HashMap<Matching, usize>,
}

impl ColumnPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `m` unless already present. Rejects matchings that are
    /// infeasible or not Pareto efficient.
    pub fn insert(&mut self, inst: &Instance, m: Matching) -> Result<bool> {
        if self.index.contains_key(&m) {
            return Ok(false);
        }
        if !m.is_feasible(inst)? {
            return Err(Error::Infeasible(format!("column {m:?} is not a feasible matching")));
        }
        if !is_pareto_efficient(inst, &m) {
            return Err(Error::NotParetoEfficient { matching: m });
        }
        self.push_unchecked(m);
        Ok(true)
    }

    pub(crate) fn push_unchecked(&mut self, m: Matching) -> usize {
        if let Some(&t) = self.index.get(&m) {
            return t;
        }
        let t = self.columns.len();
        self.cards.push(m.cardinality());
        self.index.insert(m.clone(), t);
        self.columns.push(m);
        t
    }

    pub fn contains(&self, m: &Matching) -> bool {
        self.index.contains_key(m)
    }

    pub fn position(&self, m: &Matching) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn get(&self, t: usize) -> &Matching {
        &self.columns[t]
    }

    pub fn cardinality(&self, t: usize) -> usize {
        self.cards[t]
    }

    pub fn columns(&self) -> &[Matching] {
        &self.columns
    }

    /// Indices of columns assigning at least `k` agents.
    pub fn at_least(&self, k: usize) -> Vec<usize> {
        (0..self.len()).filter(|&t| self.cards[t] >= k).collect()
    }
}

/// SD outcomes over `n` random orderings (seeded as sampled RSD, so the
/// pool for a sampled estimate is exactly its support), keeping those that
/// assign at least `k` agents.
pub fn initial_columns(inst: &Instance, k: usize, n: u64, seed: u64) -> ColumnPool {
    let lottery = sample_sd_lottery(inst, n.max(1), seed);
    let mut pool = ColumnPool::new();
    for (m, _) in lottery.outcomes {
        if m.cardinality() >= k {
            pool.push_unchecked(m);
        }
    }
    pool
}
