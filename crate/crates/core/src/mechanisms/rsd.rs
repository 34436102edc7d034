use std::collections::HashMap;

use num_bigint::BigInt;

use crate::assignment::{Matching, ProbabilisticAssignment};
use crate::efficiency::sd_into;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::Rat;
use crate::rng::{random_permutation, seeded};

/// Default cap on the number of agents for exact RSD (9! orderings).
pub const RSD_EXACT_LIMIT: usize = 9;

/// Number of independent random streams used by sampled RSD.
pub const RSD_SHARDS: u64 = 8;

#[derive(Debug, Clone)]
pub struct RsdEstimate {
    pub assignment: ProbabilisticAssignment,
    /// Number of orderings averaged (`|N|!` when exact).
    pub sample_count: u64,
    pub seed: u64,
    pub exact: bool,
}

/// A lottery over SD outcomes given as multiplicities out of `total`.
#[derive(Debug, Clone)]
pub struct SdLottery {
    pub total: u64,
    /// Distinct matchings in order of first appearance, with their counts.
    pub outcomes: Vec<(Matching, u64)>,
}

impl SdLottery {
    pub fn assignment(&self, n_objects: usize) -> ProbabilisticAssignment {
        let n = self.outcomes.first().map_or(0, |(m, _)| m.n_agents());
        let mut counts = vec![0u64; n * n_objects];
        for (m, c) in &self.outcomes {
            for (i, a) in m.assignment().iter().enumerate() {
                if let Some(j) = a {
                    counts[i * n_objects + j] += c;
                }
            }
        }
        counts_to_assignment(&counts, n, n_objects, self.total)
    }

    /// Exact weights `count / total`.
    pub fn weighted(&self) -> Vec<(Rat, Matching)> {
        self.outcomes
            .iter()
            .map(|(m, c)| (Rat::new(BigInt::from(*c), BigInt::from(self.total)), m.clone()))
            .collect()
    }
}

fn counts_to_assignment(counts: &[u64], n: usize, m: usize, total: u64) -> ProbabilisticAssignment {
    let mut x = ProbabilisticAssignment::zeros(n, m);
    let denom = BigInt::from(total);
    for i in 0..n {
        for j in 0..m {
            let c = counts[i * m + j];
            if c > 0 {
                x.set(i, j, Rat::new(BigInt::from(c), denom.clone()));
            }
        }
    }
    x
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Calls `f` with every permutation of `0..n` (Heap's algorithm).
fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&p);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// The exact RSD lottery: SD outcome multiplicities over all `|N|!` orderings.
pub fn rsd_exact_lottery(inst: &Instance) -> Result<SdLottery> {
    rsd_exact_lottery_with_limit(inst, RSD_EXACT_LIMIT)
}

pub fn rsd_exact_lottery_with_limit(inst: &Instance, limit: usize) -> Result<SdLottery> {
    let n = inst.n_agents();
    if n > limit || n > 20 {
        return Err(Error::EnumerationLimit { agents: n, limit });
    }
    let mut index: HashMap<Matching, usize> = HashMap::new();
    let mut outcomes: Vec<(Matching, u64)> = Vec::new();
    let mut loads = vec![0; inst.n_objects()];
    let mut m = Matching::unassigned(n);
    for_each_permutation(n, |order| {
        sd_into(inst, order, &mut loads, &mut m);
        match index.get(&m) {
            Some(&k) => outcomes[k].1 += 1,
            None => {
                index.insert(m.clone(), outcomes.len());
                outcomes.push((m.clone(), 1));
            }
        }
    });
    Ok(SdLottery {
        total: factorial(n),
        outcomes,
    })
}

/// `X^RSD`: the average of SD over every ordering, exactly.
pub fn rsd_exact(inst: &Instance) -> Result<RsdEstimate> {
    rsd_exact_with_limit(inst, RSD_EXACT_LIMIT)
}

pub fn rsd_exact_with_limit(inst: &Instance, limit: usize) -> Result<RsdEstimate> {
    let lottery = rsd_exact_lottery_with_limit(inst, limit)?;
    Ok(RsdEstimate {
        assignment: lottery.assignment(inst.n_objects()),
        sample_count: lottery.total,
        seed: 0,
        exact: true,
    })
}

fn sample_shard(inst: &Instance, count: u64, seed: u64) -> Vec<(Matching, u64)> {
    let mut rng = seeded(seed);
    let mut index: HashMap<Matching, usize> = HashMap::new();
    let mut out: Vec<(Matching, u64)> = Vec::new();
    let mut loads = vec![0; inst.n_objects()];
    let mut m = Matching::unassigned(inst.n_agents());
    for _ in 0..count {
        let order = random_permutation(inst.n_agents(), &mut rng);
        sd_into(inst, &order, &mut loads, &mut m);
        match index.get(&m) {
            Some(&k) => out[k].1 += 1,
            None => {
                index.insert(m.clone(), out.len());
                out.push((m.clone(), 1));
            }
        }
    }
    out
}

/// SD outcomes over `n` uniformly random orderings. The orderings are split
/// into [`RSD_SHARDS`] streams, stream `s` seeded with `seed + s`, and the
/// streams are merged in shard order, so the result is identical whether
/// the shards run in parallel or not.
pub fn sample_sd_lottery(inst: &Instance, n: u64, seed: u64) -> SdLottery {
    let shards = RSD_SHARDS.min(n.max(1));
    let sizes: Vec<u64> = (0..shards)
        .map(|s| n / shards + u64::from(s < n % shards))
        .collect();

    #[cfg(not(target_arch = "wasm32"))]
    let parts: Vec<Vec<(Matching, u64)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = sizes
            .iter()
            .enumerate()
            .map(|(s, &size)| {
                scope.spawn(move || sample_shard(inst, size, seed.wrapping_add(s as u64)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sampling thread")).collect()
    });
    #[cfg(target_arch = "wasm32")]
    let parts: Vec<Vec<(Matching, u64)>> = sizes
        .iter()
        .enumerate()
        .map(|(s, &size)| sample_shard(inst, size, seed.wrapping_add(s as u64)))
        .collect();

    let mut index: HashMap<Matching, usize> = HashMap::new();
    let mut outcomes: Vec<(Matching, u64)> = Vec::new();
    for part in parts {
        for (m, c) in part {
            match index.get(&m) {
                Some(&k) => outcomes[k].1 += c,
                None => {
                    index.insert(m.clone(), outcomes.len());
                    outcomes.push((m, c));
                }
            }
        }
    }
    SdLottery { total: n, outcomes }
}

/// Sampled RSD: the exact average of SD over `n` random orderings.
pub fn rsd_sampled(inst: &Instance, n: u64, seed: u64) -> Result<RsdEstimate> {
    if n == 0 {
        return Err(Error::Precondition("sample count must be at least 1".into()));
    }
    let lottery = sample_sd_lottery(inst, n, seed);
    Ok(RsdEstimate {
        assignment: lottery.assignment(inst.n_objects()),
        sample_count: n,
        seed,
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn three_object_instance() -> Instance {
        Instance::from_lists(&[2, 1, 1], &[vec![0, 1, 2], vec![0, 1, 2], vec![0], vec![0]]).unwrap()
    }

    #[test]
    fn heap_visits_every_permutation_once() {
        let mut seen = std::collections::HashSet::new();
        for_each_permutation(5, |p| {
            assert!(seen.insert(p.to_vec()));
        });
        assert_eq!(seen.len(), 120);
    }

    #[test]
    fn exact_rsd_on_three_objects() {
        let est = rsd_exact(&three_object_instance()).unwrap();
        assert!(est.exact);
        assert_eq!(est.sample_count, 24);
        let x = &est.assignment;
        assert_eq!(*x.get(0, 0), rat(1, 2));
        assert_eq!(*x.get(0, 1), rat(5, 12));
        assert_eq!(*x.get(1, 2), rat(1, 12));
        assert_eq!(*x.get(3, 0), rat(1, 2));
        assert_eq!(x.mu(), rat(3, 1));
    }

    #[test]
    fn single_sample_is_an_indicator() {
        let inst = three_object_instance();
        let est = rsd_sampled(&inst, 1, 9).unwrap();
        let m = est.assignment.as_matching().unwrap();
        assert!(crate::efficiency::is_pareto_efficient(&inst, &m));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let inst = three_object_instance();
        let a = rsd_sampled(&inst, 500, 3).unwrap();
        let b = rsd_sampled(&inst, 500, 3).unwrap();
        assert_eq!(a.assignment, b.assignment);
        assert!(rsd_sampled(&inst, 0, 3).is_err());
    }

    #[test]
    fn exact_limit() {
        let inst = Instance::from_lists(&[1], &vec![vec![0]; 10]).unwrap();
        assert!(matches!(rsd_exact(&inst), Err(Error::EnumerationLimit { .. })));
    }
}
