//! Random instances with controlled capacities, popularity and list lengths,
//! plus the two adversarial families for the cardinality bounds.
//!
//! Generation steps:
//!
//! 1. List lengths: normal with standard deviation `s`, truncated to
//!    `[0.5, |O| + 0.5)` and rounded. The location is calibrated by
//!    bisection so that the mean *rounded* length equals `l_bar`.
//! 2. Capacities and popularity: a pair of standard normals truncated to
//!    `[-3, 3]`, correlated through the Cholesky factor of
//!    `[[1, rho], [rho, 1]]`.
//! 3. Each vector is standardized over the objects, rescaled to its target
//!    mean and coefficient of variation (mean capacity `C |N| / |O|`, mean
//!    popularity `l_bar / C`), rounded half-up and clamped to at least 1.
//! 4. Lists are filled position by position. The fraction `xi` of objects
//!    with the highest popularity forms the popular group. At position `t`
//!    agent `i` draws from the popular group with probability
//!
//!    `π_it = P0 + Δ1 (l_i - 1) / (L - 1) ± Δ2 / 2` (the last term only for
//!    `t > 1`, `+` when the first choice was popular),
//!
//!    clamped to `[0, 1]`, where `P0` is the popular share of `Σ η_j q_j`
//!    and `L = (max_i l_i + 1) / 2`. Within a group an object is drawn with
//!    probability proportional to `η_j q_j` among those not yet listed; an
//!    exhausted group forces the other.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::assignment::ProbabilisticAssignment;
use crate::error::{Error, Result};
use crate::rational::rat;
use crate::instance::Instance;
use crate::rng::{seeded, SeededRng};

/// Generator parameters; names follow the usual table of defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenParams {
    pub n_agents: usize,
    /// `|N| / |O|`.
    pub ratio: f64,
    /// Total capacity over `|N|`.
    #[serde(rename = "C")]
    pub capacity_ratio: f64,
    pub l_bar: f64,
    /// Standard deviation of the list length.
    pub s: f64,
    pub xi: f64,
    pub rho: f64,
    #[serde(rename = "CV_c")]
    pub cv_c: f64,
    #[serde(rename = "CV_eta")]
    pub cv_eta: f64,
    #[serde(rename = "Delta_1")]
    pub delta1: f64,
    #[serde(rename = "Delta_2")]
    pub delta2: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n_agents: 100,
            ratio: 10.0,
            capacity_ratio: 1.20,
            l_bar: 2.42,
            s: 1.05,
            xi: 0.10,
            rho: 0.21,
            cv_c: 0.80,
            cv_eta: 0.60,
            delta1: 0.14,
            delta2: 0.01,
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn n_objects(&self) -> usize {
        (self.n_agents as f64 / self.ratio).round().max(0.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let mut e = Vec::new();
        if self.n_agents == 0 {
            e.push("n_agents must be at least 1".to_string());
        }
        if !(self.ratio > 0.0 && self.ratio.is_finite()) {
            e.push(format!("ratio must be positive, got {}", self.ratio));
        } else if self.n_agents > 0 && self.n_objects() == 0 {
            e.push(format!(
                "ratio {} leaves no objects for {} agents",
                self.ratio, self.n_agents
            ));
        }
        if !(self.capacity_ratio > 0.0 && self.capacity_ratio.is_finite()) {
            e.push(format!("C must be positive, got {}", self.capacity_ratio));
        }
        if !(self.l_bar >= 1.0) {
            e.push(format!("l_bar must be at least 1, got {}", self.l_bar));
        } else if self.n_objects() > 0 && self.l_bar > self.n_objects() as f64 {
            e.push(format!(
                "mean list length {} exceeds the number of objects {}",
                self.l_bar,
                self.n_objects()
            ));
        }
        if !(self.s >= 0.0) {
            e.push(format!("s must be nonnegative, got {}", self.s));
        }
        if !(0.0..=1.0).contains(&self.xi) {
            e.push(format!("xi must lie in [0, 1], got {}", self.xi));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            e.push(format!("rho must lie in [-1, 1], got {}", self.rho));
        }
        for (name, v) in [("CV_c", self.cv_c), ("CV_eta", self.cv_eta)] {
            if !(v >= 0.0) {
                e.push(format!("{name} must be nonnegative, got {v}"));
            }
        }
        for (name, v) in [("Delta_1", self.delta1), ("Delta_2", self.delta2)] {
            if !(-1.0..=1.0).contains(&v) {
                e.push(format!("{name} must lie in [-1, 1], got {v}"));
            }
        }
        if e.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(e))
        }
    }
}

/// A generated instance with the latent vectors that produced it.
#[derive(Debug, Clone)]
pub struct Generated {
    pub instance: Instance,
    pub capacities: Vec<u32>,
    /// Target popularity per object.
    pub eta: Vec<u32>,
    pub lengths: Vec<usize>,
    pub popular: Vec<bool>,
}

pub fn generate(params: &GenParams) -> Result<Instance> {
    generate_detailed(params).map(|g| g.instance)
}

pub fn generate_detailed(params: &GenParams) -> Result<Generated> {
    params.validate()?;
    let n = params.n_agents;
    let m = params.n_objects();
    let mut rng = seeded(params.seed);

    let lengths = list_lengths(params, m, &mut rng);

    // correlated truncated normals
    let rho = params.rho;
    let mut zq = Vec::with_capacity(m);
    let mut ze = Vec::with_capacity(m);
    while zq.len() < m {
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        let (q, e) = (a, rho * a + (1.0 - rho * rho).sqrt() * b);
        if q.abs() <= 3.0 && e.abs() <= 3.0 {
            zq.push(q);
            ze.push(e);
        }
    }
    let mean_q = params.capacity_ratio * n as f64 / m as f64;
    let mean_eta = params.l_bar / params.capacity_ratio;
    let capacities = rescale(&zq, mean_q, params.cv_c);
    let eta = rescale(&ze, mean_eta, params.cv_eta);

    // popular group: the top xi share by popularity, ties by index
    let n_popular = (params.xi * m as f64).round() as usize;
    let mut by_eta: Vec<usize> = (0..m).collect();
    by_eta.sort_by(|&a, &b| eta[b].cmp(&eta[a]).then(a.cmp(&b)));
    let mut popular = vec![false; m];
    for &j in &by_eta[..n_popular.min(m)] {
        popular[j] = true;
    }

    let weight: Vec<f64> = (0..m).map(|j| eta[j] as f64 * capacities[j] as f64).collect();
    let total: f64 = weight.iter().sum();
    let pop_share = if total > 0.0 {
        (0..m).filter(|&j| popular[j]).map(|j| weight[j]).sum::<f64>() / total
    } else {
        0.0
    };
    let max_len = lengths.iter().copied().max().unwrap_or(1) as f64;
    let mid = (max_len + 1.0) / 2.0;

    let mut prefs = Vec::with_capacity(n);
    for &len in &lengths {
        let length_shift = if mid > 1.0 {
            params.delta1 * (len as f64 - 1.0) / (mid - 1.0)
        } else {
            0.0
        };
        let mut taken = vec![false; m];
        let mut list = Vec::with_capacity(len);
        let mut first_popular = false;
        for t in 0..len {
            let mut pi = pop_share + length_shift;
            if t > 0 {
                pi += if first_popular { params.delta2 / 2.0 } else { -params.delta2 / 2.0 };
            }
            let mut pi = pi.clamp(0.0, 1.0);
            let q_pop: f64 = (0..m).filter(|&j| popular[j] && !taken[j]).map(|j| weight[j]).sum();
            let q_unpop: f64 = (0..m).filter(|&j| !popular[j] && !taken[j]).map(|j| weight[j]).sum();
            if q_pop <= 0.0 {
                pi = 0.0;
            } else if q_unpop <= 0.0 {
                pi = 1.0;
            }
            let pick_popular = rng.random::<f64>() < pi;
            let group_total = if pick_popular { q_pop } else { q_unpop };
            let j = draw(&mut rng, m, group_total, |j| {
                if popular[j] == pick_popular && !taken[j] {
                    weight[j]
                } else {
                    0.0
                }
            })
            .or_else(|| (0..m).find(|&j| !taken[j]))
            .expect("list lengths never exceed the number of objects");
            if t == 0 {
                first_popular = popular[j];
            }
            taken[j] = true;
            list.push(j);
        }
        prefs.push(list);
    }

    let instance = Instance::from_lists(&capacities, &prefs)?;
    Ok(Generated {
        instance,
        capacities,
        eta,
        lengths,
        popular,
    })
}

fn draw(rng: &mut SeededRng, m: usize, total: f64, w: impl Fn(usize) -> f64) -> Option<usize> {
    if total <= 0.0 {
        return None;
    }
    let mut u = rng.random::<f64>() * total;
    let mut last = None;
    for j in 0..m {
        let wj = w(j);
        if wj > 0.0 {
            last = Some(j);
            if u < wj {
                return Some(j);
            }
            u -= wj;
        }
    }
    last
}

/// Standardizes `z` over its entries, maps it to the given mean and
/// coefficient of variation, rounds half-up and clamps to at least 1.
fn rescale(z: &[f64], mean: f64, cv: f64) -> Vec<u32> {
    let k = z.len() as f64;
    let zm = z.iter().sum::<f64>() / k;
    let sd = (z.iter().map(|v| (v - zm).powi(2)).sum::<f64>() / k).sqrt();
    z.iter()
        .map(|v| {
            let std = if sd > 0.0 { (v - zm) / sd } else { 0.0 };
            let x = mean + cv * mean * std;
            (x + 0.5).floor().max(1.0) as u32
        })
        .collect()
}

fn list_lengths(params: &GenParams, m: usize, rng: &mut SeededRng) -> Vec<usize> {
    let n = params.n_agents;
    if params.s == 0.0 {
        let l = ((params.l_bar + 0.5).floor() as usize).clamp(1, m);
        return vec![l; n];
    }
    let loc = calibrate_location(params.l_bar, params.s, m);
    let (lo, hi) = (0.5, m as f64 + 0.5);
    (0..n)
        .map(|_| loop {
            let z: f64 = StandardNormal.sample(rng);
            let v = loc + params.s * z;
            if (lo..hi).contains(&v) {
                break ((v + 0.5).floor() as usize).clamp(1, m);
            }
        })
        .collect()
}

/// Mean of `round(X)` for `X ~ N(loc, s²)` truncated to `[0.5, m + 0.5)`.
fn rounded_mean(loc: f64, s: f64, m: usize) -> f64 {
    let d = Normal::new(loc, s).expect("positive deviation");
    let mass = d.cdf(m as f64 + 0.5) - d.cdf(0.5);
    if mass <= 0.0 {
        return if loc < 0.5 { 1.0 } else { m as f64 };
    }
    (1..=m)
        .map(|v| v as f64 * (d.cdf(v as f64 + 0.5) - d.cdf(v as f64 - 0.5)))
        .sum::<f64>()
        / mass
}

fn calibrate_location(target: f64, s: f64, m: usize) -> f64 {
    let (mut lo, mut hi) = (target - 10.0 * s - 1.0, target + 10.0 * s + 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if rounded_mean(mid, s, m) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `k²` agents and `k + 1` objects with capacities `(k, 1, ..., 1)`; the
/// first `k` agents accept every object in index order, the others only the
/// first object. Exact RSD assigns `2k - 1` agents in expectation while the
/// best Pareto-efficient lottery guarantees only `k`.
pub fn family_lb(k: usize) -> Result<Instance> {
    if k < 2 {
        return Err(Error::InvalidParams(vec![format!("k must be at least 2, got {k}")]));
    }
    let mut caps = vec![1u32; k + 1];
    caps[0] = k as u32;
    let prefs: Vec<Vec<usize>> = (0..k * k)
        .map(|i| if i < k { (0..=k).collect() } else { vec![0] })
        .collect();
    Instance::from_lists(&caps, &prefs)
}

/// `l²` agents and two objects of capacity `l`; the first `l` agents rank
/// `o1` over `o2`, the others accept only `o1`. The worst Pareto-efficient
/// matching assigns `l` agents, yet the RSD assignment decomposes over
/// matchings assigning `2l - 1`.
pub fn family_ub(l: usize) -> Result<Instance> {
    if l < 2 {
        return Err(Error::InvalidParams(vec![format!("l must be at least 2, got {l}")]));
    }
    let prefs: Vec<Vec<usize>> = (0..l * l)
        .map(|i| if i < l { vec![0, 1] } else { vec![0] })
        .collect();
    Instance::from_lists(&[l as u32, l as u32], &prefs)
}

/// The RSD assignment of [`family_ub`] in closed form: the first `l`
/// agents in a random order take `o1`, so every agent gets it with
/// probability `1/l`, and flexible agents who miss it always get `o2`.
pub fn family_ub_rsd(l: usize) -> Result<ProbabilisticAssignment> {
    let inst = family_ub(l)?;
    let mut x = ProbabilisticAssignment::zeros(inst.n_agents(), 2);
    for i in 0..inst.n_agents() {
        x.set(i, 0, rat(1, l as i64));
        if i < l {
            x.set(i, 1, rat(l as i64 - 1, l as i64));
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_give_expected_shape() {
        let g = generate_detailed(&GenParams::default()).unwrap();
        assert_eq!(g.instance.n_objects(), 10);
        assert_eq!(g.instance.n_agents(), 100);
        let total: u64 = g.instance.total_capacity();
        assert!((100..=140).contains(&total), "total capacity {total}");
    }

    #[test]
    fn degenerate_lengths() {
        let p = GenParams {
            s: 0.0,
            l_bar: 1.0,
            ..Default::default()
        };
        let inst = generate(&p).unwrap();
        assert!((0..inst.n_agents()).all(|i| inst.prefs(i).len() == 1));
    }

    #[test]
    fn calibration_hits_target() {
        let loc = calibrate_location(2.42, 1.05, 10);
        assert!((rounded_mean(loc, 1.05, 10) - 2.42).abs() < 1e-9);
        assert!(loc < 2.42);
    }

    #[test]
    fn invalid_params_are_listed() {
        let p = GenParams {
            xi: 2.0,
            rho: -3.0,
            l_bar: 50.0,
            ..Default::default()
        };
        match p.validate() {
            Err(Error::InvalidParams(v)) => assert_eq!(v.len(), 3, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let p = GenParams {
            seed: 9,
            ..Default::default()
        };
        assert_eq!(generate(&p).unwrap(), generate(&p).unwrap());
        let q = GenParams { seed: 10, ..p };
        assert_ne!(generate(&q).unwrap(), generate(&GenParams { seed: 9, ..q.clone() }).unwrap());
    }

    #[test]
    fn families_have_the_stated_shape() {
        let lb = family_lb(3).unwrap();
        assert_eq!(lb.n_agents(), 9);
        assert_eq!(lb.capacities(), &[3, 1, 1, 1]);
        assert_eq!(lb.prefs(0), &[0, 1, 2, 3]);
        assert_eq!(lb.prefs(5), &[0]);
        let ub = family_ub(2).unwrap();
        assert_eq!(ub.capacities(), &[2, 2]);
        assert_eq!(ub.prefs(1), &[0, 1]);
        assert_eq!(ub.prefs(2), &[0]);
        assert!(family_lb(1).is_err());
        assert!(family_ub(1).is_err());
    }
}
