//! Independent oracles for the exact dynamics: Monte Carlo simulation of
//! subset draws, exhaustive enumeration over all C(n,m)^K subset sequences
//! for tiny instances, and distribution-distance utilities.
//!
//! Trials run in parallel on pre-split RNG streams (stream id = trial
//! index), so results are bit-identical regardless of worker count.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::combinatorics::{binomial, unrank_subset, RealApprox};
use crate::dynamics::{CoverageDistribution, PmfSource, SamplingConfig};
use crate::error::{Error, Result};
use crate::sampler::draw_subset;

/// Enumeration refuses instances with more than this many subset sequences.
pub const ENUMERATION_GUARD: u64 = 10_000_000;

/// What a simulation measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SimulationParams {
    /// Distinct samples covered by K epochs at (n, m).
    Coverage { n: usize, m: usize, k: usize },
    /// Epochs needed to cover s distinct samples at (n, m).
    Occupancy { n: usize, m: usize, s: usize },
}

/// Outcome counts from seeded trials. Counts are the ground truth here;
/// the pmf/mean/variance accessors derive from them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub params: SimulationParams,
    pub trials: u64,
    pub seed: u64,
    pub counts: BTreeMap<usize, u64>,
}

impl SimulationResult {
    /// Empirical probabilities with a 2σ binomial half-width as the error
    /// annotation.
    pub fn empirical_pmf(&self) -> BTreeMap<usize, RealApprox> {
        let t = self.trials as f64;
        self.counts
            .iter()
            .map(|(&outcome, &c)| {
                let p = c as f64 / t;
                (outcome, RealApprox::with_error(p, 2.0 * (p * (1.0 - p) / t).sqrt()))
            })
            .collect()
    }

    pub fn float_pmf(&self) -> BTreeMap<usize, f64> {
        self.counts
            .iter()
            .map(|(&outcome, &c)| (outcome, c as f64 / self.trials as f64))
            .collect()
    }

    pub fn mean(&self) -> f64 {
        self.counts
            .iter()
            .map(|(&outcome, &c)| outcome as f64 * c as f64)
            .sum::<f64>()
            / self.trials as f64
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.counts
            .iter()
            .map(|(&outcome, &c)| {
                let d = outcome as f64 - mean;
                d * d * c as f64
            })
            .sum::<f64>()
            / self.trials as f64
    }

    pub fn to_json(&self) -> serde_json::Value {
        let config = match self.params {
            SimulationParams::Coverage { n, m, k } => json!({"n": n, "m": m, "K": k}),
            SimulationParams::Occupancy { n, m, s } => json!({"n": n, "m": m, "s": s}),
        };
        let kind = match self.params {
            SimulationParams::Coverage { .. } => "coverage",
            SimulationParams::Occupancy { .. } => "occupancy",
        };
        let pmf: BTreeMap<String, f64> = self
            .float_pmf()
            .into_iter()
            .map(|(ko, v)| (ko.to_string(), v))
            .collect();
        json!({
            "kind": kind,
            "config": config,
            "trials": self.trials,
            "seed": self.seed,
            "pmf": pmf,
            "mean": self.mean(),
            "variance": self.variance(),
        })
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn merge_counts(
    mut a: BTreeMap<usize, u64>,
    b: BTreeMap<usize, u64>,
) -> BTreeMap<usize, u64> {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

/// Monte Carlo estimate of the coverage pmf: each trial draws K independent
/// uniform m-subsets and records the distinct count.
pub fn simulate_coverage(
    config: &SamplingConfig,
    trials: u64,
    seed: u64,
) -> Result<SimulationResult> {
    config.validate()?;
    if trials < 1 {
        return Err(Error::InvalidConfig("trial count must be >= 1".into()));
    }
    let (n, m, k) = (config.n, config.m, config.k);
    let counts = (0..trials)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<usize, u64>, t| {
            let mut rng = trial_rng(seed, t);
            let mut seen = vec![false; n];
            let mut distinct = 0usize;
            for _ in 0..k {
                for i in draw_subset(n, m, &mut rng).expect("validated sizes") {
                    if !seen[i] {
                        seen[i] = true;
                        distinct += 1;
                    }
                }
            }
            *acc.entry(distinct).or_insert(0) += 1;
            acc
        })
        .reduce(BTreeMap::new, merge_counts);
    Ok(SimulationResult {
        params: SimulationParams::Coverage { n, m, k },
        trials,
        seed,
        counts,
    })
}

/// Monte Carlo estimate of the occupancy pmf: each trial draws subsets until
/// at least s distinct indices have been seen and records the draw count.
pub fn simulate_occupancy(
    n: usize,
    m: usize,
    s: usize,
    trials: u64,
    seed: u64,
) -> Result<SimulationResult> {
    if m < 1 || m > n {
        return Err(Error::InvalidConfig(format!(
            "subset size m must satisfy 1 <= m <= n (got m = {m}, n = {n})"
        )));
    }
    if s < 1 || s > n {
        return Err(Error::InvalidConfig(format!(
            "coverage target s must satisfy 1 <= s <= n (got s = {s}, n = {n})"
        )));
    }
    if trials < 1 {
        return Err(Error::InvalidConfig("trial count must be >= 1".into()));
    }
    let counts = (0..trials)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<usize, u64>, t| {
            let mut rng = trial_rng(seed, t);
            let mut seen = vec![false; n];
            let mut distinct = 0usize;
            let mut draws = 0usize;
            while distinct < s {
                draws += 1;
                for i in draw_subset(n, m, &mut rng).expect("validated sizes") {
                    if !seen[i] {
                        seen[i] = true;
                        distinct += 1;
                    }
                }
            }
            *acc.entry(draws).or_insert(0) += 1;
            acc
        })
        .reduce(BTreeMap::new, merge_counts);
    Ok(SimulationResult {
        params: SimulationParams::Occupancy { n, m, s },
        trials,
        seed,
        counts,
    })
}

/// Exhaustive oracle: iterate every equally likely length-K sequence of
/// m-subsets (an odometer over lexicographic subset ranks) and tally the
/// coverage of each. Exact by construction and fully independent of Eq.-7
/// style alternating sums.
pub fn enumerate_coverage(config: &SamplingConfig) -> Result<CoverageDistribution> {
    config.validate()?;
    let (n, m, k) = (config.n, config.m, config.k);
    let per_epoch = binomial(n, m);
    let total_big = per_epoch.pow(u32::try_from(k).map_err(|_| {
        Error::InvalidConfig(format!("epoch count K = {k} is too large"))
    })?);
    let total = total_big.to_u64().filter(|&t| t <= ENUMERATION_GUARD).ok_or(
        Error::EnumerationGuard {
            count: total_big.to_string(),
            limit: ENUMERATION_GUARD,
        },
    )?;
    let per_epoch = per_epoch.to_u64().expect("bounded by the guard");

    // Pre-unrank all subsets once; each sequence is a K-digit number in
    // base C(n,m).
    let subsets: Vec<Vec<usize>> = (0..per_epoch).map(|r| unrank_subset(n, m, r)).collect();

    let mut counts = vec![0u64; n + 1];
    let mut digits = vec![0usize; k];
    let mut stamp = vec![0u64; n];
    for sequence in 1..=total {
        let mut distinct = 0usize;
        for &d in &digits {
            for &i in &subsets[d] {
                if stamp[i] != sequence {
                    stamp[i] = sequence;
                    distinct += 1;
                }
            }
        }
        counts[distinct] += 1;
        // Advance the odometer.
        for d in digits.iter_mut() {
            *d += 1;
            if *d < per_epoch as usize {
                break;
            }
            *d = 0;
        }
    }

    let pmf = counts
        .into_iter()
        .map(|c| BigRational::new(BigInt::from(c), total_big.clone()))
        .collect();
    Ok(CoverageDistribution {
        config: *config,
        pmf,
        source: PmfSource::Enumerated,
    })
}

/// Total variation distance ½ Σ |p − q| over the union of supports.
pub fn tv_distance(p: &BTreeMap<usize, f64>, q: &BTreeMap<usize, f64>) -> RealApprox {
    let mut keys: Vec<usize> = p.keys().chain(q.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let sum: f64 = keys
        .iter()
        .map(|k| (p.get(k).unwrap_or(&0.0) - q.get(k).unwrap_or(&0.0)).abs())
        .sum();
    RealApprox::exact(0.5 * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{ratio, rational_to_f64};
    use crate::dynamics::{coverage_pmf, expected_coverage, expected_occupancy};
    use num_traits::One;

    #[test]
    fn tv_distance_basics() {
        let p: BTreeMap<usize, f64> = [(1, 0.5), (2, 0.5)].into();
        let q: BTreeMap<usize, f64> = [(1, 1.0)].into();
        assert_eq!(tv_distance(&p, &p).value, 0.0);
        assert_eq!(tv_distance(&p, &q).value, 0.5);
        let a: BTreeMap<usize, f64> = [(1, 1.0)].into();
        let b: BTreeMap<usize, f64> = [(2, 1.0)].into();
        assert_eq!(tv_distance(&a, &b).value, 1.0);
    }

    #[test]
    fn enumerate_coverage_known_values() {
        let d = enumerate_coverage(&SamplingConfig::new(4, 2, 2).unwrap()).unwrap();
        assert_eq!(d.prob(2), ratio(1, 6));
        assert_eq!(d.prob(3), ratio(2, 3));
        assert_eq!(d.prob(4), ratio(1, 6));

        let d = enumerate_coverage(&SamplingConfig::new(3, 1, 1).unwrap()).unwrap();
        assert!(d.prob(1).is_one());

        let d = enumerate_coverage(&SamplingConfig::new(2, 1, 2).unwrap()).unwrap();
        assert_eq!(d.prob(1), ratio(1, 2));
        assert_eq!(d.prob(2), ratio(1, 2));
    }

    #[test]
    fn enumeration_matches_exact_pmf() {
        for n in 1..=5usize {
            for m in 1..=n {
                for k in 1..=3usize {
                    let cfg = SamplingConfig::new(n, m, k).unwrap();
                    let exact = coverage_pmf(&cfg).unwrap();
                    let enumerated = enumerate_coverage(&cfg).unwrap();
                    assert_eq!(
                        exact.pmf, enumerated.pmf,
                        "oracle mismatch at (n={n}, m={m}, K={k})"
                    );
                }
            }
        }
    }

    #[test]
    fn enumeration_guard_rejects_large_instances() {
        let cfg = SamplingConfig::new(20, 10, 3).unwrap();
        match enumerate_coverage(&cfg) {
            Err(Error::EnumerationGuard { count, limit }) => {
                assert_eq!(limit, ENUMERATION_GUARD);
                assert_eq!(count, (BigInt::from(184_756u64).pow(3)).to_string());
            }
            other => panic!("expected guard rejection, got {other:?}"),
        }
    }

    #[test]
    fn simulate_coverage_trivial_and_mean() {
        let cfg = SamplingConfig::new(4, 4, 2).unwrap();
        let r = simulate_coverage(&cfg, 100, 1).unwrap();
        assert_eq!(r.counts, BTreeMap::from([(4, 100)]));
        assert_eq!(r.float_pmf()[&4], 1.0);

        let cfg = SamplingConfig::new(20, 5, 5).unwrap();
        let r = simulate_coverage(&cfg, 100_000, 99).unwrap();
        let exact = rational_to_f64(&expected_coverage(&cfg).unwrap());
        assert!(
            (r.mean() - exact).abs() / exact < 0.01,
            "mean {} vs {exact}",
            r.mean()
        );
        let total: f64 = r.float_pmf().values().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simulate_coverage_close_to_enumeration() {
        let cfg = SamplingConfig::new(4, 2, 2).unwrap();
        let sim = simulate_coverage(&cfg, 200_000, 7).unwrap();
        let exact = enumerate_coverage(&cfg).unwrap();
        let tv = tv_distance(&sim.float_pmf(), &exact.float_pmf());
        assert!(tv.value < 0.01, "TV = {}", tv.value);
    }

    #[test]
    fn simulate_occupancy_trivial_and_mean() {
        let r = simulate_occupancy(5, 5, 5, 50, 3).unwrap();
        assert_eq!(r.counts, BTreeMap::from([(1, 50)]));

        let r = simulate_occupancy(2, 1, 2, 200_000, 11).unwrap();
        assert!((r.mean() - 3.0).abs() / 3.0 < 0.02, "mean {}", r.mean());

        let r = simulate_occupancy(20, 5, 20, 100_000, 13).unwrap();
        let exact = rational_to_f64(&expected_occupancy(20, 5, 20).unwrap());
        assert!(
            (r.mean() - exact).abs() / exact < 0.02,
            "mean {} vs {exact}",
            r.mean()
        );
    }

    #[test]
    fn seeded_runs_are_bit_identical_across_worker_counts() {
        let cfg = SamplingConfig::new(12, 4, 3).unwrap();
        let base = simulate_coverage(&cfg, 20_000, 5).unwrap();
        for threads in [1usize, 3] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let run = pool.install(|| simulate_coverage(&cfg, 20_000, 5).unwrap());
            assert_eq!(base, run, "counts differ with {threads} worker(s)");
        }
        let other_seed = simulate_coverage(&cfg, 20_000, 6).unwrap();
        assert_ne!(base.counts, other_seed.counts);
    }

    #[test]
    fn tv_shrinks_with_more_trials() {
        let cfg = SamplingConfig::new(20, 5, 5).unwrap();
        let exact = coverage_pmf(&cfg).unwrap().float_pmf();
        for seed in [1u64, 2, 3, 4, 5] {
            let small = simulate_coverage(&cfg, 1_000, seed).unwrap();
            let large = simulate_coverage(&cfg, 1_000_000, seed).unwrap();
            let tv_small = tv_distance(&small.float_pmf(), &exact).value;
            let tv_large = tv_distance(&large.float_pmf(), &exact).value;
            assert!(
                tv_large < tv_small,
                "seed {seed}: TV {tv_large} at 10^6 not below {tv_small} at 10^3"
            );
        }
    }

    #[test]
    fn json_shape() {
        let cfg = SamplingConfig::new(4, 4, 1).unwrap();
        let r = simulate_coverage(&cfg, 10, 0).unwrap();
        let j = r.to_json();
        assert_eq!(j["kind"], "coverage");
        assert_eq!(j["config"]["K"], 1);
        assert_eq!(j["pmf"]["4"], 1.0);
        assert_eq!(j["mean"], 4.0);
        assert_eq!(j["variance"], 0.0);

        let r = simulate_occupancy(3, 3, 3, 10, 0).unwrap();
        let j = r.to_json();
        assert_eq!(j["kind"], "occupancy");
        assert_eq!(j["config"]["s"], 3);
        assert_eq!(j["mean"], 1.0);
    }

    #[test]
    fn empirical_pmf_reports_uncertainty() {
        let cfg = SamplingConfig::new(6, 2, 2).unwrap();
        let r = simulate_coverage(&cfg, 10_000, 2).unwrap();
        for (_, approx) in r.empirical_pmf() {
            let half_width = approx.error_bound.unwrap();
            assert!(half_width > 0.0 && half_width < 0.05);
        }
    }
}
