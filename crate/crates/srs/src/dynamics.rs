//! Exact sampling dynamics of per-epoch random subset selection.
//!
//! Coverage: after K epochs, each drawing a uniform m-subset of an n-element
//! ground set, `|S|` counts the distinct samples touched. Occupancy: `k̄`
//! counts the epochs needed for coverage to reach a target `s`. Both pmfs are
//! alternating sums whose terms dwarf the result, so everything is computed
//! in `BigRational` over the common denominator C(n,m)^K and only converted
//! to `f64` for display.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::combinatorics::{harmonic, pascal_rows, rational_pow, rational_to_f64, RealApprox};
use crate::error::{Error, Result};

/// Largest ground set accepted by the exact pmf/expectation routines unless
/// an explicit limit is supplied. Beyond this, use the Monte Carlo simulator.
pub const DEFAULT_EXACT_LIMIT: usize = 200;

/// Default bound on the occupancy probability mass left beyond `k_max`.
pub const DEFAULT_EPSILON_TAIL: f64 = 1e-9;

/// The triple (n, m, K): ground-set size, per-epoch subset size, epoch count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
}

impl SamplingConfig {
    pub fn new(n: usize, m: usize, k: usize) -> Result<Self> {
        let cfg = SamplingConfig { n, m, k };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 || self.m > self.n {
            return Err(Error::InvalidConfig(format!(
                "subset size m must satisfy 1 <= m <= n (got m = {}, n = {})",
                self.m, self.n
            )));
        }
        if self.k < 1 {
            return Err(Error::InvalidConfig("epoch count K must be >= 1".into()));
        }
        Ok(())
    }

    fn k_u32(&self) -> Result<u32> {
        u32::try_from(self.k)
            .map_err(|_| Error::InvalidConfig(format!("epoch count K = {} is too large", self.k)))
    }
}

/// How a distribution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PmfSource {
    Exact,
    Enumerated,
    MonteCarlo,
}

impl std::fmt::Display for PmfSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PmfSource::Exact => "exact",
            PmfSource::Enumerated => "enumerated",
            PmfSource::MonteCarlo => "monte-carlo",
        };
        f.write_str(s)
    }
}

/// Exact pmf of the coverage count `|S|`, indexed 0..=n.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageDistribution {
    pub config: SamplingConfig,
    pub pmf: Vec<BigRational>,
    pub source: PmfSource,
}

impl CoverageDistribution {
    pub fn prob(&self, l: usize) -> BigRational {
        self.pmf.get(l).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Exact mean Σ l·pmf(l).
    pub fn mean(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for (l, p) in self.pmf.iter().enumerate() {
            acc += p * BigRational::from_integer(BigInt::from(l));
        }
        acc
    }

    /// Exact upper tail P(|S| >= s).
    pub fn tail_at_least(&self, s: usize) -> BigRational {
        self.pmf.iter().skip(s).sum()
    }

    /// Smallest and largest l with positive mass.
    pub fn support(&self) -> (usize, usize) {
        let lo = self.pmf.iter().position(|p| !p.is_zero()).unwrap_or(0);
        let hi = self.pmf.iter().rposition(|p| !p.is_zero()).unwrap_or(0);
        (lo, hi)
    }

    /// Non-zero entries converted to double precision.
    pub fn float_pmf(&self) -> BTreeMap<usize, f64> {
        self.pmf
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(l, p)| (l, rational_to_f64(p)))
            .collect()
    }

    /// CSV table, one row per l = 0..=n.
    pub fn csv_string(&self) -> String {
        let mut out =
            String::from("n,m,K,l,probability_numerator,probability_denominator,probability_float\n");
        for (l, p) in self.pmf.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.config.n,
                self.config.m,
                self.config.k,
                l,
                p.numer(),
                p.denom(),
                rational_to_f64(p)
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pmf: Vec<_> = self
            .pmf
            .iter()
            .enumerate()
            .map(|(l, p)| {
                json!({
                    "l": l,
                    "numerator": p.numer().to_string(),
                    "denominator": p.denom().to_string(),
                    "float": rational_to_f64(p),
                })
            })
            .collect();
        json!({
            "config": self.config,
            "source": self.source,
            "mean": rational_to_f64(&self.mean()),
            "pmf": pmf,
        })
    }
}

/// Exact coverage pmf: P(|S| = l) = C(n,l) Σ_{i=0}^{l} (−1)^i C(l,i) [C(l−i,m)/C(n,m)]^K.
pub fn coverage_pmf(config: &SamplingConfig) -> Result<CoverageDistribution> {
    coverage_pmf_with_limit(config, DEFAULT_EXACT_LIMIT)
}

/// As [`coverage_pmf`] with an explicit exact-mode size limit.
pub fn coverage_pmf_with_limit(
    config: &SamplingConfig,
    limit: usize,
) -> Result<CoverageDistribution> {
    config.validate()?;
    if config.n > limit {
        return Err(Error::ExactModeExceeded { n: config.n, limit });
    }
    let (n, m) = (config.n, config.m);
    let kk = config.k_u32()?;
    let rows = pascal_rows(n);

    // pow_k[j] = C(j, m)^K; zero for j < m since K >= 1.
    let pow_k: Vec<BigInt> = (0..=n)
        .map(|j| if j < m { BigInt::zero() } else { rows[j][m].pow(kk) })
        .collect();
    let denom = rows[n][m].pow(kk);
    let max_l = n.min(m.saturating_mul(config.k));

    let mut pmf = Vec::with_capacity(n + 1);
    #[allow(clippy::needless_range_loop)] // l is the mathematical index into two tables
    for l in 0..=n {
        // Substituting j = l − i turns the sum into Σ_j (−1)^{l−j} C(l,j) pow_k[j].
        let mut num = BigInt::zero();
        for j in 0..=l {
            let term = &rows[l][j] * &pow_k[j];
            if (l - j) % 2 == 0 {
                num += term;
            } else {
                num -= term;
            }
        }
        num *= &rows[n][l];
        if l < m || l > max_l {
            // Analytically zero; computing it anyway checks the formula.
            assert!(num.is_zero(), "coverage pmf not zero at impossible l = {l}");
        }
        pmf.push(BigRational::new(num, denom.clone()));
    }
    Ok(CoverageDistribution {
        config: *config,
        pmf,
        source: PmfSource::Exact,
    })
}

/// Exact probability of covering the whole ground set: P(|S| = n).
pub fn full_coverage_prob(config: &SamplingConfig) -> Result<BigRational> {
    full_coverage_prob_with_limit(config, DEFAULT_EXACT_LIMIT)
}

pub fn full_coverage_prob_with_limit(config: &SamplingConfig, limit: usize) -> Result<BigRational> {
    config.validate()?;
    if config.n > limit {
        return Err(Error::ExactModeExceeded { n: config.n, limit });
    }
    let (n, m) = (config.n, config.m);
    let kk = config.k_u32()?;
    let rows = pascal_rows(n);
    let mut num = BigInt::zero();
    #[allow(clippy::needless_range_loop)] // j indexes two different Pascal rows
    for j in m..=n {
        let term = &rows[n][j] * rows[j][m].pow(kk);
        if (n - j) % 2 == 0 {
            num += term;
        } else {
            num -= term;
        }
    }
    Ok(BigRational::new(num, rows[n][m].pow(kk)))
}

/// Closed-form expected coverage E|S| = n·[1 − ((n−m)/n)^K], exact.
pub fn expected_coverage(config: &SamplingConfig) -> Result<BigRational> {
    config.validate()?;
    let kk = config.k_u32()?;
    let miss = BigRational::new(BigInt::from(config.n - config.m), BigInt::from(config.n));
    let covered = BigRational::one() - rational_pow(&miss, kk);
    Ok(covered * BigRational::from_integer(BigInt::from(config.n)))
}

/// One cell of an expected-coverage grid.
#[derive(Debug, Clone)]
pub struct CoverageCell {
    pub ratio: BigRational,
    /// Subset size actually used (nearest integer to ratio·n).
    pub m: usize,
    pub k: usize,
    /// Expected coverage as a percentage of n.
    pub percent: f64,
}

/// Expected-coverage grid over subset-size ratios × epoch counts.
#[derive(Debug, Clone)]
pub struct CoverageTable {
    pub n: usize,
    /// Row-major: one row per ratio, one column per epoch count.
    pub cells: Vec<CoverageCell>,
    pub epochs: Vec<usize>,
}

impl CoverageTable {
    pub fn csv_string(&self) -> String {
        let mut out = String::from("n,m,ratio_percent,K,expected_coverage_percent\n");
        for cell in &self.cells {
            let ratio_pct = rational_to_f64(&(&cell.ratio * BigRational::from_integer(100.into())));
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.n, cell.m, ratio_pct, cell.k, cell.percent
            ));
        }
        out
    }

    /// Human-readable grid, ratios down, epoch counts across.
    pub fn render(&self) -> String {
        let mut out = format!("expected coverage (% of n = {})\n", self.n);
        out.push_str(&format!("{:>12}", "m/n"));
        for k in &self.epochs {
            out.push_str(&format!("{:>10}", format!("K={k}")));
        }
        out.push('\n');
        for row in self.cells.chunks(self.epochs.len()) {
            let ratio_pct = rational_to_f64(&(&row[0].ratio * BigRational::from_integer(100.into())));
            out.push_str(&format!("{:>12}", format!("{ratio_pct}% (m={})", row[0].m)));
            for cell in row {
                out.push_str(&format!("{:>10.1}", cell.percent));
            }
            out.push('\n');
        }
        out
    }
}

/// Expected coverage for every (ratio, K) pair; m rounds to the nearest
/// integer and the cell records the m actually used.
pub fn coverage_table(
    n: usize,
    ratios: &[BigRational],
    epochs: &[usize],
) -> Result<CoverageTable> {
    if n < 1 {
        return Err(Error::InvalidConfig("ground-set size n must be >= 1".into()));
    }
    let mut cells = Vec::with_capacity(ratios.len() * epochs.len());
    for ratio in ratios {
        if !ratio.is_positive() || ratio > &BigRational::one() {
            return Err(Error::InvalidConfig(format!(
                "subset ratio must lie in (0, 1], got {ratio}"
            )));
        }
        let m = (ratio * BigRational::from_integer(BigInt::from(n)))
            .round()
            .to_integer()
            .to_usize()
            .unwrap_or(0);
        if m < 1 || m > n {
            return Err(Error::InvalidConfig(format!(
                "ratio {ratio} rounds to subset size {m}, outside 1..={n}"
            )));
        }
        for &k in epochs {
            let config = SamplingConfig::new(n, m, k)?;
            let expected = expected_coverage(&config)?;
            let percent = rational_to_f64(
                &(expected * BigRational::from_integer(100.into())
                    / BigRational::from_integer(BigInt::from(n))),
            );
            cells.push(CoverageCell {
                ratio: ratio.clone(),
                m,
                k,
                percent,
            });
        }
    }
    Ok(CoverageTable {
        n,
        cells,
        epochs: epochs.to_vec(),
    })
}

/// Truncated exact pmf of the occupancy count `k̄` (epochs to reach coverage
/// target s), with a recorded bound on the mass beyond `k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyDistribution {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    /// Exact P(k̄ = k) for k = 1..=k_max.
    pub pmf: BTreeMap<usize, BigRational>,
    pub k_max: usize,
    /// Upper bound on P(k̄ > k_max).
    pub tail_mass: RealApprox,
}

impl OccupancyDistribution {
    pub fn prob(&self, k: usize) -> BigRational {
        self.pmf.get(&k).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Exact Σ_{k <= k_max} pmf(k); the complement is bounded by `tail_mass`.
    pub fn total_mass(&self) -> BigRational {
        self.pmf.values().sum()
    }

    /// Mean of the truncated pmf (underestimates the true expectation by at
    /// most tail_mass-weighted remainder; use `expected_occupancy` for exact).
    pub fn truncated_mean(&self) -> f64 {
        self.pmf
            .iter()
            .map(|(k, p)| *k as f64 * rational_to_f64(p))
            .sum()
    }

    pub fn float_pmf(&self) -> BTreeMap<usize, f64> {
        self.pmf
            .iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|(k, p)| (*k, rational_to_f64(p)))
            .collect()
    }

    pub fn csv_string(&self) -> String {
        let mut out =
            String::from("n,m,s,k,probability_numerator,probability_denominator,probability_float\n");
        for (k, p) in &self.pmf {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.n,
                self.m,
                self.s,
                k,
                p.numer(),
                p.denom(),
                rational_to_f64(p)
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pmf: Vec<_> = self
            .pmf
            .iter()
            .map(|(k, p)| {
                json!({
                    "k": k,
                    "numerator": p.numer().to_string(),
                    "denominator": p.denom().to_string(),
                    "float": rational_to_f64(p),
                })
            })
            .collect();
        json!({
            "n": self.n,
            "m": self.m,
            "s": self.s,
            "k_max": self.k_max,
            "tail_mass_bound": self.tail_mass.value,
            "pmf": pmf,
        })
    }
}

fn validate_nms(n: usize, m: usize, s: usize) -> Result<()> {
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
    Ok(())
}

/// Per-i signed constant factor of the occupancy pmf terms, plus C(i,m).
///
/// P(k̄ = k)·C(n,m)^k = Σ_{i=0}^{s−1} factor_i · C(i,m)^{k−1}, with
/// factor_i = (−1)^{s−i+1} C(n,i) C(n−i−1, n−s) (C(n,m) − C(i,m)),
/// and the convention C(i,m)^0 = 1 even when C(i,m) = 0.
fn occupancy_factors(n: usize, m: usize, s: usize) -> Vec<(BigInt, BigInt)> {
    let rows = pascal_rows(n);
    let cnm = &rows[n][m];
    (0..s)
        .map(|i| {
            let cim = if i >= m { rows[i][m].clone() } else { BigInt::zero() };
            let mut factor = &rows[n][i] * &rows[n - i - 1][n - s] * (cnm - &cim);
            if (s + i + 1) % 2 == 1 {
                factor = -factor;
            }
            (factor, cim)
        })
        .collect()
}

/// Exact occupancy pmf truncated where the geometric tail bound
/// n·((n−m)/n)^k drops below `epsilon_tail`.
pub fn occupancy_pmf(n: usize, m: usize, s: usize, epsilon_tail: f64) -> Result<OccupancyDistribution> {
    occupancy_pmf_with_limit(n, m, s, epsilon_tail, DEFAULT_EXACT_LIMIT)
}

pub fn occupancy_pmf_with_limit(
    n: usize,
    m: usize,
    s: usize,
    epsilon_tail: f64,
    limit: usize,
) -> Result<OccupancyDistribution> {
    validate_nms(n, m, s)?;
    if n > limit {
        return Err(Error::ExactModeExceeded { n, limit });
    }
    if !(epsilon_tail > 0.0 && epsilon_tail < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "epsilon_tail must lie in (0, 1), got {epsilon_tail}"
        )));
    }
    let eps = BigRational::from_f64(epsilon_tail).expect("finite epsilon");
    let miss = BigRational::new(BigInt::from(n - m), BigInt::from(n));
    let n_rat = BigRational::from_integer(BigInt::from(n));

    // Smallest k with n·((n−m)/n)^k <= epsilon_tail, but never below the
    // smallest possible occupancy ⌈s/m⌉.
    let min_k = s.div_ceil(m);
    let mut k_max = 1usize;
    let mut bound = &n_rat * &miss;
    while bound > eps {
        k_max += 1;
        bound *= &miss;
        if k_max > 1_000_000 {
            return Err(Error::InvalidConfig(format!(
                "epsilon_tail = {epsilon_tail} needs more than 10^6 support points at (n={n}, m={m})"
            )));
        }
    }
    k_max = k_max.max(min_k);
    let tail_bound = &n_rat * rational_pow(&miss, k_max as u32);

    let factors = occupancy_factors(n, m, s);
    let cnm = {
        let rows = pascal_rows(n);
        rows[n][m].clone()
    };
    let mut pmf = BTreeMap::new();
    // powers[i] = C(i,m)^{k−1}, updated incrementally; C(i,m)^0 = 1 for all i.
    let mut powers: Vec<BigInt> = vec![BigInt::one(); s];
    let mut denom = cnm.clone();
    for k in 1..=k_max {
        let mut num = BigInt::zero();
        for ((factor, _), power) in factors.iter().zip(&powers) {
            num += factor * power;
        }
        let p = BigRational::new(num, denom.clone());
        if k < min_k {
            assert!(p.is_zero(), "occupancy pmf not zero at impossible k = {k}");
        }
        assert!(!p.is_negative(), "occupancy pmf negative at k = {k}");
        pmf.insert(k, p);
        for ((_, cim), power) in factors.iter().zip(powers.iter_mut()) {
            *power *= cim;
        }
        denom *= &cnm;
    }

    Ok(OccupancyDistribution {
        n,
        m,
        s,
        pmf,
        k_max,
        tail_mass: RealApprox::exact(rational_to_f64(&tail_bound)),
    })
}

/// Exact P(k̄ <= k): probability that k epochs reach coverage target s.
pub fn occupancy_cdf(n: usize, m: usize, s: usize, k: usize) -> Result<BigRational> {
    validate_nms(n, m, s)?;
    if k < 1 {
        return Err(Error::InvalidConfig("cdf point k must be >= 1".into()));
    }
    let factors = occupancy_factors(n, m, s);
    let cnm = {
        let rows = pascal_rows(n);
        rows[n][m].clone()
    };
    let mut powers: Vec<BigInt> = vec![BigInt::one(); s];
    let mut denom = cnm.clone();
    let mut cdf = BigRational::zero();
    for _ in 1..=k {
        let mut num = BigInt::zero();
        for ((factor, _), power) in factors.iter().zip(&powers) {
            num += factor * power;
        }
        cdf += BigRational::new(num, denom.clone());
        for ((_, cim), power) in factors.iter().zip(powers.iter_mut()) {
            *power *= cim;
        }
        denom *= &cnm;
    }
    Ok(cdf)
}

/// Exact expected occupancy E[k̄] =
/// Σ_{i=0}^{s−1} (−1)^{s−i+1} C(n,i) C(n−i−1, n−s) · C(n,m)/(C(n,m) − C(i,m)).
pub fn expected_occupancy(n: usize, m: usize, s: usize) -> Result<BigRational> {
    expected_occupancy_with_limit(n, m, s, DEFAULT_EXACT_LIMIT)
}

pub fn expected_occupancy_with_limit(
    n: usize,
    m: usize,
    s: usize,
    limit: usize,
) -> Result<BigRational> {
    validate_nms(n, m, s)?;
    if n > limit {
        return Err(Error::ExactModeExceeded { n, limit });
    }
    let rows = pascal_rows(n);
    let cnm = &rows[n][m];
    let mut acc = BigRational::zero();
    for i in 0..s {
        let cim = if i >= m { rows[i][m].clone() } else { BigInt::zero() };
        let coeff = &rows[n][i] * &rows[n - i - 1][n - s];
        let term = BigRational::new(coeff * cnm, cnm - &cim);
        if (s + i + 1) % 2 == 1 {
            acc -= term;
        } else {
            acc += term;
        }
    }
    Ok(acc)
}

/// Classical coupon-collector expectation n·H_n; the m = 1, s = n case.
pub fn classical_coupon_expectation(n: usize) -> Result<BigRational> {
    Ok(harmonic(n)? * BigRational::from_integer(BigInt::from(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{binomial, ratio};
    use proptest::prelude::*;

    /// Independent oracle: coverage as a Markov chain on the distinct-count
    /// state c, with hypergeometric transitions
    /// P(c → c+Δ) = C(n−c, Δ)·C(c, m−Δ) / C(n, m).
    fn markov_step(n: usize, m: usize, state: &[BigRational]) -> Vec<BigRational> {
        let cnm = BigRational::from_integer(binomial(n, m));
        let mut next = vec![BigRational::zero(); n + 1];
        for (c, mass) in state.iter().enumerate() {
            if mass.is_zero() {
                continue;
            }
            let lo = m.saturating_sub(c);
            let hi = m.min(n - c);
            for delta in lo..=hi {
                let ways = binomial(n - c, delta) * binomial(c, m - delta);
                next[c + delta] += mass * BigRational::from_integer(ways) / &cnm;
            }
        }
        next
    }

    fn markov_coverage(n: usize, m: usize, k: usize) -> Vec<BigRational> {
        let mut state = vec![BigRational::zero(); n + 1];
        state[0] = BigRational::one();
        for _ in 0..k {
            state = markov_step(n, m, &state);
        }
        state
    }

    /// P(k̄ = k) for k = 1..=k_max via the same chain: mass first entering
    /// coverage >= s at step k.
    fn markov_occupancy(n: usize, m: usize, s: usize, k_max: usize) -> Vec<BigRational> {
        let mut state = vec![BigRational::zero(); n + 1];
        state[0] = BigRational::one();
        let mut out = Vec::with_capacity(k_max);
        for _ in 0..k_max {
            state = markov_step(n, m, &state);
            let absorbed: BigRational = state.iter().skip(s).sum();
            out.push(absorbed);
            for slot in state.iter_mut().skip(s) {
                *slot = BigRational::zero();
            }
        }
        out
    }

    #[test]
    fn config_validation() {
        assert!(SamplingConfig::new(4, 2, 2).is_ok());
        assert!(SamplingConfig::new(4, 0, 2).is_err());
        assert!(SamplingConfig::new(4, 5, 2).is_err());
        assert!(SamplingConfig::new(4, 2, 0).is_err());
    }

    #[test]
    fn coverage_pmf_known_values() {
        let d = coverage_pmf(&SamplingConfig::new(4, 2, 2).unwrap()).unwrap();
        assert_eq!(d.prob(2), ratio(1, 6));
        assert_eq!(d.prob(3), ratio(2, 3));
        assert_eq!(d.prob(4), ratio(1, 6));
        assert_eq!(d.prob(0), BigRational::zero());
        assert_eq!(d.prob(1), BigRational::zero());

        let d = coverage_pmf(&SamplingConfig::new(4, 2, 1).unwrap()).unwrap();
        assert_eq!(d.prob(2), BigRational::one());
        assert_eq!(d.support(), (2, 2));

        let d = coverage_pmf(&SamplingConfig::new(4, 4, 3).unwrap()).unwrap();
        assert_eq!(d.prob(4), BigRational::one());
    }

    #[test]
    fn coverage_pmf_matches_markov_chain() {
        for n in 1..=8usize {
            for m in 1..=n {
                for k in 1..=4usize {
                    let cfg = SamplingConfig::new(n, m, k).unwrap();
                    let pmf = coverage_pmf(&cfg).unwrap().pmf;
                    let oracle = markov_coverage(n, m, k);
                    assert_eq!(pmf, oracle, "mismatch at (n={n}, m={m}, K={k})");
                }
            }
        }
    }

    #[test]
    fn coverage_normalization_and_mean() {
        for n in [3usize, 7, 15, 25] {
            for m in [1, n / 2 + 1, n] {
                for k in 1..=4usize {
                    let cfg = SamplingConfig::new(n, m, k).unwrap();
                    let d = coverage_pmf(&cfg).unwrap();
                    let total: BigRational = d.pmf.iter().sum();
                    assert!(total.is_one(), "pmf sums to {total} at (n={n}, m={m}, K={k})");
                    assert_eq!(d.mean(), expected_coverage(&cfg).unwrap());
                }
            }
        }
    }

    #[test]
    fn full_coverage_known_values() {
        let one = |n, m, k| full_coverage_prob(&SamplingConfig::new(n, m, k).unwrap()).unwrap();
        assert_eq!(one(3, 3, 1), BigRational::one());
        assert_eq!(one(4, 2, 1), BigRational::zero());
        assert_eq!(one(4, 2, 2), ratio(1, 6));
        // Consistent with the full pmf.
        let cfg = SamplingConfig::new(6, 3, 4).unwrap();
        let d = coverage_pmf(&cfg).unwrap();
        assert_eq!(full_coverage_prob(&cfg).unwrap(), d.prob(6));
    }

    #[test]
    fn expected_coverage_values() {
        let cfg = SamplingConfig::new(10, 10, 1).unwrap();
        assert_eq!(
            expected_coverage(&cfg).unwrap(),
            BigRational::from_integer(10.into())
        );
        let cfg = SamplingConfig::new(1000, 50, 10).unwrap();
        let e = rational_to_f64(&expected_coverage(&cfg).unwrap());
        assert!((e - 401.263).abs() < 0.05, "E|S| = {e}");
    }

    #[test]
    fn expected_coverage_monotone_in_k() {
        for (n, m) in [(12usize, 3usize), (30, 7), (9, 1)] {
            let mut prev = BigRational::zero();
            for k in 1..=8 {
                let cur = expected_coverage(&SamplingConfig::new(n, m, k).unwrap()).unwrap();
                assert!(cur > prev, "not strictly increasing at (n={n}, m={m}, K={k})");
                prev = cur;
            }
        }
    }

    #[test]
    fn exact_mode_limit_enforced() {
        let cfg = SamplingConfig::new(201, 5, 2).unwrap();
        assert!(matches!(
            coverage_pmf(&cfg),
            Err(Error::ExactModeExceeded { n: 201, limit: 200 })
        ));
        // Closed form has no limit.
        assert!(expected_coverage(&cfg).is_ok());
        assert!(coverage_pmf_with_limit(&cfg, 250).is_ok());
    }

    #[test]
    fn coverage_table_reference_grid() {
        let ratios = [ratio(1, 20), ratio(1, 10), ratio(1, 5)];
        let epochs = [10, 20, 30];
        let table = coverage_table(1000, &ratios, &epochs).unwrap();
        let reference = [40.1, 64.2, 78.5, 65.1, 87.8, 95.8, 89.3, 98.8, 99.9];
        for (cell, want) in table.cells.iter().zip(reference) {
            assert!(
                (cell.percent - want).abs() <= 0.05,
                "cell (ratio={}, K={}) = {}, want {want}",
                cell.ratio,
                cell.k,
                cell.percent
            );
        }
        let full = coverage_table(50, &[ratio(1, 1)], &[7]).unwrap();
        assert_eq!(full.cells[0].percent, 100.0);
    }

    #[test]
    fn coverage_table_rounds_and_reports_m() {
        // 0.33·10 = 3.3 rounds to m = 3.
        let t = coverage_table(10, &[ratio(33, 100)], &[2]).unwrap();
        assert_eq!(t.cells[0].m, 3);
        assert!(coverage_table(10, &[ratio(1, 1000)], &[2]).is_err());
        assert!(coverage_table(10, &[ratio(3, 2)], &[2]).is_err());
    }

    #[test]
    fn occupancy_known_values() {
        let d = occupancy_pmf(3, 3, 3, 1e-9).unwrap();
        assert_eq!(d.prob(1), BigRational::one());
        assert_eq!(d.k_max, 1);

        let d = occupancy_pmf(4, 2, 2, 1e-9).unwrap();
        assert_eq!(d.prob(1), BigRational::one());

        let d = occupancy_pmf(2, 1, 2, 1e-9).unwrap();
        assert_eq!(d.prob(1), BigRational::zero());
        assert_eq!(d.prob(2), ratio(1, 2));
        assert_eq!(d.prob(3), ratio(1, 4));
        assert_eq!(d.prob(5), ratio(1, 16));
    }

    #[test]
    fn occupancy_matches_markov_chain() {
        for n in 1..=6usize {
            for m in 1..=n {
                for s in 1..=n {
                    let d = occupancy_pmf(n, m, s, 1e-6).unwrap();
                    let oracle = markov_occupancy(n, m, s, d.k_max);
                    for k in 1..=d.k_max {
                        assert_eq!(
                            d.prob(k),
                            oracle[k - 1],
                            "mismatch at (n={n}, m={m}, s={s}, k={k})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn occupancy_truncation_is_honest() {
        let d = occupancy_pmf(6, 2, 5, 1e-9).unwrap();
        assert!(d.k_max >= 3, "k_max below ceil(s/m)");
        assert_eq!(d.prob(1), BigRational::zero());
        assert_eq!(d.prob(2), BigRational::zero());
        assert!(d.prob(3).is_positive());
        let missing = BigRational::one() - d.total_mass();
        let bound = BigRational::from_f64(d.tail_mass.value).unwrap();
        assert!(missing <= bound, "actual tail exceeds recorded bound");
        assert!(d.tail_mass.value <= 1e-9 * 1.001);
    }

    #[test]
    fn occupancy_cdf_matches_pmf_sum() {
        let d = occupancy_pmf(5, 2, 4, 1e-9).unwrap();
        let mut acc = BigRational::zero();
        for k in 1..=6 {
            acc += d.prob(k);
            assert_eq!(occupancy_cdf(5, 2, 4, k).unwrap(), acc);
        }
    }

    #[test]
    fn occupancy_coverage_duality_small() {
        for n in 1..=5usize {
            for m in 1..=n {
                for s in 1..=n {
                    for k in 1..=4usize {
                        let cdf = occupancy_cdf(n, m, s, k).unwrap();
                        let cfg = SamplingConfig::new(n, m, k).unwrap();
                        let tail = coverage_pmf(&cfg).unwrap().tail_at_least(s);
                        assert_eq!(cdf, tail, "duality broken at (n={n}, m={m}, s={s}, K={k})");
                    }
                }
            }
        }
    }

    #[test]
    fn expected_occupancy_values() {
        assert_eq!(
            expected_occupancy(2, 1, 2).unwrap(),
            BigRational::from_integer(3.into())
        );
        assert_eq!(expected_occupancy(3, 1, 2).unwrap(), ratio(5, 2));
        assert_eq!(
            expected_occupancy(5, 5, 5).unwrap(),
            BigRational::one()
        );
        assert_eq!(expected_occupancy(4, 2, 2).unwrap(), BigRational::one());
        assert!(expected_occupancy(4, 2, 5).is_err());
    }

    #[test]
    fn coupon_collector_limit() {
        assert_eq!(
            classical_coupon_expectation(1).unwrap(),
            BigRational::one()
        );
        assert_eq!(
            classical_coupon_expectation(2).unwrap(),
            BigRational::from_integer(3.into())
        );
        assert_eq!(classical_coupon_expectation(4).unwrap(), ratio(25, 3));
        for n in 1..=12 {
            assert_eq!(
                expected_occupancy(n, 1, n).unwrap(),
                classical_coupon_expectation(n).unwrap(),
                "coupon-collector reduction failed at n = {n}"
            );
        }
    }

    #[test]
    fn expected_occupancy_agrees_with_truncated_pmf() {
        // With a tiny tail, Σ k·pmf(k) must approach the exact expectation.
        let d = occupancy_pmf(6, 2, 6, 1e-12).unwrap();
        let exact = rational_to_f64(&expected_occupancy(6, 2, 6).unwrap());
        assert!((d.truncated_mean() - exact).abs() < 1e-8);
    }

    #[test]
    fn csv_and_json_shapes() {
        let d = coverage_pmf(&SamplingConfig::new(4, 2, 2).unwrap()).unwrap();
        let csv = d.csv_string();
        assert!(csv.starts_with(
            "n,m,K,l,probability_numerator,probability_denominator,probability_float\n"
        ));
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.contains("4,2,2,3,2,3,"));
        let j = d.to_json();
        assert_eq!(j["config"]["K"], 2);
        assert_eq!(j["pmf"][3]["numerator"], "2");

        let o = occupancy_pmf(2, 1, 2, 1e-3).unwrap();
        assert!(o.csv_string().contains("2,1,2,2,1,2,0.5"));
        assert_eq!(o.to_json()["pmf"][1]["k"], 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn coverage_pmf_normalizes(n in 1usize..25, mseed in 0usize..25, k in 1usize..5) {
            let m = 1 + mseed % n;
            let cfg = SamplingConfig::new(n, m, k).unwrap();
            let d = coverage_pmf(&cfg).unwrap();
            let total: BigRational = d.pmf.iter().sum();
            prop_assert!(total.is_one());
            prop_assert_eq!(d.mean(), expected_coverage(&cfg).unwrap());
        }
    }
}
