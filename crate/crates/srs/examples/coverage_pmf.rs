//! Exact coverage distribution of soft random sampling.
//!
//! Drawing a uniform m-subset of n samples once per epoch for K epochs, the
//! number of distinct samples ever touched is random. This example computes
//! its probability mass function in exact rational arithmetic, checks the
//! closed-form expectation n·(1 − (1 − m/n)^K), and prints the probability
//! that every sample was seen at least once.
//!
//! Run with: cargo run --example coverage_pmf

use srs::combinatorics::rational_to_f64;
use srs::dynamics::{coverage_pmf, expected_coverage, full_coverage_prob, SamplingConfig};

fn main() -> srs::Result<()> {
    let config = SamplingConfig::new(12, 4, 3)?;
    let dist = coverage_pmf(&config)?;

    println!(
        "coverage pmf for n = {}, m = {}, K = {}",
        config.n, config.m, config.k
    );
    println!("{:>4}  {:>32}  {:>22}", "l", "exact", "float");
    let (lo, hi) = dist.support();
    for l in lo..=hi {
        let p = dist.prob(l);
        println!("{l:>4}  {:>32}  {:>22}", p.to_string(), rational_to_f64(&p));
    }

    // The pmf mean must agree exactly with the closed form.
    let mean = dist.mean();
    let closed = expected_coverage(&config)?;
    assert_eq!(mean, closed);
    println!(
        "\nexpected coverage: {} = {:.6} samples ({:.2}% of n)",
        mean,
        rational_to_f64(&mean),
        100.0 * rational_to_f64(&mean) / config.n as f64
    );

    let full = full_coverage_prob(&config)?;
    println!(
        "probability all {} samples are seen within {} epochs: {} ≈ {:.6}",
        config.n,
        config.k,
        full,
        rational_to_f64(&full)
    );

    // Support is pinned analytically: at least m (one epoch already gives m
    // distinct) and at most min(n, m·K).
    assert_eq!(lo, config.m);
    assert!(hi <= config.n.min(config.m * config.k));
    Ok(())
}
