//! Monte Carlo and brute-force oracles for the exact analytics.
//!
//! Three independent routes to the coverage distribution must agree:
//! exact rational formula, exhaustive enumeration of all C(n,m)^K subset
//! sequences, and seeded Monte Carlo. The example checks exact == enumerated
//! and reports the total-variation distance of the simulation, which shrinks
//! as trials grow.
//!
//! Run with: cargo run --release --example monte_carlo

use srs::dynamics::{coverage_pmf, SamplingConfig};
use srs::simulator::{enumerate_coverage, simulate_coverage, simulate_occupancy, tv_distance};

fn main() -> srs::Result<()> {
    let config = SamplingConfig::new(6, 2, 3)?;

    // Exact vs exhaustive: identical rationals, not just close floats.
    let exact = coverage_pmf(&config)?;
    let enumerated = enumerate_coverage(&config)?;
    assert_eq!(exact.pmf, enumerated.pmf);
    println!(
        "exact pmf == enumeration over all C({},{})^{} = {} sequences",
        config.n,
        config.m,
        config.k,
        15usize.pow(3)
    );

    // Monte Carlo converges: TV distance drops roughly like 1/sqrt(trials).
    println!("\n{:>9}  {:>12}", "trials", "TV distance");
    for &trials in &[1_000u64, 10_000, 100_000, 1_000_000] {
        let sim = simulate_coverage(&config, trials, 42)?;
        let tv = tv_distance(&exact.float_pmf(), &sim.float_pmf());
        println!("{trials:>9}  {:>12.6}", tv.value);
    }

    // The occupancy simulator estimates waiting times the same way.
    let occ = simulate_occupancy(2, 1, 2, 200_000, 7)?;
    println!(
        "\nmean epochs to cover both of 2 samples at m = 1: {:.4} (exact: 3)",
        occ.mean()
    );

    // Same seed, same result — the reduction is order-independent, so the
    // worker count never changes the counts.
    let again = simulate_coverage(&config, 100_000, 42)?;
    assert_eq!(again.counts, simulate_coverage(&config, 100_000, 42)?.counts);
    println!("re-running with the same seed reproduces identical counts");
    Ok(())
}
