//! Occupancy: how many epochs until s distinct samples have been seen?
//!
//! This is the subset-based coupon-collector problem. The example computes
//! the exact (truncated) pmf of the first epoch reaching s distinct samples,
//! its expectation, the classical m = 1 coupon-collector value n·H_n, and
//! demonstrates the duality with coverage: reaching s within K epochs is the
//! same event as covering at least s after K epochs.
//!
//! Run with: cargo run --example occupancy

use num_traits::Zero;
use srs::combinatorics::{ratio, rational_to_f64};
use srs::dynamics::{
    classical_coupon_expectation, coverage_pmf, expected_occupancy, occupancy_cdf, occupancy_pmf,
    SamplingConfig, DEFAULT_EPSILON_TAIL,
};

fn main() -> srs::Result<()> {
    let (n, m, s) = (8, 3, 8);
    let dist = occupancy_pmf(n, m, s, DEFAULT_EPSILON_TAIL)?;
    println!(
        "first epoch reaching s = {s} distinct of n = {n} (m = {m} per epoch); \
         truncated at k = {} with tail ≤ {:.1e}",
        dist.k_max, dist.tail_mass.value
    );
    println!("{:>4}  {:>22}", "k", "probability");
    for (k, p) in dist.pmf.iter().filter(|(_, p)| !p.is_zero()).take(12) {
        println!("{k:>4}  {:>22}", rational_to_f64(p));
    }
    println!("   …");

    let expected = expected_occupancy(n, m, s)?;
    println!(
        "\nexpected epochs to full coverage: {} ≈ {:.6}",
        expected,
        rational_to_f64(&expected)
    );

    // m = 1 recovers the classical coupon collector: E = n·H_n, e.g. 25/3
    // for n = 4.
    let classical = classical_coupon_expectation(4)?;
    assert_eq!(classical, ratio(25, 3));
    println!("classical coupon collector, n = 4: {} ≈ {:.6}", classical, rational_to_f64(&classical));

    // Duality: P(occupancy ≤ K) == P(coverage ≥ s), exactly.
    let k = 4;
    let via_occupancy = occupancy_cdf(n, m, s, k)?;
    let via_coverage = coverage_pmf(&SamplingConfig::new(n, m, k)?)?.tail_at_least(s);
    assert_eq!(via_occupancy, via_coverage);
    println!(
        "\nduality check at K = {k}: P(reach {s} within {k}) = {} = P(|S| ≥ {s} after {k})",
        via_occupancy
    );
    Ok(())
}
