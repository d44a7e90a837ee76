//! Generalization-bound terms driven by expected coverage.
//!
//! The deviation between subset loss and full empirical loss scales with
//! E[1/√|S|], which the coverage distribution bounds through a chain:
//!
//!   E[1/√|S|]  ≤  √((n + 1 − E|S|)/n)  ≤  √((1 + n(1 − m/n)^K)/n)
//!
//! and the high-probability tail term multiplies in √ln(1/δ). The example
//! evaluates every link exactly, confirms the ordering, and shows how the
//! bound tightens as epochs accumulate.
//!
//! Run with: cargo run --example generalization_chain

use srs::dynamics::SamplingConfig;
use srs::generalization::{inv_sqrt_coverage_chain, sweep, tail_term};

fn main() -> srs::Result<()> {
    let report = inv_sqrt_coverage_chain(&SamplingConfig::new(100, 10, 20)?)?;
    println!("n = 100, m = 10, K = 20, delta = {}", report.delta);
    println!("  E[1/sqrt(|S|)]            = {:.10}", report.exact_e_inv_sqrt);
    println!("  sqrt((n+1-E|S|)/n)        = {:.10}", report.mid_term);
    println!("  sqrt((1+n(1-m/n)^K)/n)    = {:.10}", report.final_term);
    println!("  tail term sqrt(ln(1/d)·…) = {:.10}", report.tail_term);
    println!("  chain holds: {}", report.chain_holds);
    assert!(report.chain_holds);

    // The closed-form tail factor at these parameters is ≈ 0.6278.
    let t = tail_term(100, 10, 20, 0.05)?;
    assert!((t - 0.6278283448548928).abs() < 1e-12);

    // More epochs → more coverage → a tighter bound.
    println!("\nbound decay with K (n = 100, m = 10):");
    println!("{:>4}  {:>14}  {:>14}", "K", "E[1/sqrt|S|]", "tail term");
    let configs: Vec<SamplingConfig> = [1, 2, 5, 10, 20, 50]
        .iter()
        .map(|&k| SamplingConfig { n: 100, m: 10, k })
        .collect();
    let reports = sweep(&configs, 0.05)?;
    for r in &reports {
        println!(
            "{:>4}  {:>14.8}  {:>14.8}",
            r.config.k, r.exact_e_inv_sqrt, r.tail_term
        );
    }
    assert!(reports.windows(2).all(|w| w[1].tail_term < w[0].tail_term));
    println!("\nevery additional epoch strictly tightens the bound");
    Ok(())
}
