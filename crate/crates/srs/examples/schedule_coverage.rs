//! Subset schedules and the effect of the selection interval R.
//!
//! A schedule fixes which m-subset is active in each epoch; the subset is
//! redrawn every R epochs. R = 1 refreshes every epoch (soft random
//! sampling), R = K freezes one subset for the whole run (fixed-subset
//! training). The example materializes both schedules from the same seed and
//! compares their prefix-coverage curves: refreshing dominates.
//!
//! Run with: cargo run --example schedule_coverage

use srs::sampler::{build_schedule, coverage_of_schedule, SelectionPolicy};

fn main() -> srs::Result<()> {
    let (n, m, k) = (20, 4, 10);

    let refresh = build_schedule(n, &SelectionPolicy::new(m, 1, 99)?, k)?;
    let frozen = build_schedule(n, &SelectionPolicy::new(m, k, 99)?, k)?;

    println!("n = {n}, m = {m}, K = {k}");
    println!("epoch 1 subset (R=1): {:?}", refresh.epochs[0]);
    println!("epoch 2 subset (R=1): {:?}", refresh.epochs[1]);
    println!("every epoch  (R=K):  {:?}", frozen.epochs[0]);

    // Frozen schedules reuse the identical subset in every epoch.
    assert!(frozen.epochs.iter().all(|e| *e == frozen.epochs[0]));

    println!("\nprefix coverage (distinct samples seen so far):");
    println!("{:>6}  {:>8}  {:>8}", "epoch", "R=1", "R=K");
    let curve_refresh = coverage_of_schedule(&refresh);
    let curve_frozen = coverage_of_schedule(&frozen);
    for ((epoch, c1), (_, ck)) in curve_refresh.iter().zip(&curve_frozen) {
        println!("{epoch:>6}  {c1:>8}  {ck:>8}");
    }

    // The frozen run never sees more than m samples; the refreshed run keeps
    // discovering new ones.
    assert_eq!(curve_frozen.last().unwrap().1, m);
    assert!(curve_refresh.last().unwrap().1 > m);

    println!(
        "\nafter {k} epochs: refreshing saw {} distinct samples, the fixed subset only {m}",
        curve_refresh.last().unwrap().1
    );
    Ok(())
}
