//! Expected-coverage grid: how much of the data soft random sampling visits.
//!
//! For a ground set of n = 1000 samples, selecting 5%, 10%, or 20% per epoch,
//! this prints the percentage of the data expected to be touched after 10,
//! 20, and 30 epochs — small per-epoch fractions still cover most of the data
//! surprisingly quickly.
//!
//! Run with: cargo run --example coverage_table

use srs::combinatorics::ratio;
use srs::dynamics::coverage_table;

fn main() -> srs::Result<()> {
    let ratios = [ratio(5, 100), ratio(10, 100), ratio(20, 100)];
    let epochs = [10, 20, 30];
    let table = coverage_table(1000, &ratios, &epochs)?;

    print!("{}", table.render());

    // A 10% subset over 20 epochs already covers ~88% of the data.
    let cell = table
        .cells
        .iter()
        .find(|c| c.m == 100 && c.k == 20)
        .expect("grid contains (10%, 20)");
    assert!((cell.percent - 87.8).abs() < 0.05);
    println!("\n10% per epoch × 20 epochs → {:.1}% of the data seen", cell.percent);

    println!("\nCSV form:\n{}", table.csv_string());
    Ok(())
}
