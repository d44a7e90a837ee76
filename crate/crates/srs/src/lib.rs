//! Soft random sampling: train on a fresh uniform random subset of the data
//! each epoch instead of the full set.
//!
//! The crate provides, in exact rational arithmetic, the sampling dynamics of
//! that scheme — how many distinct samples K epochs touch (coverage) and how
//! many epochs full coverage takes (occupancy) — plus Monte Carlo and
//! brute-force enumeration oracles, an SGD training loop driven by subset
//! schedules with verifiable convergence bounds, and the coverage-based
//! generalization bound chain.

pub mod cli;
pub mod combinatorics;
pub mod dynamics;
pub mod error;
pub mod generalization;
pub mod sampler;
pub mod simulator;
pub mod trainer;

pub use error::{Error, Result};
