//! Sweep orchestration for DFS site-percolation experiments: build a graph
//! once, certify its spectrum, then run seeded trials over a grid of
//! retention probabilities and aggregate the results.

pub mod config;
pub mod error;
pub mod sweep;

pub use config::{GraphSource, PGrid, SweepConfig};
pub use error::{HarnessError, Result};
pub use sweep::{estimate_threshold, run_sweep, SweepOutcome, SweepRow, SweepSummary};
