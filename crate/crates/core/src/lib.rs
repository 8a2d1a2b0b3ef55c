//! Site percolation on d-regular graphs, explored by a depth-first search
//! that reveals the random vertex set one coin flip at a time.
//!
//! * [`graph`]: compressed adjacency graphs, bitset vertex sets, `e(B, C)`,
//!   `N(S)`, `e(U)` and a components oracle.
//! * [`generators`]: seeded random regular graphs and fixed families.
//! * [`spectral`]: `λ = max(|λ₂|, |λₙ|)` and the mixing inequalities.
//! * [`exploration`]: the percolation DFS, epochs, witness paths and trace audits.
//! * [`analysis`]: threshold formulas, expansion predicates and stream checks.

pub mod analysis;
pub mod error;
pub mod exploration;
pub mod generators;
pub mod graph;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use exploration::{run_dfs_percolation, RunReport};
pub use generators::GeneratorSpec;
pub use graph::{Graph, VertexSet};
pub use rng::Probability;
