//! Sparse-recovery toolkit built around Newton-step optimal-thresholding
//! algorithms, with classic greedy and thresholding baselines, exact
//! restricted-isometry computation with convergence certificates for small
//! matrices, and a deterministic seeded benchmark harness.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod qp;
pub mod rip;
pub mod rng;
pub mod solvers;
pub mod thresholding;

pub use error::{Error, Result};
