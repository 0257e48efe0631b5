//! Corrected semi-proximal ADMM for multi-block convex programs, with a
//! specialized solver for doubly nonnegative SDPs.
//!
//! * [`linalg`]: symmetric matrices, sparse constraint lists, PSD projection,
//!   Gram-matrix factorization.
//! * [`cones`]: entrywise pattern cones and proximal oracles.
//! * [`engine`]: the generic p-block corrected ADMM, the directly extended
//!   baseline, and dense analysis operators.
//! * [`dnnsdp`]: the 3/4-block DNN-SDP solver with residual certificates and
//!   σ/restart policies.
//! * [`problems`]: builders for the BIQ, extended BIQ, θ₊, RCP, FAP and QAP
//!   relaxations, random generators and brute-force references.
//! * [`io`], [`profile`], [`bench`], [`checks`]: file formats, performance
//!   profiles and the drivers behind the `cadmm` binary.

pub mod bench;
pub mod checks;
pub mod cones;
pub mod dnnsdp;
pub mod engine;
pub mod error;
pub mod io;
pub mod linalg;
pub mod problems;
pub mod profile;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Terminal status of a solver run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    Diverged,
    Error,
}

impl SolveStatus {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(self) -> i32 {
        match self {
            SolveStatus::Converged => 0,
            SolveStatus::MaxIters => 2,
            SolveStatus::Diverged => 3,
            SolveStatus::Error => 1,
        }
    }
}
