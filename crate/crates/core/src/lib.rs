//! Exact construction and verification of special solutions of the vector
//! Lewis equation for `Γ̄₀(n)`, the Hecke operators they induce on period
//! functions, and truncated transfer operators.

pub mod algebra;
pub mod chains;
pub mod cosets;
pub mod error;
pub mod hecke;
pub mod partitions;
pub mod ratfunc;
pub mod slash;
pub mod transfer;

pub use algebra::{ceil_ratio, mat_mul, ExtRational, FormalSum, IntMat2};
pub use error::{Error, Result};
