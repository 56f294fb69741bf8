//! Quantized cat maps at split primes: Hecke symmetries, closed-form
//! eigenfunctions, exponential-sum normalizations, and the statistics of
//! their amplitudes.

pub mod budgets;
pub mod classical;
pub mod counting;
pub mod eigenfunctions;
pub mod error;
pub mod expsums;
pub mod kernels;
pub mod linalg;
pub mod quantum;
pub mod ringmod;
pub mod stats;

pub use error::{Error, Result};
