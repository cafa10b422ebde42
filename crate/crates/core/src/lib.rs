//! Frobenius series for the radial Laplace eigenvalue equation on Euclidean
//! Schwarzschild-Tangherlini backgrounds, with closed-form solutions, the
//! zeta-regularized determinant and an independent numerical oracle.

pub mod arith;
pub mod cli;
pub mod closed_forms;
pub mod config;
pub mod determinant;
pub mod document;
pub mod error;
pub mod frobenius;
pub mod oracle;
pub mod params;
pub mod radial_ode;
pub mod resummation;

pub use error::{Error, Result};
