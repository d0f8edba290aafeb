//! Numerical laboratory for linear Landau damping around inhomogeneous
//! stationary states of the Vlasov-HMF model.

pub mod actionangle;
pub mod config;
pub mod damping;
pub mod elliptic;
pub mod equilibria;
pub mod error;
pub mod experiments;
pub mod quad;
pub mod volterra;

pub use error::{Error, Result};
