//! Estimators and evaluation machinery for marginal wet-day rainfall.
//!
//! The crate is `no_std` (it needs `alloc`) and does no IO. Everything here
//! is a pure function of its inputs plus an explicit [`RngState`], so fits
//! and synthetic corpora are reproducible bit-for-bit on any platform. Float
//! math goes through `libm` for the same reason.
//!
//! # Layout
//!
//! - [`numerics`]: special functions, Brent root finding, Nelder-Mead,
//!   Gauss-Legendre quadrature and the counter-based RNG.
//! - [`egpd`]: the extended generalized Pareto distribution
//!   `F(y) = H(y; sigma, xi)^kappa` and its MLE, PWM, censored-MLE and
//!   censored-PWM estimators.
//! - [`gamma_mixture`]: K-component gamma mixtures with the Damsleth
//!   conjugate prior, fitted at the posterior mode.
//! - [`empirical`]: type-7 quantiles and unbiased probability weighted
//!   moments of a sample.
//! - [`evaluation`]: the log-ratio metric, U/O/N classification and
//!   per-(method, p) summaries.
//! - [`methods`]: the seven estimators behind one dispatch surface.
//! - [`corpus`]: site series, wet-day filtering and synthetic generators.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod egpd;
pub mod empirical;
mod error;
pub mod evaluation;
pub mod fit;
pub mod gamma_mixture;
pub mod methods;
pub mod numerics;

pub use error::{Error, Result};
pub use fit::{DiagnosticFlag, FitDiagnostics};
pub use numerics::rng::RngState;
