//! Numerical building blocks shared by every estimator.

pub mod optimize;
pub mod quadrature;
pub mod rng;
pub mod roots;
pub mod special;

pub use optimize::{nelder_mead, Minimum, NelderMeadOptions};
pub use quadrature::{gauss_legendre_integrate, GaussLegendre};
pub use rng::RngState;
pub use roots::brent_root;
pub use special::{log_beta, log_gamma, reg_lower_incomplete_gamma};
