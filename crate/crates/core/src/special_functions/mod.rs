//! Special functions on the real line, accurate enough that quadrature error
//! dominates everything built on top of them.

mod bessel;
mod gamma;
mod mittag_leffler;

pub use bessel::{bessel_j, BesselOrder};
pub use gamma::gamma_fn;
pub(crate) use gamma::{gamma_real, ln_gamma, rgamma};
pub use mittag_leffler::{mittag_leffler, MittagLeffler, MlParams};
