//! Numerical core for the fully nonlocal heat equation
//! `∂_t^α u + (-Δ)^β u = f` in small dimensions `N <= 4β`.
//!
//! The crate is organised bottom-up:
//!
//! * [`special_functions`]: Mittag-Leffler, Gamma and low-order Bessel functions.
//! * [`exponents`]: scaling exponents and the predicted decay-rate tables.
//! * [`kernel`]: the self-similar profile `G` of the kernel `Y(x,t) = t^{-σ*} G(|x| t^{-θ})`.
//! * [`solver`]: Duhamel evaluation of mild solutions and region-wise `L^p` norms.
//! * [`experiments`]: rate fitting and verification against the predicted tables.

pub mod error;
pub mod experiments;
pub mod exponents;
pub mod kernel;
pub mod quadrature;
pub mod solver;
pub mod special_functions;

pub use error::{Error, Result};
