//! Fundamental solution `Y(x, t) = t^{-σ*} G(|x| t^{-θ})` of the
//! time-fractional, space-fractional heat operator.
//!
//! The profile `G` is the radial inverse Fourier transform of
//! `E_{α,α}(-|η|^{2β})`. It is tabulated once per parameter set by
//! [`build_profile`] and evaluated through the resulting [`ProfileTable`].

mod bounds;
mod interp;
mod profile;
mod symbol;
mod transform;

pub use bounds::{check_kernel_bounds, BoundLimits, BoundReport, ExteriorConstant, RatioBand};
pub use profile::{build_profile, FarModel, GridSpec, NearModel, ProfileTable};
pub(crate) use profile::sphere_area;

use crate::error::{invalid, Result};

/// `Y(x, t)` at a point `x ∈ R^N`.
pub fn eval_y(profile: &ProfileTable, x: &[f64], t: f64) -> Result<f64> {
    let n = profile.params().dim() as usize;
    if x.len() != n {
        return Err(invalid("x", format!("expected {n} coordinates, got {}", x.len())));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    eval_y_radial(profile, r, t)
}

/// `Y` at radius `r = |x|`.
pub fn eval_y_radial(profile: &ProfileTable, r: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be positive and finite, got {t}")));
    }
    if !(r >= 0.0) {
        return Err(invalid("r", format!("must be nonnegative, got {r}")));
    }
    let p = profile.params();
    Ok(t.powf(-p.sigma_star()) * profile.g(r * t.powf(-p.theta())))
}

/// `‖Y(·, t)‖_{L^p} = ‖G‖_{L^p} t^{-σ(p)}`.
pub fn lp_norm_y(profile: &ProfileTable, p: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be positive and finite, got {t}")));
    }
    let c = profile.lp_norm(p)?;
    Ok(c * t.powf(-profile.params().sigma(p)))
}
