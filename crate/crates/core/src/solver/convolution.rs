use std::f64::consts::PI;

use super::Forcing;
use crate::kernel::ProfileTable;
use crate::quadrature::{self, Tolerance};

/// Below this ratio of ball mass to the total enclosed mass, the difference
/// of cumulative masses loses too many digits and the ball is integrated
/// directly.
const CANCELLATION_LIMIT: f64 = 1e3;

/// Spatial convolution `W(r, s) = (Y(·, s) * χ_{B_R})(r)`.
///
/// In similarity variables `W = s^{α-1} D(r s^{-θ}, R s^{-θ})`, where
/// `D(ξ, ρ)` is the mass of `G` on the ball of radius `ρ` centred at
/// distance `ξ` from the origin.
#[derive(Debug, Clone, Copy)]
pub struct SpatialConvolution<'a> {
    profile: &'a ProfileTable,
    radius: f64,
}

impl<'a> SpatialConvolution<'a> {
    pub fn new(profile: &'a ProfileTable, forcing: &Forcing) -> Self {
        Self { profile, radius: forcing.radius() }
    }

    /// `W(r, s)` for `s > 0`.
    pub fn w(&self, r: f64, s: f64) -> f64 {
        let p = self.profile.params();
        let scale = s.powf(-p.theta());
        s.powf(p.alpha() - 1.0) * self.ball_mass(r * scale, self.radius * scale)
    }

    /// `∫_{|z - ξ e| < ρ} G(|z|) dz`.
    pub fn ball_mass(&self, xi: f64, rho: f64) -> f64 {
        let m = |x: f64| self.profile.mass_within(x);
        match self.profile.params().dim() {
            1 => {
                if xi <= rho {
                    return 0.5 * (m(xi + rho) + m(rho - xi));
                }
                let outer = m(xi + rho);
                let d = 0.5 * (outer - m(xi - rho));
                if d * CANCELLATION_LIMIT >= outer {
                    d
                } else {
                    self.segment_integral(xi - rho, xi + rho)
                }
            }
            dim => {
                if xi == 0.0 {
                    return m(rho);
                }
                let inner = if rho > xi { m(rho - xi) } else { 0.0 };
                inner + self.shell_integral(dim, xi, rho)
            }
        }
    }

    /// `∫_a^b G(z) dz` for `0 < a < b`.
    fn segment_integral(&self, a: f64, b: f64) -> f64 {
        let breaks = quadrature::geometric_breaks(a, b, 2.0);
        quadrature::integrate_breaks(|z| self.profile.g(z), &breaks, Tolerance::new(1e-300, 1e-11))
            .map_or_else(best_value, |e| e.value)
    }

    /// Mass of `G` on the spheres `|z| = ρ'` that the ball cuts partially,
    /// `|ξ - ρ| < ρ' < ξ + ρ`, written with `ρ' = c - h cos φ` so the
    /// square-root behaviour at both ends is smoothed out.
    fn shell_integral(&self, dim: u32, xi: f64, rho: f64) -> f64 {
        let lo = (xi - rho).abs();
        let hi = xi + rho;
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let area = |r: f64| match dim {
            2 => {
                let cos = ((r * r + xi * xi - rho * rho) / (2.0 * r * xi)).clamp(-1.0, 1.0);
                2.0 * r * cos.acos()
            }
            _ => PI * r * (rho * rho - (r - xi) * (r - xi)).max(0.0) / xi,
        };
        let f = |phi: f64| {
            let r = c - h * phi.cos();
            if r <= 0.0 {
                return 0.0;
            }
            self.profile.g(r) * area(r) * h * phi.sin()
        };
        let breaks = [0.0, 0.25 * PI, 0.5 * PI, 0.75 * PI, PI];
        quadrature::integrate_breaks(f, &breaks, Tolerance::new(1e-300, 1e-11))
            .map_or_else(best_value, |e| e.value)
    }
}

fn best_value(e: crate::error::Error) -> f64 {
    match e {
        crate::error::Error::Quadrature { value, .. } => value,
        _ => f64::NAN,
    }
}

/// `r ↦ W(r, s)` for a fixed time lag `s > 0`.
pub fn convolve_space<'a>(
    profile: &'a ProfileTable,
    s: f64,
    forcing: &Forcing,
) -> impl Fn(f64) -> f64 + 'a {
    let conv = SpatialConvolution::new(profile, forcing);
    move |r| conv.w(r, s)
}
