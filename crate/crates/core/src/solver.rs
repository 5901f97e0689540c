//! Mild solutions `u = ∫_0^t Y(·, t-s) * f(·, s) ds` for separable forcings
//! `f(x, t) = a(t) χ_{B_R}(x)` and their `L^p` norms over space-time regions.

mod convolution;
mod duhamel;
mod norms;

use std::fmt::Write as _;
use std::f64::consts::PI;

pub use convolution::{convolve_space, SpatialConvolution};
pub use duhamel::MildSolution;

use crate::error::{invalid, Result};
use crate::exponents::RegionSpec;
use crate::kernel::ProfileTable;
use crate::quadrature::Estimate;

/// Separable forcing `amplitude · (1+t)^{-γ} · χ_{B_R}(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forcing {
    gamma: f64,
    amplitude: f64,
    radius: f64,
}

impl Forcing {
    pub fn new(gamma: f64, amplitude: f64, radius: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(invalid("gamma", format!("must be finite and >= 0, got {gamma}")));
        }
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(invalid("amplitude", format!("must be positive, got {amplitude}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("radius", format!("must be positive, got {radius}")));
        }
        Ok(Self { gamma, amplitude, radius })
    }

    /// The sharpness forcing `(1+t)^{-γ} χ_{B_1}`.
    pub fn sharpness(gamma: f64) -> Result<Self> {
        Self::new(gamma, 1.0, 1.0)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Time factor `a(t)`.
    pub fn time_factor(&self, t: f64) -> f64 {
        self.amplitude * (1.0 + t).powf(-self.gamma)
    }

    /// `|B_R|` in `R^N`.
    pub fn support_volume(&self, dim: u32) -> f64 {
        ball_volume(dim) * self.radius.powi(dim as i32)
    }

    /// `‖f(·, t)‖_{L^1}`.
    pub fn l1_norm(&self, dim: u32, t: f64) -> f64 {
        self.time_factor(t) * self.support_volume(dim)
    }

    /// `M∞ = ∫_0^∞ ∫ f`, finite only for `γ > 1`.
    pub fn total_mass(&self, dim: u32) -> Option<f64> {
        (self.gamma > 1.0).then(|| self.amplitude * self.support_volume(dim) / (self.gamma - 1.0))
    }
}

/// Volume of the unit ball in `R^N`, `N <= 3`.
pub(crate) fn ball_volume(dim: u32) -> f64 {
    match dim {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => f64::NAN,
    }
}

/// One measured norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSample {
    pub t: f64,
    pub value: f64,
    pub est_error: f64,
}

/// Norms of `u(·, t)` over one region at log-spaced times.
#[derive(Debug, Clone, PartialEq)]
pub struct NormSeries {
    region: RegionSpec,
    p: f64,
    samples: Vec<NormSample>,
}

impl NormSeries {
    /// Checks the measurement invariants: at least 8 samples, strictly
    /// increasing times spanning two decades, finite positive values.
    pub fn new(region: RegionSpec, p: f64, samples: Vec<NormSample>) -> Result<Self> {
        if samples.len() < 8 {
            return Err(invalid("samples", format!("need at least 8, got {}", samples.len())));
        }
        if samples.windows(2).any(|w| !(w[1].t > w[0].t)) || !(samples[0].t > 0.0) {
            return Err(invalid("samples", "times must be positive and strictly increasing"));
        }
        let span = samples.last().unwrap().t / samples[0].t;
        if span < 100.0 * (1.0 - 1e-12) {
            return Err(invalid("samples", format!("times span {span:.3} < two decades")));
        }
        if let Some(s) = samples.iter().find(|s| !(s.value > 0.0 && s.value.is_finite())) {
            return Err(invalid("samples", format!("value {} at t = {} is not positive", s.value, s.t)));
        }
        Ok(Self { region, p, samples })
    }

    pub fn region(&self) -> RegionSpec {
        self.region
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn samples(&self) -> &[NormSample] {
        &self.samples
    }

    /// CSV with columns `t,value,est_error,region,p`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value,est_error,region,p\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{:e},{:e},{:e},{},{}",
                s.t,
                s.value,
                s.est_error,
                self.region,
                format_p(self.p)
            );
        }
        out
    }
}

/// `p` as written in reports: `inf` for the sup norm.
pub fn format_p(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

/// `u(x, t)` for one point; builds a solver context per call. Use
/// [`MildSolution`] directly to evaluate many points.
pub fn mild_solution(
    x: &[f64],
    t: f64,
    forcing: &Forcing,
    profile: &ProfileTable,
    tol: f64,
) -> Result<Estimate> {
    MildSolution::new(profile, *forcing, tol)?.at(x, t)
}

/// `‖u(·, t)‖_{L^p(region)}`; see [`MildSolution::region_lp_norm`].
pub fn region_lp_norm(
    t: f64,
    p: f64,
    region: &RegionSpec,
    forcing: &Forcing,
    profile: &ProfileTable,
    tol: f64,
) -> Result<Estimate> {
    MildSolution::new(profile, *forcing, tol)?.region_lp_norm(t, p, region)
}
