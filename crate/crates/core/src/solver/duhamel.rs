use std::sync::OnceLock;

use super::convolution::SpatialConvolution;
use super::Forcing;
use crate::error::{invalid, Error, Result};
use crate::kernel::{check_kernel_bounds, BoundLimits, ProfileTable};
use crate::quadrature::{self, Estimate, Tolerance};

/// Pointwise values below this are not refined in relative terms.
pub(super) const ABS_FLOOR: f64 = 1e-14;

/// Evaluates `u(r, t) = ∫_0^t a(t-τ) W(r, τ) dτ` for one profile and forcing.
#[derive(Debug)]
pub struct MildSolution<'a> {
    pub(super) profile: &'a ProfileTable,
    pub(super) forcing: Forcing,
    pub(super) tol: f64,
    conv: SpatialConvolution<'a>,
    envelope: OnceLock<f64>,
}

impl<'a> MildSolution<'a> {
    /// `tol` is the relative accuracy target, in `[1e-7, 1e-3]`.
    pub fn new(profile: &'a ProfileTable, forcing: Forcing, tol: f64) -> Result<Self> {
        if !(1e-7..=1e-3).contains(&tol) {
            return Err(invalid("tol", format!("must lie in [1e-7, 1e-3], got {tol}")));
        }
        Ok(Self {
            profile,
            forcing,
            tol,
            conv: SpatialConvolution::new(profile, &forcing),
            envelope: OnceLock::new(),
        })
    }

    pub fn profile(&self) -> &ProfileTable {
        self.profile
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    /// `u(x, t)` at a point of `R^N`.
    pub fn at(&self, x: &[f64], t: f64) -> Result<Estimate> {
        let n = self.profile.params().dim() as usize;
        if x.len() != n {
            return Err(invalid("x", format!("expected {n} coordinates, got {}", x.len())));
        }
        self.radial(x.iter().map(|v| v * v).sum::<f64>().sqrt(), t)
    }

    /// `u` at radius `r`.
    pub fn radial(&self, r: f64, t: f64) -> Result<Estimate> {
        self.radial_with(r, t, self.tol)
    }

    pub(super) fn radial_with(&self, r: f64, t: f64, tol: f64) -> Result<Estimate> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid("t", format!("must be positive and finite, got {t}")));
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(invalid("r", format!("must be finite and >= 0, got {r}")));
        }
        let p = self.profile.params();
        let (alpha, theta) = (p.alpha(), p.theta());
        let two_beta = 2.0 * p.beta();
        let big_r = self.forcing.radius();
        let half = 0.5 * t;
        // radii at which the kernel width τ^θ meets the support edges
        let edges: Vec<f64> = [(r - big_r).abs(), r + big_r]
            .into_iter()
            .filter(|c| *c > 0.0)
            .collect();
        let tol = Tolerance::new(ABS_FLOOR * 1e-3, tol).with_max_intervals(2000);

        // τ ∈ (0, t/2] with v = τ^α, which absorbs the τ^{α-1} factor of W
        let v_max = half.powf(alpha);
        let mut breaks = vec![0.0, v_max];
        for c in &edges {
            let vc = c.powf(two_beta);
            for k in -8..=8 {
                breaks.push(vc * 4f64.powi(k));
            }
        }
        let near = quadrature::integrate_breaks(
            |v: f64| {
                if v == 0.0 {
                    return 0.0;
                }
                let tau = v.powf(1.0 / alpha);
                let scale = tau.powf(-theta);
                self.forcing.time_factor(t - tau) * self.conv.ball_mass(r * scale, big_r * scale) / alpha
            },
            &clip(breaks, 0.0, v_max),
            tol,
        );

        // s = t - τ ∈ [0, t/2], geometric in 1 + s for the decay of a(s)
        let mut breaks = vec![0.0, half];
        let mut b = 1.0;
        while b - 1.0 < half {
            breaks.push(b - 1.0);
            b *= 2.0;
        }
        for c in &edges {
            breaks.push(t - c.powf(1.0 / theta));
        }
        let far = quadrature::integrate_breaks(
            |s: f64| self.forcing.time_factor(s) * self.conv.w(r, t - s),
            &clip(breaks, 0.0, half),
            tol,
        );
        combine(near, far, || format!("u(r = {r:e}, t = {t:e})"))
    }

    /// `∫_0^t τ^{2α-1} a(t-τ) dτ`, the time factor of the exterior envelope.
    pub(super) fn envelope_time_integral(&self, t: f64) -> f64 {
        let a2 = 2.0 * self.profile.params().alpha();
        // v = τ^{2α}
        let vmax = t.powf(a2);
        let mut breaks = vec![0.0];
        breaks.extend(quadrature::geometric_breaks((t * 1e-9).powf(a2).min(0.5 * vmax), vmax, 4.0));
        quadrature::integrate_breaks(
            |v: f64| self.forcing.time_factor(t - v.powf(1.0 / a2)) / a2,
            &breaks,
            Tolerance::new(1e-300, 1e-10),
        )
        .map_or_else(
            |e| match e {
                Error::Quadrature { value, .. } => value,
                _ => f64::NAN,
            },
            |e| e.value,
        )
    }

    /// Empirical constant `C_1` of `Y(x, τ) <= C τ^{2α-1} |x|^{-(N+2β)}` on
    /// `|x| >= τ^θ`, with a 10% margin for the sampling.
    pub(super) fn envelope_constant(&self) -> f64 {
        *self.envelope.get_or_init(|| {
            1.1 * check_kernel_bounds(self.profile, 1.0, &BoundLimits::default())
                .exterior
                .c_nu
        })
    }
}

/// Sums two quadrature results; a failure of either is reported with the
/// combined best estimate.
pub(super) fn combine(
    a: Result<Estimate>,
    b: Result<Estimate>,
    context: impl FnOnce() -> String,
) -> Result<Estimate> {
    let parts = |r: Result<Estimate>| match r {
        Ok(e) => Ok((e, true)),
        Err(Error::Quadrature { value, error, .. }) => Ok((Estimate::new(value, error), false)),
        Err(e) => Err(e),
    };
    let ((x, ok_x), (y, ok_y)) = (parts(a)?, parts(b)?);
    let sum = Estimate::new(x.value + y.value, x.error + y.error);
    if ok_x && ok_y {
        Ok(sum)
    } else {
        Err(Error::Quadrature { context: context(), value: sum.value, error: sum.error })
    }
}

fn clip(mut breaks: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    breaks.retain(|b| *b >= lo && *b <= hi && b.is_finite());
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1e-300));
    breaks
}
