use super::duhamel::{combine, MildSolution};
use super::{NormSample, NormSeries};
use crate::error::{invalid, Error, Result};
use crate::exponents::RegionSpec;
use crate::kernel::{eval_y_radial, sphere_area};
use crate::quadrature::{self, Estimate, Tolerance};

/// Largest radius tried when certifying the tail of an unbounded region.
const TRUNCATION_LIMIT: f64 = 1e14;

impl MildSolution<'_> {
    /// `‖u(·, t)‖_{L^p}` over the region at time `t`.
    ///
    /// Finite `p` integrates `|S^{N-1}| r^{N-1} u(r, t)^p` adaptively. On
    /// unbounded regions the outer radius grows until the exterior envelope
    /// `u(r, t) <= |B_R| C_1 (r - R)^{-(N+2β)} ∫_0^t τ^{2α-1} a(t-τ) dτ`
    /// bounds the remaining tail by `tol` times the integral. For `p = ∞`
    /// the supremum is taken over a radial sample refined by golden-section
    /// search around the largest sample.
    pub fn region_lp_norm(&self, t: f64, p: f64, region: &RegionSpec) -> Result<Estimate> {
        let params = self.profile.params();
        region.validate(params)?;
        if !(p >= 1.0) {
            return Err(invalid("p", format!("must lie in [1, inf], got {p}")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid("t", format!("must be positive and finite, got {t}")));
        }
        let (lo, hi) = region.radial_bounds(params, t);
        if let RegionSpec::Intermediate { .. } = region {
            if lo < 1.0 {
                return Err(Error::Precondition(format!(
                    "intermediate region needs nu t^omega >= 1, got {lo:.4} at t = {t}"
                )));
            }
        }
        if p.is_infinite() {
            self.sup_norm(t, lo, hi)
        } else {
            self.integral_norm(t, p, lo, hi, 0.0)
        }
    }

    /// `‖u(·, t) - m Y(·, t)‖_{L^p(R^N)}` for finite `p`, the distance to a
    /// multiple of the kernel.
    pub fn deviation_lp_norm(&self, t: f64, p: f64, m: f64) -> Result<Estimate> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(invalid("p", format!("must lie in [1, inf), got {p}")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid("t", format!("must be positive and finite, got {t}")));
        }
        if !m.is_finite() {
            return Err(invalid("m", format!("must be finite, got {m}")));
        }
        self.integral_norm(t, p, 0.0, f64::INFINITY, m)
    }

    /// Measures the norm at each time.
    pub fn norm_series(&self, region: &RegionSpec, p: f64, times: &[f64]) -> Result<NormSeries> {
        let samples = times
            .iter()
            .map(|&t| {
                let e = self.region_lp_norm(t, p, region)?;
                Ok(NormSample { t, value: e.value, est_error: e.error })
            })
            .collect::<Result<Vec<_>>>()?;
        NormSeries::new(*region, p, samples)
    }

    fn inner_tol(&self) -> f64 {
        (self.tol * 0.05).max(1e-9)
    }

    /// Natural radial breakpoints: the support edge and multiples of the
    /// kernel width `t^θ`.
    fn radial_breaks(&self, t: f64, lo: f64, hi: f64) -> Vec<f64> {
        let width = t.powf(self.profile.params().theta());
        let big_r = self.forcing.radius();
        let mut b = vec![lo, hi, big_r];
        for k in -6..=12 {
            b.push(width * 2f64.powi(k));
            b.push(big_r * 2f64.powi(k));
        }
        b.retain(|x| *x >= lo && *x <= hi && x.is_finite());
        b.sort_by(f64::total_cmp);
        b.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
        b
    }

    /// `(∫ |u - m Y|^p)^{1/p}` over the shell `lo <= |x| <= hi`.
    fn integral_norm(&self, t: f64, p: f64, lo: f64, hi: f64, m: f64) -> Result<Estimate> {
        let params = self.profile.params();
        let dim = params.dim();
        let n = dim as f64;
        let s = sphere_area(dim);
        let inner = self.inner_tol();
        let mut pointwise_failure: Option<Error> = None;
        let shifted = |u: f64, r: f64| -> f64 {
            if m == 0.0 {
                return u.max(0.0);
            }
            (u - m * eval_y_radial(self.profile, r, t).unwrap_or(f64::NAN)).abs()
        };
        let mut integrand = |r: f64| -> f64 {
            match self.radial_with(r, t, inner) {
                Ok(e) => s * r.powf(n - 1.0) * shifted(e.value, r).powf(p),
                Err(Error::Quadrature { value, .. }) => s * r.powf(n - 1.0) * shifted(value, r).powf(p),
                Err(e) => {
                    pointwise_failure.get_or_insert(e);
                    f64::NAN
                }
            }
        };
        let tol = Tolerance::new(1e-300, self.tol * 0.5).with_max_intervals(400);
        let context = || format!("L^{p} norm at t = {t:e}");

        let big_r = self.forcing.radius();
        let width = t.powf(params.theta());
        let finite_hi = if hi.is_finite() { hi } else { lo.max(2.0 * big_r).max(big_r + width) * 4.0 };
        let mut total = quadrature::integrate_breaks(
            &mut integrand,
            &self.radial_breaks(t, lo, finite_hi),
            tol,
        );
        let mut tail = 0.0;
        if hi.is_infinite() {
            // |u - m Y| <= u + |m| Y and both obey the exterior envelope
            let k_env = self.envelope_constant()
                * (self.forcing.support_volume(dim) * self.envelope_time_integral(t)
                    + m.abs() * t.powf(2.0 * params.alpha() - 1.0));
            let decay = p * (n + 2.0 * params.beta()) - n;
            let tail_bound = |rt: f64| {
                s * k_env.powf(p) * 2f64.powf(n - 1.0) * (rt - big_r).powf(-decay) / decay
            };
            let mut edge = finite_hi;
            loop {
                let current = match &total {
                    Ok(e) => e.value,
                    Err(Error::Quadrature { value, .. }) => *value,
                    Err(_) => break,
                };
                tail = tail_bound(edge);
                if tail <= self.tol * 0.25 * current {
                    break;
                }
                if edge > TRUNCATION_LIMIT {
                    return Err(Error::Truncation { radius: edge, tail, integral: current });
                }
                let next = edge * 4.0;
                let piece = quadrature::integrate_breaks(
                    &mut integrand,
                    &quadrature::geometric_breaks(edge, next, 2.0),
                    tol,
                );
                total = combine(total, piece, context);
                edge = next;
            }
        }
        if let Some(e) = pointwise_failure {
            return Err(e);
        }
        let total = match total {
            Ok(e) => e,
            // accept a slightly missed target when the estimate is still small
            Err(Error::Quadrature { value, error, .. }) if error <= 10.0 * self.tol * value.abs() => {
                Estimate::new(value, error)
            }
            Err(e) => return Err(e),
        };
        let value = total.value.powf(1.0 / p);
        let rel = (total.error + tail) / total.value + p * inner;
        Ok(Estimate::new(value, value * rel / p))
    }

    fn sup_norm(&self, t: f64, lo: f64, hi: f64) -> Result<Estimate> {
        let inner = self.inner_tol();
        let u = |r: f64| -> Result<f64> {
            match self.radial_with(r, t, inner) {
                Ok(e) => Ok(e.value),
                Err(Error::Quadrature { value, .. }) => Ok(value),
                Err(e) => Err(e),
            }
        };
        let width = t.powf(self.profile.params().theta());
        let scale = width.max(self.forcing.radius());
        let top = if hi.is_finite() { hi } else { lo + 64.0 * scale };
        let mut radii = vec![lo, top];
        if lo == 0.0 {
            radii.extend((0..24).map(|k| scale * 1e-3 * 1.5f64.powi(k)).filter(|r| *r < top));
        } else {
            let ratio = (top / lo).powf(1.0 / 24.0);
            radii.extend((1..24).map(|k| lo * ratio.powi(k)));
        }
        radii.extend([self.forcing.radius(), width].into_iter().filter(|r| *r > lo && *r < top));
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        let values = radii.iter().map(|&r| u(r)).collect::<Result<Vec<_>>>()?;
        let (best, _) = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty sample");
        let mut best_value = values[best];
        let (mut a, mut b) = (radii[best.saturating_sub(1)], radii[(best + 1).min(radii.len() - 1)]);
        if b > a {
            // golden-section search for the maximiser inside the bracket
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let mut c = b - g * (b - a);
            let mut d = a + g * (b - a);
            let (mut fc, mut fd) = (u(c)?, u(d)?);
            for _ in 0..40 {
                if (b - a) <= 1e-6 * b.abs().max(1e-12) {
                    break;
                }
                if fc >= fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - g * (b - a);
                    fc = u(c)?;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + g * (b - a);
                    fd = u(d)?;
                }
            }
            best_value = best_value.max(fc).max(fd);
        }
        Ok(Estimate::new(best_value, best_value * self.tol))
    }
}
