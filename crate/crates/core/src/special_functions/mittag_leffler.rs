//! Two-parameter Mittag-Leffler function on the closed negative real axis.
//!
//! `E_{a,b}(-x) = sum_k (-x)^k / Γ(a k + b)` is evaluated with three schemes:
//!
//! * the power series for `x <= 1`, where the largest term is at most `e`
//!   times the result;
//! * the algebraic asymptotic expansion `sum_{k>=1} (-1)^{k+1} x^{-k} / Γ(b - a k)`
//!   once its smallest term is negligible (there are no exponential
//!   contributions on the negative axis when `a < 1`);
//! * in between, the contour-integral representation obtained by folding the
//!   Hankel contour onto the rays `arg ζ = ±aπ`, integrated adaptively in
//!   `ln χ`. For `b >= 1 + a` the contour keeps an arc of radius one.
//!
//! `a = 1` is treated separately through elementary integral formulas.

use std::f64::consts::PI;

use super::gamma::{gamma_real, ln_gamma, rgamma};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{self, Tolerance};

/// Parameters `(alpha_ml, beta_ml)` of `E_{alpha_ml, beta_ml}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlParams {
    pub alpha_ml: f64,
    pub beta_ml: f64,
}

impl MlParams {
    pub fn new(alpha_ml: f64, beta_ml: f64) -> Result<Self> {
        if !(alpha_ml > 0.0 && alpha_ml <= 1.0) {
            return Err(invalid("alpha_ml", format!("must lie in (0, 1], got {alpha_ml}")));
        }
        if !(beta_ml > 0.0 && beta_ml.is_finite()) {
            return Err(invalid("beta_ml", format!("must be positive, got {beta_ml}")));
        }
        Ok(Self { alpha_ml, beta_ml })
    }
}

/// `E_{alpha_ml, beta_ml}(x)` for `x <= 0`.
pub fn mittag_leffler(p: MlParams, x: f64) -> Result<f64> {
    let p = MlParams::new(p.alpha_ml, p.beta_ml)?;
    if !(x <= 0.0) {
        return Err(Error::Domain(format!(
            "mittag_leffler is only defined here on x <= 0, got {x}"
        )));
    }
    Ok(MittagLeffler::new(p).eval_neg(-x))
}

const SERIES_LIMIT: f64 = 1.0;
const BAND_REL_TOL: f64 = 2e-14;
const ASYMPTOTIC_TERMS: usize = 300;

/// Reusable evaluator with precomputed series and asymptotic coefficients.
/// Cheap to clone; evaluation is pure.
#[derive(Debug, Clone)]
pub struct MittagLeffler {
    alpha: f64,
    beta: f64,
    series: Vec<f64>,
    asymptotic: Vec<f64>,
    envelope: Vec<f64>,
    asym_from: f64,
}

impl MittagLeffler {
    pub fn new(p: MlParams) -> Self {
        let (alpha, beta) = (p.alpha_ml, p.beta_ml);
        // 1/Γ(αk+β) until the terms drop below 1e-18 at |x| = 1.
        let mut series = Vec::new();
        let mut k = 0usize;
        loop {
            let c = rgamma(alpha * k as f64 + beta);
            series.push(c);
            let arg = alpha * k as f64 + beta;
            if (arg > 3.0 && c.abs() < 1e-18) || k > 20_000 {
                break;
            }
            k += 1;
        }
        let asymptotic: Vec<f64> = (1..=ASYMPTOTIC_TERMS)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * rgamma(beta - alpha * k as f64)
            })
            .collect();
        // |1/Γ(b - a k)| <= Γ(1 - b + a k) / π by reflection
        let envelope: Vec<f64> = asymptotic
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let arg = 1.0 - beta + alpha * (i + 1) as f64;
                if arg > 0.0 {
                    ln_gamma(arg) - PI.ln()
                } else {
                    c.abs().max(1e-300).ln()
                }
            })
            .collect();
        let mut ml = Self {
            alpha,
            beta,
            series,
            asymptotic,
            envelope,
            asym_from: f64::INFINITY,
        };
        if alpha < 1.0 {
            ml.asym_from = ml.find_asymptotic_start();
        }
        ml
    }

    pub fn params(&self) -> MlParams {
        MlParams {
            alpha_ml: self.alpha,
            beta_ml: self.beta,
        }
    }

    /// Argument from which `eval_neg` uses the algebraic expansion.
    pub fn asymptotic_from(&self) -> f64 {
        self.asym_from
    }

    /// Coefficients `c_k`, `k >= 1`, of `E(-x) ~ sum_k c_k x^{-k}`.
    pub fn asymptotic_coefficients(&self) -> &[f64] {
        &self.asymptotic
    }

    /// Smallest `x` (on a geometric scan) from which the asymptotic series is
    /// trusted: its smallest term must be below `1e-15` of the sum, with a
    /// safety factor for the exponentially small remainder.
    fn find_asymptotic_start(&self) -> f64 {
        let floor = 40f64.powf(self.alpha).max(2.0);
        let mut x = floor;
        while x < 1e6 {
            if let Some((sum, min_term)) = self.asymptotic_sum(x) {
                if sum != 0.0 && min_term <= 1e-16 * sum.abs() {
                    return x;
                }
            }
            x *= 1.25;
        }
        x
    }

    /// Sum of the asymptotic series truncated where the envelope
    /// `Γ(1 - b + a k) / (π x^k)` of its terms is smallest. Returns the sum
    /// and the envelope of the first omitted term.
    fn asymptotic_sum(&self, x: f64) -> Option<(f64, f64)> {
        let ln_x = x.ln();
        let mut sum = 0.0;
        let mut last_env = f64::INFINITY;
        let mut any = false;
        for (i, (&c, &ln_env)) in self.asymptotic.iter().zip(&self.envelope).enumerate() {
            let k = (i + 1) as f64;
            let env = (ln_env - k * ln_x).exp();
            if env > last_env {
                return any.then_some((sum, last_env));
            }
            if env <= 1e-18 * sum.abs() {
                return Some((sum, env));
            }
            last_env = env;
            if c != 0.0 {
                any = true;
                sum += c * (-k * ln_x).exp();
            }
        }
        any.then_some((sum, last_env))
    }

    fn series_sum(&self, x: f64) -> f64 {
        // alternating in sign: sum (-x)^k c_k
        let mut pow = 1.0;
        let mut sum = 0.0;
        for (k, &c) in self.series.iter().enumerate() {
            let term = c * pow;
            sum += term;
            if k > 4 && term.abs() < 1e-18 * sum.abs().max(1e-300) && self.alpha * k as f64 + self.beta > 2.0 {
                break;
            }
            pow *= -x;
        }
        sum
    }

    /// `E_{α,β}(-x)` for `x >= 0`.
    pub fn eval_neg(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0);
        if x == 0.0 {
            return rgamma(self.beta);
        }
        if x.is_infinite() {
            return 0.0;
        }
        if self.alpha == 1.0 {
            return self.eval_alpha_one(x);
        }
        if x <= SERIES_LIMIT {
            return self.series_sum(x);
        }
        if x >= self.asym_from {
            if let Some((sum, _)) = self.asymptotic_sum(x) {
                return sum;
            }
        }
        self.contour_integral(x)
    }

    fn contour_integral(&self, x: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        let s1 = (PI * (1.0 - b)).sin();
        let s2 = (PI * (1.0 - b + a)).sin();
        let cos_a = (PI * a).cos();
        let pw = (1.0 - b) / a;
        let norm = 1.0 / (a * PI);
        // K(χ) χ in the variable y = ln χ
        let ray = |y: f64| {
            let chi = y.exp();
            let e = (-(y / a).exp()).exp();
            if e == 0.0 {
                return 0.0;
            }
            let den = chi * chi + 2.0 * chi * x * cos_a + x * x;
            norm * e * (pw * y).exp() * (chi * s1 + x * s2) / den * chi
        };
        let y_hi = a * 60f64.ln();
        
        if b < 1.0 + a {
            // integrand ~ χ^{pw + 1} near the origin
            let ex = pw + 1.0 + if s2 == 0.0 { 1.0 } else { 0.0 };
            let y_lo = (1e-20f64).ln() / ex - 2.0;
            let mut breaks = vec![y_lo];
            let lx = x.ln();
            let mut y = y_lo + 5.0;
            while y < y_hi {
                if (y - lx).abs() > 0.25 {
                    breaks.push(y);
                }
                y += 5.0;
            }
            if lx > y_lo && lx < y_hi {
                breaks.push(lx);
            }
            breaks.push(y_hi);
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            integrate_or_best(ray, &breaks)
        } else {
            let lx = x.ln();
            let mut breaks = vec![0.0, y_hi];
            if lx > 0.0 && lx < y_hi {
                breaks.insert(1, lx);
            }
            let rays = integrate_or_best(ray, &breaks);
            // arc of radius 1: 2 Re ∫_0^{aπ} P(φ) dφ
            let arc = |phi: f64| {
                let mag = (phi / a).cos().exp();
                let omega = (phi / a).sin() + phi * (1.0 + pw);
                // e^{iω} / (e^{iφ} + x)
                let (dr, di) = (phi.cos() + x, phi.sin());
                let den = dr * dr + di * di;
                let (nr, ni) = (omega.cos(), omega.sin());
                let re = (nr * dr + ni * di) / den;
                mag * re / (2.0 * a * PI)
            };
            let arc_val = integrate_or_best(arc, &[0.0, 0.5 * a * PI, a * PI]);
            rays + 2.0 * arc_val
        }
    }

    fn eval_alpha_one(&self, x: f64) -> f64 {
        let b = self.beta;
        if b == 1.0 {
            return (-x).exp();
        }
        if x <= SERIES_LIMIT {
            return self.series_sum(x);
        }
        if b > 1.0 {
            // E_{1,b}(-x) = (1/Γ(b-1)) ∫_0^1 e^{-xs} (1-s)^{b-2} ds
            let f = |s: f64| (-x * s).exp() * (1.0 - s).powf(b - 2.0);
            let breaks = graded_to_one(x);
            integrate_or_best(f, &breaks) / gamma_real(b - 1.0)
        } else {
            // E_{1,b}(-x) = (1/Γ(b)) [e^{-x} - x ∫_0^1 e^{-xs}((1-s)^{b-1} - 1) ds]
            let f = |s: f64| (-x * s).exp() * ((1.0 - s).powf(b - 1.0) - 1.0);
            let breaks = graded_to_one(x);
            ((-x).exp() - x * integrate_or_best(f, &breaks)) / gamma_real(b)
        }
    }
}

fn graded_to_one(x: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let scale = (1.0 / x).min(0.5);
    let mut s = scale;
    while s < 0.5 {
        breaks.push(s);
        s *= 4.0;
    }
    breaks.push(0.5);
    let mut d = 0.25;
    while d > 1e-12 {
        breaks.push(1.0 - d);
        d *= 0.125;
    }
    breaks.push(1.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
}

fn integrate_or_best<F: FnMut(f64) -> f64>(f: F, breaks: &[f64]) -> f64 {
    let tol = Tolerance::new(1e-300, BAND_REL_TOL).with_max_intervals(4000);
    match quadrature::integrate_breaks(f, breaks, tol) {
        Ok(est) => est.value,
        Err(Error::Quadrature { value, .. }) => value,
        Err(_) => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ml(a: f64, b: f64, x: f64) -> f64 {
        mittag_leffler(MlParams::new(a, b).unwrap(), x).unwrap()
    }

    #[test]
    fn exponential_case() {
        assert!((ml(1.0, 1.0, -1.0) - 0.367_879_441_171_442_3).abs() < 1e-15);
    }

    #[test]
    fn value_at_origin() {
        assert!((ml(0.5, 0.5, 0.0) - 0.564_189_583_547_756_3).abs() < 1e-15);
    }

    #[test]
    fn rejects_positive_axis_and_bad_params() {
        let p = MlParams::new(0.5, 1.0).unwrap();
        assert!(matches!(mittag_leffler(p, 0.1), Err(Error::Domain(_))));
        assert!(MlParams::new(0.0, 1.0).is_err());
        assert!(MlParams::new(1.2, 1.0).is_err());
        assert!(MlParams::new(0.5, 0.0).is_err());
    }

    #[test]
    fn alpha_one_elementary_cases() {
        // E_{1,2}(-x) = (1 - e^{-x}) / x
        for &x in &[0.5, 2.0, 7.5, 40.0] {
            let exact = (1.0 - f64::exp(-x)) / x;
            let got = ml(1.0, 2.0, -x);
            assert!((got - exact).abs() < 1e-12 * exact, "x={x}: {got} vs {exact}");
        }
    }

    #[test]
    fn band_and_asymptotic_agree_at_handoff() {
        for &(a, b) in &[(0.5, 0.5), (0.4, 1.0), (0.7, 0.7), (0.3, 0.3)] {
            let e = MittagLeffler::new(MlParams::new(a, b).unwrap());
            let x = e.asym_from * 1.01;
            let asym = e.asymptotic_sum(x).unwrap().0;
            let band = e.contour_integral(x);
            assert!(
                (asym - band).abs() <= 1e-11 * asym.abs(),
                "a={a} b={b} x={x}: {asym} vs {band}"
            );
        }
    }
}
