use super::profile::{FarModel, ProfileTable};
use super::eval_y_radial;
use crate::exponents::DimensionRegime;

/// Spread limits for the two-sided profile estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundLimits {
    /// Maximum sup/inf ratio of the near-origin statistic.
    pub origin_spread: f64,
    /// Maximum sup/inf ratio of the far-field statistic.
    pub far_spread: f64,
    /// Allowed relative variation of the exterior constant across times.
    pub exterior_stability: f64,
    /// Times at which the exterior statistic is sampled.
    pub times: [f64; 3],
}

impl Default for BoundLimits {
    fn default() -> Self {
        Self {
            origin_spread: 10.0,
            far_spread: 10.0,
            exterior_stability: 0.15,
            times: [1.0, 10.0, 100.0],
        }
    }
}

/// Empirical range of a ratio statistic over a radial band.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioBand {
    pub statistic: &'static str,
    pub r_lo: f64,
    pub r_hi: f64,
    pub inf: f64,
    pub sup: f64,
    pub pass: bool,
}

impl RatioBand {
    pub fn spread(&self) -> f64 {
        self.sup / self.inf
    }

    fn measure(
        statistic: &'static str,
        r_lo: f64,
        r_hi: f64,
        limit: f64,
        f: impl Fn(f64) -> f64,
    ) -> Self {
        let samples = 400;
        let step = (r_hi / r_lo).ln() / samples as f64;
        let (mut inf, mut sup) = (f64::INFINITY, 0.0f64);
        for i in 0..=samples {
            let v = f(r_lo * (step * i as f64).exp());
            inf = inf.min(v);
            sup = sup.max(v);
        }
        let pass = inf > 0.0 && sup.is_finite() && sup / inf <= limit;
        Self { statistic, r_lo, r_hi, inf, sup, pass }
    }
}

/// Empirical constant of the exterior envelope
/// `Y(x, t) <= C_ν t^{2α-1} |x|^{-(N+2β)}` on `|x| >= ν t^θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExteriorConstant {
    pub nu: f64,
    /// `(t, sup over the sampled |x|)` per time.
    pub per_time: Vec<(f64, f64)>,
    /// The largest of the per-time suprema.
    pub c_nu: f64,
    pub pass: bool,
}

/// Result of [`check_kernel_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub origin: RatioBand,
    pub far: RatioBand,
    pub exterior: ExteriorConstant,
    /// Fitted exponential rate for `β = 1`, absent otherwise.
    pub sigma_exp: Option<f64>,
}

impl BoundReport {
    pub fn pass(&self) -> bool {
        self.origin.pass && self.far.pass && self.exterior.pass
    }
}

impl ProfileTable {
    /// Statistic compared against a constant near the origin:
    /// `G(r)` or `G(r) / (1 + |ln r|)` when `N = 4β`.
    pub fn origin_ratio(&self, r: f64) -> f64 {
        match self.params().regime() {
            DimensionRegime::AtFourBeta => self.g(r) / (1.0 + r.ln().abs()),
            _ => self.g(r),
        }
    }

    /// Statistic compared against a constant in the far field: `G(r) r^{N+2β}`
    /// for `β < 1`, or `G(r)` divided by the stretched-exponential envelope with
    /// the fitted rate for `β = 1`.
    pub fn far_ratio(&self, r: f64) -> f64 {
        let p = self.params();
        match *self.far_model() {
            FarModel::Power { .. } => self.g(r) * r.powf(p.dim() as f64 + 2.0 * p.beta()),
            FarModel::Exp { exponent, sigma_exp, kappa, .. } => {
                self.g(r) * r.powf(-exponent) * (sigma_exp * r.powf(kappa)).exp()
            }
        }
    }
}

/// Measures the two-sided profile estimates and the exterior envelope
/// constant of a built profile. Failures are reported, never raised.
pub fn check_kernel_bounds(profile: &ProfileTable, nu: f64, limits: &BoundLimits) -> BoundReport {
    let p = profile.params();
    let origin = RatioBand::measure("origin", 1e-4, 1.0, limits.origin_spread, |r| {
        profile.origin_ratio(r)
    });
    let far_hi = profile.far_handoff().max(2.0);
    let far = RatioBand::measure("far", 1.0, far_hi, limits.far_spread, |r| profile.far_ratio(r));
    let sigma_exp = match *profile.far_model() {
        FarModel::Exp { sigma_exp, .. } => Some(sigma_exp),
        FarModel::Power { .. } => None,
    };

    // sampled self-similar radii ξ >= ν, mapped to |x| = ξ t^θ
    let n_plus = p.dim() as f64 + 2.0 * p.beta();
    let xi_hi = match sigma_exp {
        Some(_) => (4.0 * nu).max(profile.far_handoff()),
        None => 1e6 * nu.max(1.0),
    };
    let step = (xi_hi / nu).ln() / 600.0;
    let per_time: Vec<(f64, f64)> = limits
        .times
        .iter()
        .map(|&t| {
            let scale = t.powf(p.theta());
            let tfac = t.powf(1.0 - 2.0 * p.alpha());
            let sup = (0..=600)
                .map(|i| {
                    let x = nu * (step * i as f64).exp() * scale;
                    eval_y_radial(profile, x, t).unwrap_or(f64::NAN) * tfac * x.powf(n_plus)
                })
                .fold(0.0f64, f64::max);
            (t, sup)
        })
        .collect();
    let c_nu = per_time.iter().map(|v| v.1).fold(0.0f64, f64::max);
    let c_min = per_time.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let exterior = ExteriorConstant {
        nu,
        pass: c_nu.is_finite() && c_min > 0.0 && c_nu / c_min - 1.0 <= limits.exterior_stability,
        per_time,
        c_nu,
    };
    BoundReport { origin, far, exterior, sigma_exp }
}
