use std::fmt::Write as _;

use super::verify::TGrid;
use crate::error::{Error, Result};
use crate::exponents::{classify_p, FractionalParams};
use crate::kernel::ProfileTable;
use crate::solver::{Forcing, MildSolution};

/// Largest accepted ratio of the scaled deviation to the scaled norm at the
/// final time.
pub const KSZ_RATIO_LIMIT: f64 = 0.25;

/// One time of the long-time limit check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KszSample {
    pub t: f64,
    /// `t^{σ(p)} ‖u(·,t) - M∞ Y(·,t)‖_p`.
    pub deviation: f64,
    /// `t^{σ(p)} ‖u(·,t)‖_p`.
    pub norm: f64,
}

impl KszSample {
    pub fn ratio(&self) -> f64 {
        self.deviation / self.norm
    }
}

/// Convergence of `u` towards `M∞ Y` for integrable forcings and
/// subcritical `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct KszCheck {
    pub params: FractionalParams,
    pub forcing: Forcing,
    pub p: f64,
    /// `∫_0^∞ ∫ f`.
    pub m_infinity: f64,
    pub samples: Vec<KszSample>,
    /// The last three deviations decrease strictly.
    pub decreasing: bool,
    pub final_ratio: f64,
    pub pass: bool,
}

impl KszCheck {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,deviation,norm,ratio\n");
        for s in &self.samples {
            let _ = writeln!(out, "{:e},{:e},{:e},{:.6}", s.t, s.deviation, s.norm, s.ratio());
        }
        out
    }
}

/// Measures `t^{σ(p)} ‖u - M∞ Y‖_p` on the grid. Passes when the last three
/// values decrease strictly and the final one is at most a quarter of
/// `t^{σ(p)} ‖u‖_p`.
pub fn ksz_limit_check(
    params: &FractionalParams,
    forcing: &Forcing,
    p: f64,
    grid: &TGrid,
    solver_tol: f64,
    profile: &ProfileTable,
) -> Result<KszCheck> {
    let m_infinity = forcing.total_mass(params.dim()).ok_or_else(|| {
        Error::Precondition(format!("the limit needs gamma > 1, got {}", forcing.gamma()))
    })?;
    if !classify_p(params, p)?.is_subcritical() {
        return Err(Error::Precondition(format!("p = {p} is not subcritical for {params}")));
    }
    if profile.params() != params {
        return Err(Error::Precondition("profile was built for different parameters".into()));
    }
    let solver = MildSolution::new(profile, *forcing, solver_tol)?;
    let sigma = params.sigma(p);
    let samples = grid
        .times()
        .into_iter()
        .map(|t| {
            let scale = t.powf(sigma);
            let deviation = solver.deviation_lp_norm(t, p, m_infinity)?.value * scale;
            let norm = solver.deviation_lp_norm(t, p, 0.0)?.value * scale;
            Ok(KszSample { t, deviation, norm })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = samples.len();
    let decreasing = samples[n - 3..].windows(2).all(|w| w[1].deviation < w[0].deviation);
    let final_ratio = samples[n - 1].ratio();
    Ok(KszCheck {
        params: *params,
        forcing: *forcing,
        p,
        m_infinity,
        samples,
        decreasing,
        final_ratio,
        pass: decreasing && final_ratio <= KSZ_RATIO_LIMIT,
    })
}
