use nalgebra::{DMatrix, DVector};

use crate::solver::NormSeries;

/// Column scaling is applied before the solve, so this bounds the condition
/// number of a design with unit-norm columns.
const MAX_CONDITION: f64 = 1e10;

/// Log coefficient window around an integer for the detector.
const LOG_COEF_HALF_WIDTH: f64 = 0.5;
/// Minimum monotone growth of the power-compensated series.
const LOG_DRIFT_MIN: f64 = 0.25;
/// Maximum deviation of the log-compensated series from its mean.
const LOG_FLAT_MAX: f64 = 0.10;

/// Least-squares decay law of one norm series.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedRate {
    /// Slope of `log value` against `log t` in the pure power fit.
    pub t_pow: f64,
    pub intercept: f64,
    /// RMS of the log residuals of the pure power fit.
    pub residual: f64,
    pub window: (f64, f64),
    pub log_detected: bool,
    pub log_pow: u32,
    /// Coefficients `(a, b)` of `log value = c + a log t + b log log t`
    /// when the log fit was requested and well posed.
    pub log_fit: Option<(f64, f64)>,
    /// Relative growth `last/first - 1` of `value t^{-a}`.
    pub power_drift: f64,
    /// Largest relative deviation of `value t^{-a} (log t)^{-k}` from its mean.
    pub log_flatness: f64,
    /// False when a design matrix was too ill-conditioned to trust.
    pub well_conditioned: bool,
}

/// Fits `value ≍ t^a` and, when `allow_log`, `value ≍ t^a (log t)^k`.
///
/// The log factor counts as detected when both hold: the coefficient of
/// `log log t` lies within 0.5 of an integer `k >= 1`, and the series with
/// only the power removed, `value t^{-a}`, grows monotonically by at least
/// 25% across the window while `value t^{-a} (log t)^{-k}` stays within 10%
/// of its mean. An ill-conditioned design yields `well_conditioned = false`
/// rather than an error.
pub fn fit_rate(series: &NormSeries, allow_log: bool) -> FittedRate {
    let (lt, ly) = logs(series);
    let window = (series.samples()[0].t, series.samples().last().map_or(0.0, |s| s.t));
    let ones = vec![1.0; lt.len()];
    let power = least_squares(&[&ones, &lt], &ly);
    let (coef, residual, mut well_conditioned) = match power {
        Some((c, r)) => (c, r, true),
        None => (vec![f64::NAN, f64::NAN], f64::NAN, false),
    };
    let mut fit = FittedRate {
        t_pow: coef[1],
        intercept: coef[0],
        residual,
        window,
        log_detected: false,
        log_pow: 0,
        log_fit: None,
        power_drift: f64::NAN,
        log_flatness: f64::NAN,
        well_conditioned,
    };
    if !allow_log || !well_conditioned {
        return fit;
    }
    let llt: Vec<f64> = lt.iter().map(|l| l.ln()).collect();
    match least_squares(&[&ones, &lt, &llt], &ly) {
        Some((c, _)) => {
            let (a, b) = (c[1], c[2]);
            fit.log_fit = Some((a, b));
            let k = b.round().max(1.0);
            let near_integer = b >= 1.0 - LOG_COEF_HALF_WIDTH && (b - k).abs() <= LOG_COEF_HALF_WIDTH;
            let powered: Vec<f64> = lt.iter().zip(&ly).map(|(l, y)| (y - a * l).exp()).collect();
            let logged: Vec<f64> =
                powered.iter().zip(&lt).map(|(v, l)| v / l.powf(k)).collect();
            fit.power_drift = powered[powered.len() - 1] / powered[0] - 1.0;
            fit.log_flatness = flatness(&logged);
            let monotone = powered.windows(2).all(|w| w[1] >= w[0]);
            if near_integer && monotone && fit.power_drift >= LOG_DRIFT_MIN && fit.log_flatness <= LOG_FLAT_MAX {
                fit.log_detected = true;
                fit.log_pow = k as u32;
            }
        }
        None => well_conditioned = false,
    }
    fit.well_conditioned = well_conditioned;
    fit
}

/// Slope `a` and log-residual RMS of `value ≍ t^a (log t)^k` with `k` fixed.
pub fn fit_with_log_power(series: &NormSeries, log_pow: u32) -> Option<(f64, f64)> {
    let (lt, ly) = logs(series);
    let y: Vec<f64> = ly.iter().zip(&lt).map(|(y, l)| y - log_pow as f64 * l.ln()).collect();
    let ones = vec![1.0; lt.len()];
    least_squares(&[&ones, &lt], &y).map(|(c, r)| (c[1], r))
}

/// `(value t^{-a})^{1/k} ≈ A (log t + c)` with the slope `a` held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogOffsetFit {
    /// `A`; positive when the compensated series grows.
    pub scale: f64,
    /// `c`, the finite-time shift of the logarithm.
    pub offset: f64,
    /// RMS misfit relative to the mean compensated value.
    pub rel_residual: f64,
}

/// Linear fit of the compensated series against `log t`. A law
/// `t^a (log t + c)^k` is the same as `t^a (log t)^k` up to constants, and
/// this recovers the shift `c` without touching the slope.
pub fn fit_log_offset(series: &NormSeries, slope: f64, log_pow: u32) -> Option<LogOffsetFit> {
    if log_pow == 0 {
        return None;
    }
    let (lt, ly): (Vec<f64>, Vec<f64>) = logs(series);
    let y: Vec<f64> = lt.iter().zip(&ly).map(|(l, v)| ((v - slope * l) / log_pow as f64).exp()).collect();
    let ones = vec![1.0; lt.len()];
    let (c, rms) = least_squares(&[&ones, &lt], &y)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    Some(LogOffsetFit { scale: c[1], offset: c[0] / c[1], rel_residual: rms / mean })
}

fn logs(series: &NormSeries) -> (Vec<f64>, Vec<f64>) {
    series.samples().iter().map(|s| (s.t.ln(), s.value.ln())).unzip()
}

/// Largest of `max/mean - 1` and `1 - min/mean`.
pub(crate) fn flatness(values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    (hi / mean - 1.0).max(1.0 - lo / mean)
}

/// Solves the least-squares problem with the given columns; `None` when the
/// column-normalised design is ill-conditioned. Returns the coefficients
/// and the RMS residual.
fn least_squares(columns: &[&[f64]], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let rows = y.len();
    let cols = columns.len();
    if rows < cols + 1 {
        return None;
    }
    let norms: Vec<f64> = columns.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    if norms.iter().any(|n| !(*n > 0.0 && n.is_finite())) {
        return None;
    }
    let a = DMatrix::from_fn(rows, cols, |i, j| columns[j][i] / norms[j]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let (smax, smin) = svd
        .singular_values
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), s| (hi.max(*s), lo.min(*s)));
    if !(smin > 0.0) || smax / smin > MAX_CONDITION {
        return None;
    }
    let x = svd.solve(&b, 0.0).ok()?;
    let r = &a * &x - &b;
    let rms = (r.norm_squared() / rows as f64).sqrt();
    Some(((0..cols).map(|j| x[j] / norms[j]).collect(), rms))
}
