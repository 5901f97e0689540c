use std::f64::consts::PI;

use crate::error::{Error, Result};

// Lanczos approximation, g = 607/128, 15 terms (Godfrey).
const LANCZOS_G: f64 = 4.742_187_5;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

fn lanczos_sum(x: f64) -> f64 {
    let mut ser = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        ser += c / (x + k as f64);
    }
    ser
}

/// `sin(pi x)` with exact zeros at the integers.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let r = x - n;
    let s = (PI * r).sin();
    if (n as i64).rem_euclid(2) == 0 {
        s
    } else {
        -s
    }
}

/// Gamma function for any real argument that is not a pole.
/// Poles return `NaN`.
pub(crate) fn gamma_real(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    if x < 0.5 {
        return PI / (sin_pi(x) * gamma_real(1.0 - x));
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    if x == x.floor() && x <= 23.0 {
        return (1..x as u64).map(|k| k as f64).product();
    }
    // Γ(x) = √(2π) t^{x+1/2} e^{-t} · ser / x with t = x + g + 1/2
    let t = x + LANCZOS_G + 0.5;
    let half = t.powf(0.5 * (x + 0.5));
    SQRT_2PI * lanczos_sum(x) / x * half * (-t).exp() * half
}

/// Reciprocal gamma; exactly zero at the poles.
pub(crate) fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x > 171.7 {
        return (-ln_gamma(x)).exp();
    }
    1.0 / gamma_real(x)
}

/// `ln Γ(x)` for `x > 0`.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        return (PI / sin_pi(x)).ln() - ln_gamma(1.0 - x);
    }
    let t = x + LANCZOS_G + 0.5;
    (x + 0.5) * t.ln() - t + (SQRT_2PI * lanczos_sum(x) / x).ln()
}

/// The Gamma function on the positive half line.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!(
            "gamma_fn requires x > 0, got {x}"
        )));
    }
    Ok(gamma_real(x))
}
