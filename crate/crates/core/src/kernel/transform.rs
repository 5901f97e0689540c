//! Radial Fourier inversion of the symbol.
//!
//! Each transform is `∫_0^∞ w(ρ) F(ρ) K(rρ) dρ` with an oscillating factor
//! `K`. The integral is split at a zero of `K` beyond the point where `F`
//! switches to its algebraic expansion. The head is integrated adaptively
//! with breakpoints at every zero; the tail is summed panel by panel between
//! consecutive zeros and the alternating partial sums are accelerated with
//! Wynn's epsilon algorithm.

use std::f64::consts::PI;

use super::symbol::Symbol;
use crate::quadrature::{self, wynn_epsilon, Estimate, GaussLegendre, Tolerance};
use crate::special_functions::{bessel_j, BesselOrder};
use crate::error::Error;

/// Oscillating factor of a radial transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Oscillation {
    Cos,
    Sin,
    BesselJ0,
}

impl Oscillation {
    fn eval(self, u: f64) -> f64 {
        match self {
            Self::Cos => u.cos(),
            Self::Sin => u.sin(),
            Self::BesselJ0 => j(BesselOrder::Zero, u),
        }
    }

    /// `k`-th positive zero, `k = 0, 1, ...`.
    fn zero(self, k: usize) -> f64 {
        let kf = k as f64;
        match self {
            Self::Cos => (kf + 0.5) * PI,
            Self::Sin => (kf + 1.0) * PI,
            Self::BesselJ0 => bessel_zero(BesselOrder::Zero, kf + 1.0),
        }
    }

    /// Index of the first zero at or beyond `u`.
    fn first_zero_beyond(self, u: f64) -> usize {
        let guess = match self {
            Self::Cos => (u / PI - 0.5).ceil(),
            Self::Sin => (u / PI - 1.0).ceil(),
            Self::BesselJ0 => (u / PI - 0.75).ceil(),
        }
        .max(0.0) as usize;
        let mut k = guess.saturating_sub(1);
        while self.zero(k) < u {
            k += 1;
        }
        k
    }
}

fn j(order: BesselOrder, u: f64) -> f64 {
    bessel_j(order.value(), u).unwrap_or(f64::NAN)
}

/// `k`-th zero of `J_0` or `J_1` (`k >= 1`) from McMahon's expansion refined
/// by Newton steps.
fn bessel_zero(order: BesselOrder, k: f64) -> f64 {
    let (b, mu) = match order {
        BesselOrder::Zero => ((k - 0.25) * PI, 0.0),
        _ => ((k + 0.25) * PI, 4.0),
    };
    let mut z = b - (mu - 1.0) / (8.0 * b) - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * (8.0 * b).powi(3));
    for _ in 0..3 {
        let (f, df) = match order {
            BesselOrder::Zero => (j(BesselOrder::Zero, z), -j(BesselOrder::One, z)),
            _ => {
                let j1 = j(BesselOrder::One, z);
                (j1, j(BesselOrder::Zero, z) - j1 / z)
            }
        };
        let step = f / df;
        z -= step;
        if step.abs() < 1e-15 * z {
            break;
        }
    }
    z
}

const TAIL_PANELS_MAX: usize = 120;

/// `∫_0^∞ w(ρ) F(ρ) K(rρ) dρ` for `r > 0`.
pub(crate) fn oscillatory_transform<W: Fn(f64) -> f64>(
    symbol: &Symbol,
    weight: W,
    osc: Oscillation,
    r: f64,
) -> Estimate {
    let f = |rho: f64| weight(rho) * symbol.value(rho) * osc.eval(r * rho);
    let rho_tail = symbol.tail_start().max(1.0);
    let k0 = osc.first_zero_beyond(r * rho_tail);
    let split = osc.zero(k0) / r;

    let mut breaks = vec![0.0];
    let mut b = 0.125f64.min(0.5 * split);
    while b < split {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.extend((0..k0).map(|k| osc.zero(k) / r));
    breaks.push(split);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let tol = Tolerance::new(1e-17, 1e-12).with_max_intervals(breaks.len() * 3 + 4000);
    let head = match quadrature::integrate_breaks(f, &breaks, tol) {
        Ok(e) => e,
        Err(Error::Quadrature { value, error, .. }) => Estimate::new(value, error),
        Err(_) => Estimate::new(f64::NAN, f64::INFINITY),
    };

    let gl = GaussLegendre::new(32);
    let mut partial = Vec::with_capacity(TAIL_PANELS_MAX + 1);
    let mut sum = 0.0;
    partial.push(0.0);
    let mut last = Estimate::new(f64::NAN, f64::INFINITY);
    let mut a = split;
    for k in k0..k0 + TAIL_PANELS_MAX {
        let b = osc.zero(k + 1) / r;
        sum += gl.integrate(f, a, b);
        a = b;
        partial.push(sum);
        if partial.len() >= 8 {
            let est = wynn_epsilon(&partial);
            let scale = head.value.abs().max(est.value.abs());
            let settled = (est.value - last.value).abs() <= 1e-15 * scale + 1e-18;
            last = Estimate::new(est.value, est.error.max((est.value - last.value).abs()));
            if settled && partial.len() >= 12 {
                break;
            }
        }
    }
    Estimate::new(head.value + last.value, head.error + last.error)
}

/// `∫_0^∞ ρ^{n-1} F(ρ) dρ` with the algebraic tail integrated term by term.
pub(crate) fn moment(symbol: &Symbol, n: u32) -> Estimate {
    let nf = n as f64;
    let rho_tail = symbol.tail_start().max(1.0);
    let mut breaks = vec![0.0];
    breaks.extend(quadrature::geometric_breaks(0.125, rho_tail, 2.0));
    let head = quadrature::integrate_breaks(
        |rho: f64| rho.powi(n as i32 - 1) * symbol.value(rho),
        &breaks,
        Tolerance::new(1e-17, 1e-13).with_max_intervals(4000),
    )
    .unwrap_or_else(|e| match e {
        Error::Quadrature { value, error, .. } => Estimate::new(value, error),
        _ => Estimate::new(f64::NAN, f64::INFINITY),
    });
    Estimate::new(head.value + symbol.moment_tail(nf, rho_tail), head.error)
}
