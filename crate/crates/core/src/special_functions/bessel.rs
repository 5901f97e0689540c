use std::f64::consts::PI;

use super::gamma::rgamma;
use crate::error::{invalid, Error, Result};

/// The Bessel orders needed by radial Fourier inversion in one to three
/// dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselOrder {
    MinusHalf,
    Zero,
    Half,
    One,
    ThreeHalves,
}

impl BesselOrder {
    pub fn value(self) -> f64 {
        match self {
            Self::MinusHalf => -0.5,
            Self::Zero => 0.0,
            Self::Half => 0.5,
            Self::One => 1.0,
            Self::ThreeHalves => 1.5,
        }
    }
}

impl TryFrom<f64> for BesselOrder {
    type Error = Error;

    fn try_from(nu: f64) -> Result<Self> {
        Ok(match nu {
            x if x == -0.5 => Self::MinusHalf,
            x if x == 0.0 => Self::Zero,
            x if x == 0.5 => Self::Half,
            x if x == 1.0 => Self::One,
            x if x == 1.5 => Self::ThreeHalves,
            _ => {
                return Err(invalid(
                    "order",
                    format!("unsupported Bessel order {nu}; expected one of -1/2, 0, 1/2, 1, 3/2"),
                ))
            }
        })
    }
}

/// `J_order(x)` for `x >= 0`, absolute accuracy around `1e-13` up to `x = 1e4`.
pub fn bessel_j(order: f64, x: f64) -> Result<f64> {
    let order = BesselOrder::try_from(order)?;
    if !(x >= 0.0) || x.is_infinite() {
        return Err(Error::Domain(format!("bessel_j requires finite x >= 0, got {x}")));
    }
    if order == BesselOrder::MinusHalf && x == 0.0 {
        return Err(Error::Domain("J_{-1/2} is singular at x = 0".into()));
    }
    Ok(eval(order, x))
}

pub(crate) fn eval(order: BesselOrder, x: f64) -> f64 {
    use BesselOrder::*;
    match order {
        Zero | One => {
            let n = if order == Zero { 0 } else { 1 };
            if x < 1.0 {
                power_series(order.value(), x)
            } else if x < 25.0 {
                miller(x)[n]
            } else {
                hankel_asymptotic(order.value(), x)
            }
        }
        Half | MinusHalf | ThreeHalves => {
            if x < 1.0 && order != MinusHalf {
                return power_series(order.value(), x);
            }
            let amp = (2.0 / (PI * x)).sqrt();
            let (s, c) = x.sin_cos();
            match order {
                Half => amp * s,
                MinusHalf => amp * c,
                _ => amp * (s / x - c),
            }
        }
    }
}

/// `sum_k (-1)^k (x/2)^{2k+ν} / (k! Γ(k+ν+1))`, used for `x < 1`.
fn power_series(nu: f64, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = h.powf(nu) * rgamma(nu + 1.0);
    let mut sum = term;
    let q = -h * h;
    for k in 1..40 {
        let k = k as f64;
        term *= q / (k * (k + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `[J_0(x), J_1(x)]` by backward recurrence normalised with
/// `J_0 + 2 Σ J_{2k} = 1`.
fn miller(x: f64) -> [f64; 2] {
    let start = 2 * ((x as usize + 30) / 2 + 10);
    let (mut next, mut cur) = (0.0f64, 1e-30f64);
    let mut norm = 0.0;
    let mut j1 = 0.0;
    for k in (1..=start).rev() {
        // cur = J_k, next = J_{k+1}
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        let idx = k - 1;
        if idx == 1 {
            j1 = cur;
        }
        if idx > 0 && idx % 2 == 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += cur;
    [cur / norm, j1 / norm]
}

/// Hankel's expansion, used for `x >= 25` where its smallest term is far
/// below double precision.
fn hankel_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (1.0, 0.0);
    let mut a = 1.0;
    let inv8x = 1.0 / (8.0 * x);
    for k in 1..30 {
        let odd = (2 * k - 1) as f64;
        let next = a * (mu - odd * odd) / k as f64 * inv8x;
        if next.abs() > a.abs() && k > 2 {
            break;
        }
        a = next;
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_order_closed_form() {
        let v = bessel_j(0.5, PI / 2.0).unwrap();
        assert!((v - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn origin_values() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1.0, 0.0).unwrap(), 0.0);
        assert!(bessel_j(-0.5, 0.0).is_err());
    }

    #[test]
    fn rejects_unsupported_order() {
        assert!(bessel_j(2.0, 1.0).is_err());
        assert!(bessel_j(0.0, -1.0).is_err());
    }

    #[test]
    fn branches_agree_at_switch_points() {
        for &nu in &[0.0, 1.0] {
            let a = power_series(nu, 1.0);
            let b = miller(1.0)[nu as usize];
            assert!((a - b).abs() < 1e-13, "nu={nu}: {a} vs {b}");
            let c = miller(25.0)[nu as usize];
            let d = hankel_asymptotic(nu, 25.0);
            assert!((c - d).abs() < 1e-13, "nu={nu}: {c} vs {d}");
        }
    }

    #[test]
    fn wronskian_like_identity() {
        // J_1' = J_0 - J_1/x checked by central differences
        for &x in &[0.5, 3.0, 17.0, 40.0, 900.0] {
            let h = 1e-5;
            let d = (eval(BesselOrder::One, x + h) - eval(BesselOrder::One, x - h)) / (2.0 * h);
            let rhs = eval(BesselOrder::Zero, x) - eval(BesselOrder::One, x) / x;
            assert!((d - rhs).abs() < 1e-8, "x={x}: {d} vs {rhs}");
        }
    }
}
