//! Monotonicity-preserving cubic Hermite interpolation.

/// Piecewise cubic Hermite interpolant with fourth-order finite-difference
/// slopes, limited with the Fritsch–Carlson conditions so that monotone data
/// give a monotone interpolant.
#[derive(Debug, Clone)]
pub(crate) struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        let secant: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut d = vec![0.0; n];
        for i in 0..n {
            d[i] = if i >= 2 && i + 2 < n {
                five_point(&x[i - 2..=i + 2], &y[i - 2..=i + 2])
            } else if n >= 3 {
                let j = i.clamp(1, n - 2);
                three_point(&x[j - 1..=j + 1], &y[j - 1..=j + 1], i - (j - 1))
            } else {
                secant[0]
            };
        }
        // Fritsch–Carlson limiter
        for i in 0..n - 1 {
            let s = secant[i];
            if s == 0.0 {
                d[i] = 0.0;
                d[i + 1] = 0.0;
                continue;
            }
            if d[i] * s < 0.0 {
                d[i] = 0.0;
            }
            if d[i + 1] * s < 0.0 {
                d[i + 1] = 0.0;
            }
            let a = d[i] / s;
            let b = d[i + 1] / s;
            let h = a * a + b * b;
            if h > 9.0 {
                let t = 3.0 / h.sqrt();
                d[i] = t * a * s;
                d[i + 1] = t * b * s;
            }
        }
        Self { x, y, d }
    }

    /// Interval index `i` with `x[i] <= t <= x[i+1]`, clamped to the ends.
    pub fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        let i = self.x.partition_point(|&v| v <= t);
        i.saturating_sub(1).min(n - 2)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.y[i] + h * h10 * self.d[i] + h01 * self.y[i + 1] + h * h11 * self.d[i + 1]
    }
}

/// Derivative at the centre of five points from the interpolating quartic.
fn five_point(x: &[f64], y: &[f64]) -> f64 {
    lagrange_derivative(x, y, 2)
}

fn three_point(x: &[f64], y: &[f64], at: usize) -> f64 {
    lagrange_derivative(x, y, at)
}

/// Derivative of the Lagrange interpolant through `(x, y)` at node `x[k]`.
fn lagrange_derivative(x: &[f64], y: &[f64], k: usize) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    for j in 0..n {
        let w = if j == k {
            (0..n).filter(|&m| m != k).map(|m| 1.0 / (x[k] - x[m])).sum::<f64>()
        } else {
            let mut num = 1.0;
            let mut den = x[j] - x[k];
            for m in 0..n {
                if m != j && m != k {
                    num *= x[k] - x[m];
                    den *= x[j] - x[m];
                }
            }
            // d/dx of ℓ_j at x_k: prod_{m != j,k}(x_k - x_m) / prod_{m != j}(x_j - x_m)
            num / den
        };
        total += w * y[j];
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_in_the_interior() {
        let x: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let f = |t: f64| 1.0 + t + 0.3 * t * t + 0.05 * t * t * t;
        let y = x.iter().map(|&t| f(t)).collect();
        let m = MonotoneCubic::new(x, y);
        for &t in &[0.73, 1.55, 2.01, 3.33] {
            assert!((m.eval(t) - f(t)).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn monotone_data_give_monotone_interpolant() {
        let x = vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 5.0];
        let m = MonotoneCubic::new(x, y);
        let mut prev = m.eval(0.0);
        for i in 1..=600 {
            let v = m.eval(i as f64 * 0.01);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn smooth_data_converge_at_high_order() {
        let err = |n: usize| {
            let x: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64 * 3.0).collect();
            let y = x.iter().map(|t: &f64| (-t).exp()).collect();
            let m = MonotoneCubic::new(x, y);
            (0..1000)
                .map(|i| {
                    let t = 0.5 + 2.0 * i as f64 / 1000.0;
                    (m.eval(t) - (-t).exp()).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(30), err(60));
        assert!(e1 / e2 > 12.0, "{e1} {e2}");
    }
}
