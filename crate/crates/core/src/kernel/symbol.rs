//! Fast evaluation of the Fourier symbol `F(ρ) = E_{α,α}(-ρ^{2β})` of the
//! profile. The middle band, where the Mittag-Leffler evaluator needs a
//! contour integral, is replaced by piecewise Chebyshev interpolation of
//! `ln F` in `ln x`; the symbol is evaluated millions of times per profile.

use crate::special_functions::{ln_gamma, MittagLeffler, MlParams};

const PANEL_WIDTH: f64 = 0.25;
const NODES: usize = 25;

#[derive(Debug, Clone)]
pub(crate) struct Symbol {
    ml: MittagLeffler,
    alpha: f64,
    two_beta: f64,
    x_tail: f64,
    /// Chebyshev coefficients of `ln F` per panel of `s = ln x` on `[0, ln x_tail]`.
    panels: Vec<[f64; NODES]>,
    s_hi: f64,
    asymptotic: Vec<f64>,
}

impl Symbol {
    pub fn new(alpha: f64, beta: f64) -> Self {
        let ml = MittagLeffler::new(MlParams::new(alpha, alpha).expect("alpha in (0,1)"));
        let x_tail = ml.asymptotic_from();
        let s_hi = x_tail.ln().max(0.0);
        let count = ((s_hi / PANEL_WIDTH).ceil() as usize).max(1);
        let width = s_hi / count as f64;
        let panels = (0..count)
            .map(|i| {
                let (a, b) = (i as f64 * width, (i + 1) as f64 * width);
                chebyshev_fit(|s| ml.eval_neg(s.exp()).ln(), a, b)
            })
            .collect();
        let asymptotic = ml.asymptotic_coefficients().to_vec();
        Self {
            ml,
            alpha,
            two_beta: 2.0 * beta,
            x_tail,
            panels,
            s_hi,
            asymptotic,
        }
    }

    /// `F(ρ)` for `ρ >= 0`.
    pub fn value(&self, rho: f64) -> f64 {
        let x = rho.powf(self.two_beta);
        self.at_x(x)
    }

    /// `E_{α,α}(-x)`.
    pub fn at_x(&self, x: f64) -> f64 {
        if x <= 1.0 || x >= self.x_tail {
            return self.ml.eval_neg(x);
        }
        let s = x.ln();
        let count = self.panels.len();
        let width = self.s_hi / count as f64;
        let i = ((s / width) as usize).min(count - 1);
        let a = i as f64 * width;
        let u = 2.0 * (s - a) / width - 1.0;
        clenshaw(&self.panels[i], u).exp()
    }

    /// Smallest `ρ` from which `F` is given by its algebraic expansion.
    pub fn tail_start(&self) -> f64 {
        self.x_tail.powf(1.0 / self.two_beta)
    }

    /// `∫_{ρ0}^∞ ρ^{n-1} F(ρ) dρ` from the algebraic expansion, for `ρ0 >= tail_start()`
    /// and `2β·2 > n` (the first surviving term is `k = 2`).
    pub fn moment_tail(&self, n: f64, rho0: f64) -> f64 {
        let ln_r = rho0.ln();
        let ln_x = self.two_beta * ln_r;
        let mut sum = 0.0f64;
        let mut last_env = f64::INFINITY;
        for (i, &c) in self.asymptotic.iter().enumerate() {
            let k = (i + 1) as f64;
            // truncate where |c_k| x^{-k} <= Γ(1 - α + α k) / (π x^k) is smallest,
            // as the pointwise evaluator does
            let env = (ln_gamma(1.0 - self.alpha + self.alpha * k) - std::f64::consts::PI.ln() - k * ln_x).exp();
            if env > last_env || env <= 1e-18 * sum.abs() {
                break;
            }
            last_env = env;
            if c != 0.0 {
                let ex = self.two_beta * k - n;
                sum += c * ((n - self.two_beta * k) * ln_r).exp() / ex;
            }
        }
        sum
    }

    /// Leading large-`ρ` behaviour `F(ρ) ≈ lead · ρ^{-4β}`.
    pub fn leading_tail_coefficient(&self) -> f64 {
        self.asymptotic[1]
    }
}

fn chebyshev_fit(f: impl Fn(f64) -> f64, a: f64, b: f64) -> [f64; NODES] {
    let n = NODES;
    let mut vals = [0.0; NODES];
    for (k, v) in vals.iter_mut().enumerate() {
        let u = (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos();
        *v = f(a + 0.5 * (u + 1.0) * (b - a));
    }
    let mut coef = [0.0; NODES];
    for (j, c) in coef.iter_mut().enumerate() {
        let mut s = 0.0;
        for (k, v) in vals.iter().enumerate() {
            s += v * (std::f64::consts::PI * j as f64 * (k as f64 + 0.5) / n as f64).cos();
        }
        *c = 2.0 * s / n as f64;
    }
    coef[0] *= 0.5;
    coef
}

fn clenshaw(c: &[f64; NODES], u: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * u * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    u * b1 - b2 + c[0]
}
