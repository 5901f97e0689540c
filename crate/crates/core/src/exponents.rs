//! Scaling exponents of the kernel and the table of predicted decay rates.
//!
//! With `θ = α/(2β)` and `σ* = 1 - α + Nθ`, the kernel satisfies
//! `‖Y(·,t)‖_p = C t^{-σ(p)}` where `σ(p) = σ* - Nθ/p`. The rate oracle
//! [`predicted_rate`] returns the sharp decay law of the mild solution on the
//! four families of space-time regions, selected by the dimension regime, the
//! forcing decay exponent `γ` and, globally, the position of `p` relative to
//! the critical exponent.

use std::fmt;

use num_rational::Rational64;

use crate::error::{invalid, Error, Result};

/// Relative tolerance used to decide `p = p_c` when `p` is given as a float.
pub const CRITICAL_P_RTOL: f64 = 1e-12;

/// Position of the dimension relative to the critical values `2β` and `4β`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DimensionRegime {
    BelowTwoBeta,
    AtTwoBeta,
    BetweenTwoAndFourBeta,
    AtFourBeta,
    AboveFourBeta,
}

impl DimensionRegime {
    pub fn label(self) -> &'static str {
        match self {
            Self::BelowTwoBeta => "N<2beta",
            Self::AtTwoBeta => "N=2beta",
            Self::BetweenTwoAndFourBeta => "2beta<N<4beta",
            Self::AtFourBeta => "N=4beta",
            Self::AboveFourBeta => "N>4beta",
        }
    }
}

/// The triple `(N, α, β)` with `β` held exactly as a rational number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalParams {
    dim: u32,
    alpha: f64,
    beta: Rational64,
}

impl FractionalParams {
    pub fn new(dim: u32, alpha: f64, beta: Rational64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("N", "spatial dimension must be at least 1"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid("alpha", format!("must lie in the open interval (0, 1), got {alpha}")));
        }
        let zero = Rational64::from_integer(0);
        let one = Rational64::from_integer(1);
        if !(beta > zero && beta <= one) {
            return Err(invalid("beta", format!("must lie in (0, 1], got {beta}")));
        }
        Ok(Self { dim, alpha, beta })
    }

    /// Convenience constructor taking `β = num/den`.
    pub fn with_ratio(dim: u32, alpha: f64, num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(invalid("beta", "zero denominator"));
        }
        Self::new(dim, alpha, Rational64::new(num, den))
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        *self.beta.numer() as f64 / *self.beta.denom() as f64
    }

    pub fn beta_ratio(&self) -> Rational64 {
        self.beta
    }

    pub fn theta(&self) -> f64 {
        self.alpha / (2.0 * self.beta())
    }

    pub fn sigma_star(&self) -> f64 {
        1.0 - self.alpha + self.dim as f64 * self.theta()
    }

    /// `σ(p) = σ* - Nθ/p`, with `p = f64::INFINITY` allowed.
    pub fn sigma(&self, p: f64) -> f64 {
        self.sigma_star() - self.dim as f64 * self.theta() / p
    }

    pub fn regime(&self) -> DimensionRegime {
        let n = Rational64::from_integer(self.dim as i64);
        let two = self.beta * 2;
        let four = self.beta * 4;
        if n < two {
            DimensionRegime::BelowTwoBeta
        } else if n == two {
            DimensionRegime::AtTwoBeta
        } else if n < four {
            DimensionRegime::BetweenTwoAndFourBeta
        } else if n == four {
            DimensionRegime::AtFourBeta
        } else {
            DimensionRegime::AboveFourBeta
        }
    }

    /// `N <= 4β`, the range covered by the rate tables.
    pub fn is_small_dimension(&self) -> bool {
        self.regime() != DimensionRegime::AboveFourBeta
    }

    /// Critical Lebesgue exponent of the kernel.
    pub fn p_crit(&self) -> CriticalExponent {
        let n = self.dim as f64;
        match self.regime() {
            DimensionRegime::BelowTwoBeta => CriticalExponent::NotApplicable,
            DimensionRegime::AtTwoBeta => CriticalExponent::Infinite,
            _ => CriticalExponent::Finite(n / (n - 2.0 * self.beta())),
        }
    }

    /// `q_c(p) = N / (2β + N/p)`.
    pub fn q_crit(&self, p: f64) -> f64 {
        let n = self.dim as f64;
        n / (2.0 * self.beta() + n / p)
    }
}

impl fmt::Display for FractionalParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={} alpha={} beta={}", self.dim, self.alpha, self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalExponent {
    /// `N < 2β`: every `p` in `[1, ∞]` is subcritical.
    NotApplicable,
    Infinite,
    Finite(f64),
}

impl CriticalExponent {
    /// `NaN` when not applicable, `+∞` when infinite.
    pub fn as_f64(self) -> f64 {
        match self {
            Self::NotApplicable => f64::NAN,
            Self::Infinite => f64::INFINITY,
            Self::Finite(v) => v,
        }
    }
}

/// All exponents attached to one `(params, p)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentSet {
    pub theta: f64,
    pub sigma_star: f64,
    pub sigma_p: f64,
    pub p_crit: CriticalExponent,
    pub q_crit: f64,
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(invalid("p", format!("must lie in [1, inf], got {p}")))
    }
}

pub fn derive_exponents(params: &FractionalParams, p: f64) -> Result<ExponentSet> {
    check_p(p)?;
    Ok(ExponentSet {
        theta: params.theta(),
        sigma_star: params.sigma_star(),
        sigma_p: params.sigma(p),
        p_crit: params.p_crit(),
        q_crit: params.q_crit(p),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PClass {
    Subcritical,
    Critical { q_crit: f64 },
    Supercritical { q_crit: f64 },
}

impl PClass {
    pub fn is_subcritical(self) -> bool {
        matches!(self, Self::Subcritical)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Subcritical => "subcritical",
            Self::Critical { .. } => "critical",
            Self::Supercritical { .. } => "supercritical",
        }
    }
}

pub fn classify_p(params: &FractionalParams, p: f64) -> Result<PClass> {
    check_p(p)?;
    let q_crit = params.q_crit(p);
    Ok(match params.p_crit() {
        CriticalExponent::NotApplicable => PClass::Subcritical,
        CriticalExponent::Infinite => {
            if p.is_infinite() {
                PClass::Critical { q_crit }
            } else {
                PClass::Subcritical
            }
        }
        CriticalExponent::Finite(pc) => {
            if (p - pc).abs() <= CRITICAL_P_RTOL * pc {
                PClass::Critical { q_crit }
            } else if p < pc {
                PClass::Subcritical
            } else {
                PClass::Supercritical { q_crit }
            }
        }
    })
}

/// Space-time region on which a norm is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionSpec {
    /// `|x| >= ν t^θ`.
    Exterior { nu: f64 },
    /// `|x| <= radius`, a fixed compact set.
    CompactBall { radius: f64 },
    /// `ν < |x| / g(t) < μ` with `g(t) = t^ω`, `0 < ω < θ`.
    Intermediate { omega: f64, nu: f64, mu: f64 },
    Global,
}

impl RegionSpec {
    /// Checks the region against the scaling of `params`.
    pub fn validate(&self, params: &FractionalParams) -> Result<()> {
        match *self {
            Self::Exterior { nu } if !(nu > 0.0 && nu.is_finite()) => {
                Err(invalid("nu", format!("exterior threshold must be positive, got {nu}")))
            }
            Self::CompactBall { radius } if !(radius > 0.0 && radius.is_finite()) => {
                Err(invalid("radius", format!("must be positive, got {radius}")))
            }
            Self::Intermediate { omega, nu, mu } => {
                let theta = params.theta();
                if !(omega > 0.0 && omega < theta) {
                    return Err(invalid(
                        "omega",
                        format!("must lie in (0, theta) = (0, {theta}), got {omega}"),
                    ));
                }
                if !(nu > 0.0 && mu > nu && mu.is_finite()) {
                    return Err(invalid("mu", format!("need 0 < nu < mu, got nu={nu}, mu={mu}")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Radial interval `[inner, outer]` covered at time `t`.
    pub fn radial_bounds(&self, params: &FractionalParams, t: f64) -> (f64, f64) {
        match *self {
            Self::Exterior { nu } => (nu * t.powf(params.theta()), f64::INFINITY),
            Self::CompactBall { radius } => (0.0, radius),
            Self::Intermediate { omega, nu, mu } => {
                let g = t.powf(omega);
                (nu * g, mu * g)
            }
            Self::Global => (0.0, f64::INFINITY),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Exterior { .. } => "exterior",
            Self::CompactBall { .. } => "compact",
            Self::Intermediate { .. } => "intermediate",
            Self::Global => "global",
        }
    }

    /// Exponent ω of `g(t) = t^ω`, zero outside intermediate regions.
    pub fn omega(&self) -> f64 {
        match *self {
            Self::Intermediate { omega, .. } => omega,
            _ => 0.0,
        }
    }
}

impl fmt::Display for RegionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Exterior { nu } => write!(f, "exterior:{nu}"),
            Self::CompactBall { radius } => write!(f, "compact:{radius}"),
            Self::Intermediate { omega, nu, mu } => write!(f, "intermediate:{omega}:{nu}:{mu}"),
            Self::Global => write!(f, "global"),
        }
    }
}

impl std::str::FromStr for RegionSpec {
    type Err = Error;

    /// Inverse of `Display`: `exterior:ν`, `compact:R`,
    /// `intermediate:ω:ν:μ` or `global`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').map(str::trim).collect();
        let num = |i: usize| -> Result<f64> {
            parts[i]
                .parse::<f64>()
                .map_err(|_| invalid("region", format!("`{}` in `{s}` is not a number", parts[i])))
        };
        let region = match (parts[0], parts.len()) {
            ("exterior", 2) => Self::Exterior { nu: num(1)? },
            ("compact", 2) => Self::CompactBall { radius: num(1)? },
            ("intermediate", 4) => Self::Intermediate { omega: num(1)?, nu: num(2)?, mu: num(3)? },
            ("global", 1) => Self::Global,
            _ => {
                return Err(invalid(
                    "region",
                    format!("`{s}` is not one of exterior:NU, compact:R, intermediate:OMEGA:NU:MU, global"),
                ))
            }
        };
        Ok(region)
    }
}

/// One product `t^a (log t)^b g^c (log(t^θ/g))^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTerm {
    pub t_pow: f64,
    pub logt_pow: u32,
    pub g_pow: f64,
    pub loggap_pow: u32,
}

impl RateTerm {
    pub fn power(t_pow: f64) -> Self {
        Self { t_pow, logt_pow: 0, g_pow: 0.0, loggap_pow: 0 }
    }

    pub fn with_log(mut self, k: u32) -> Self {
        self.logt_pow = k;
        self
    }

    pub fn with_g(mut self, c: f64) -> Self {
        self.g_pow = c;
        self
    }

    pub fn with_loggap(mut self, d: u32) -> Self {
        self.loggap_pow = d;
        self
    }

    /// `t`-exponent after substituting `g = t^ω`.
    pub fn effective_t_pow(&self, omega: f64) -> f64 {
        self.t_pow + omega * self.g_pow
    }

    /// Total power of `log t` after substituting `log(t^θ/g) = (θ-ω) log t`.
    pub fn effective_log_pow(&self) -> u32 {
        self.logt_pow + self.loggap_pow
    }

    /// Value of the term at time `t`.
    pub fn eval(&self, t: f64, theta: f64, omega: f64) -> f64 {
        let lt = t.ln();
        let mut v = t.powf(self.t_pow) * lt.powi(self.logt_pow as i32);
        if self.g_pow != 0.0 {
            v *= t.powf(omega * self.g_pow);
        }
        if self.loggap_pow > 0 {
            v *= ((theta - omega) * lt).powi(self.loggap_pow as i32);
        }
        v
    }
}

fn fixed(x: f64, digits: usize) -> String {
    // adding zero turns -0.0 into 0.0 so the rendering is sign-stable
    format!("{:.*}", digits, x + 0.0)
}

impl fmt::Display for RateTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t^{{{}}}", fixed(self.t_pow, 3))?;
        if self.logt_pow > 0 {
            write!(f, " * log(t)^{}", self.logt_pow)?;
        }
        if self.g_pow != 0.0 {
            write!(f, " * g^{{{}}}", fixed(self.g_pow, 3))?;
        }
        if self.loggap_pow > 0 {
            write!(f, " * log(t^th/g)^{}", self.loggap_pow)?;
        }
        Ok(())
    }
}

/// Hypotheses on the forcing under which a rate row holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ForcingHypothesis {
    /// `‖f(·,t)‖_1 <= C (1+t)^{-γ}`.
    L1Decay,
    /// `|f(x,t)| <= C |x|^{-N} (1+t)^{-γ}` for large `|x|`.
    PointwiseDecay,
    /// `‖f(·,t)‖_q <= C (1+t)^{-γ}` for some `q > q_c(p)`.
    LqDecayAboveCritical,
}

/// Maximum of rate terms, times the prefactor `g^{N/p}` on intermediate regions.
#[derive(Debug, Clone, PartialEq)]
pub struct RateExpr {
    pub prefactor_g_pow: f64,
    pub terms: Vec<RateTerm>,
    /// Human-readable name of the table row that produced the expression.
    pub row: &'static str,
    pub hypotheses: Vec<ForcingHypothesis>,
}

/// Leading behaviour of a [`RateExpr`] once `g = t^ω` is substituted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominantRate {
    /// `t`-exponent of the dominant term, without the prefactor.
    pub t_pow: f64,
    pub log_pow: u32,
    /// Another term has a `t`-exponent within the given margin, so which one
    /// dominates at finite times is undecided.
    pub ambiguous: bool,
}

impl RateExpr {
    fn simple(row: &'static str, terms: Vec<RateTerm>) -> Self {
        Self {
            prefactor_g_pow: 0.0,
            terms,
            row,
            hypotheses: Vec::new(),
        }
    }

    /// Dominant term for `g = t^ω`; `margin` is the slope gap below which two
    /// terms count as competing.
    pub fn dominant(&self, omega: f64, margin: f64) -> DominantRate {
        let mut best = self.terms[0];
        for term in &self.terms[1..] {
            let (a, b) = (term.effective_t_pow(omega), best.effective_t_pow(omega));
            if a > b || (a == b && term.effective_log_pow() > best.effective_log_pow()) {
                best = *term;
            }
        }
        let lead = best.effective_t_pow(omega);
        let ambiguous = self
            .terms
            .iter()
            .filter(|t| **t != best)
            .any(|t| (t.effective_t_pow(omega) - lead).abs() < margin);
        DominantRate {
            t_pow: lead,
            log_pow: best.effective_log_pow(),
            ambiguous,
        }
    }

    /// Value of the full expression (prefactor included) at `t`.
    pub fn eval(&self, t: f64, theta: f64, omega: f64) -> f64 {
        let m = self
            .terms
            .iter()
            .map(|term| term.eval(t, theta, omega))
            .fold(f64::NEG_INFINITY, f64::max);
        t.powf(omega * self.prefactor_g_pow) * m
    }
}

impl fmt::Display for RateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g^{{{}}} * max[ ", fixed(self.prefactor_g_pow, 2))?;
        for (i, term) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{term}")?;
        }
        write!(f, " ]")
    }
}

/// Names of every row in the rate tables, in table order.
pub const TABLE_ROWS: &[&str] = &[
    "exterior | gamma<1",
    "exterior | gamma=1",
    "exterior | gamma>1",
    "compact N<2beta | gamma<1",
    "compact N<2beta | gamma=1",
    "compact N<2beta | gamma>1",
    "compact N=2beta | gamma<=1",
    "compact N=2beta | gamma>1",
    "compact 2beta<N<4beta | gamma<sigma*",
    "compact 2beta<N<4beta | gamma>=sigma*",
    "compact N=4beta | gamma<sigma*",
    "compact N=4beta | gamma>=sigma*",
    "intermediate N<2beta | gamma<1",
    "intermediate N<2beta | gamma=1",
    "intermediate N<2beta | gamma>1",
    "intermediate N=2beta | gamma<1",
    "intermediate N=2beta | gamma=1",
    "intermediate N=2beta | gamma>1",
    "intermediate 2beta<N<4beta | gamma<1",
    "intermediate 2beta<N<4beta | gamma=1",
    "intermediate 2beta<N<4beta | gamma>1",
    "intermediate N=4beta | gamma<1",
    "intermediate N=4beta | gamma=1",
    "intermediate N=4beta | gamma>1",
    "global subcritical | gamma<1",
    "global subcritical | gamma=1",
    "global subcritical | gamma>1",
    "global critical | gamma<=1",
    "global critical | gamma>1",
    "global supercritical | gamma<sigma(p)",
    "global supercritical | gamma>=sigma(p)",
    "global supercritical p=inf N=4beta | gamma>=sigma*",
];

/// Three-way split at `γ = 1` shared by several rows.
fn split_at_one(
    gamma: f64,
    below: (&'static str, Vec<RateTerm>),
    at: (&'static str, Vec<RateTerm>),
    above: (&'static str, Vec<RateTerm>),
) -> RateExpr {
    let (row, terms) = if gamma < 1.0 {
        below
    } else if gamma == 1.0 {
        at
    } else {
        above
    };
    RateExpr::simple(row, terms)
}

fn memory_rows(sigma: f64, gamma: f64, names: [&'static str; 3]) -> RateExpr {
    split_at_one(
        gamma,
        (names[0], vec![RateTerm::power(-sigma + 1.0 - gamma)]),
        (names[1], vec![RateTerm::power(-sigma).with_log(1)]),
        (names[2], vec![RateTerm::power(-sigma)]),
    )
}

/// The sharp decay law of `‖u(·,t)‖_{L^p(region)}` for forcings with
/// `‖f(·,t)‖_1 ≍ (1+t)^{-γ}`.
///
/// Boundary values of `γ` follow the inequality placement of each row
/// literally. Hypotheses beyond `L1Decay` that are needed for
/// non-subcritical `p` are attached as metadata, not checked.
pub fn predicted_rate(
    params: &FractionalParams,
    gamma: f64,
    p: f64,
    region: &RegionSpec,
) -> Result<RateExpr> {
    use DimensionRegime::*;
    if !params.is_small_dimension() {
        return Err(Error::OutOfScope(format!(
            "rate tables cover N <= 4 beta only; got {params}"
        )));
    }
    if !gamma.is_finite() {
        return Err(invalid("gamma", format!("must be finite, got {gamma}")));
    }
    let class = classify_p(params, p)?;
    region.validate(params)?;
    let regime = params.regime();
    let s_star = params.sigma_star();
    let s_p = params.sigma(p);
    let n = params.dim() as f64;

    let mut expr = match region {
        RegionSpec::Exterior { .. } => memory_rows(
            s_p,
            gamma,
            ["exterior | gamma<1", "exterior | gamma=1", "exterior | gamma>1"],
        ),
        RegionSpec::CompactBall { .. } => match regime {
            BelowTwoBeta => memory_rows(
                s_star,
                gamma,
                [
                    "compact N<2beta | gamma<1",
                    "compact N<2beta | gamma=1",
                    "compact N<2beta | gamma>1",
                ],
            ),
            AtTwoBeta => {
                if gamma <= 1.0 {
                    RateExpr::simple(
                        "compact N=2beta | gamma<=1",
                        vec![RateTerm::power(-gamma).with_log(1)],
                    )
                } else {
                    RateExpr::simple("compact N=2beta | gamma>1", vec![RateTerm::power(-s_star)])
                }
            }
            BetweenTwoAndFourBeta => {
                if gamma < s_star {
                    RateExpr::simple(
                        "compact 2beta<N<4beta | gamma<sigma*",
                        vec![RateTerm::power(-gamma)],
                    )
                } else {
                    RateExpr::simple(
                        "compact 2beta<N<4beta | gamma>=sigma*",
                        vec![RateTerm::power(-s_star)],
                    )
                }
            }
            AtFourBeta => {
                if gamma < s_star {
                    RateExpr::simple("compact N=4beta | gamma<sigma*", vec![RateTerm::power(-gamma)])
                } else {
                    RateExpr::simple(
                        "compact N=4beta | gamma>=sigma*",
                        vec![RateTerm::power(-s_star).with_log(1)],
                    )
                }
            }
            AboveFourBeta => unreachable!(),
        },
        RegionSpec::Intermediate { .. } => {
            let gp = (1.0 - s_star) / params.theta();
            let mut e = match regime {
                BelowTwoBeta => memory_rows(
                    s_star,
                    gamma,
                    [
                        "intermediate N<2beta | gamma<1",
                        "intermediate N<2beta | gamma=1",
                        "intermediate N<2beta | gamma>1",
                    ],
                ),
                AtTwoBeta => split_at_one(
                    gamma,
                    (
                        "intermediate N=2beta | gamma<1",
                        vec![RateTerm::power(-gamma).with_loggap(1)],
                    ),
                    (
                        "intermediate N=2beta | gamma=1",
                        vec![RateTerm::power(-s_star).with_log(1)],
                    ),
                    ("intermediate N=2beta | gamma>1", vec![RateTerm::power(-s_star)]),
                ),
                BetweenTwoAndFourBeta => split_at_one(
                    gamma,
                    (
                        "intermediate 2beta<N<4beta | gamma<1",
                        vec![RateTerm::power(-gamma).with_g(gp)],
                    ),
                    (
                        "intermediate 2beta<N<4beta | gamma=1",
                        vec![
                            RateTerm::power(-1.0).with_g(gp),
                            RateTerm::power(-s_star).with_log(1),
                        ],
                    ),
                    (
                        "intermediate 2beta<N<4beta | gamma>1",
                        vec![RateTerm::power(-gamma).with_g(gp), RateTerm::power(-s_star)],
                    ),
                ),
                AtFourBeta => split_at_one(
                    gamma,
                    (
                        "intermediate N=4beta | gamma<1",
                        vec![
                            RateTerm::power(-gamma).with_g(gp),
                            RateTerm::power(-s_star + 1.0 - gamma).with_loggap(1),
                        ],
                    ),
                    (
                        "intermediate N=4beta | gamma=1",
                        vec![
                            RateTerm::power(-1.0).with_g(gp),
                            RateTerm::power(-s_star).with_log(1).with_loggap(1),
                        ],
                    ),
                    (
                        "intermediate N=4beta | gamma>1",
                        vec![
                            RateTerm::power(-gamma).with_g(gp),
                            RateTerm::power(-s_star).with_loggap(1),
                        ],
                    ),
                ),
                AboveFourBeta => unreachable!(),
            };
            e.prefactor_g_pow = n / p;
            e
        }
        RegionSpec::Global => match class {
            PClass::Subcritical => memory_rows(
                s_p,
                gamma,
                [
                    "global subcritical | gamma<1",
                    "global subcritical | gamma=1",
                    "global subcritical | gamma>1",
                ],
            ),
            PClass::Critical { .. } => {
                if gamma <= 1.0 {
                    RateExpr::simple(
                        "global critical | gamma<=1",
                        vec![RateTerm::power(-gamma).with_log(1)],
                    )
                } else {
                    RateExpr::simple("global critical | gamma>1", vec![RateTerm::power(-1.0)])
                }
            }
            PClass::Supercritical { .. } => {
                if p.is_infinite() && regime == AtFourBeta && gamma >= s_star {
                    RateExpr::simple(
                        "global supercritical p=inf N=4beta | gamma>=sigma*",
                        vec![RateTerm::power(-s_star).with_log(1)],
                    )
                } else if gamma < s_p {
                    RateExpr::simple(
                        "global supercritical | gamma<sigma(p)",
                        vec![RateTerm::power(-gamma)],
                    )
                } else {
                    RateExpr::simple(
                        "global supercritical | gamma>=sigma(p)",
                        vec![RateTerm::power(-s_p)],
                    )
                }
            }
        },
    };

    expr.hypotheses.push(ForcingHypothesis::L1Decay);
    if !class.is_subcritical() {
        match region {
            RegionSpec::Exterior { .. } | RegionSpec::Intermediate { .. } => {
                expr.hypotheses.push(ForcingHypothesis::PointwiseDecay)
            }
            RegionSpec::CompactBall { .. } => {
                expr.hypotheses.push(ForcingHypothesis::LqDecayAboveCritical)
            }
            RegionSpec::Global => {
                expr.hypotheses.push(ForcingHypothesis::PointwiseDecay);
                expr.hypotheses.push(ForcingHypothesis::LqDecayAboveCritical);
            }
        }
    }
    Ok(expr)
}

/// Large-`t` behaviour of a closed-form helper integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthClass {
    /// Grows like `t^{1-γ}` (or `t^{1-σ}`).
    Power,
    /// Grows like `log t`.
    Log,
    /// Bounded, `O(1)`.
    Bounded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifiedIntegral {
    pub value: f64,
    pub class: GrowthClass,
}

fn check_t(t: f64) -> Result<()> {
    if t >= 2.0 && t.is_finite() {
        Ok(())
    } else {
        Err(invalid("t", format!("must be finite and at least 2, got {t}")))
    }
}

/// `∫_0^L (1+s)^{-k} ds`-type antiderivative written so that `k -> 1` is smooth.
fn shifted_power_integral(k: f64, log_len: f64) -> f64 {
    if k == 1.0 {
        log_len
    } else {
        ((1.0 - k) * log_len).exp_m1() / (1.0 - k)
    }
}

fn growth(k: f64) -> GrowthClass {
    if k < 1.0 {
        GrowthClass::Power
    } else if k == 1.0 {
        GrowthClass::Log
    } else {
        GrowthClass::Bounded
    }
}

/// `∫_0^{t/2} (1+s)^{-γ} ds` in closed form.
pub fn power_log_integral(gamma: f64, t: f64) -> Result<ClassifiedIntegral> {
    check_t(t)?;
    Ok(ClassifiedIntegral {
        value: shifted_power_integral(gamma, (0.5 * t).ln_1p()),
        class: growth(gamma),
    })
}

/// `∫_{t/2}^{t-1} (t-s)^{-σ} ds` in closed form, `σ > 0`.
pub fn memory_tail_integral(sigma: f64, t: f64) -> Result<ClassifiedIntegral> {
    check_t(t)?;
    if !(sigma > 0.0) {
        return Err(invalid("sigma", format!("must be positive, got {sigma}")));
    }
    // substitute τ = t - s: ∫_1^{t/2} τ^{-σ} dτ
    Ok(ClassifiedIntegral {
        value: shifted_power_integral(sigma, (0.5 * t).ln()),
        class: growth(sigma),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_text_round_trip() {
        for region in [
            RegionSpec::Exterior { nu: 1.5 },
            RegionSpec::CompactBall { radius: 1.0 },
            RegionSpec::Intermediate { omega: 0.125, nu: 1.0, mu: 2.0 },
            RegionSpec::Global,
        ] {
            assert_eq!(region.to_string().parse::<RegionSpec>().unwrap(), region);
        }
        assert!("exterior".parse::<RegionSpec>().is_err());
        assert!("compact:x".parse::<RegionSpec>().is_err());
        assert!("ball:1".parse::<RegionSpec>().is_err());
    }

    fn params(n: u32, alpha: f64, num: i64, den: i64) -> FractionalParams {
        FractionalParams::with_ratio(n, alpha, num, den).unwrap()
    }

    #[test]
    fn regimes_are_decided_exactly() {
        assert_eq!(params(1, 0.5, 1, 1).regime(), DimensionRegime::BelowTwoBeta);
        assert_eq!(params(1, 0.5, 1, 2).regime(), DimensionRegime::AtTwoBeta);
        assert_eq!(params(1, 0.5, 3, 10).regime(), DimensionRegime::BetweenTwoAndFourBeta);
        assert_eq!(params(1, 0.5, 1, 4).regime(), DimensionRegime::AtFourBeta);
        assert_eq!(params(3, 0.5, 2, 3).regime(), DimensionRegime::AboveFourBeta);
        assert_eq!(params(2, 0.5, 2, 4).regime(), DimensionRegime::AtFourBeta);
    }

    #[test]
    fn parameter_validation() {
        assert!(FractionalParams::with_ratio(1, 1.2, 1, 1).is_err());
        assert!(FractionalParams::with_ratio(1, 0.0, 1, 1).is_err());
        assert!(FractionalParams::with_ratio(1, 0.5, 3, 2).is_err());
        assert!(FractionalParams::with_ratio(1, 0.5, 0, 1).is_err());
        assert!(FractionalParams::with_ratio(0, 0.5, 1, 1).is_err());
    }

    #[test]
    fn rendering_is_canonical() {
        let p = params(1, 0.5, 1, 2);
        let r = predicted_rate(&p, 0.5, f64::INFINITY, &RegionSpec::Intermediate { omega: 0.1, nu: 1.0, mu: 2.0 })
            .unwrap();
        assert_eq!(r.to_string(), "g^{0.00} * max[ t^{-0.500} * log(t^th/g)^1 ]");
        let r = predicted_rate(&p, 2.0, 2.0, &RegionSpec::Exterior { nu: 1.0 }).unwrap();
        assert_eq!(r.to_string(), "g^{0.00} * max[ t^{-0.750} ]");
    }

    #[test]
    fn out_of_scope_dimension() {
        let p = params(1, 0.5, 1, 4);
        assert!(predicted_rate(&p, 1.0, 1.0, &RegionSpec::Global).is_ok());
        let p = params(3, 0.5, 1, 2);
        assert!(matches!(
            predicted_rate(&p, 1.0, 1.0, &RegionSpec::Global),
            Err(Error::OutOfScope(_))
        ));
    }

    #[test]
    fn dominant_term_selection() {
        let e = RateExpr::simple(
            "test",
            vec![RateTerm::power(-1.0).with_g(-2.0), RateTerm::power(-1.2).with_log(1)],
        );
        let d = e.dominant(0.05, 0.05);
        assert!((d.t_pow + 1.1).abs() < 1e-12 && d.log_pow == 0 && !d.ambiguous);
        let d = e.dominant(0.095, 0.05);
        assert!(d.ambiguous);
    }
}
