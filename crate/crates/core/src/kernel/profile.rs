use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::interp::MonotoneCubic;
use super::symbol::Symbol;
use super::transform::{moment, oscillatory_transform, Oscillation};
use crate::error::{invalid, Error, Result};
use crate::exponents::{DimensionRegime, FractionalParams};
use crate::quadrature::{self, GaussLegendre, Tolerance};
use crate::special_functions::{gamma_real, rgamma};

const FORMAT_TAG: &str = "# memheat profile v1";

/// Log-spaced radial grid of a profile table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            r_min: 1e-4,
            r_max: 100.0,
            points: 600,
        }
    }
}

impl GridSpec {
    /// Checks the grid bounds and the point count.
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_max > 10.0 * self.r_min && self.r_max.is_finite()) {
            return Err(invalid(
                "grid",
                format!("need 0 < r_min and r_max > 10 r_min, got [{}, {}]", self.r_min, self.r_max),
            ));
        }
        if self.points < 50 {
            return Err(invalid("grid", format!("at least 50 points required, got {}", self.points)));
        }
        Ok(())
    }

    fn radii(&self) -> Vec<f64> {
        let step = (self.r_max / self.r_min).ln() / (self.points - 1) as f64;
        let mut r: Vec<f64> = (0..self.points)
            .map(|i| self.r_min * (step * i as f64).exp())
            .collect();
        r[self.points - 1] = self.r_max;
        r
    }
}

/// Behaviour of `G` below the first positive grid radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NearModel {
    /// `G(0) + coef · r^exponent` (`N < 4β`).
    Bounded { g0: f64, coef: f64, exponent: f64 },
    /// `a + b |ln r|` (`N = 4β`).
    Log { a: f64, b: f64 },
}

impl NearModel {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Self::Bounded { g0, coef, exponent } => {
                if r == 0.0 {
                    g0
                } else {
                    g0 + coef * r.powf(exponent)
                }
            }
            Self::Log { a, b } => a + b * r.ln().abs(),
        }
    }

    /// `∫_{|x|<r} near(|x|) dx`, valid for `r <= 1`.
    fn mass(&self, r: f64, dim: u32) -> f64 {
        let n = dim as f64;
        let s = sphere_area(dim);
        match *self {
            Self::Bounded { g0, coef, exponent } => {
                s * (g0 * r.powf(n) / n + coef * r.powf(n + exponent) / (n + exponent))
            }
            Self::Log { a, b } => {
                let rn = r.powf(n) / n;
                s * (a * rn + b * rn * (-r.ln() + 1.0 / n))
            }
        }
    }
}

/// Behaviour of `G` beyond the last grid radius.
#[derive(Debug, Clone, PartialEq)]
pub enum FarModel {
    /// `sum_k coefficients[k] · r^{-powers[k]}` (`β < 1`); the coefficients
    /// come from the small-frequency expansion of the symbol.
    /// `fitted_leading` is the least-squares estimate of the first
    /// coefficient from the tabulated values, kept as a cross-check.
    Power {
        powers: Vec<f64>,
        coefficients: Vec<f64>,
        fitted_leading: f64,
    },
    /// `c · r^exponent · exp(-sigma_exp · r^kappa)` (`β = 1`).
    Exp {
        c: f64,
        exponent: f64,
        sigma_exp: f64,
        kappa: f64,
    },
}

impl FarModel {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Self::Power { powers, coefficients, .. } => {
                let ln_r = r.ln();
                powers
                    .iter()
                    .zip(coefficients)
                    .map(|(p, c)| c * (-p * ln_r).exp())
                    .sum()
            }
            Self::Exp { c, exponent, sigma_exp, kappa } => {
                c * r.powf(*exponent) * (-sigma_exp * r.powf(*kappa)).exp()
            }
        }
    }

    /// `∫_{r1 < |x| < r2} far(|x|) dx`, `r2` may be infinite.
    fn mass_between(&self, r1: f64, r2: f64, dim: u32) -> f64 {
        let s = sphere_area(dim);
        let n = dim as f64;
        match self {
            Self::Power { powers, coefficients, .. } => powers
                .iter()
                .zip(coefficients)
                .map(|(p, c)| {
                    let e = p - n;
                    c * (r1.powf(-e) - if r2.is_finite() { r2.powf(-e) } else { 0.0 }) / e
                })
                .sum::<f64>()
                * s,
            Self::Exp { .. } => {
                let hi = if r2.is_finite() { r2 } else { r1 * 8.0 };
                if hi <= r1 {
                    return 0.0;
                }
                let breaks = quadrature::geometric_breaks(r1, hi, 1.25);
                quadrature::integrate_breaks(
                    |r: f64| s * self.eval(r) * r.powf(n - 1.0),
                    &breaks,
                    Tolerance::new(1e-300, 1e-12),
                )
                .map(|e| e.value)
                .unwrap_or_else(|e| match e {
                    Error::Quadrature { value, .. } => value,
                    _ => f64::NAN,
                })
            }
        }
    }
}

/// Surface area of the unit sphere in `R^N`, `N <= 3`.
pub(crate) fn sphere_area(dim: u32) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => f64::NAN,
    }
}

/// Tabulated self-similar profile `G` with analytic near and far models.
///
/// The table is immutable; derived data (the interpolant and the cumulative
/// radial masses) are rebuilt on construction and on load.
#[derive(Debug, Clone)]
pub struct ProfileTable {
    params: FractionalParams,
    grid: GridSpec,
    radii: Vec<f64>,
    values: Vec<f64>,
    near: NearModel,
    far: FarModel,
    build_tol: f64,
    worst_residual: f64,
    r_mono: f64,
    interp: MonotoneCubic,
    first_pos: usize,
    cumulative: Vec<f64>,
    total_mass: f64,
}

impl ProfileTable {
    pub fn params(&self) -> &FractionalParams {
        &self.params
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn near_model(&self) -> &NearModel {
        &self.near
    }

    pub fn far_model(&self) -> &FarModel {
        &self.far
    }

    pub fn build_tolerance(&self) -> f64 {
        self.build_tol
    }

    /// Largest estimated relative error over the tabulated radii.
    pub fn worst_residual(&self) -> f64 {
        self.worst_residual
    }

    /// Radius beyond which the tabulated values are nonincreasing.
    pub fn r_mono(&self) -> f64 {
        self.r_mono
    }

    /// Smallest positive tabulated radius; the near model applies below it.
    pub fn near_handoff(&self) -> f64 {
        self.radii[self.first_pos]
    }

    /// Largest tabulated radius; the far model applies beyond it.
    pub fn far_handoff(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    /// `G(r)` for any `r >= 0`; `+∞` at the origin when `N = 4β`.
    pub fn g(&self, r: f64) -> f64 {
        if r < self.near_handoff() {
            if r <= 0.0 {
                return match self.near {
                    NearModel::Bounded { g0, .. } => g0,
                    NearModel::Log { .. } => f64::INFINITY,
                };
            }
            self.near.eval(r)
        } else if r <= self.far_handoff() {
            self.interp.eval(r.ln()).exp()
        } else {
            self.far.eval(r)
        }
    }

    /// `∫_{|x|<r} G(|x|) dx`.
    pub fn mass_within(&self, r: f64) -> f64 {
        let dim = self.params.dim();
        let r0 = self.near_handoff();
        if r <= 0.0 {
            return 0.0;
        }
        if r < r0 {
            return self.near.mass(r, dim);
        }
        let end = self.far_handoff();
        if r > end {
            return *self.cumulative.last().unwrap() + self.far.mass_between(end, r, dim);
        }
        let i = self.interp.locate(r.ln()) + self.first_pos;
        self.cumulative[i - self.first_pos] + self.shell_mass(self.radii[i], r)
    }

    /// `∫_{R^N} G`; equals `1/Γ(α)` for an exact profile.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Mass of the interpolant on `a < |x| < b` inside the table.
    fn shell_mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let n = self.params.dim() as f64;
        let s = sphere_area(self.params.dim());
        let gl = gl8();
        gl.integrate(|u: f64| s * (self.interp.eval(u) + n * u).exp(), a.ln(), b.ln())
    }

    /// `‖G‖_{L^p(R^N)}` for `p ∈ [1, ∞]`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(invalid("p", format!("must lie in [1, inf], got {p}")));
        }
        if p.is_infinite() {
            if self.params.regime() == DimensionRegime::AtFourBeta {
                return Err(Error::Domain(
                    "the profile is unbounded at the origin when N = 4 beta".into(),
                ));
            }
            let near = match self.near {
                NearModel::Bounded { g0, .. } => g0,
                NearModel::Log { .. } => f64::INFINITY,
            };
            return Ok(self.values.iter().copied().fold(near, f64::max));
        }
        if p == 1.0 {
            return Ok(self.total_mass);
        }
        let dim = self.params.dim();
        let n = dim as f64;
        let s = sphere_area(dim);
        let r0 = self.near_handoff();
        // below the table: r = r0 e^{-v}
        let near = quadrature::integrate_breaks(
            |v: f64| {
                let r = r0 * (-v).exp();
                s * self.near.eval(r).powf(p) * r.powf(n)
            },
            &[0.0, 2.0, 5.0, 10.0, 20.0, 40.0, 80.0],
            Tolerance::new(1e-300, 1e-12),
        )
        .map(|e| e.value)
        .unwrap_or_else(best_value);
        let gl = gl8();
        let pos = &self.radii[self.first_pos..];
        let mid: f64 = pos
            .windows(2)
            .map(|w| {
                gl.integrate(
                    |u: f64| s * (p * self.interp.eval(u) + n * u).exp(),
                    w[0].ln(),
                    w[1].ln(),
                )
            })
            .sum();
        let end = self.far_handoff();
        let far = match &self.far {
            FarModel::Power { .. } => {
                // r = end / w maps (0, 1] onto [end, ∞)
                let mut breaks = vec![0.0];
                breaks.extend(quadrature::geometric_breaks(1e-14, 1.0, 4.0));
                quadrature::integrate_breaks(
                    |w: f64| {
                        if w == 0.0 {
                            return 0.0;
                        }
                        let r = end / w;
                        s * self.far.eval(r).powf(p) * r.powf(n) / w
                    },
                    &breaks,
                    Tolerance::new(1e-300, 1e-12),
                )
                .map(|e| e.value)
                .unwrap_or_else(best_value)
            }
            FarModel::Exp { .. } => quadrature::integrate_breaks(
                |r: f64| s * self.far.eval(r).powf(p) * r.powf(n - 1.0),
                &quadrature::geometric_breaks(end, 8.0 * end, 1.25),
                Tolerance::new(1e-300, 1e-12),
            )
            .map(|e| e.value)
            .unwrap_or_else(best_value),
        };
        Ok((near + mid + far).powf(1.0 / p))
    }

    /// Renders the versioned text format: a header with the parameters and
    /// models, followed by a CSV body `r,G`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let beta = self.params.beta_ratio();
        let _ = writeln!(out, "{FORMAT_TAG}");
        let _ = writeln!(out, "dim = {}", self.params.dim());
        let _ = writeln!(out, "alpha = {:e}", self.params.alpha());
        let _ = writeln!(out, "beta = {}/{}", beta.numer(), beta.denom());
        let _ = writeln!(
            out,
            "grid = {:e} {:e} {}",
            self.grid.r_min, self.grid.r_max, self.grid.points
        );
        let _ = writeln!(out, "build_tol = {:e}", self.build_tol);
        let _ = writeln!(out, "worst_residual = {:e}", self.worst_residual);
        let _ = writeln!(out, "r_mono = {:e}", self.r_mono);
        match self.near {
            NearModel::Bounded { g0, coef, exponent } => {
                let _ = writeln!(out, "near = bounded {g0:e} {coef:e} {exponent:e}");
            }
            NearModel::Log { a, b } => {
                let _ = writeln!(out, "near = log {a:e} {b:e}");
            }
        }
        match &self.far {
            FarModel::Power { powers, coefficients, fitted_leading } => {
                let _ = write!(out, "far = power {fitted_leading:e}");
                for (p, c) in powers.iter().zip(coefficients) {
                    let _ = write!(out, " {p:e} {c:e}");
                }
                out.push('\n');
            }
            FarModel::Exp { c, exponent, sigma_exp, kappa } => {
                let _ = writeln!(out, "far = exp {c:e} {exponent:e} {sigma_exp:e} {kappa:e}");
            }
        }
        out.push_str("r,G\n");
        for (r, g) in self.radii.iter().zip(&self.values) {
            let _ = writeln!(out, "{r:e},{g:e}");
        }
        out
    }

    /// Parses [`ProfileTable::to_text`] output and re-validates every
    /// invariant of the table.
    pub fn from_text(text: &str) -> Result<Self> {
        let fmt_err = |line: usize, msg: &str| Error::Format(format!("line {line}: {msg}"));
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == FORMAT_TAG => {}
            _ => return Err(fmt_err(1, "missing or unsupported version tag")),
        }
        let mut header = std::collections::BTreeMap::new();
        let mut body_start = None;
        for (i, line) in lines.by_ref() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line == "r,G" {
                body_start = Some(i);
                break;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| fmt_err(i + 1, "expected `key = value`"))?;
            let key = k.trim().to_string();
            if header.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(fmt_err(i + 1, &format!("duplicate key `{key}`")));
            }
        }
        if body_start.is_none() {
            return Err(Error::Format("missing `r,G` body header".into()));
        }
        const KEYS: [&str; 9] = [
            "dim",
            "alpha",
            "beta",
            "grid",
            "build_tol",
            "worst_residual",
            "r_mono",
            "near",
            "far",
        ];
        for key in header.keys() {
            if !KEYS.contains(&key.as_str()) {
                let (line, _) = header[key];
                return Err(fmt_err(line, &format!("unknown key `{key}`")));
            }
        }
        let get = |key: &str| -> Result<(usize, &str)> {
            header
                .get(key)
                .map(|(l, v)| (*l, v.as_str()))
                .ok_or_else(|| Error::Format(format!("missing key `{key}`")))
        };
        let num = |key: &str| -> Result<f64> {
            let (line, v) = get(key)?;
            v.parse::<f64>().map_err(|_| fmt_err(line, &format!("`{key}` is not a number")))
        };
        let nums = |line: usize, parts: &[&str]| -> Result<Vec<f64>> {
            parts
                .iter()
                .map(|p| p.parse::<f64>().map_err(|_| fmt_err(line, &format!("bad number `{p}`"))))
                .collect()
        };

        let (dline, dim) = get("dim")?;
        let dim: u32 = dim.parse().map_err(|_| fmt_err(dline, "`dim` is not an integer"))?;
        let alpha = num("alpha")?;
        let (bline, beta) = get("beta")?;
        let (bn, bd) = beta
            .split_once('/')
            .ok_or_else(|| fmt_err(bline, "`beta` must be `num/den`"))?;
        let bn: i64 = bn.trim().parse().map_err(|_| fmt_err(bline, "bad beta numerator"))?;
        let bd: i64 = bd.trim().parse().map_err(|_| fmt_err(bline, "bad beta denominator"))?;
        let params = FractionalParams::with_ratio(dim, alpha, bn, bd)?;
        check_scope(&params)?;

        let (gline, grid) = get("grid")?;
        let g: Vec<&str> = grid.split_whitespace().collect();
        if g.len() != 3 {
            return Err(fmt_err(gline, "`grid` needs r_min r_max points"));
        }
        let grid = GridSpec {
            r_min: g[0].parse().map_err(|_| fmt_err(gline, "bad r_min"))?,
            r_max: g[1].parse().map_err(|_| fmt_err(gline, "bad r_max"))?,
            points: g[2].parse().map_err(|_| fmt_err(gline, "bad point count"))?,
        };
        grid.validate()?;
        let build_tol = num("build_tol")?;
        let worst_residual = num("worst_residual")?;
        let r_mono = num("r_mono")?;

        let (nline, near) = get("near")?;
        let parts: Vec<&str> = near.split_whitespace().collect();
        let near = match parts.as_slice() {
            ["bounded", rest @ ..] if rest.len() == 3 => {
                let v = nums(nline, rest)?;
                NearModel::Bounded { g0: v[0], coef: v[1], exponent: v[2] }
            }
            ["log", rest @ ..] if rest.len() == 2 => {
                let v = nums(nline, rest)?;
                NearModel::Log { a: v[0], b: v[1] }
            }
            _ => return Err(fmt_err(nline, "unrecognised near model")),
        };
        let (fline, far) = get("far")?;
        let parts: Vec<&str> = far.split_whitespace().collect();
        let far = match parts.as_slice() {
            ["power", rest @ ..] if rest.len() >= 3 && rest.len() % 2 == 1 => {
                let v = nums(fline, rest)?;
                FarModel::Power {
                    fitted_leading: v[0],
                    powers: v[1..].iter().step_by(2).copied().collect(),
                    coefficients: v[2..].iter().step_by(2).copied().collect(),
                }
            }
            ["exp", rest @ ..] if rest.len() == 4 => {
                let v = nums(fline, rest)?;
                FarModel::Exp { c: v[0], exponent: v[1], sigma_exp: v[2], kappa: v[3] }
            }
            _ => return Err(fmt_err(fline, "unrecognised far model")),
        };

        let mut radii = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (r, g) = line
                .split_once(',')
                .ok_or_else(|| fmt_err(i + 1, "expected `r,G`"))?;
            radii.push(r.trim().parse::<f64>().map_err(|_| fmt_err(i + 1, "bad radius"))?);
            values.push(g.trim().parse::<f64>().map_err(|_| fmt_err(i + 1, "bad value"))?);
        }
        Self::assemble(params, grid, radii, values, near, far, build_tol, worst_residual, r_mono)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        params: FractionalParams,
        grid: GridSpec,
        radii: Vec<f64>,
        values: Vec<f64>,
        near: NearModel,
        far: FarModel,
        build_tol: f64,
        worst_residual: f64,
        r_mono: f64,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::Format(m));
        if radii.len() != values.len() || radii.len() < 20 {
            return bad(format!("need at least 20 rows, got {}", radii.len()));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) || radii[0] < 0.0 {
            return bad("radii must be nonnegative and strictly increasing".into());
        }
        if let Some(i) = values.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
            return bad(format!("value at r = {:e} is not positive and finite", radii[i]));
        }
        let at_four = params.regime() == DimensionRegime::AtFourBeta;
        match (&near, at_four) {
            (NearModel::Log { .. }, true) | (NearModel::Bounded { .. }, false) => {}
            _ => return bad("near model does not match the dimension regime".into()),
        }
        if at_four && radii[0] == 0.0 {
            return bad("the origin cannot be tabulated when N = 4 beta".into());
        }
        match (&far, params.beta() < 1.0) {
            (FarModel::Power { powers, coefficients, .. }, true) => {
                let (p2, c2) = power_far_terms(&params, *radii.last().unwrap());
                let same = p2.len() == powers.len()
                    && p2.iter().zip(powers).all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs())
                    && c2
                        .iter()
                        .zip(coefficients)
                        .all(|(a, b)| (a - b).abs() <= 1e-10 * a.abs().max(1e-300));
                if !same {
                    return bad("far-field coefficients disagree with the parameters".into());
                }
            }
            (FarModel::Exp { sigma_exp, .. }, false) => {
                if !(*sigma_exp > 0.0) {
                    return bad("fitted exponential rate must be positive".into());
                }
            }
            _ => return bad("far model does not match beta".into()),
        }
        if !(build_tol > 0.0) {
            return bad("build tolerance must be positive".into());
        }
        let first_pos = usize::from(radii[0] == 0.0);
        if let NearModel::Bounded { g0, .. } = near {
            if first_pos == 1 && (g0 - values[0]).abs() > 1e-12 * g0 {
                return bad("near model disagrees with the tabulated value at the origin".into());
            }
        }
        let xs: Vec<f64> = radii[first_pos..].iter().map(|r| r.ln()).collect();
        let ys: Vec<f64> = values[first_pos..].iter().map(|g| g.ln()).collect();
        let interp = MonotoneCubic::new(xs, ys);
        let mut table = Self {
            params,
            grid,
            radii,
            values,
            near,
            far,
            build_tol,
            worst_residual,
            r_mono,
            interp,
            first_pos,
            cumulative: Vec::new(),
            total_mass: f64::NAN,
        };
        let dim = params.dim();
        let pos = &table.radii[first_pos..];
        let mut cumulative = Vec::with_capacity(pos.len());
        let mut acc = table.near.mass(pos[0], dim);
        cumulative.push(acc);
        for w in pos.windows(2) {
            acc += table.shell_mass(w[0], w[1]);
            cumulative.push(acc);
        }
        let end = *pos.last().unwrap();
        table.total_mass = acc + table.far.mass_between(end, f64::INFINITY, dim);
        table.cumulative = cumulative;
        Ok(table)
    }
}

fn best_value(e: Error) -> f64 {
    match e {
        Error::Quadrature { value, .. } => value,
        _ => f64::NAN,
    }
}

fn gl8() -> &'static GaussLegendre {
    use std::sync::OnceLock;
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(8))
}

fn check_scope(params: &FractionalParams) -> Result<()> {
    if !(1..=3).contains(&params.dim()) {
        return Err(Error::OutOfScope(format!(
            "profiles are computed for N in {{1, 2, 3}}, got N = {}",
            params.dim()
        )));
    }
    if !params.is_small_dimension() {
        return Err(Error::OutOfScope(format!(
            "profiles are computed for N <= 4 beta, got {params}"
        )));
    }
    Ok(())
}

/// Exponents and coefficients of `G(r) ~ sum_k A_k r^{-N-2βk}` for `β < 1`,
/// truncated where the terms stop decreasing at the handoff radius `r_ref`.
fn power_far_terms(params: &FractionalParams, r_ref: f64) -> (Vec<f64>, Vec<f64>) {
    let n = params.dim() as f64;
    let (a, b) = (params.alpha(), params.beta());
    let mut powers = Vec::new();
    let mut coefs = Vec::new();
    let mut last = f64::INFINITY;
    for k in 1..=60 {
        let s = 2.0 * b * k as f64;
        // transform of |ρ|^s: 2^s π^{-N/2} Γ((N+s)/2) / Γ(-s/2)
        let ft = 2f64.powf(s) * PI.powf(-0.5 * n) * gamma_real(0.5 * (n + s)) * rgamma(-0.5 * s);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let c = sign * rgamma(a * k as f64 + a) * ft;
        if !c.is_finite() {
            break;
        }
        let size = c.abs() * r_ref.powf(-n - s);
        if c != 0.0 {
            if size > last {
                break;
            }
            last = size;
        }
        powers.push(n + s);
        coefs.push(c);
        if c != 0.0 && size < 1e-20 * coefs[0].abs() * r_ref.powf(-n - 2.0 * b) {
            break;
        }
    }
    (powers, coefs)
}

/// Computes `G` on a log-spaced grid by radial Fourier inversion of
/// `E_{α,α}(-|η|^{2β})` and fits the near and far models.
///
/// For `β = 1` the profile decays faster than any power and the table is cut
/// where the estimated relative error of the inversion exceeds the tolerance;
/// the fitted exponential model covers the rest.
pub fn build_profile(params: &FractionalParams, grid: &GridSpec, tol: f64) -> Result<ProfileTable> {
    check_scope(params)?;
    grid.validate()?;
    if !(1e-8..=1e-4).contains(&tol) {
        return Err(invalid("tol", format!("must lie in [1e-8, 1e-4], got {tol}")));
    }
    let dim = params.dim();
    let n = dim as f64;
    let symbol = Symbol::new(params.alpha(), params.beta());
    let norm = sphere_area(dim) / (2.0 * PI).powf(n);
    let profile_at = |r: f64| match dim {
        1 => {
            let e = oscillatory_transform(&symbol, |_| 1.0, Oscillation::Cos, r);
            (e.value / PI, e.error / PI)
        }
        2 => {
            let e = oscillatory_transform(&symbol, |rho| rho, Oscillation::BesselJ0, r);
            (e.value / (2.0 * PI), e.error / (2.0 * PI))
        }
        _ => {
            let e = oscillatory_transform(&symbol, |rho| rho, Oscillation::Sin, r);
            let c = 1.0 / (2.0 * PI * PI * r);
            (e.value * c, e.error * c)
        }
    };

    let radii_pos = grid.radii();
    let computed: Vec<(f64, f64)> = radii_pos.par_iter().map(|&r| profile_at(r)).collect();
    let rel = |(g, e): (f64, f64)| if g > 0.0 { e / g } else { f64::INFINITY };

    let regime = params.regime();
    let beta_one = params.beta() >= 1.0;
    let mut keep = computed.len();
    if beta_one {
        // cut where accuracy is lost to cancellation, keeping a margin
        if let Some(i) = computed.iter().position(|&c| rel(c) > 0.1 * tol) {
            keep = i;
        }
        if keep < 100 {
            let (g, e) = computed[keep];
            return Err(Error::Convergence {
                tol,
                worst: e / g.abs(),
                radius: radii_pos[keep],
            });
        }
    } else if let Some((i, worst)) = computed
        .iter()
        .map(|&c| rel(c))
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .filter(|(_, w)| *w > tol)
    {
        return Err(Error::Convergence { tol, worst, radius: radii_pos[i] });
    }
    let mut worst_residual = computed[..keep].iter().map(|&c| rel(c)).fold(0.0, f64::max);

    let mut radii: Vec<f64> = radii_pos[..keep].to_vec();
    let mut values: Vec<f64> = computed[..keep].iter().map(|c| c.0).collect();

    let r1 = radii[0];
    let near = if regime == DimensionRegime::AtFourBeta {
        // |ln r| coefficient from the ρ^{-N} tail of the symbol
        let b = symbol.leading_tail_coefficient() * norm;
        NearModel::Log { a: values[0] - b * r1.ln().abs(), b }
    } else {
        let m = moment(&symbol, dim);
        let g0 = m.value * norm;
        worst_residual = worst_residual.max(m.error / m.value.abs());
        let exponent = (4.0 * params.beta() - n).min(2.0);
        let coef = (values[0] - g0) / r1.powf(exponent);
        radii.insert(0, 0.0);
        values.insert(0, g0);
        NearModel::Bounded { g0, coef, exponent }
    };

    let end = *radii.last().unwrap();
    let far = if beta_one {
        fit_exponential_tail(params, &radii, &values)?
    } else {
        let (powers, coefficients) = power_far_terms(params, end);
        // least-squares leading coefficient on the last fifth of the range
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (&r, &g) in radii.iter().zip(&values).filter(|(r, _)| **r >= end / 5.0) {
            let rest: f64 = powers[1..]
                .iter()
                .zip(&coefficients[1..])
                .map(|(p, c)| c * r.powf(-p))
                .sum();
            let x = r.powf(-powers[0]);
            sxy += x * (g - rest);
            sxx += x * x;
        }
        FarModel::Power {
            powers,
            coefficients,
            fitted_leading: sxy / sxx,
        }
    };

    // last radius at which the tabulated values increase
    let r_mono = values
        .windows(2)
        .rposition(|w| w[1] > w[0])
        .map_or(radii[0], |i| radii[i + 1]);

    ProfileTable::assemble(*params, *grid, radii, values, near, far, tol, worst_residual, r_mono)
}

/// Fits `ln G - e ln r = ln c - σ r^κ` on the last part of the table and
/// rescales `c` so that the model matches the last tabulated value.
fn fit_exponential_tail(params: &FractionalParams, radii: &[f64], values: &[f64]) -> Result<FarModel> {
    let (n, a) = (params.dim() as f64, params.alpha());
    let exponent = (n - 2.0) * (a - 1.0) / (2.0 - a);
    let kappa = 2.0 / (2.0 - a);
    let end = *radii.last().unwrap();
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(values)
        .filter(|(r, _)| **r >= end / 2.5)
        .map(|(&r, &g)| (r.powf(kappa), g.ln() - exponent * r.ln()))
        .collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in &pts {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let sigma_exp = -sxy / sxx;
    if !(sigma_exp > 0.0) {
        return Err(Error::Convergence {
            tol: 0.0,
            worst: sigma_exp,
            radius: end,
        });
    }
    let g_end = *values.last().unwrap();
    let c = g_end / (end.powf(exponent) * (-sigma_exp * end.powf(kappa)).exp());
    Ok(FarModel::Exp { c, exponent, sigma_exp, kappa })
}
