//! Experiment configuration files.
//!
//! The format is TOML restricted to fixed sections; unknown sections and
//! keys are rejected. Example:
//!
//! ```toml
//! [params]
//! dim = 1
//! alpha = 0.5
//! beta = "1/2"
//!
//! [forcing]
//! gamma = [0.5, 2.0]
//!
//! [measure]
//! regions = ["compact:1"]
//! p = [inf]
//! ```

use std::path::{Path, PathBuf};

use memheat_core::experiments::{TGrid, VerifyTolerances};
use memheat_core::exponents::{FractionalParams, RegionSpec};
use memheat_core::kernel::GridSpec;
use memheat_core::solver::Forcing;
use num_rational::Rational64;
use serde::Deserialize;

use crate::error::CliError;

/// A validated experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: FractionalParams,
    /// One forcing per configured `γ`, in file order.
    pub forcings: Vec<Forcing>,
    pub regions: Vec<RegionSpec>,
    pub p_list: Vec<f64>,
    pub t_grid: TGrid,
    /// Relative tolerance of the profile build.
    pub profile_tol: f64,
    pub verify: VerifyTolerances,
    pub grid: GridSpec,
    /// Threshold `ν` of the exterior statistic in `kernel-check`.
    pub kernel_check_nu: f64,
    pub cache_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub svg: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    params: RawParams,
    #[serde(default)]
    forcing: RawForcing,
    #[serde(default)]
    measure: RawMeasure,
    #[serde(default)]
    tolerances: RawTolerances,
    #[serde(default)]
    profile: RawGrid,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    dim: u32,
    alpha: f64,
    beta: String,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<f64> {
        match self {
            Self::One(x) => vec![x],
            Self::Many(v) => v,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawForcing {
    gamma: OneOrMany,
    radius: f64,
    amplitude: f64,
}

impl Default for RawForcing {
    fn default() -> Self {
        Self { gamma: OneOrMany::One(1.0), radius: 1.0, amplitude: 1.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawMeasure {
    regions: Vec<String>,
    p: OneOrMany,
    t_min: f64,
    t_max: f64,
    points: usize,
}

impl Default for RawMeasure {
    fn default() -> Self {
        let grid = TGrid::default();
        Self {
            regions: vec!["global".into()],
            p: OneOrMany::One(2.0),
            t_min: grid.t_min,
            t_max: grid.t_max,
            points: grid.points,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawTolerances {
    profile: f64,
    solver: f64,
    slope: f64,
    spread: f64,
    ambiguity: f64,
}

impl Default for RawTolerances {
    fn default() -> Self {
        let v = VerifyTolerances::default();
        Self {
            profile: 1e-6,
            solver: v.solver_tol,
            slope: v.slope_tol,
            spread: v.spread,
            ambiguity: v.ambiguity,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawGrid {
    r_min: f64,
    r_max: f64,
    points: usize,
    check_nu: f64,
}

impl Default for RawGrid {
    fn default() -> Self {
        let g = GridSpec::default();
        Self { r_min: g.r_min, r_max: g.r_max, points: g.points, check_nu: 1.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawOutput {
    dir: String,
    cache: Option<String>,
    svg: bool,
}

impl Default for RawOutput {
    fn default() -> Self {
        Self { dir: "memheat-out".into(), cache: None, svg: true }
    }
}

/// Parses `β` given as `num/den` or as an integer.
pub fn parse_beta(text: &str) -> Option<Rational64> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim().parse().ok()?, d.trim().parse().ok()?),
        None => (text.parse().ok()?, 1),
    };
    (den != 0).then(|| Rational64::new(num, den))
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::from_str_at(&text, path)
    }

    /// Parses config text; `origin` names the source in diagnostics.
    pub fn from_str_at(text: &str, origin: &Path) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config {
            origin: origin.to_path_buf(),
            line: e.span().map(|s| line_of(text, s.start)),
            key: None,
            message: e.message().trim().to_string(),
        })?;
        let fail = |section: &str, key: &str, message: String| CliError::Config {
            origin: origin.to_path_buf(),
            line: find_key(text, section, key),
            key: Some(format!("{section}.{key}")),
            message,
        };
        let core = |section: &str, key: &str, e: memheat_core::Error| fail(section, key, core_message(e));

        let p = &raw.params;
        let beta = parse_beta(&p.beta)
            .ok_or_else(|| fail("params", "beta", format!("`{}` is not a ratio num/den", p.beta)))?;
        let params = FractionalParams::new(p.dim, p.alpha, beta).map_err(|e| {
            let key = match &e {
                memheat_core::Error::InvalidParameter { name: "alpha", .. } => "alpha",
                memheat_core::Error::InvalidParameter { name: "beta", .. } => "beta",
                _ => "dim",
            };
            core("params", key, e)
        })?;
        if !(1..=3).contains(&params.dim()) || !params.is_small_dimension() {
            return Err(fail(
                "params",
                "dim",
                format!("need N in {{1, 2, 3}} and N <= 4 beta, got N = {} with beta = {beta}", params.dim()),
            ));
        }

        let f = raw.forcing;
        let gammas = f.gamma.into_vec();
        if gammas.is_empty() {
            return Err(fail("forcing", "gamma", "needs at least one value".into()));
        }
        let forcings = gammas
            .iter()
            .map(|&g| {
                Forcing::new(g, f.amplitude, f.radius).map_err(|e| {
                    let key = match &e {
                        memheat_core::Error::InvalidParameter { name, .. } => *name,
                        _ => "gamma",
                    };
                    core("forcing", key, e)
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let m = raw.measure;
        if m.regions.is_empty() {
            return Err(fail("measure", "regions", "needs at least one region".into()));
        }
        let regions = m
            .regions
            .iter()
            .map(|s| {
                let region: RegionSpec = s.parse().map_err(|e| core("measure", "regions", e))?;
                region.validate(&params).map_err(|e| core("measure", "regions", e))?;
                Ok(region)
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let p_list = m.p.into_vec();
        if p_list.is_empty() {
            return Err(fail("measure", "p", "needs at least one value".into()));
        }
        if let Some(bad) = p_list.iter().find(|p| !(**p >= 1.0)) {
            return Err(fail("measure", "p", format!("must lie in [1, inf], got {bad}")));
        }
        let t_grid = TGrid::new(m.t_min, m.t_max, m.points).map_err(|e| core("measure", "t_min", e))?;

        let t = raw.tolerances;
        if !(1e-8..=1e-4).contains(&t.profile) {
            return Err(fail("tolerances", "profile", format!("must lie in [1e-8, 1e-4], got {}", t.profile)));
        }
        if !(1e-7..=1e-3).contains(&t.solver) {
            return Err(fail("tolerances", "solver", format!("must lie in [1e-7, 1e-3], got {}", t.solver)));
        }
        for (key, v) in [("slope", t.slope), ("spread", t.spread), ("ambiguity", t.ambiguity)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(fail("tolerances", key, format!("must be positive, got {v}")));
            }
        }
        if t.spread < 1.0 {
            return Err(fail("tolerances", "spread", format!("is a max/min ratio and must be >= 1, got {}", t.spread)));
        }

        let g = raw.profile;
        let grid = GridSpec { r_min: g.r_min, r_max: g.r_max, points: g.points };
        grid.validate().map_err(|e| core("profile", "r_min", e))?;
        if !(g.check_nu > 0.0 && g.check_nu.is_finite()) {
            return Err(fail("profile", "check_nu", format!("must be positive, got {}", g.check_nu)));
        }

        let o = raw.output;
        if o.dir.trim().is_empty() {
            return Err(fail("output", "dir", "must not be empty".into()));
        }
        Ok(Self {
            params,
            forcings,
            regions,
            p_list,
            t_grid,
            profile_tol: t.profile,
            verify: VerifyTolerances {
                slope_tol: t.slope,
                spread: t.spread,
                ambiguity: t.ambiguity,
                solver_tol: t.solver,
            },
            grid,
            kernel_check_nu: g.check_nu,
            cache_dir: o.cache.map(PathBuf::from),
            out_dir: PathBuf::from(o.dir),
            svg: o.svg,
        })
    }
}

fn core_message(e: memheat_core::Error) -> String {
    match e {
        memheat_core::Error::InvalidParameter { reason, .. } => reason,
        other => other.to_string(),
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key = ...` inside `[section]`, if present.
fn find_key(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = "";
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim();
        } else if current == section
            && line.split_once('=').is_some_and(|(k, _)| k.trim() == key)
        {
            return Some(i + 1);
        }
    }
    None
}
