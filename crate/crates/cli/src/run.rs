//! Subcommand execution.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use memheat_core::experiments::{ksz_limit_check, verify_rate, CellConfig, VerificationReport};
use memheat_core::exponents::{classify_p, derive_exponents, predicted_rate, CriticalExponent};
use memheat_core::kernel::{check_kernel_bounds, BoundLimits, ProfileTable};
use memheat_core::solver::{format_p, MildSolution};
use rayon::prelude::*;

use crate::cache::{load_or_build, CacheOutcome};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::plot::{loglog_svg, Curve};
use crate::report::{cell_stem, emit_report, write_all, MatrixOutcome};

/// Header of `exponents.csv`.
pub const EXPONENTS_CSV_HEADER: &str = "N,alpha,beta,p,theta,sigma_star,sigma_p,p_c,q_c";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Exponents,
    Profile,
    KernelCheck,
    Simulate,
    Verify,
    Ksz,
}

/// Command-line overrides of the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub cache: Option<PathBuf>,
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: u8,
    pub files: Vec<PathBuf>,
    /// Human-readable summary printed by the binary.
    pub summary: String,
}

/// Loads the config at `path` and runs `command`.
pub fn run_config(command: Command, path: &Path, options: &RunOptions) -> Result<RunOutcome, CliError> {
    let config = ExperimentConfig::from_file(path)?;
    run(command, &config, options)
}

pub fn run(command: Command, config: &ExperimentConfig, options: &RunOptions) -> Result<RunOutcome, CliError> {
    if options.jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let ctx = Context {
        config,
        out: options.out.clone().unwrap_or_else(|| config.out_dir.clone()),
        cache: options.cache.clone().or_else(|| config.cache_dir.clone()),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = options.jobs {
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match command {
        Command::Exponents => ctx.exponents(),
        Command::Profile => ctx.profile(),
        Command::KernelCheck => ctx.kernel_check(),
        Command::Simulate => ctx.simulate(),
        Command::Verify => ctx.verify(),
        Command::Ksz => ctx.ksz(),
    })
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    out: PathBuf,
    cache: Option<PathBuf>,
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "none".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{}", x + 0.0)
    }
}

fn csv_safe(s: &str) -> String {
    s.replace(',', ";").replace('\n', " ")
}

impl Context<'_> {
    fn beta_text(&self) -> String {
        let b = self.config.params.beta_ratio();
        format!("{}/{}", b.numer(), b.denom())
    }

    fn load_profile(&self) -> Result<(ProfileTable, CacheOutcome), CliError> {
        let c = self.config;
        load_or_build(self.cache.as_deref(), &c.params, &c.grid, c.profile_tol)
    }

    /// Cells in config order: region, then `p`, then `γ`.
    fn cells(&self) -> Vec<CellConfig> {
        let c = self.config;
        let mut cells = Vec::new();
        for region in &c.regions {
            for &p in &c.p_list {
                for forcing in &c.forcings {
                    cells.push(CellConfig { params: c.params, forcing: *forcing, p, region: *region });
                }
            }
        }
        cells
    }

    fn exponents(&self) -> Result<RunOutcome, CliError> {
        let c = self.config;
        let params = &c.params;
        let mut csv = format!("{EXPONENTS_CSV_HEADER}\n");
        for &p in &c.p_list {
            let e = derive_exponents(params, p)?;
            let p_c = match e.p_crit {
                CriticalExponent::NotApplicable => "none".to_string(),
                CriticalExponent::Infinite => "inf".to_string(),
                CriticalExponent::Finite(v) => num(v),
            };
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{}",
                params.dim(),
                num(params.alpha()),
                self.beta_text(),
                format_p(p),
                num(e.theta),
                num(e.sigma_star),
                num(e.sigma_p),
                p_c,
                num(e.q_crit)
            );
        }
        let mut rates = String::from("region,p,class,gamma,row,slope,log_pow,expression\n");
        for cell in self.cells() {
            let class = classify_p(params, cell.p)?.label();
            let gamma = cell.forcing.gamma();
            let line = match predicted_rate(params, gamma, cell.p, &cell.region) {
                Ok(expr) => {
                    let d = expr.dominant(cell.region.omega(), c.verify.ambiguity);
                    format!("{},{},{},{}", expr.row, num(d.t_pow), d.log_pow, csv_safe(&expr.to_string()))
                }
                Err(e) => format!("unavailable,none,none,{}", csv_safe(&e.to_string())),
            };
            let _ = writeln!(rates, "{},{},{},{},{}", cell.region, format_p(cell.p), class, num(gamma), line);
        }
        let files = write_all(
            &self.out,
            vec![(self.out.join("exponents.csv"), csv.clone()), (self.out.join("rates.csv"), rates)],
        )?;
        Ok(RunOutcome { exit_code: 0, files, summary: csv })
    }

    fn profile(&self) -> Result<RunOutcome, CliError> {
        let (table, outcome) = self.load_profile()?;
        let files = write_all(&self.out, vec![(self.out.join("profile.csv"), table.to_text())])?;
        let summary = format!(
            "profile for N={} alpha={} beta={} ({}; mass {:.10}, worst residual {:.2e})\n",
            self.config.params.dim(),
            self.config.params.alpha(),
            self.beta_text(),
            match outcome {
                CacheOutcome::Hit => "cache hit",
                CacheOutcome::Built => "built",
            },
            table.total_mass(),
            table.worst_residual()
        );
        Ok(RunOutcome { exit_code: 0, files, summary })
    }

    fn kernel_check(&self) -> Result<RunOutcome, CliError> {
        let (table, _) = self.load_profile()?;
        let limits = BoundLimits::default();
        let report = check_kernel_bounds(&table, self.config.kernel_check_nu, &limits);
        let mut csv = String::from("check,quantity,value,pass\n");
        for (band, limit) in [(&report.origin, limits.origin_spread), (&report.far, limits.far_spread)] {
            let name = csv_safe(band.statistic);
            for (q, v) in [
                ("r_lo", band.r_lo),
                ("r_hi", band.r_hi),
                ("inf", band.inf),
                ("sup", band.sup),
                ("spread", band.spread()),
                ("limit", limit),
            ] {
                let _ = writeln!(csv, "{name},{q},{},{}", num(v), band.pass);
            }
        }
        let ext = &report.exterior;
        for (t, sup) in &ext.per_time {
            let _ = writeln!(csv, "exterior nu={},sup at t={},{},{}", num(ext.nu), num(*t), num(*sup), ext.pass);
        }
        let _ = writeln!(csv, "exterior nu={},c_nu,{},{}", num(ext.nu), num(ext.c_nu), ext.pass);
        if let Some(s) = report.sigma_exp {
            let _ = writeln!(csv, "exponential decay,sigma_exp,{},{}", num(s), s > 0.0);
        }
        let files = write_all(&self.out, vec![(self.out.join("kernel_check.csv"), csv.clone())])?;
        let pass = report.pass() && report.sigma_exp.is_none_or(|s| s > 0.0);
        let summary = format!("{} kernel bounds\n{csv}", if pass { "PASS" } else { "FAIL" });
        Ok(RunOutcome { exit_code: if pass { 0 } else { 2 }, files, summary })
    }

    fn simulate(&self) -> Result<RunOutcome, CliError> {
        let (table, _) = self.load_profile()?;
        let times = self.config.t_grid.times();
        let tol = self.config.verify.solver_tol;
        let cells = self.cells();
        let results: Vec<_> = cells
            .par_iter()
            .map(|cell| {
                MildSolution::new(&table, cell.forcing, tol)
                    .and_then(|s| s.norm_series(&cell.region, cell.p, &times))
            })
            .collect();
        let mut files = Vec::new();
        let mut summary = String::new();
        let mut failures = 0;
        for (i, (cell, result)) in cells.iter().zip(results).enumerate() {
            let stem = format!("series{i:02}_{}_p{}_g{}", cell.region, format_p(cell.p), cell.forcing.gamma())
                .replace(['/', ':'], "_");
            match result {
                Ok(series) => {
                    files.push((self.out.join(format!("{stem}.csv")), series.to_csv()));
                    if self.config.svg {
                        let curve = Curve::measured("measured", series.samples().iter().map(|s| (s.t, s.value)));
                        files.push((self.out.join(format!("{stem}.svg")), loglog_svg(&stem, &[curve])));
                    }
                    let _ = writeln!(summary, "OK   {stem}");
                }
                Err(e) => {
                    failures += 1;
                    let _ = writeln!(summary, "INFEASIBLE {stem}: {e}");
                }
            }
        }
        let files = write_all(&self.out, files)?;
        Ok(RunOutcome { exit_code: if failures > 0 { 3 } else { 0 }, files, summary })
    }

    /// Runs every cell; results keep the config order whatever the
    /// scheduling.
    fn verify_reports(&self, table: &ProfileTable) -> Result<Vec<VerificationReport>, CliError> {
        let c = self.config;
        self.cells()
            .par_iter()
            .map(|cell| verify_rate(cell, table, &c.t_grid, &c.verify).map_err(CliError::from))
            .collect()
    }

    fn verify(&self) -> Result<RunOutcome, CliError> {
        let (table, _) = self.load_profile()?;
        let reports = self.verify_reports(&table)?;
        let files = emit_report(&reports, &self.out, self.config.svg)?;
        let summary = crate::report::summary_text(&reports);
        debug_assert!(reports.iter().enumerate().all(|(i, r)| !cell_stem(i, r).is_empty()));
        Ok(RunOutcome { exit_code: MatrixOutcome::of(&reports).exit_code(), files, summary })
    }

    fn ksz(&self) -> Result<RunOutcome, CliError> {
        let c = self.config;
        let mut jobs = Vec::new();
        for forcing in c.forcings.iter().filter(|f| f.gamma() > 1.0) {
            for &p in &c.p_list {
                if p.is_finite() && classify_p(&c.params, p)?.is_subcritical() {
                    jobs.push((*forcing, p));
                }
            }
        }
        if jobs.is_empty() {
            return Err(CliError::Usage(
                "ksz needs some gamma > 1 and some finite subcritical p in the config".into(),
            ));
        }
        let (table, _) = self.load_profile()?;
        let results: Vec<_> = jobs
            .par_iter()
            .map(|(forcing, p)| ksz_limit_check(&c.params, forcing, *p, &c.t_grid, c.verify.solver_tol, &table))
            .collect();
        let mut files = Vec::new();
        let mut summary = String::new();
        let mut all_pass = true;
        for ((forcing, p), result) in jobs.iter().zip(results) {
            let check = result?;
            all_pass &= check.pass;
            let stem = format!("ksz_p{}_g{}", format_p(*p), forcing.gamma());
            files.push((self.out.join(format!("{stem}.csv")), check.to_csv()));
            let _ = writeln!(
                summary,
                "{} {stem}: M_inf = {}, final ratio {:.4}, last three decreasing: {}",
                if check.pass { "PASS" } else { "FAIL" },
                num(check.m_infinity),
                check.final_ratio,
                check.decreasing
            );
        }
        files.push((self.out.join("ksz_summary.txt"), summary.clone()));
        let files = write_all(&self.out, files)?;
        Ok(RunOutcome { exit_code: if all_pass { 0 } else { 2 }, files, summary })
    }
}
