//! Report files of the `verify` command.

use std::path::{Path, PathBuf};

use memheat_core::experiments::{CellStatus, VerificationReport, REPORT_CSV_HEADER};
use memheat_core::solver::format_p;

use crate::error::CliError;
use crate::plot::{loglog_svg, Curve};

/// Aggregate outcome of a set of cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixOutcome {
    AllPass,
    AnyFail,
    /// No failures, but some cells were infeasible or inconclusive.
    Undecided,
}

impl MatrixOutcome {
    pub fn of(reports: &[VerificationReport]) -> Self {
        if reports.iter().any(|r| r.status == CellStatus::Fail) {
            Self::AnyFail
        } else if reports.iter().all(|r| r.pass) {
            Self::AllPass
        } else {
            Self::Undecided
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Self::AllPass => 0,
            Self::AnyFail => 2,
            Self::Undecided => 3,
        }
    }
}

/// CSV of all cells in the given order.
pub fn report_csv(reports: &[VerificationReport]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Text summary: one status-prefixed line per cell and a total.
pub fn summary_text(reports: &[VerificationReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&r.summary_line());
        out.push('\n');
    }
    let passed = reports.iter().filter(|r| r.pass).count();
    out.push_str(&format!("{passed}/{} cells passed\n", reports.len()));
    out
}

/// File stem of the plot of cell `index`.
pub fn cell_stem(index: usize, r: &VerificationReport) -> String {
    let c = &r.config;
    let clean = |s: String| s.replace(['/', ':'], "_");
    clean(format!(
        "cell{index:02}_{}_p{}_g{}",
        c.region,
        format_p(c.p),
        c.forcing.gamma()
    ))
}

/// Measured series and predicted slope of one cell.
pub fn cell_svg(r: &VerificationReport) -> Option<String> {
    let series = r.adjusted_series()?;
    let samples: Vec<(f64, f64)> = series.samples().iter().map(|s| (s.t, s.value)).collect();
    let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let anchor = *samples.last()?;
    let label = if r.predicted.prefactor_g_pow != 0.0 { "measured / g^(N/p)" } else { "measured" };
    let curves = [
        Curve::measured(label, samples),
        Curve::guide(
            format!("{}: t^{:.4}{}", r.predicted.row, r.predicted_slope, log_suffix(r.predicted_log_pow)),
            &times,
            r.predicted_slope,
            r.predicted_log_pow,
            anchor,
        ),
    ];
    let title = format!("{} | {} p={} gamma={}", r.status, r.config.region, format_p(r.config.p), r.config.forcing.gamma());
    Some(loglog_svg(&title, &curves))
}

fn log_suffix(k: u32) -> String {
    if k > 0 {
        format!(" log(t)^{k}")
    } else {
        String::new()
    }
}

/// Writes `verify.csv`, `summary.txt` and, when `svg`, one plot per cell
/// into `dir`. Nothing is written for an empty report list.
pub fn emit_report(reports: &[VerificationReport], dir: &Path, svg: bool) -> Result<Vec<PathBuf>, CliError> {
    if reports.is_empty() {
        return Err(CliError::Usage("no verification reports to write".into()));
    }
    let mut files = vec![
        (dir.join("verify.csv"), report_csv(reports)),
        (dir.join("summary.txt"), summary_text(reports)),
    ];
    if svg {
        for (i, r) in reports.iter().enumerate() {
            if let Some(text) = cell_svg(r) {
                files.push((dir.join(format!("{}.svg", cell_stem(i, r))), text));
            }
        }
    }
    write_all(dir, files)
}

/// Creates `dir` and writes every file; returns the paths in order.
pub(crate) fn write_all(dir: &Path, files: Vec<(PathBuf, String)>) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    files
        .into_iter()
        .map(|(path, text)| {
            std::fs::write(&path, text).map_err(CliError::io(&path))?;
            Ok(path)
        })
        .collect()
}
