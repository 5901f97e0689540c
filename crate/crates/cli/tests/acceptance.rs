//! Acceptance suite: one PASS/FAIL line per criterion on stderr.
//!
//! Runs with its own harness so the lines are not captured. The process
//! fails when a criterion is red unless every red part is listed in
//! `KNOWN_RED`, each entry of which is analysed in the decision ledger.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use memheat_cli::{run_config, Command, RunOptions};
use memheat_core::exponents::{FractionalParams, RegionSpec};
use memheat_core::kernel::{
    build_profile, check_kernel_bounds, eval_y_radial, lp_norm_y, BoundLimits, GridSpec, ProfileTable,
};
use memheat_core::quadrature::{integrate_breaks, Tolerance};
use memheat_core::solver::{Forcing, MildSolution};
use memheat_core::special_functions::{mittag_leffler, MlParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Matrix cells, keyed as the first six CSV columns, whose failure is
/// expected at this time window.
const KNOWN_RED: &[&str] = &["1,0.5,3/10,global,2.5,0.5"];

const PROFILE_TOL: f64 = 1e-6;

struct Verdict {
    pass: bool,
    detail: String,
    /// Red parts that are documented as unattainable.
    known_red: bool,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into(), known_red: false }
    }
}

fn say(line: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn six_profiles() -> Vec<ProfileTable> {
    let mut out = Vec::new();
    for alpha in [0.4, 0.7] {
        for (num, den) in [(3, 10), (1, 2), (1, 1)] {
            let params = FractionalParams::with_ratio(1, alpha, num, den).unwrap();
            out.push(build_profile(&params, &GridSpec::default(), PROFILE_TOL).unwrap());
        }
    }
    out
}

fn rgamma(x: f64) -> f64 {
    libm::tgamma(x).recip()
}

fn ml(a: f64, b: f64, x: f64) -> f64 {
    mittag_leffler(MlParams::new(a, b).unwrap(), x).unwrap()
}

fn special_functions() -> Verdict {
    let exp_grid: Vec<f64> = (0..=300).map(|i| -30.0 * i as f64 / 300.0).collect();
    let erfc_grid: Vec<(f64, f64)> = (0..=250)
        .map(|i| {
            let x = 5.0 * i as f64 / 250.0;
            (x, (x * x).exp() * libm::erfc(x))
        })
        .collect();
    let pairs = [(0.3, 0.3), (0.5, 1.0), (0.75, 0.75), (0.9, 1.0)];
    let inv_gamma: Vec<f64> = pairs.iter().map(|&(_, b)| rgamma(b)).collect();

    let clock = Instant::now();
    let exp_err = exp_grid.iter().map(|&x| (ml(1.0, 1.0, x) - x.exp()).abs()).fold(0.0, f64::max);
    let erfc_err = erfc_grid.iter().map(|&(x, want)| (ml(0.5, 1.0, -x) - want).abs()).fold(0.0, f64::max);
    let mut rec_err = 0.0f64;
    for (&(a, b), &ig) in pairs.iter().zip(&inv_gamma) {
        for i in 0..=400 {
            let x = -100.0 * i as f64 / 400.0;
            rec_err = rec_err.max((ml(a, b, x) - (x * ml(a, a + b, x) + ig)).abs());
        }
    }
    let elapsed = clock.elapsed();
    Verdict::new(
        exp_err <= 1e-10 && erfc_err <= 1e-9 && rec_err <= 1e-9 && elapsed < Duration::from_secs(1),
        format!(
            "exp {exp_err:.1e}, erfc {erfc_err:.1e}, recurrence {rec_err:.1e}, {:.3} s",
            secs(elapsed)
        ),
    )
}

fn kernel_mass(profiles: &[ProfileTable], build_time: Duration) -> Verdict {
    let worst = profiles
        .iter()
        .map(|t| {
            let want = rgamma(t.params().alpha());
            (t.total_mass() - want).abs() / want
        })
        .fold(0.0, f64::max);
    Verdict::new(
        worst <= 1e-5 && build_time < Duration::from_secs(120),
        format!("worst relative mass error {worst:.1e} over 6 profiles, built in {:.1} s", secs(build_time)),
    )
}

fn profile_bounds() -> Verdict {
    let build = |num, den| {
        build_profile(&FractionalParams::with_ratio(1, 0.5, num, den).unwrap(), &GridSpec::default(), PROFILE_TOL)
            .unwrap()
    };
    let far = build(3, 10);
    let stat = |r: f64| far.g(r) * r.powf(1.6);
    let far_var = (stat(50.0) / stat(100.0) - 1.0).abs();

    let critical = build(1, 4);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut r = 1e-4;
    while r <= 0.5 {
        let v = critical.g(r) / (1.0 + r.ln().abs());
        lo = lo.min(v);
        hi = hi.max(v);
        r *= 1.02;
    }
    let band = hi / lo;

    let sigma = check_kernel_bounds(&build(1, 1), 1.0, &BoundLimits::default()).sigma_exp;
    Verdict::new(
        far_var <= 0.10 && lo > 0.0 && band <= 5.0 && sigma.is_some_and(|s| s > 0.0),
        format!(
            "far statistic varies {:.1}%, log band spread {band:.2}, sigma_exp {}",
            100.0 * far_var,
            sigma.map_or("none".into(), |s| format!("{s:.3}"))
        ),
    )
}

fn norm_scaling(profiles: &[ProfileTable]) -> Verdict {
    let (t1, t2) = (3.0, 700.0);
    let mut worst = 0.0f64;
    for t in profiles {
        for p in [1.0, 2.0, f64::INFINITY] {
            let slope = (lp_norm_y(t, p, t2).unwrap() / lp_norm_y(t, p, t1).unwrap()).ln() / (t2 / t1).ln();
            worst = worst.max((slope + t.params().sigma(p)).abs());
        }
    }
    Verdict::new(worst <= 1e-12, format!("worst slope error {worst:.1e} over 6 profiles and p in {{1, 2, inf}}"))
}

/// `∫_0^t (1+t-τ)^{-1} ∫_{-1}^{1} Y(x-y, τ) dy dτ` straight from the kernel.
fn brute_force_u(profile: &ProfileTable, forcing: &Forcing, x: f64, t: f64) -> f64 {
    let p = profile.params();
    let (alpha, theta) = (p.alpha(), p.theta());
    let big_r = forcing.radius();
    let inner = |tau: f64| {
        let w = tau.powf(theta);
        let mut breaks = vec![-big_r, big_r, x];
        for k in -4..=12 {
            breaks.push(x - w * 2f64.powi(k));
            breaks.push(x + w * 2f64.powi(k));
        }
        breaks.retain(|b| b.abs() <= big_r);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let tol = Tolerance::new(1e-17, 1e-9).with_max_intervals(5000);
        integrate_breaks(|y| eval_y_radial(profile, (x - y).abs(), tau).unwrap(), &breaks, tol)
            .unwrap()
            .value
    };
    // v = τ^α absorbs the τ^{α-1} singularity of Y's mass
    let vmax = t.powf(alpha);
    let mut breaks = vec![0.0, vmax];
    for c in [(x - big_r).abs(), x + big_r] {
        for k in -10..=10 {
            breaks.push(c.powf(2.0 * p.beta()) * 2f64.powi(k));
        }
    }
    breaks.retain(|b| *b >= 0.0 && *b <= vmax);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let outer = |v: f64| {
        if v == 0.0 {
            return 0.0;
        }
        let tau = v.powf(1.0 / alpha);
        forcing.time_factor(t - tau) * inner(tau) * tau.powf(1.0 - alpha) / alpha
    };
    integrate_breaks(outer, &breaks, Tolerance::new(1e-17, 1e-8).with_max_intervals(5000)).unwrap().value
}

fn solver_oracle(profiles: &[ProfileTable]) -> Verdict {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    let forcing = Forcing::sharpness(1.0).unwrap();
    let mut worst = 0.0f64;
    for table in profiles {
        let solver = MildSolution::new(table, forcing, 1e-5).unwrap();
        for _ in 0..3 {
            let x: f64 = rng.gen_range(0.0..3.0);
            let t = 10f64.powf(rng.gen_range(-0.5..1.5));
            let got = solver.at(&[x], t).unwrap().value;
            let want = brute_force_u(table, &forcing, x, t);
            worst = worst.max((got - want).abs() / want);
        }
    }
    let elapsed = clock.elapsed();
    Verdict::new(
        worst <= 1e-3 && elapsed < Duration::from_secs(300),
        format!("worst relative gap {worst:.1e} at 18 random points, {:.1} s", secs(elapsed)),
    )
}

fn mass_identity() -> Verdict {
    let params = FractionalParams::with_ratio(1, 0.5, 1, 1).unwrap();
    let table = build_profile(&params, &GridSpec::default(), PROFILE_TOL).unwrap();
    let forcing = Forcing::sharpness(0.0).unwrap();
    let solver = MildSolution::new(&table, forcing, 1e-6).unwrap();
    let mut worst = 0.0f64;
    for t in [1.0f64, 10.0] {
        let got = solver.region_lp_norm(t, 1.0, &RegionSpec::Global).unwrap().value;
        let want = 2.0 * t.sqrt() * rgamma(1.5);
        worst = worst.max((got - want).abs() / want);
    }
    Verdict::new(worst <= 1e-3, format!("worst relative gap {worst:.1e} at t = 1, 10"))
}

/// Hand closed forms for every matrix cell, keyed like the CSV rows:
/// `(predicted slope, predicted log power)`.
fn hand_predictions() -> Vec<(String, f64, u32)> {
    let sigma_star = |alpha: f64, beta: f64| 1.0 - alpha + alpha / (2.0 * beta);
    let sigma = |alpha: f64, beta: f64, p: f64| sigma_star(alpha, beta) - alpha / (2.0 * beta) / p;
    let mut out = Vec::new();
    let mut push = |key: &str, slope: f64, k: u32| out.push((key.to_string(), slope, k));
    for p in [1.0, 2.0] {
        let s = sigma(0.5, 1.0, p);
        push(&format!("1,0.5,1/1,exterior:1,{p},0.5"), -(s - 1.0 + 0.5), 0);
        push(&format!("1,0.5,1/1,exterior:1,{p},1.5"), -s, 0);
    }
    push("1,0.5,1/2,compact:1,inf,0.5", -0.5, 1);
    push("1,0.5,1/2,compact:1,inf,2", -1.0, 0);
    push("1,0.5,3/10,compact:1,inf,0.5", -0.5, 0);
    push("1,0.5,3/10,compact:1,inf,2", -sigma_star(0.5, 0.3), 0);
    push("1,0.5,1/4,compact:1,inf,2", -1.5, 1);
    let s = sigma_star(0.5, 1.0);
    push("1,0.5,1/1,intermediate:0.125:1:2,inf,0.5", -(s - 1.0 + 0.5), 0);
    push("1,0.5,1/1,intermediate:0.125:1:2,inf,1.5", -s, 0);
    push("1,0.5,3/10,global,2.5,0.5", -0.5, 1);
    push("1,0.5,3/10,global,4,0.5", -0.5, 0);
    push("1,0.5,3/10,global,4,2", -sigma(0.5, 0.3, 4.0), 0);
    out
}

/// Runs every matrix config once into `out`; returns the concatenated
/// verify CSVs and the wall time.
fn run_matrix(out: &Path) -> (String, Duration) {
    let mut files: Vec<PathBuf> = fs::read_dir(configs().join("matrix"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    files.sort();
    let clock = Instant::now();
    let mut csv = String::new();
    for file in files {
        let dir = out.join(file.file_stem().unwrap());
        let options = RunOptions { out: Some(dir.clone()), jobs: None, cache: Some(out.join("cache")) };
        run_config(Command::Verify, &file, &options).unwrap();
        csv.push_str(&fs::read_to_string(dir.join("verify.csv")).unwrap());
    }
    (csv, clock.elapsed())
}

fn matrix(csv: &str, elapsed: Duration) -> Verdict {
    let rows: Vec<Vec<&str>> =
        csv.lines().filter(|l| !l.starts_with("N,")).map(|l| l.split(',').collect()).collect();
    let mut red = Vec::new();
    let mut coherent = true;
    let hand = hand_predictions();
    for row in &rows {
        let key = row[..6].join(",");
        match hand.iter().find(|(k, _, _)| *k == key) {
            Some((_, slope, k)) => {
                let predicted: f64 = row[7].parse().unwrap();
                let log_pow: u32 = row[8].parse().unwrap();
                coherent &= (predicted - slope).abs() <= 1e-6 && log_pow == *k;
            }
            None => coherent = false,
        }
        if row[16] != "PASS" {
            red.push(format!("{key} {} (fitted {}, predicted {})", row[16], row[9], row[7]));
        }
    }
    let all_cells = rows.len() == hand.len();
    let fast = elapsed < Duration::from_secs(600);
    let mut detail = format!(
        "{}/{} cells pass, predictions match closed forms: {coherent}, {:.0} s",
        rows.len() - red.len(),
        rows.len(),
        secs(elapsed)
    );
    for r in &red {
        detail.push_str(&format!("; red: {r}"));
    }
    let known_red = red.iter().all(|r| KNOWN_RED.iter().any(|k| r.starts_with(k)));
    Verdict { pass: red.is_empty() && coherent && all_cells && fast, detail, known_red: known_red && coherent && all_cells && fast }
}

fn ksz(out: &Path) -> Verdict {
    let clock = Instant::now();
    let options = RunOptions { out: Some(out.to_path_buf()), jobs: None, cache: Some(out.join("cache")) };
    match run_config(Command::Ksz, &configs().join("ksz.toml"), &options) {
        Ok(outcome) => Verdict::new(
            outcome.exit_code == 0,
            format!("{}, {:.0} s", outcome.summary.trim(), secs(clock.elapsed())),
        ),
        Err(e) => Verdict::new(false, e.to_string()),
    }
}

fn main() -> ExitCode {
    let scratch = tempfile::TempDir::new().unwrap();
    let mut verdicts: Vec<(u32, Verdict)> = Vec::new();
    let mut report = |n: u32, v: Verdict| {
        let status = if v.pass { "PASS" } else { "FAIL" };
        let tag = if !v.pass && v.known_red { " [known red, see ledger]" } else { "" };
        say(&format!("criterion {n}: {status}{tag}  {}", v.detail));
        verdicts.push((n, v));
    };

    report(1, special_functions());
    let clock = Instant::now();
    let profiles = six_profiles();
    report(2, kernel_mass(&profiles, clock.elapsed()));
    report(3, profile_bounds());
    report(4, norm_scaling(&profiles));
    report(5, solver_oracle(&profiles));
    report(6, mass_identity());
    let (first, elapsed) = run_matrix(&scratch.path().join("run1"));
    report(7, matrix(&first, elapsed));
    report(8, ksz(&scratch.path().join("ksz")));
    let (second, _) = run_matrix(&scratch.path().join("run2"));
    report(
        9,
        Verdict::new(first == second, format!("two matrix runs, {} CSV bytes, identical: {}", first.len(), first == second)),
    );

    let unexpected: Vec<u32> = verdicts.iter().filter(|(_, v)| !v.pass && !v.known_red).map(|(n, _)| *n).collect();
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        say(&format!("unexpected failures: {unexpected:?}"));
        ExitCode::FAILURE
    }
}
