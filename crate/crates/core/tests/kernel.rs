use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use memheat_core::exponents::FractionalParams;
use memheat_core::kernel::{
    build_profile, check_kernel_bounds, eval_y, eval_y_radial, lp_norm_y, BoundLimits, FarModel,
    GridSpec, NearModel, ProfileTable,
};
use memheat_core::quadrature::GaussLegendre;
use memheat_core::Error;
use proptest::prelude::*;
use rug::Float;

const TOL: f64 = 1e-6;

/// Profiles are expensive; build each parameter set once per test binary.
fn profile(alpha: f64, num: i64, den: i64) -> Arc<ProfileTable> {
    static CACHE: OnceLock<Mutex<BTreeMap<(u64, i64, i64), Arc<ProfileTable>>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
    cache
        .entry((alpha.to_bits(), num, den))
        .or_insert_with(|| {
            let p = FractionalParams::with_ratio(1, alpha, num, den).unwrap();
            Arc::new(build_profile(&p, &GridSpec::default(), TOL).unwrap())
        })
        .clone()
}

fn rgamma_big(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    let g = Float::with_val(256, x).gamma();
    (Float::with_val(256, 1.0) / g).to_f64()
}

/// `E_{1/2,1/2}(-x) = 1/√π - x e^{x²} erfc(x)`, in extended precision.
fn ml_half_half(x: f64) -> f64 {
    let bx = Float::with_val(192, x);
    let scaled = bx.clone().square().exp() * bx.clone().erfc();
    let pi = Float::with_val(192, rug::float::Constant::Pi);
    (Float::with_val(192, 1.0) / pi.sqrt() - bx * scaled).to_f64()
}

/// Wright-function series of the one-dimensional profile for `β = 1`:
/// `G(r) = ½ Σ_k (-r)^k / (k! Γ(α/2 - αk/2))`.
fn wright_profile(alpha: f64, r: f64) -> f64 {
    let mut sum = Float::with_val(256, 0.0);
    let mut term = Float::with_val(256, 1.0);
    for k in 0..200u32 {
        if k > 0 {
            term *= -r;
            term /= k;
        }
        sum += Float::with_val(256, &term * rgamma_big(0.5 * alpha - 0.5 * alpha * k as f64));
    }
    0.5 * sum.to_f64()
}

fn composite<F: FnMut(f64) -> f64>(gl: &GaussLegendre, mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| gl.integrate(&mut f, a + i as f64 * h, a + (i + 1) as f64 * h))
        .sum()
}

#[test]
fn mass_equals_reciprocal_gamma_for_all_six_profiles() {
    for &alpha in &[0.4, 0.7] {
        for &(num, den) in &[(3, 10), (1, 2), (1, 1)] {
            let t = profile(alpha, num, den);
            let want = rgamma_big(alpha);
            let rel = (t.total_mass() - want).abs() / want;
            assert!(rel <= 1e-5, "alpha={alpha} beta={num}/{den}: mass {} vs {want}, rel {rel:e}", t.total_mass());
        }
    }
}

#[test]
fn unit_beta_profile_matches_wright_series() {
    for &alpha in &[0.4, 0.5, 0.7] {
        let t = profile(alpha, 1, 1);
        for &r in &[0.0, 1e-4, 0.01, 0.3, 1.0, 2.0, 3.5, 5.0, 7.0] {
            let want = wright_profile(alpha, r);
            let got = t.g(r);
            assert!((got - want).abs() <= TOL * want, "alpha={alpha} r={r}: {got:e} vs {want:e}");
        }
    }
}

#[test]
fn origin_value_matches_brute_force_quadrature() {
    // (1/π) ∫_0^∞ E_{1/2,1/2}(-ρ²) dρ on [0, 40] plus the ρ^{-4} tail
    let gl = GaussLegendre::new(16);
    let head = composite(&gl, |rho| ml_half_half(rho * rho), 0.0, 40.0, 400);
    let c2 = 1.0 / (2.0 * PI.sqrt());
    let tail = c2 / (3.0 * 40f64.powi(3));
    let want = (head + tail) / PI;
    let t = profile(0.5, 1, 1);
    assert!((t.g(0.0) - want).abs() <= 1e-5 * want, "{} vs {want}", t.g(0.0));
}

/// `(1/π) ∫_0^∞ cos(rρ) E_{1/2,1/2}(-ρ^{0.6}) dρ` by Gauss-Legendre panels
/// between the zeros of the cosine, with repeated averaging of the partial
/// sums for the slowly decaying alternating tail.
fn brute_force_far_value(r: f64) -> f64 {
    let gl = GaussLegendre::new(16);
    let f = |rho: f64| (r * rho).cos() * ml_half_half(rho.powf(0.6));
    // ρ = v^5 removes the ρ^{0.6} cusp at the origin
    let first_zero = PI / (2.0 * r) + PI / r * (r / PI).ceil();
    let mut sum = composite(
        &gl,
        |v: f64| 5.0 * v.powi(4) * f(v.powi(5)),
        0.0,
        first_zero.powf(0.2),
        40,
    );
    let mut partial = Vec::new();
    let mut a = first_zero;
    for _ in 0..3000 {
        let b = a + PI / r;
        sum += gl.integrate(f, a, b);
        partial.push(sum);
        a = b;
    }
    let mut level: Vec<f64> = partial[partial.len() - 64..].to_vec();
    while level.len() > 1 {
        level = level.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    level[0] / PI
}

#[test]
fn far_values_match_brute_force_quadrature() {
    let t = profile(0.5, 3, 10);
    for &r in &[50.0, 100.0] {
        let want = brute_force_far_value(r);
        let got = t.g(r);
        assert!((got - want).abs() <= 1e-4 * want, "r={r}: {got:e} vs {want:e}");
    }
}

#[test]
fn far_statistic_is_flat_between_fifty_and_one_hundred() {
    let t = profile(0.5, 3, 10);
    let s50 = t.g(50.0) * 50f64.powf(1.6);
    let s100 = t.g(100.0) * 100f64.powf(1.6);
    assert!((s50 / s100 - 1.0).abs() <= 0.10, "{s50} vs {s100}");
}

#[test]
fn analytic_far_coefficient_agrees_with_fitted_one() {
    for &(alpha, num, den) in &[(0.4, 3, 10), (0.7, 1, 2), (0.5, 1, 4)] {
        let t = profile(alpha, num, den);
        match t.far_model() {
            FarModel::Power { coefficients, fitted_leading, .. } => {
                let rel = (fitted_leading - coefficients[0]).abs() / coefficients[0];
                assert!(rel < 1e-3, "alpha={alpha} beta={num}/{den}: {fitted_leading} vs {}", coefficients[0]);
            }
            other => panic!("expected a power tail, got {other:?}"),
        }
    }
}

#[test]
fn critical_dimension_profile_has_logarithmic_origin() {
    let t = profile(0.5, 1, 4);
    assert!(matches!(t.near_model(), NearModel::Log { .. }));
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut r = 1e-4;
    while r <= 0.5 {
        let v = t.g(r) / (1.0 + r.ln().abs());
        lo = lo.min(v);
        hi = hi.max(v);
        r *= 1.05;
    }
    assert!(lo > 0.0 && hi / lo <= 5.0, "band [{lo}, {hi}]");
    assert!(t.g(0.0).is_infinite());
}

#[test]
fn unit_beta_profile_has_exponential_tail() {
    let t = profile(0.5, 1, 1);
    let report = check_kernel_bounds(&t, 1.0, &BoundLimits::default());
    let sigma = report.sigma_exp.expect("exponential tail for beta = 1");
    assert!(sigma > 0.0);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..=200 {
        let r = 2.0 + 8.0 * i as f64 / 200.0;
        let v = t.far_ratio(r);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    assert!(hi / lo <= 3.0, "band [{lo}, {hi}]");
}

#[test]
fn bounded_profile_band_is_finite_and_positive() {
    let t = profile(0.5, 1, 2);
    let report = check_kernel_bounds(&t, 1.0, &BoundLimits::default());
    assert!(report.origin.inf > 0.0 && report.origin.sup.is_finite());
    assert!(report.origin.pass);
}

#[test]
fn exterior_constant_is_stable_across_times() {
    let t = profile(0.5, 3, 10);
    let report = check_kernel_bounds(&t, 1.0, &BoundLimits::default());
    let values: Vec<f64> = report.exterior.per_time.iter().map(|v| v.1).collect();
    let (lo, hi) = values.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!(hi.is_finite() && lo > 0.0);
    assert!(hi / lo - 1.0 <= 0.15, "{values:?}");
    assert!(report.exterior.pass && report.far.pass && report.origin.pass, "{report:#?}");
}

#[test]
fn norms_scale_exactly() {
    let t = profile(0.5, 1, 1);
    let m = lp_norm_y(&t, 1.0, 1.0).unwrap();
    assert!((m - 0.564_189_58).abs() <= 1e-5 * 0.564_189_58);
    let m4 = lp_norm_y(&t, 1.0, 4.0).unwrap();
    assert!((m4 - 0.282_094_79).abs() <= 1e-5 * 0.282_094_79);
    let sigma = |p: f64| t.params().sigma(p);
    for &p in &[1.0, 2.0, 3.5, f64::INFINITY] {
        let (t1, t2) = (3.0, 700.0);
        let slope = (lp_norm_y(&t, p, t2).unwrap() / lp_norm_y(&t, p, t1).unwrap()).ln() / (t2 / t1).ln();
        assert!((slope + sigma(p)).abs() <= 1e-12, "p={p}: {slope}");
    }
}

#[test]
fn sup_norm_is_rejected_at_the_critical_dimension() {
    let t = profile(0.5, 1, 4);
    assert!(matches!(lp_norm_y(&t, f64::INFINITY, 1.0), Err(Error::Domain(_))));
    assert!(lp_norm_y(&t, 2.0, 1.0).unwrap() > 0.0);
}

#[test]
fn two_norm_matches_direct_quadrature() {
    let t = profile(0.7, 1, 2);
    let gl = GaussLegendre::new(16);
    // ‖G‖₂² = 2 ∫_0^∞ G² dr on r = e^u, plus the c² r^{-4} tail
    let head = composite(&gl, |u: f64| t.g(u.exp()).powi(2) * u.exp(), -30.0, 100f64.ln(), 4000);
    let c = match t.far_model() {
        FarModel::Power { coefficients, .. } => coefficients[0],
        _ => unreachable!(),
    };
    let direct = (2.0 * (head + 1e-30 * t.g(0.0).powi(2) + c * c / (3.0 * 1e6))).sqrt();
    let lib = t.lp_norm(2.0).unwrap();
    assert!((lib - direct).abs() <= 1e-5 * direct, "{lib} vs {direct}");
}

#[test]
fn scaling_examples() {
    let t = profile(0.5, 1, 1);
    for &r in &t.radii()[1..40] {
        assert_eq!(eval_y(&t, &[r], 1.0).unwrap(), t.g(r));
    }
    let y = eval_y(&t, &[0.0], 16.0).unwrap();
    assert!((y - 16f64.powf(-0.75) * t.g(0.0)).abs() <= 1e-15 * y);
}

#[test]
fn cosine_transform_recovers_the_symbol() {
    let gl = GaussLegendre::new(16);
    for &(num, den) in &[(1, 1), (1, 2)] {
        let t = profile(0.5, num, den);
        for &rho in &[0.5, 1.0, 2.0] {
            // 2 ∫_0^∞ cos(ρr) G(r) dr
            let mut sum = composite(&gl, |v: f64| 5.0 * v.powi(4) * (rho * v.powi(5)).cos() * t.g(v.powi(5)), 0.0, 1.0, 40);
            sum += composite(&gl, |r| (rho * r).cos() * t.g(r), 1.0, 2000.0, 20_000);
            let want = if num == 1 && den == 1 {
                ml_half_half(rho * rho)
            } else {
                ml_half_half(rho)
            };
            assert!((2.0 * sum - want).abs() <= 1e-4, "beta={num}/{den} rho={rho}: {} vs {want}", 2.0 * sum);
        }
    }
}

#[test]
fn gaussian_limit_near_classical_order() {
    let p = FractionalParams::with_ratio(1, 0.999, 1, 1).unwrap();
    let t = build_profile(&p, &GridSpec::default(), TOL).unwrap();
    for &r in &[0.0f64, 1.0, 2.0] {
        let gauss = (-r * r / 4.0).exp() / (4.0 * PI).sqrt();
        assert!((t.g(r) / gauss - 1.0).abs() <= 0.05, "r={r}: {} vs {gauss}", t.g(r));
    }
}

#[test]
fn text_round_trip_preserves_the_table() {
    let t = profile(0.4, 3, 10);
    let text = t.to_text();
    let back = ProfileTable::from_text(&text).unwrap();
    assert_eq!(back.to_text(), text);
    for &r in &[0.0, 1e-3, 0.7, 33.0, 250.0] {
        assert_eq!(back.g(r), t.g(r));
    }
    assert_eq!(back.total_mass(), t.total_mass());
}

#[test]
fn loader_rejects_damaged_tables() {
    let text = profile(0.5, 1, 1).to_text();
    let swap_rows = {
        let mut lines: Vec<&str> = text.lines().collect();
        let n = lines.len();
        lines.swap(n - 1, n - 2);
        lines.join("\n")
    };
    let negative = text.replacen("\n1e-4,", "\n1e-4,-", 1);
    let cases = [
        text.replacen("# memheat profile v1", "# memheat profile v0", 1),
        text.replacen("dim = 1", "dim = 1\ncolour = blue", 1),
        text.replacen("alpha = 5e-1", "alpha = 1.5e0", 1),
        swap_rows,
        negative,
        text.replacen("far = exp", "far = power", 1),
        text.lines().take(14).collect::<Vec<_>>().join("\n"),
    ];
    for (i, bad) in cases.iter().enumerate() {
        assert_ne!(bad, &text, "case {i} did not alter the text");
        assert!(ProfileTable::from_text(bad).is_err(), "case {i} was accepted");
    }
}

#[test]
fn build_rejects_out_of_scope_requests() {
    let p = FractionalParams::with_ratio(4, 0.5, 1, 1).unwrap();
    assert!(matches!(build_profile(&p, &GridSpec::default(), TOL), Err(Error::OutOfScope(_))));
    let p = FractionalParams::with_ratio(1, 0.5, 1, 1).unwrap();
    assert!(build_profile(&p, &GridSpec::default(), 1e-3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn profile_is_positive_everywhere(u in 0.0f64..1.0, which in 0usize..3) {
        // the stretched-exponential tail leaves the double range near r = 270
        let r = u * [100.0, 1e4, 1e4][which];
        let t = [profile(0.5, 1, 1), profile(0.5, 3, 10), profile(0.5, 1, 4)][which].clone();
        let g = t.g(r);
        prop_assert!(g > 0.0, "G({r}) = {g}");
    }

    #[test]
    fn radial_mass_is_increasing_and_bounded(r in 1e-5f64..200.0, dr in 1e-6f64..10.0) {
        let t = profile(0.5, 3, 10);
        let (m0, m1) = (t.mass_within(r), t.mass_within(r + dr));
        prop_assert!(m1 >= m0);
        prop_assert!(m1 <= t.total_mass() * (1.0 + 1e-12));
    }

    #[test]
    fn scaling_is_bit_identical_for_equal_similarity_variable(xi in 0.0f64..40.0, m in 0i32..4) {
        // α = 1/2, β = 1: t = 16^m gives t^θ = 2^m and t^{σ*} = 8^m exactly
        let t = profile(0.5, 1, 1);
        let time = 16f64.powi(m);
        let x = xi * 2f64.powi(m);
        let scaled = eval_y_radial(&t, x, time).unwrap() * 8f64.powi(m);
        prop_assert_eq!(scaled, eval_y_radial(&t, xi, 1.0).unwrap());
    }
}
