use memheat_core::special_functions::{bessel_j, gamma_fn, mittag_leffler, MittagLeffler, MlParams};
use proptest::prelude::*;
use rug::{ops::Pow, Float};

const PREC: u32 = 1536;

fn big(x: f64) -> Float {
    Float::with_val(PREC, x)
}

/// Power series of `E_{a,b}(-x)` in extended precision. The terms grow to
/// roughly `exp(x^{1/a})` before decaying, so the precision is chosen to keep
/// several hundred digits after the cancellation.
fn ml_reference(a: f64, b: f64, x: f64) -> f64 {
    let a = big(a);
    let b = big(b);
    let mx = -big(x);
    let mut sum = big(0.0);
    let mut pow = big(1.0);
    let mut k = 0u32;
    loop {
        let arg = Float::with_val(PREC, &a * k) + &b;
        let term = Float::with_val(PREC, &pow / arg.clone().gamma());
        sum += &term;
        if k > 20 && term.clone().abs() < Float::with_val(PREC, 1e-40) * sum.clone().abs().max(&big(1e-300)) {
            break;
        }
        pow *= &mx;
        k += 1;
        assert!(k < 50_000, "reference series did not converge");
    }
    sum.to_f64()
}

fn ml(a: f64, b: f64, x: f64) -> f64 {
    mittag_leffler(MlParams::new(a, b).unwrap(), x).unwrap()
}

#[test]
fn mittag_leffler_matches_extended_precision_series() {
    let alphas = [0.25, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.97];
    for &a in &alphas {
        for &b in &[a, 1.0, 1.0 + a, 2.0 * a + 0.1] {
            // reachable without astronomically large series terms
            let x_max = 300f64.powf(a);
            let mut x = 0.05;
            while x <= x_max {
                let want = ml_reference(a, b, x);
                let got = ml(a, b, -x);
                let err = (got - want).abs() / want.abs().max(1e-300);
                assert!(err <= 1e-10, "E_({a},{b})(-{x}): got {got:e}, want {want:e}, rel {err:e}");
                x *= 1.37;
            }
        }
    }
}

#[test]
fn mittag_leffler_near_one_alpha() {
    for &a in &[0.99, 0.999] {
        for &x in &[0.5, 2.0, 8.0, 30.0, 80.0] {
            for &b in &[a, 1.0] {
                let want = ml_reference(a, b, x);
                let got = ml(a, b, -x);
                assert!(
                    (got - want).abs() <= 1e-10 * want.abs(),
                    "E_({a},{b})(-{x}): {got:e} vs {want:e}"
                );
            }
        }
    }
}

#[test]
fn exponential_identity_on_grid() {
    for i in 0..=300 {
        let x = -30.0 * i as f64 / 300.0;
        let got = ml(1.0, 1.0, x);
        assert!((got - x.exp()).abs() <= 1e-10, "x={x}");
    }
}

#[test]
fn half_order_matches_scaled_erfc() {
    // E_{1/2,1}(-x) = exp(x^2) erfc(x)
    for i in 0..=250 {
        let x = 5.0 * i as f64 / 250.0;
        let bx = big(x);
        let want = (bx.clone().square().exp() * bx.erfc()).to_f64();
        let got = ml(0.5, 1.0, -x);
        assert!((got - want).abs() <= 1e-9, "x={x}: {got} vs {want}");
    }
    let v = ml(0.5, 1.0, -1.0);
    assert!((v - 0.427_583_576_155_807).abs() < 1e-12);
}

#[test]
fn recurrence_between_parameter_pairs() {
    // E_{a,b}(x) = x E_{a,a+b}(x) + 1/Γ(b)
    for &a in &[0.3, 0.5, 0.75, 1.0] {
        for &b in &[a, 1.0] {
            let lo = MittagLeffler::new(MlParams::new(a, b).unwrap());
            let hi = MittagLeffler::new(MlParams::new(a, a + b).unwrap());
            for i in 0..=400 {
                let x = 100.0 * i as f64 / 400.0;
                let lhs = lo.eval_neg(x);
                let rhs = -x * hi.eval_neg(x) + 1.0 / gamma_fn(b).unwrap();
                assert!((lhs - rhs).abs() <= 1e-9, "a={a} b={b} x=-{x}: {lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn accuracy_holds_far_out() {
    // beyond 1e3 the series oracle is unusable; compare with the leading
    // terms of the algebraic expansion computed in extended precision
    for &a in &[0.3, 0.5, 0.8] {
        for &x in &[1e3, 1e5, 1e8] {
            let bx = big(x);
            let mut want = big(0.0);
            for k in 1..=6u32 {
                let arg = 1.0 - a * k as f64;
                if arg <= 0.0 && arg == arg.floor() {
                    continue;
                }
                let c = Float::with_val(PREC, arg).gamma();
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                want += Float::with_val(PREC, sign / c) / bx.clone().pow(k);
            }
            let want = want.to_f64();
            let got = ml(a, 1.0, -x);
            assert!((got - want).abs() <= 1e-10 * want.abs(), "a={a} x={x}: {got:e} vs {want:e}");
        }
    }
}

#[test]
fn large_argument_law_for_kernel_case() {
    for &a in &[0.3, 0.5, 0.9] {
        let e6 = 1e12 * ml(a, a, -1e6);
        let e7 = 1e14 * ml(a, a, -1e7);
        assert!((e6 / e7 - 1.0).abs() < 0.02, "a={a}: {e6} vs {e7}");
    }
}

#[test]
fn gamma_matches_extended_precision() {
    let mut x = 0.013;
    while x < 170.0 {
        let want = big(x).gamma().to_f64();
        let got = gamma_fn(x).unwrap();
        assert!((got - want).abs() <= 1e-12 * want, "x={x}: {got:e} vs {want:e}");
        x *= 1.09;
    }
}

#[test]
fn gamma_functional_equation() {
    for i in 0..=990 {
        let x = 0.1 + i as f64 * 0.01;
        let lhs = gamma_fn(x + 1.0).unwrap();
        let rhs = x * gamma_fn(x).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs, "x={x}");
    }
}

#[test]
fn first_zero_of_j0_found_by_bisection() {
    // bisection on the power series alone, independent of the library
    let series = |x: f64| {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            term *= -(x * x) / (4.0 * (k * k) as f64);
            sum += term;
        }
        sum
    };
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if series(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let zero = 0.5 * (lo + hi);
    assert!((zero - 2.404_825_56).abs() < 1e-8);
    assert!(bessel_j(0.0, zero).unwrap().abs() <= 1e-7);
    assert!(bessel_j(0.0, 2.404_825_56).unwrap().abs() <= 1e-7);
}

#[test]
fn bessel_matches_extended_precision() {
    let mut x = 0.01;
    while x <= 1e4 {
        for (nu, n) in [(0.0, 0), (1.0, 1)] {
            let want = if n == 0 { big(x).j0() } else { big(x).j1() }.to_f64();
            let got = bessel_j(nu, x).unwrap();
            assert!((got - want).abs() <= 1e-10, "J_{nu}({x}): {got} vs {want}");
        }
        let s = (2.0 / (std::f64::consts::PI * x)).sqrt();
        let want = s * (x.sin() / x - x.cos());
        if x > 1.0 {
            assert!((bessel_j(1.5, x).unwrap() - want).abs() <= 1e-10);
        }
        assert!((bessel_j(-0.5, x).unwrap() - s * x.cos()).abs() <= 1e-10);
        x *= 1.11;
    }
}

proptest! {
    #[test]
    fn unit_beta_values_lie_in_unit_interval(a in 0.05f64..=1.0, x in 0.0f64..1e4) {
        let v = ml(a, 1.0, -x);
        prop_assert!(v > 0.0 && v <= 1.0, "E_({a},1)(-{x}) = {v}");
    }

    #[test]
    fn decreasing_in_modulus(a in 0.05f64..=1.0, x in 0.0f64..500.0, dx in 1e-3f64..50.0, kernel in any::<bool>()) {
        let b = if kernel { a } else { 1.0 };
        let e = MittagLeffler::new(MlParams::new(a, b).unwrap());
        let (v0, v1) = (e.eval_neg(x), e.eval_neg(x + dx));
        prop_assert!(v1 > 0.0);
        prop_assert!(v1 <= v0 * (1.0 + 1e-12), "E_({a},{b}): {v0} at {x}, {v1} at {}", x + dx);
    }
}
