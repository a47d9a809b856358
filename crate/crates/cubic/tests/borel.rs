use cubic::borel::{
    b_resummed, borel_pade, borel_pade_exact, direct_sum, pade_exact, pt_energy, pt_energy_with,
    resummed_energy, resummed_energy_with, series_orders_needed, Contour, ResummationConfig,
};
use cubic::poly::q;
use cubic::series::{b_series, rspt_from_series};
use cubic::spectral::{resonances, DEFAULT_THETA};
use cubic::{Complex64, Error, OscillatorSpec};
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn factorial_series(len: usize) -> Vec<f64> {
    let mut f = 1.0;
    (0..len)
        .map(|k| {
            if k > 0 {
                f *= k as f64;
            }
            if k % 2 == 0 {
                f
            } else {
                -f
            }
        })
        .collect()
}

/// int_0^inf e^{-t} / (1 + g t) dt by composite Simpson on [0, 80].
fn stieltjes(g: f64) -> f64 {
    let n = 200_000;
    let h = 80.0 / n as f64;
    let f = |t: f64| (-t).exp() / (1.0 + g * t);
    let mut s = f(0.0) + f(80.0);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn pade_of_known_function() {
    // 1/(1 - x) + x
    let a = vec![q(1, 1), q(2, 1), q(1, 1), q(1, 1), q(1, 1)];
    let (p, d) = pade_exact(&a, 2).unwrap();
    let x = q(1, 3);
    let eval = |v: &[cubic::poly::Q]| v.iter().rev().fold(q(0, 1), |acc, c| acc * &x + c);
    assert_eq!(eval(&p) / eval(&d), q(3, 2) + q(1, 3));
}

#[test]
fn geometric_series_on_real_axis() {
    let coeffs: Vec<f64> = (0..41)
        .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let r = borel_pade(&coeffs, c(0.5), &ResummationConfig::real_axis()).unwrap();
    assert!((r.value - c(2.0 / 3.0)).norm() < 1e-10, "{}", r.value);
    assert!(r.uncertainty < 1e-10);
}

#[test]
fn stieltjes_series() {
    let want = stieltjes(0.1);
    assert!((want - 0.9156333394).abs() < 1e-10);
    let r = borel_pade(
        &factorial_series(41),
        c(0.1),
        &ResummationConfig::real_axis(),
    )
    .unwrap();
    assert!((r.value - c(want)).norm() < 1e-10, "{} vs {want}", r.value);
}

#[test]
fn zero_series() {
    let r = borel_pade(&[0.0; 10], c(0.3), &ResummationConfig::default()).unwrap();
    assert_eq!(r.value, c(0.0));
    assert_eq!(r.uncertainty, 0.0);
}

#[test]
fn invalid_inputs() {
    assert!(borel_pade(&[1.0, 2.0, 3.0], c(0.1), &ResummationConfig::default()).is_err());
    assert!(borel_pade(&[1.0; 8], c(0.0), &ResummationConfig::default()).is_err());
    assert!(borel_pade(
        &[1.0, f64::NAN, 1.0, 1.0],
        c(0.1),
        &ResummationConfig::default()
    )
    .is_err());
}

#[test]
fn nonalternating_series_rejected_on_real_axis() {
    let coeffs: Vec<f64> = factorial_series(21).iter().map(|x| x.abs()).collect();
    let err = borel_pade(&coeffs, c(0.1), &ResummationConfig::real_axis()).unwrap_err();
    assert!(matches!(err, Error::InvalidInput(_)), "{err}");
    let r = borel_pade(&coeffs, c(0.1), &ResummationConfig::default()).unwrap();
    // the ray passes above the Borel pole at s = 1/g, adding i pi e^{-1/g} / g
    let im = std::f64::consts::PI * (-10.0f64).exp() / 0.1;
    assert!((r.value.im - im).abs() < 1e-9, "{}", r.value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn convergent_series_match_direct_sum(a in -3.0f64..3.0, r in -2.0f64..2.0, g in 0.01f64..0.25) {
        let coeffs: Vec<f64> = (0..41).map(|k| a * r.powi(k)).collect();
        let cfg = if r < 0.0 { ResummationConfig::real_axis() } else { ResummationConfig::default() };
        let v = borel_pade(&coeffs, c(g), &cfg).unwrap();
        let direct = direct_sum(&coeffs, c(g));
        prop_assert!((v.value - direct).norm() <= 1e-10 * (1.0 + a.abs()), "{} vs {}", v.value, direct);
        prop_assert!((direct - c(a / (1.0 - r * g))).norm() <= 1e-12 * (1.0 + a.abs()));
    }
}

#[test]
fn b_at_zero_coupling() {
    let b = b_series(40).unwrap();
    let r = b_resummed(&b, 0.5, c(0.0), &ResummationConfig::default()).unwrap();
    assert_eq!(r.value, c(0.5));
}

#[test]
fn b_energy_sweep_in_pt_case() {
    let cfg = ResummationConfig::default();
    let b = b_series(series_orders_needed(&cfg)).unwrap();
    let g = c(-0.01);
    let mut prev = f64::NEG_INFINITY;
    let mut crossing = None;
    for i in 0..=20 {
        let e = 0.3 + 0.025 * i as f64;
        let v = b_resummed(&b, e, g, &cfg).unwrap();
        assert!(v.value.im.abs() < 1e-6, "E = {e}: {}", v.value);
        assert!(v.value.re > prev, "not increasing at E = {e}");
        if prev < 0.5 && v.value.re >= 0.5 {
            crossing = Some(e);
        }
        prev = v.value.re;
    }
    let e = crossing.expect("B crosses 1/2");
    assert!((0.5..=0.525).contains(&e), "{e}");
    let at_root = b_resummed(&b, 0.512538145, g, &cfg).unwrap();
    assert!((at_root.value.re - 0.5).abs() < 1e-9, "{}", at_root.value);
}

#[test]
fn pt_contours_agree() {
    let cfg = ResummationConfig::default();
    let b = b_series(series_orders_needed(&cfg)).unwrap();
    let e = rspt_from_series(&b, 0, series_orders_needed(&cfg))
        .unwrap()
        .coefficients;
    for beta in [0.1, 0.25] {
        let g = c(-beta * beta);
        let real = borel_pade_exact(&e, g, &ResummationConfig::real_axis()).unwrap();
        let ray = borel_pade_exact(&e, g, &cfg).unwrap();
        let tol = real.uncertainty + ray.uncertainty + 1e-12;
        assert!(
            (real.value - ray.value).norm() <= tol,
            "beta = {beta}: {} vs {}",
            real.value,
            ray.value
        );
        let diag = resonances(&OscillatorSpec::pt(beta, 0.0, 200).unwrap(), 1)
            .unwrap()
            .levels[0]
            .energy;
        assert!(
            (real.value.re - diag.re).abs() <= 3.0 * real.uncertainty.max(1e-10),
            "{} vs {diag}",
            real.value
        );
    }
}

#[test]
fn pt_ground_state_small_beta() {
    let r = pt_energy(0, 0.1, &ResummationConfig::default()).unwrap();
    assert!((r.value.re - 0.512538145).abs() < 1e-9, "{}", r.value);
    assert_eq!(r.value.im, 0.0);
    assert!(r.uncertainty < 1e-9);
}

#[test]
fn pt_unperturbed_limit() {
    let b = b_series(40).unwrap();
    let cfg = ResummationConfig::default();
    assert_eq!(pt_energy_with(&b, 0, 0.0, &cfg).unwrap().value, c(0.5));
    let r = pt_energy_with(&b, 0, 1e-3, &cfg).unwrap();
    assert!((r.value.re - 0.5).abs() < 1e-5);
    assert!(pt_energy_with(&b, 0, -0.1, &cfg).is_err());
}

#[test]
fn pt_ground_state_agrees_with_diagonalization() {
    let b = b_series(40).unwrap();
    let cfg = ResummationConfig::default();
    let resummed = pt_energy_with(&b, 0, 0.25, &cfg).unwrap();
    let diag = resonances(&OscillatorSpec::pt(0.25, 0.0, 200).unwrap(), 1)
        .unwrap()
        .levels[0]
        .energy;
    assert!(
        (resummed.value.re - diag.re).abs() <= resummed.uncertainty.max(1e-9) * 3.0,
        "{} vs {diag}",
        resummed.value
    );
}

#[test]
fn resonance_width_sign() {
    let b = b_series(40).unwrap();
    let cfg = ResummationConfig::default();
    for g in [0.05, 0.2, 0.6, 1.0] {
        let r = resummed_energy_with(&b, 0, g, &cfg).unwrap();
        assert!(r.value.im <= 0.0, "g = {g}: {}", r.value);
    }
    assert_eq!(
        resummed_energy_with(&b, 2, 0.0, &cfg).unwrap().value,
        c(2.5)
    );
    let real = ResummationConfig {
        contour: Contour::RealAxis,
        ..cfg
    };
    assert!(resummed_energy_with(&b, 0, 0.1, &real).is_err());
}

#[test]
fn weak_coupling_agrees_with_diagonalization() {
    let r = resummed_energy(0, 0.01, &ResummationConfig::default()).unwrap();
    let diag = resonances(&OscillatorSpec::real(0.01, DEFAULT_THETA, 200).unwrap(), 1)
        .unwrap()
        .levels[0]
        .energy;
    assert!((r.value.re - diag.re).abs() < 2e-5, "{} vs {diag}", r.value);
}

#[test]
fn resonance_at_g_0_6() {
    let r = resummed_energy(0, 0.6, &ResummationConfig::default()).unwrap();
    let exact = Complex64::new(0.554053519, -0.351401778);
    assert!(
        (r.value.re - exact.re).abs() <= r.uncertainty_re,
        "{}",
        r.value
    );
    assert!(
        (r.value.im - exact.im).abs() <= r.uncertainty_im,
        "{}",
        r.value
    );
    for (ours, quoted) in [(r.uncertainty_re, 1e-3), (r.uncertainty_im, 6e-3)] {
        assert!(
            ours <= 10.0 * quoted && ours >= quoted / 10.0,
            "{ours} vs {quoted}"
        );
    }
}

#[test]
#[ignore = "the spread keeps shrinking with order at g = 0.6: 3.4e-3 at M = 20, 1.5e-4 at M = 30"]
fn oscillation_ceiling_at_g_0_6() {
    let at = |m| {
        let cfg = ResummationConfig {
            max_order: m,
            ..Default::default()
        };
        resummed_energy(0, 0.6, &cfg).unwrap().uncertainty
    };
    let (low, high) = (at(20), at(30));
    assert!(high >= low / 2.0, "{low} -> {high}");
}
