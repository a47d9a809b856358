use cubic::basis::q3_element;
use cubic::poly::{q, q_to_f64, Q};
use cubic::series::{
    a_function_leading, a_function_leading_exact, b_series, instanton_width, reversion_defect,
    rspt_coefficients, rspt_from_series, InstantonData,
};
use cubic::spectral::{resonances, DEFAULT_THETA};
use cubic::OscillatorSpec;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Energy corrections E^{(j)}, j = 0..=order, of H0 + lambda q^3 for level n by the
/// Rayleigh-Schroedinger recursion in the oscillator basis.
fn rs_energies(n: usize, order: usize) -> Vec<f64> {
    let dim = n + 3 * order + 4;
    let apply_v = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (i, o) in out.iter_mut().enumerate() {
            for j in i.saturating_sub(3)..(i + 4).min(dim) {
                *o += q3_element(i, j) * v[j];
            }
        }
        out
    };
    let e0 = n as f64 + 0.5;
    let mut psi: Vec<Vec<f64>> = vec![vec![0.0; dim]];
    psi[0][n] = 1.0;
    let mut e = vec![e0];
    for j in 1..=order {
        let vpsi = apply_v(&psi[j - 1]);
        e.push(vpsi[n]);
        let mut rhs = vpsi;
        for i in 1..=j {
            for (r, p) in rhs.iter_mut().zip(&psi[j - i]) {
                *r -= e[i] * p;
            }
        }
        let next: Vec<f64> = (0..dim)
            .map(|m| {
                if m == n {
                    0.0
                } else {
                    rhs[m] / (e0 - (m as f64 + 0.5))
                }
            })
            .collect();
        psi.push(next);
    }
    e
}

fn nu(n: usize) -> Q {
    Q::from_integer(BigInt::from(n)) + q(1, 2)
}

#[test]
fn printed_b_orders() {
    let b = b_series(2).unwrap();
    let c1 = &b.orders[1];
    assert_eq!(c1.coeffs(), &[q(7, 16), q(0, 1), q(15, 4)]);
    let c2 = &b.orders[2];
    assert_eq!(c2.coeffs(), &[q(0, 1), q(1365, 64), q(0, 1), q(1155, 16)]);
}

#[test]
fn b_degree_guard() {
    let b = b_series(12).unwrap();
    for (k, p) in b.orders.iter().enumerate() {
        assert!(p.coeffs().len() <= 2 * k + 2, "order {k}");
    }
}

#[test]
fn closed_forms_for_low_orders() {
    for n in 0..=5 {
        let t = rspt_coefficients(n, 3).unwrap();
        let v = nu(n);
        let v2 = &v * &v;
        assert_eq!(t.coefficients[0], v);
        assert_eq!(t.coefficients[1], -(q(7, 16) + q(15, 4) * &v2));
        assert_eq!(
            t.coefficients[2],
            -(q(1155, 64) * &v + q(705, 16) * &v * &v2)
        );
        assert_eq!(
            t.coefficients[3],
            -(q(101479, 2048) + q(209055, 256) * &v2 + q(115755, 128) * &v2 * &v2)
        );
    }
}

#[test]
fn rspt_matches_numerical_perturbation_theory() {
    let k_max = 6;
    let b = b_series(k_max).unwrap();
    for n in 0..=2 * k_max + 1 {
        let exact = rspt_from_series(&b, n, k_max).unwrap().to_f64();
        let rs = rs_energies(n, 2 * k_max);
        for k in 1..=k_max {
            assert!(
                rs[2 * k - 1].abs() < 1e-9 * rs[2 * k].abs(),
                "odd order {} of level {n}",
                2 * k - 1
            );
            let rel = (exact[k] - rs[2 * k]).abs() / rs[2 * k].abs();
            assert!(
                rel < 1e-10,
                "N = {n} K = {k}: {} vs {}",
                exact[k],
                rs[2 * k]
            );
        }
    }
}

#[test]
fn reversion_round_trip_is_exact() {
    let b = b_series(8).unwrap();
    for n in 0..=3 {
        for k_max in 1..=8 {
            let t = rspt_from_series(&b, n, k_max).unwrap();
            let defect = reversion_defect(&b, &t);
            assert!(
                defect[..=k_max].iter().all(Zero::is_zero),
                "N = {n} K_max = {k_max}"
            );
        }
    }
}

#[test]
fn all_corrections_negative() {
    let b = b_series(20).unwrap();
    for n in 0..=10 {
        let t = rspt_from_series(&b, n, 20).unwrap();
        assert_eq!(t.coefficients[0], nu(n));
        for (k, c) in t.coefficients.iter().enumerate().skip(1) {
            assert!(c.is_negative(), "N = {n} K = {k}");
        }
    }
}

#[test]
fn factorial_growth() {
    let t = rspt_coefficients(0, 16).unwrap();
    let ratio = |k: usize| q_to_f64(&(&t.coefficients[k + 1] / &t.coefficients[k]));
    assert!(ratio(15) > ratio(5));
    assert!(ratio(15) > 2.0 * ratio(5));
}

#[test]
fn instanton_profile_solves_equation_of_motion() {
    let h = 1e-3;
    for i in 0..100 {
        let t = -10.0 + 20.0 * i as f64 / 99.0;
        let f = InstantonData::profile;
        let acc = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
        let chi = f(t);
        assert!((acc - (chi - 3.0 * chi * chi)).abs() < 1e-6, "t = {t}");
    }
    assert_eq!(InstantonData::profile(0.0), 0.5);
    assert_eq!(InstantonData::profile(2.0), InstantonData::profile(-2.0));
    assert!(InstantonData::profile(60.0) < 1e-25);
}

#[test]
fn instanton_action_value() {
    assert_eq!(InstantonData::action(), q(2, 15));
    // S = int (chi'^2/2 - U(chi)) dt by the trapezoid rule
    let h = 1e-3;
    let f = InstantonData::profile;
    let n = 80_000;
    let s: f64 = (0..=n)
        .map(|i| {
            let t = -40.0 + i as f64 * h;
            let d = (f(t + 1e-5) - f(t - 1e-5)) / 2e-5;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * (0.5 * d * d - InstantonData::potential(f(t)))
        })
        .sum::<f64>()
        * h;
    assert!((s - 2.0 / 15.0).abs() < 1e-8, "{s}");
}

#[test]
fn leading_width() {
    let w = instanton_width(0.02).unwrap();
    let direct = -(-2.0 / (15.0 * 0.02f64)).exp() / (std::f64::consts::PI * 0.02).sqrt();
    assert!((w.value - direct).abs() < 1e-15);
    assert!((w.value + 5.077e-3).abs() < 1e-6);
    assert!(!w.underflow);
    let tiny = instanton_width(1e-5).unwrap();
    assert!(tiny.underflow && tiny.value == 0.0 && tiny.value.is_sign_negative());
    assert!(instanton_width(0.0).is_err());
    let mut prev = 0.0;
    for i in 1..=100 {
        let v = instanton_width(i as f64 * 1e-3).unwrap().value.abs();
        assert!(v >= prev);
        prev = v;
    }
}

fn width_ratio(g: f64) -> f64 {
    let e = resonances(&OscillatorSpec::real(g, DEFAULT_THETA, 200).unwrap(), 1)
        .unwrap()
        .levels[0]
        .energy;
    instanton_width(g).unwrap().value / e.im
}

#[test]
fn leading_width_approaches_diagonalization() {
    let ratios: Vec<f64> = [0.015, 0.01, 0.0075]
        .iter()
        .map(|&g| width_ratio(g))
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
    assert!(
        ratios.iter().all(|r| (0.75..=1.25).contains(r)),
        "{ratios:?}"
    );
    // corrections 1 - 169 g/16 - 44507 g^2/512 - 86071851 g^3/40960
    let g = 0.0075f64;
    let factor =
        1.0 - 169.0 / 16.0 * g - 44507.0 / 512.0 * g * g - 86071851.0 / 40960.0 * g.powi(3);
    assert!(
        (ratios[2] * factor - 1.0).abs() < 1e-3,
        "{}",
        ratios[2] * factor
    );
}

#[test]
#[ignore = "leading-order width is 1.42 times the converged value at g = 0.02"]
fn leading_width_against_diagonalization_at_g_0_02() {
    let ratio = width_ratio(0.02);
    assert!((0.75..=1.25).contains(&ratio), "{ratio}");
}

#[test]
fn a_function_values() {
    assert_eq!(a_function_leading_exact(&q(2, 15)).unwrap(), q(1, 1));
    assert!((a_function_leading(0.01).unwrap() - 13.333333333333334).abs() < 1e-14);
    assert!((a_function_leading(1.0).unwrap() - 0.13333333333333333).abs() < 1e-16);
    assert!(a_function_leading(0.0).is_err());
}
