use cubic::eigen::{eig_complex, eigvals, poly_roots, relative_residual};
use cubic::{Complex64, ComplexMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_symmetric(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z;
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn residual_contract_on_random_symmetric(dim in 1usize..=60, seed in any::<u64>()) {
        let m = random_symmetric(dim, seed);
        let pairs = eig_complex(&m, 1e-10).unwrap();
        prop_assert_eq!(pairs.len(), dim);
        let trace: Complex64 = (0..dim).map(|i| m[(i, i)]).sum();
        let sum: Complex64 = pairs.iter().map(|p| p.0).sum();
        prop_assert!((trace - sum).norm() <= 1e-10 * m.norm() * dim as f64);
        for (lambda, v) in &pairs {
            prop_assert!(relative_residual(&m, *lambda, v) <= 1e-10);
            let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!((n - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn diagonal_matrix_is_exact() {
    let d: Vec<Complex64> = (0..8)
        .map(|k| Complex64::new(k as f64 + 0.5, -(k as f64) * 0.1))
        .collect();
    let mut ev = eigvals(&ComplexMatrix::from_diag(&d)).unwrap();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re));
    for (a, b) in ev.iter().zip(&d) {
        assert!((a - b).norm() < 1e-14);
    }
}

#[test]
fn empty_and_invalid_inputs() {
    assert!(eigvals(&ComplexMatrix::zeros(0)).unwrap().is_empty());
    assert!(eig_complex(&ComplexMatrix::identity(3), 0.0).is_err());
}

#[test]
fn cubic_roots() {
    // (x - 1)(x + 2)(x - i) expanded
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let coeffs = [2.0 * i, -2.0 * one - i, one - i, one];
    let mut r = poly_roots(&coeffs).unwrap();
    r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let want = [Complex64::new(-2.0, 0.0), i, one];
    for (a, b) in r.iter().zip(&want) {
        assert!((a - b).norm() < 1e-12, "{a} vs {b}");
    }
}
