//! Gauss-Legendre quadrature with adaptive panel bisection.

use num_complex::Complex64;
use std::sync::OnceLock;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                z
            } else {
                p1
            };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn rule16() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(16))
}

fn panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Complex64 {
    let (x, w) = rule16();
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    x.iter()
        .zip(w)
        .map(|(xi, wi)| f(c + h * xi) * (wi * h))
        .sum()
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn refine<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, whole: Complex64) -> [Panel; 2] {
    let m = 0.5 * (a + b);
    let left = panel(f, a, m);
    let right = panel(f, m, b);
    let error = (left + right - whole).norm();
    [
        Panel {
            a,
            b: m,
            value: left,
            error: 0.5 * error,
        },
        Panel {
            a: m,
            b,
            value: right,
            error: 0.5 * error,
        },
    ]
}

/// Maximum number of panels kept by `integrate`.
pub const MAX_PANELS: usize = 4000;

/// Integral of f over [breaks[0], breaks[last]] by globally adaptive 16-point panels
/// started on the given breakpoints. Refinement stops when the summed error estimate
/// drops below `tol` or reaches the roundoff level, or after `MAX_PANELS` panels.
pub fn integrate<F: Fn(f64) -> Complex64>(f: &F, breaks: &[f64], tol: f64) -> Complex64 {
    let mut panels: Vec<Panel> = breaks
        .windows(2)
        .flat_map(|ab| {
            let whole = panel(f, ab[0], ab[1]);
            refine(f, ab[0], ab[1], whole)
        })
        .collect();
    loop {
        let total: Complex64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        let floor = 1e-15 * panels.iter().map(|p| p.value.norm()).sum::<f64>();
        if err <= tol || err <= floor || panels.len() >= MAX_PANELS || !total.norm().is_finite() {
            return total;
        }
        let (i, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("nonempty panel list");
        let p = panels.swap_remove(i);
        let [l, r] = refine(f, p.a, p.b, p.value);
        panels.push(l);
        panels.push(r);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((s - 2.0 / 31.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_exponential() {
        let v = integrate(
            &|x: f64| Complex64::new((-x).exp(), 0.0),
            &[0.0, 1.0, 5.0, 40.0],
            1e-14,
        );
        assert!((v.re - (1.0 - (-40.0f64).exp())).abs() < 1e-13);
    }
}
