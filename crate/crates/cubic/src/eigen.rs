//! Dense eigensolver for general complex matrices: balancing, Householder
//! reduction to upper Hessenberg form, single-shift implicit QR for the
//! eigenvalues, and inverse iteration on the Hessenberg matrix for the vectors.

use crate::error::{Error, Result};
use crate::matrix::{norm2, ComplexMatrix};
use num_complex::Complex64;

const RADIX: f64 = 2.0;
const MAX_ITER_PER_EIGENVALUE: usize = 60;

type C = Complex64;

fn zero() -> C {
    C::new(0.0, 0.0)
}

fn abs1(z: C) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Scales rows and columns by powers of two so that row and column norms are
/// comparable. Returns the diagonal scaling d with balanced = D^{-1} A D.
fn balance(a: &mut ComplexMatrix) -> Vec<f64> {
    let n = a.dim();
    let mut d = vec![1.0; n];
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += abs1(a[(j, i)]);
                    r += abs1(a[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                d[i] *= f;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
        if done {
            return d;
        }
    }
}

/// Reduces `a` in place to upper Hessenberg form and returns the unitary Q with
/// A_in = Q H Q^H.
fn hessenberg(a: &mut ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    let mut q = ComplexMatrix::identity(n);
    if n < 3 {
        return q;
    }
    let mut v = vec![zero(); n];
    for k in 0..n - 2 {
        let xnorm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            C::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        for i in 0..n {
            v[i] = zero();
        }
        for i in k + 1..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vn = norm2(&v[k + 1..]);
        if vn == 0.0 {
            continue;
        }
        for x in &mut v[k + 1..] {
            *x /= vn;
        }
        // A <- (I - 2 v v^H) A
        for j in k..n {
            let s: C = (k + 1..n).map(|i| v[i].conj() * a[(i, j)]).sum();
            let s2 = s * 2.0;
            for i in k + 1..n {
                a[(i, j)] -= v[i] * s2;
            }
        }
        // A <- A (I - 2 v v^H), Q <- Q (I - 2 v v^H)
        for m in [&mut *a, &mut q] {
            for i in 0..n {
                let s: C = (k + 1..n).map(|j| m[(i, j)] * v[j]).sum();
                let s2 = s * 2.0;
                for j in k + 1..n {
                    m[(i, j)] -= s2 * v[j].conj();
                }
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = zero();
        }
    }
    q
}

/// Givens rotation (c real, s complex) with [c s; -conj(s) c] (x, y)^T = (r, 0)^T.
fn givens(x: C, y: C) -> (f64, C) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, zero());
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let nrm = ax.hypot(ay);
    (ax / nrm, (x / ax) * y.conj() / nrm)
}

/// Eigenvalues of an upper Hessenberg matrix by implicit single-shift QR.
fn hessenberg_qr(h0: &ComplexMatrix) -> Result<Vec<C>> {
    let n = h0.dim();
    let mut h = h0.clone();
    let mut eig = vec![zero(); n];
    if n == 0 {
        return Ok(eig);
    }
    let hnorm = h.norm();
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        let mut l = hi;
        while l > 0 {
            let mut s = abs1(h[(l - 1, l - 1)]) + abs1(h[(l, l)]);
            if s == 0.0 {
                s = hnorm;
            }
            if abs1(h[(l, l - 1)]) <= eps * s {
                h[(l, l - 1)] = zero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > MAX_ITER_PER_EIGENVALUE {
            return Err(Error::NoConvergence { index: hi });
        }
        let mu = if iter % 11 == 10 {
            // exceptional shift
            h[(hi, hi)] + C::new(0.75 * abs1(h[(hi, hi - 1)]), 0.5 * abs1(h[(hi, hi - 1)]))
        } else {
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let c = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m1 = (a + d) * 0.5 + disc;
            let m2 = (a + d) * 0.5 - disc;
            if (m1 - d).norm() <= (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        let mut x = h[(l, l)] - mu;
        let mut y = h[(l + 1, l)];
        for k in l..hi {
            if k > l {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let j0 = if k > l { k - 1 } else { l };
            for j in j0..=hi {
                let t1 = h[(k, j)];
                let t2 = h[(k + 1, j)];
                h[(k, j)] = t1 * c + s * t2;
                h[(k + 1, j)] = -s.conj() * t1 + t2 * c;
            }
            let i1 = (k + 2).min(hi);
            for i in l..=i1 {
                let t1 = h[(i, k)];
                let t2 = h[(i, k + 1)];
                h[(i, k)] = t1 * c + s.conj() * t2;
                h[(i, k + 1)] = -s * t1 + t2 * c;
            }
            if k > l {
                h[(k + 1, k - 1)] = zero();
            }
        }
    }
    Ok(eig)
}

/// Solves (H - lambda I) y = x for upper Hessenberg H by LU with partial pivoting.
/// Zero pivots are replaced by `tiny`.
fn hessenberg_shifted_solve(h: &ComplexMatrix, lambda: C, x: &[C], tiny: f64) -> Vec<C> {
    let n = h.dim();
    let mut u = vec![zero(); n * n];
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            u[i * n + j] = h[(i, j)];
        }
        u[i * n + i] -= lambda;
    }
    let mut b = x.to_vec();
    for k in 0..n.saturating_sub(1) {
        if u[(k + 1) * n + k].norm() > u[k * n + k].norm() {
            for j in k..n {
                u.swap(k * n + j, (k + 1) * n + j);
            }
            b.swap(k, k + 1);
        }
        if u[k * n + k].norm() == 0.0 {
            u[k * n + k] = C::new(tiny, 0.0);
        }
        let m = u[(k + 1) * n + k] / u[k * n + k];
        if m != zero() {
            for j in k + 1..n {
                let t = u[k * n + j];
                u[(k + 1) * n + j] -= m * t;
            }
            let bk = b[k];
            b[k + 1] -= m * bk;
        }
        u[(k + 1) * n + k] = zero();
    }
    if u[(n - 1) * n + n - 1].norm() == 0.0 {
        u[(n - 1) * n + n - 1] = C::new(tiny, 0.0);
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= u[i * n + j] * b[j];
        }
        b[i] = s / u[i * n + i];
    }
    b
}

fn inverse_iteration(h: &ComplexMatrix, lambda: C, hnorm: f64) -> Vec<C> {
    let n = h.dim();
    let tiny = f64::EPSILON * hnorm.max(f64::MIN_POSITIVE);
    let target_growth = 1.0 / (f64::EPSILON * (n as f64).sqrt() * 10.0);
    let mut best: Option<(f64, Vec<C>)> = None;
    for attempt in 0..3 {
        let mut x: Vec<C> = (0..n)
            .map(|i| match attempt {
                0 => C::new(1.0, 0.0),
                1 => C::new(((i * 7 + 3) % 11) as f64 - 5.0, 1.0),
                _ => C::new(1.0, ((i * 5 + 1) % 13) as f64 - 6.0),
            })
            .collect();
        let xn = norm2(&x);
        x.iter_mut().for_each(|z| *z /= xn);
        for _ in 0..3 {
            let y = hessenberg_shifted_solve(h, lambda, &x, tiny);
            let yn = norm2(&y);
            if !yn.is_finite() || yn == 0.0 {
                break;
            }
            x = y.into_iter().map(|z| z / yn).collect();
            let better = best.as_ref().map_or(true, |(g, _)| yn > *g);
            if better {
                best = Some((yn, x.clone()));
            }
            if yn >= target_growth {
                return x;
            }
        }
    }
    best.map(|(_, v)| v).unwrap_or_else(|| {
        let mut e = vec![zero(); n];
        e[0] = C::new(1.0, 0.0);
        e
    })
}

/// Eigenvalues only.
pub fn eigvals(m: &ComplexMatrix) -> Result<Vec<C>> {
    if m.dim() == 0 {
        return Ok(Vec::new());
    }
    let mut a = m.clone();
    balance(&mut a);
    hessenberg(&mut a);
    hessenberg_qr(&a)
}

/// ||m v - lambda v|| / (||m|| ||v||) with the Frobenius norm for m.
pub fn relative_residual(m: &ComplexMatrix, lambda: C, v: &[C]) -> f64 {
    let mv = m.matvec(v);
    let r: Vec<C> = mv.iter().zip(v).map(|(a, b)| a - lambda * b).collect();
    let mn = m.norm();
    if mn == 0.0 {
        return norm2(&r);
    }
    norm2(&r) / (mn * norm2(v))
}

/// Balanced Hessenberg form together with its eigenvalues; eigenvectors are
/// produced on demand by inverse iteration.
pub struct Decomposition {
    hess: ComplexMatrix,
    q: ComplexMatrix,
    scale: Vec<f64>,
    hnorm: f64,
    pub values: Vec<C>,
}

impl Decomposition {
    pub fn new(m: &ComplexMatrix) -> Result<Self> {
        let mut hess = m.clone();
        let scale = balance(&mut hess);
        let q = hessenberg(&mut hess);
        let values = hessenberg_qr(&hess)?;
        let hnorm = hess.norm();
        Ok(Decomposition {
            hess,
            q,
            scale,
            hnorm,
            values,
        })
    }

    /// Unit 2-norm eigenvector of the original matrix for eigenvalue `lambda`.
    pub fn vector(&self, lambda: C) -> Vec<C> {
        let y = inverse_iteration(&self.hess, lambda, self.hnorm);
        let mut v: Vec<C> = self
            .q
            .matvec(&y)
            .into_iter()
            .zip(&self.scale)
            .map(|(z, s)| z * *s)
            .collect();
        let vn = norm2(&v);
        v.iter_mut().for_each(|z| *z /= vn);
        v
    }
}

/// All eigenpairs of a general complex matrix. Vectors have unit 2-norm and satisfy
/// ||m v - lambda v|| <= tol ||m||.
pub fn eig_complex(m: &ComplexMatrix, tol: f64) -> Result<Vec<(C, Vec<C>)>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tol must be positive".into()));
    }
    if m.dim() == 0 {
        return Ok(Vec::new());
    }
    let dec = Decomposition::new(m)?;
    let mut out = Vec::with_capacity(m.dim());
    for (idx, &lambda) in dec.values.iter().enumerate() {
        let v = dec.vector(lambda);
        if relative_residual(m, lambda, &v) > tol {
            return Err(Error::NoConvergence { index: idx });
        }
        out.push((lambda, v));
    }
    Ok(out)
}

/// Roots of the polynomial sum_k c_k x^k via the companion matrix.
pub fn poly_roots(coeffs: &[C]) -> Result<Vec<C>> {
    let mut deg = coeffs.len();
    while deg > 0 && coeffs[deg - 1] == zero() {
        deg -= 1;
    }
    if deg <= 1 {
        return Ok(Vec::new());
    }
    let n = deg - 1;
    let lead = coeffs[n];
    let mut comp = ComplexMatrix::zeros(n);
    for i in 1..n {
        comp[(i, i - 1)] = C::new(1.0, 0.0);
    }
    for i in 0..n {
        comp[(i, n - 1)] = -coeffs[i] / lead;
    }
    eigvals(&comp)
}
