//! Harmonic-oscillator basis, ladder-operator matrix elements and the
//! complex-scaled cubic Hamiltonian.
//!
//! Rotation convention: `theta` is the angle by which the continuum branch is
//! rotated into the lower half plane. The coordinate itself is rotated by
//! half of it, q -> q e^{i theta/2}, so the scaled operator reads
//!
//! ```text
//! H(theta) = e^{-i theta} (-1/2 d^2) + 1/2 e^{i theta} q^2 + sqrt(g) e^{3 i theta/2} q^3
//! ```

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

/// Problem definition. `g_root` is sqrt(g); a purely imaginary value i*beta selects
/// the PT-symmetric case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorSpec {
    pub g_root: Complex64,
    pub theta: f64,
    pub n_max: usize,
}

impl OscillatorSpec {
    pub fn new(g_root: Complex64, theta: f64, n_max: usize) -> Result<Self> {
        let s = OscillatorSpec {
            g_root,
            theta,
            n_max,
        };
        s.validate()?;
        Ok(s)
    }

    /// Real coupling g > 0 given directly (g_root = sqrt(g)).
    pub fn real(g: f64, theta: f64, n_max: usize) -> Result<Self> {
        if !(g >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "coupling g = {g} must be >= 0"
            )));
        }
        Self::new(Complex64::new(g.sqrt(), 0.0), theta, n_max)
    }

    /// PT-symmetric case sqrt(g) = i*beta.
    pub fn pt(beta: f64, theta: f64, n_max: usize) -> Result<Self> {
        Self::new(Complex64::new(0.0, beta), theta, n_max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 1 {
            return Err(Error::InvalidInput("n_max must be >= 1".into()));
        }
        if !self.g_root.re.is_finite() || !self.g_root.im.is_finite() {
            return Err(Error::InvalidInput("g_root must be finite".into()));
        }
        if !(0.0..FRAC_PI_4).contains(&self.theta) {
            return Err(Error::AngleOutOfDomain(self.theta));
        }
        Ok(())
    }

    pub fn g(&self) -> Complex64 {
        self.g_root * self.g_root
    }

    pub fn is_pt(&self) -> bool {
        self.g_root.re == 0.0 && self.g_root.im != 0.0
    }

    pub fn with_theta(self, theta: f64) -> Self {
        OscillatorSpec { theta, ..self }
    }

    pub fn with_n_max(self, n_max: usize) -> Self {
        OscillatorSpec { n_max, ..self }
    }
}

/// <n|q^2|m> in the unit-frequency oscillator basis.
pub fn q2_element(n: usize, m: usize) -> f64 {
    let (lo, hi) = if n <= m { (n, m) } else { (m, n) };
    match hi - lo {
        0 => lo as f64 + 0.5,
        2 => (((lo + 1) * (lo + 2)) as f64).sqrt() / 2.0,
        _ => 0.0,
    }
}

/// <n|q^3|m> in the unit-frequency oscillator basis.
pub fn q3_element(n: usize, m: usize) -> f64 {
    let (lo, hi) = if n <= m { (n, m) } else { (m, n) };
    match hi - lo {
        1 => {
            let k = (lo + 1) as f64;
            3.0 * k * k.sqrt() / (2.0 * std::f64::consts::SQRT_2)
        }
        3 => (((lo + 1) * (lo + 2) * (lo + 3)) as f64).sqrt() / (2.0 * std::f64::consts::SQRT_2),
        _ => 0.0,
    }
}

/// <n| -1/2 d^2 |m>.
pub fn kinetic_element(n: usize, m: usize) -> f64 {
    if n == m {
        (n as f64 + 0.5) / 2.0
    } else {
        -0.5 * q2_element(n, m)
    }
}

/// Matrix of e^{-i theta} T + quad e^{i theta} q^2 + g_root e^{3 i theta/2} q^3 on
/// phi_0..phi_{n_max}. No domain check on theta beyond |theta| < pi/4, so negative
/// angles are available for symmetry checks and the leading strong-coupling operator
/// (quad = 0) shares the assembly.
pub fn assemble_general(g_root: Complex64, quad: f64, theta: f64, n_max: usize) -> ComplexMatrix {
    let dim = n_max + 1;
    let ek = Complex64::from_polar(1.0, -theta);
    let eq = Complex64::from_polar(quad, theta);
    let ec = g_root * Complex64::from_polar(1.0, 1.5 * theta);
    let mut h = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in i.saturating_sub(3)..(i + 4).min(dim) {
            let d = i.abs_diff(j);
            let v = match d {
                0 | 2 => ek * kinetic_element(i, j) + eq * q2_element(i, j),
                1 | 3 => ec * q3_element(i, j),
                _ => continue,
            };
            h[(i, j)] = v;
        }
    }
    h
}

/// The complex-scaled cubic Hamiltonian for a validated spec.
pub fn assemble_hamiltonian(spec: &OscillatorSpec) -> Result<ComplexMatrix> {
    spec.validate()?;
    Ok(assemble_general(spec.g_root, 0.5, spec.theta, spec.n_max))
}

const LOG_PI_QUARTER: f64 = -0.286_182_471_462_350_04; // ln(pi^{-1/4})
const RESCALE: f64 = 1e150;

/// All phi_0..phi_{j_max} at complex argument z, via the three-term recurrence on
/// the weighted functions with running log-rescaling.
pub fn basis_functions(j_max: usize, z: Complex64) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(j_max + 1);
    // value = cur * exp(log_scale)
    let mut log_scale = -z * z / 2.0 + LOG_PI_QUARTER;
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1.0, 0.0);
    let finish = |v: Complex64, ls: Complex64, j: usize| -> Result<Complex64> {
        if v == Complex64::new(0.0, 0.0) {
            return Ok(v);
        }
        let lr = ls.re + v.norm().ln();
        if lr > 709.0 || !lr.is_finite() {
            return Err(Error::Overflow {
                j,
                re: z.re,
                im: z.im,
            });
        }
        Ok(Complex64::from_polar(lr.exp(), v.arg() + ls.im))
    };
    out.push(finish(cur, log_scale, 0)?);
    for j in 0..j_max {
        let jf = j as f64;
        let next = z * cur * (2.0 / (jf + 1.0)).sqrt() - prev * (jf / (jf + 1.0)).sqrt();
        prev = cur;
        cur = next;
        let m = cur.norm().max(prev.norm());
        if m > RESCALE || (m < 1.0 / RESCALE && m > 0.0) {
            prev /= m;
            cur /= m;
            log_scale += m.ln();
        }
        out.push(finish(cur, log_scale, j + 1)?);
    }
    Ok(out)
}

/// phi_j(z) = H_j(z) e^{-z^2/2} / (pi^{1/4} sqrt(2^j j!)).
pub fn basis_function(j: usize, z: Complex64) -> Result<Complex64> {
    Ok(basis_functions(j, z)?[j])
}

/// pi^{-1/4}, the value of phi_0(0).
pub fn phi0_at_origin() -> f64 {
    PI.powf(-0.25)
}
