//! Strong-coupling expansion E_N(g) = g^{1/5} sum_K L_{N,K} g^{-2K/5}.
//!
//! Under q -> g^{-1/10} q the Hamiltonian becomes g^{1/5} (H_l + u q^2 / 2) with
//! H_l = -d^2/2 + q^3 and u = g^{-2/5}. L_{N,0} are the resonances of H_l; higher
//! coefficients are fitted to the scaled energies on a ladder of couplings.

use crate::error::{Error, Result};
use crate::spectral::{family_levels, Family, ResonanceOptions, DEFAULT_N_MAX, DEFAULT_THETA};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrongFitOptions {
    /// Polynomial degree in u = g^{-2/5} used in the fit; at least k_max.
    pub degree: usize,
    pub theta: f64,
    pub n_max: usize,
    /// Design matrices with a larger condition number are rejected.
    pub max_condition: f64,
}

impl Default for StrongFitOptions {
    fn default() -> Self {
        StrongFitOptions {
            degree: 6,
            theta: DEFAULT_THETA,
            n_max: DEFAULT_N_MAX,
            max_condition: 1e12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongCouplingRow {
    pub level: usize,
    /// L_{N,K} for K = 0..=k_max.
    pub coefficients: Vec<C>,
    /// Root mean square of the fit residual over the ladder.
    pub residual: f64,
    /// Condition number of the column-scaled design matrix.
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StrongCouplingTable {
    pub rows: Vec<StrongCouplingRow>,
}

impl StrongCouplingTable {
    pub fn row(&self, level: usize) -> Option<&StrongCouplingRow> {
        self.rows.iter().find(|r| r.level == level)
    }
}

/// g = 10^{1 + j/4}, j = 0..=12.
pub fn default_ladder() -> Vec<f64> {
    (0..=12)
        .map(|j| 10f64.powf(1.0 + 0.25 * j as f64))
        .collect()
}

fn scaled_levels(quad: f64, theta: f64, n_max: usize, count: usize) -> Result<Vec<C>> {
    let fam = Family {
        g_root: C::new(1.0, 0.0),
        quad,
        theta,
        n_max,
    };
    let opts = ResonanceOptions {
        truncation_guard: false,
        ..Default::default()
    };
    Ok(family_levels(&fam, count, &opts)?
        .into_iter()
        .map(|l| l.energy)
        .collect())
}

/// The `count` lowest resonances of the rotated H_l = -d^2/2 + q^3, i.e. L_{N,0}.
pub fn leading_spectrum(theta: f64, n_max: usize, count: usize) -> Result<Vec<C>> {
    if !(theta > PI / 10.0 && theta < FRAC_PI_4) {
        return Err(Error::AngleOutOfDomain(theta));
    }
    if n_max < 1 {
        return Err(Error::InvalidInput("n_max must be >= 1".into()));
    }
    scaled_levels(0.0, theta, n_max, count)
}

/// E_N(g) g^{-1/5} from the scaled operator H_l + g^{-2/5} q^2 / 2.
pub fn scaled_energy(n: usize, g: f64, theta: f64, n_max: usize) -> Result<C> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::InvalidInput(format!("g = {g} must be positive")));
    }
    Ok(scaled_levels(0.5 * g.powf(-0.4), theta, n_max, n + 1)?[n])
}

/// Least-squares fit of E_N(g) g^{-1/5} against powers of g^{-2/5} over the ladder.
pub fn fit_coefficients(n: usize, ladder: &[f64], k_max: usize) -> Result<StrongCouplingRow> {
    fit_coefficients_with(n, ladder, k_max, &StrongFitOptions::default())
}

pub fn fit_coefficients_with(
    n: usize,
    ladder: &[f64],
    k_max: usize,
    opts: &StrongFitOptions,
) -> Result<StrongCouplingRow> {
    if ladder.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
        return Err(Error::InvalidInput(
            "ladder couplings must be positive".into(),
        ));
    }
    let degree = opts.degree.max(k_max);
    if ladder.len() < (2 * k_max).max(degree + 1) {
        return Err(Error::IllConditioned(f64::INFINITY));
    }
    let gmin = ladder.iter().copied().fold(f64::INFINITY, f64::min);
    let gmax = ladder.iter().copied().fold(0.0, f64::max);
    if gmax < 10.0 * gmin {
        return Err(Error::IllConditioned(f64::INFINITY));
    }
    let y: Vec<C> = ladder
        .par_iter()
        .map(|&g| scaled_energy(n, g, opts.theta, opts.n_max))
        .collect::<Result<_>>()?;
    let u: Vec<f64> = ladder.iter().map(|g| g.powf(-0.4)).collect();
    let umax = u.iter().copied().fold(0.0, f64::max);
    let rows = ladder.len();
    let a = DMatrix::from_fn(rows, degree + 1, |i, k| (u[i] / umax).powi(k as i32));
    let b = DMatrix::from_fn(rows, 2, |i, j| if j == 0 { y[i].re } else { y[i].im });
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !(condition <= opts.max_condition) {
        return Err(Error::IllConditioned(condition));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let fitted = &a * &x;
    let residual = ((0..rows)
        .map(|i| (fitted[(i, 0)] - b[(i, 0)]).powi(2) + (fitted[(i, 1)] - b[(i, 1)]).powi(2))
        .sum::<f64>()
        / rows as f64)
        .sqrt();
    let coefficients = (0..=k_max)
        .map(|k| C::new(x[(k, 0)], x[(k, 1)]) / umax.powi(k as i32))
        .collect();
    Ok(StrongCouplingRow {
        level: n,
        coefficients,
        residual,
        condition,
    })
}

/// Fits levels 0..count on the default ladder.
pub fn fit_table(count: usize, k_max: usize) -> Result<StrongCouplingTable> {
    let ladder = default_ladder();
    let rows = (0..count)
        .map(|n| fit_coefficients(n, &ladder, k_max))
        .collect::<Result<_>>()?;
    Ok(StrongCouplingTable { rows })
}

/// g^{1/5} sum_{K <= k_max} L_{N,K} g^{-2K/5}.
pub fn evaluate(n: usize, g: f64, table: &StrongCouplingTable, k_max: usize) -> Result<C> {
    let row = table
        .row(n)
        .ok_or_else(|| Error::InvalidInput(format!("level {n} not in table")))?;
    if row.coefficients.len() <= k_max {
        return Err(Error::InvalidInput(format!(
            "table fitted to K = {}, need {k_max}",
            row.coefficients.len() - 1
        )));
    }
    Ok(evaluate_coefficients(&row.coefficients[..=k_max], g))
}

pub fn evaluate_coefficients(l: &[C], g: f64) -> C {
    let u = g.powf(-0.4);
    g.powf(0.2) * l.iter().rev().fold(C::new(0.0, 0.0), |acc, c| acc * u + c)
}
