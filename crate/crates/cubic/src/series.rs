//! Exact perturbative data: the B(E, g) series, Rayleigh-Schroedinger coefficients by
//! reversion of B(E, g) = N + 1/2, and leading instanton quantities.
//!
//! B is generated from hypervirial moment relations at formal energy E: with
//! lambda = sqrt(g) and X_j = <q^j>, each order in lambda of
//!
//! ```text
//! (j+1) X_{j+1} = 2 j E X_{j-1} - (2j+3) lambda X_{j+2} + j(j-1)(j-2)/4 X_{j-3}
//! ```
//!
//! is a polynomial in E. B is constant along dE/dlambda = <q^3>, which fixes its
//! lambda-expansion order by order. Odd lambda orders cancel identically.

use crate::error::{Error, Result};
use crate::poly::{q, q_to_f64, RationalPoly, Q};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt::Write as _;

/// Orders of B(E, g) in g; entry k is a polynomial in E.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSeries {
    pub orders: Vec<RationalPoly>,
}

impl BivariateSeries {
    pub fn k_max(&self) -> usize {
        self.orders.len() - 1
    }

    /// Coefficients of g^k at fixed E, exactly.
    pub fn coefficients_at(&self, e: &Q) -> Vec<Q> {
        self.orders.iter().map(|p| p.eval(e)).collect()
    }

    pub fn coefficients_at_f64(&self, e: f64) -> Vec<f64> {
        self.orders.iter().map(|p| p.eval_f64(e)).collect()
    }

    /// Text export, one line per nonzero coefficient: `k degree numerator denominator`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, p) in self.orders.iter().enumerate() {
            for (d, c) in p.coeffs().iter().enumerate() {
                if !c.is_zero() {
                    let _ = writeln!(s, "{k} {d} {} {}", c.numer(), c.denom());
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut orders: Vec<Vec<Q>> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::InvalidInput(format!("malformed series line {}", ln + 1));
            if f.len() != 4 {
                return Err(bad());
            }
            let k: usize = f[0].parse().map_err(|_| bad())?;
            let d: usize = f[1].parse().map_err(|_| bad())?;
            let n: BigInt = f[2].parse().map_err(|_| bad())?;
            let den: BigInt = f[3].parse().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            if orders.len() <= k {
                orders.resize(k + 1, Vec::new());
            }
            if orders[k].len() <= d {
                orders[k].resize(d + 1, Q::zero());
            }
            orders[k][d] = Q::new(n, den);
        }
        Ok(BivariateSeries {
            orders: orders.into_iter().map(RationalPoly::new).collect(),
        })
    }
}

/// lambda-expansion of <q^3> as polynomials in E, orders 0..m_max-1.
fn q3_moments(m_max: usize) -> Vec<RationalPoly> {
    let e = RationalPoly::x();
    // prev[j] = X_j at order k-1
    let mut prev: Vec<RationalPoly> = Vec::new();
    let mut out = Vec::with_capacity(m_max);
    for k in 0..m_max {
        let j_top = 3 + (m_max - 1 - k);
        let mut cur = vec![RationalPoly::zero(); j_top + 1];
        if k == 0 {
            cur[0] = RationalPoly::constant(Q::one());
        }
        for j in 0..j_top {
            let mut rhs = RationalPoly::zero();
            if j >= 1 {
                rhs = &rhs + &(&e * &cur[j - 1]).scale(&q(2 * j as i64, 1));
            }
            if k >= 1 {
                let p = prev.get(j + 2).cloned().unwrap_or_default();
                rhs = &rhs - &p.scale(&q(2 * j as i64 + 3, 1));
            }
            if j >= 3 {
                let c = (j * (j - 1) * (j - 2)) as i64;
                rhs = &rhs + &cur[j - 3].scale(&q(c, 4));
            }
            cur[j + 1] = rhs.scale(&q(1, j as i64 + 1));
        }
        out.push(cur[3].clone());
        prev = cur;
    }
    out
}

/// Exact B(E, g) through order g^{k_max}.
pub fn b_series(k_max: usize) -> Result<BivariateSeries> {
    if k_max < 1 {
        return Err(Error::InvalidInput("k_max must be >= 1".into()));
    }
    let m_max = 2 * k_max;
    let x3 = q3_moments(m_max);
    let mut beta: Vec<RationalPoly> = vec![RationalPoly::x()];
    let mut dbeta: Vec<RationalPoly> = vec![beta[0].derivative()];
    for m in 1..=m_max {
        let mut acc = RationalPoly::zero();
        for i in 0..m {
            acc = &acc + &(&dbeta[i] * &x3[m - 1 - i]);
        }
        let b = acc.scale(&q(-1, m as i64));
        if m % 2 == 1 && !b.is_zero() {
            return Err(Error::InvalidInput(format!(
                "odd order {m} of the B expansion does not cancel"
            )));
        }
        dbeta.push(b.derivative());
        beta.push(b);
    }
    Ok(BivariateSeries {
        orders: beta.into_iter().step_by(2).collect(),
    })
}

/// Exact Rayleigh-Schroedinger coefficients of level N.
#[derive(Debug, Clone, PartialEq)]
pub struct RsptTable {
    pub level: usize,
    pub coefficients: Vec<Q>,
}

impl RsptTable {
    pub fn to_f64(&self) -> Vec<f64> {
        self.coefficients.iter().map(q_to_f64).collect()
    }
}

/// Reversion of B(E, g) = N + 1/2 for E(g) = sum_K E_{N,K} g^K.
pub fn rspt_coefficients(n: usize, k_max: usize) -> Result<RsptTable> {
    let b = b_series(k_max.max(1))?;
    rspt_from_series(&b, n, k_max)
}

pub fn rspt_from_series(b: &BivariateSeries, n: usize, k_max: usize) -> Result<RsptTable> {
    if b.k_max() < k_max {
        return Err(Error::InvalidInput(format!(
            "series has {} orders, need {k_max}",
            b.k_max()
        )));
    }
    let nu = Q::from_integer(BigInt::from(n)) + q(1, 2);
    // t[j][m] = b_j^{(m)}(nu) / m!
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(k_max + 1);
    for j in 0..=k_max {
        let mut row = Vec::with_capacity(k_max + 1);
        let mut p = b.orders[j].clone();
        let mut fact = Q::one();
        for m in 0..=k_max {
            if m > 0 {
                fact *= Q::from_integer(BigInt::from(m));
                p = p.derivative();
            }
            row.push(p.eval(&nu) / &fact);
        }
        t.push(row);
    }
    // d[m][r] = [g^r] delta^m, delta = sum_{r>=1} e_r g^r
    let mut e = vec![Q::zero(); k_max + 1];
    let mut d = vec![vec![Q::zero(); k_max + 1]; k_max + 1];
    d[0][0] = Q::one();
    for k in 1..=k_max {
        let mut s = Q::zero();
        for j in 1..=k {
            for m in 0..=(k - j) {
                s += &t[j][m] * &d[m][k - j];
            }
        }
        e[k] = -s;
        d[1][k] = e[k].clone();
        for m in 2..=k {
            let mut acc = Q::zero();
            for s_ in 1..=(k - m + 1) {
                acc += &e[s_] * &d[m - 1][k - s_];
            }
            d[m][k] = acc;
        }
    }
    e[0] = nu;
    Ok(RsptTable {
        level: n,
        coefficients: e,
    })
}

/// B(E(g), g) - (N + 1/2) for a truncated RSPT series substituted into the truncated
/// B series, as exact coefficients of g^0..g^{2 k_max}.
pub fn reversion_defect(b: &BivariateSeries, table: &RsptTable) -> Vec<Q> {
    let k_max = table.coefficients.len() - 1;
    let len = 2 * k_max + 1;
    let e_series = table.coefficients.clone();
    let mul = |a: &[Q], c: &[Q]| -> Vec<Q> {
        let mut out = vec![Q::zero(); len];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in c.iter().enumerate() {
                if i + j < len {
                    out[i + j] += x * y;
                }
            }
        }
        out
    };
    let mut total = vec![Q::zero(); len];
    for (j, p) in b.orders.iter().enumerate().take(k_max + 1) {
        // p(E(g)) by Horner in series arithmetic, times g^j
        let mut acc = vec![Q::zero(); len];
        for c in p.coeffs().iter().rev() {
            acc = mul(&acc, &e_series);
            acc[0] += c;
        }
        for i in 0..len - j {
            total[i + j] += &acc[i];
        }
    }
    total[0] -= Q::from_integer(BigInt::from(table.level)) + q(1, 2);
    total
}

/// Instanton data of the cubic potential in the rescaled variable chi = sqrt(g) q.
pub struct InstantonData;

impl InstantonData {
    /// S[chi_cl] = 2/15.
    pub fn action() -> Q {
        q(2, 15)
    }

    /// chi_cl(t) = 1 / (cosh t + 1).
    pub fn profile(t: f64) -> f64 {
        1.0 / (t.cosh() + 1.0)
    }

    /// U(chi) = chi^3 - chi^2/2.
    pub fn potential(chi: f64) -> f64 {
        chi * chi * chi - 0.5 * chi * chi
    }
}

/// Leading semiclassical estimate of Im E_0(g), with an underflow flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthEstimate {
    pub value: f64,
    pub underflow: bool,
}

/// Im E_0(g) ~ -(pi g)^{-1/2} exp(-2/(15 g)).
pub fn instanton_width(g: f64) -> Result<WidthEstimate> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::InvalidInput(format!("g = {g} must be positive")));
    }
    let value = -(std::f64::consts::PI * g).sqrt().recip() * (-2.0 / (15.0 * g)).exp();
    Ok(WidthEstimate {
        value: if value == 0.0 { -0.0 } else { value },
        underflow: value == 0.0,
    })
}

/// A(E, g) = 2/(15 g) + O(g), leading term.
pub fn a_function_leading(g: f64) -> Result<f64> {
    if !(g > 0.0) {
        return Err(Error::InvalidInput(format!("g = {g} must be positive")));
    }
    Ok(2.0 / (15.0 * g))
}

/// Exact leading A term for rational g.
pub fn a_function_leading_exact(g: &Q) -> Result<Q> {
    if !g.is_positive() {
        return Err(Error::InvalidInput("g must be positive".into()));
    }
    Ok(q(2, 15) / g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_orders() {
        let b = b_series(2).unwrap();
        assert_eq!(b.orders[0], RationalPoly::x());
        assert_eq!(
            b.orders[1],
            RationalPoly::new(vec![q(7, 16), q(0, 1), q(15, 4)])
        );
        assert_eq!(
            b.orders[2],
            RationalPoly::new(vec![q(0, 1), q(1365, 64), q(0, 1), q(1155, 16)])
        );
    }

    #[test]
    fn text_round_trip() {
        let b = b_series(5).unwrap();
        assert_eq!(BivariateSeries::from_text(&b.to_text()).unwrap(), b);
    }

    #[test]
    fn ground_state_rspt() {
        let t = rspt_coefficients(0, 3).unwrap();
        assert_eq!(
            t.coefficients,
            vec![q(1, 2), q(-11, 8), q(-465, 32), q(-39709, 128)]
        );
    }
}
