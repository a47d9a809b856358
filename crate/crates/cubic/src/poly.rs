//! Dense univariate polynomials with exact rational coefficients.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::ops::{Add, Mul, Sub};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_from_f64(x: f64) -> Q {
    Q::from_float(x).expect("finite value")
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Coefficients in ascending powers; trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RationalPoly(Vec<Q>);

impl RationalPoly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        RationalPoly(c)
    }

    pub fn zero() -> Self {
        RationalPoly(Vec::new())
    }

    pub fn constant(c: Q) -> Self {
        Self::new(vec![c])
    }

    /// The monomial x.
    pub fn x() -> Self {
        RationalPoly(vec![Q::zero(), Q::one()])
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.0
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.0.get(i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with the zero polynomial reported as None.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn scale(&self, s: &Q) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        RationalPoly(self.0.iter().map(|c| c * s).collect())
    }

    pub fn shift_up(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = Vec::with_capacity(self.0.len() + 1);
        c.push(Q::zero());
        c.extend(self.0.iter().cloned());
        RationalPoly(c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Q::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.0
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + q_to_f64(c))
    }
}

impl Add for &RationalPoly {
    type Output = RationalPoly;
    fn add(self, o: &RationalPoly) -> RationalPoly {
        let n = self.0.len().max(o.0.len());
        RationalPoly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &RationalPoly {
    type Output = RationalPoly;
    fn sub(self, o: &RationalPoly) -> RationalPoly {
        let n = self.0.len().max(o.0.len());
        RationalPoly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &RationalPoly {
    type Output = RationalPoly;
    fn mul(self, o: &RationalPoly) -> RationalPoly {
        if self.is_zero() || o.is_zero() {
            return RationalPoly::zero();
        }
        let mut c = vec![Q::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        RationalPoly::new(c)
    }
}
