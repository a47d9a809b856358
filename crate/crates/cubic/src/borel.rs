//! Borel-Pade resummation along rays in the complex Borel plane.
//!
//! The Borel transform sum_k c_k t^k / k! is replaced by its diagonal [M/M] Pade
//! approximant, computed exactly in rational arithmetic, and the Laplace integral
//! int_0^inf e^{-s} B(g s) ds is taken along the ray arg s = phi. The ray phi > 0
//! (the C_{+1} contour) passes above the positive-axis singularities of
//! non-alternating series and yields Im <= 0 for resonances.

use crate::eigen::poly_roots;
use crate::error::{Error, Result};
use crate::poly::{q_from_f64, q_to_f64, Q};
use crate::quad;
use crate::series::{b_series, rspt_from_series, BivariateSeries};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Contour {
    RealAxis,
    CPlusOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResummationConfig {
    /// Highest diagonal Pade order M (uses 2M+1 coefficients).
    pub max_order: usize,
    /// Lowest order considered.
    pub min_order: usize,
    pub contour: Contour,
    /// Ray angle of the C_{+1} contour.
    pub ray_angle: f64,
    /// Integration stops where Re s reaches this value.
    pub cutoff: f64,
    /// Absolute quadrature tolerance.
    pub quad_tol: f64,
    /// Number of top finite orders entering value and spread.
    pub window: usize,
    /// Borel-plane length scale used to condition the f64 evaluation of the
    /// approximant; estimated from the coefficients when None.
    pub borel_scale: Option<f64>,
    /// Generalized Borel transform parameter b: c_k b!/(k+b)! with weight s^b/b!.
    pub generalization: u32,
    /// Poles of the approximant within this angle of the contour disqualify an order.
    pub pole_margin: f64,
}

impl Default for ResummationConfig {
    fn default() -> Self {
        ResummationConfig {
            max_order: 20,
            min_order: 2,
            contour: Contour::CPlusOne,
            ray_angle: FRAC_PI_4,
            cutoff: 45.0,
            quad_tol: 1e-13,
            window: 5,
            borel_scale: None,
            generalization: 0,
            pole_margin: 0.01,
        }
    }
}

impl ResummationConfig {
    pub fn real_axis() -> Self {
        ResummationConfig {
            contour: Contour::RealAxis,
            ..Default::default()
        }
    }

    fn angle(&self) -> f64 {
        match self.contour {
            Contour::RealAxis => 0.0,
            Contour::CPlusOne => self.ray_angle,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.window == 0 || self.max_order == 0 || self.min_order > self.max_order {
            return Err(Error::InvalidInput("inconsistent order window".into()));
        }
        if self.contour == Contour::CPlusOne
            && !(self.ray_angle > 0.0 && self.ray_angle < std::f64::consts::FRAC_PI_2)
        {
            return Err(Error::InvalidInput(
                "ray angle must lie in (0, pi/2)".into(),
            ));
        }
        if !(self.cutoff > 0.0) || !(self.quad_tol > 0.0) {
            return Err(Error::InvalidInput(
                "cutoff and quad_tol must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResummedValue {
    pub value: C,
    /// Max pairwise |v_i - v_j| over the window.
    pub uncertainty: f64,
    pub uncertainty_re: f64,
    pub uncertainty_im: f64,
    /// Highest Pade order entering the window.
    pub orders_used: usize,
    /// (M, value) for every order in the window, highest first.
    pub order_values: Vec<(usize, C)>,
}

impl ResummedValue {
    fn exact(value: C) -> Self {
        ResummedValue {
            value,
            uncertainty: 0.0,
            uncertainty_re: 0.0,
            uncertainty_im: 0.0,
            orders_used: 0,
            order_values: Vec::new(),
        }
    }

    fn from_window(vals: Vec<(usize, C)>) -> Self {
        let n = vals.len() as f64;
        let value = vals.iter().map(|v| v.1).sum::<C>() / n;
        let (mut u, mut ur, mut ui) = (0.0f64, 0.0f64, 0.0f64);
        for i in 0..vals.len() {
            for j in i + 1..vals.len() {
                let d = vals[i].1 - vals[j].1;
                u = u.max(d.norm());
                ur = ur.max(d.re.abs());
                ui = ui.max(d.im.abs());
            }
        }
        ResummedValue {
            value,
            uncertainty: u,
            uncertainty_re: ur,
            uncertainty_im: ui,
            orders_used: vals.first().map_or(0, |v| v.0),
            order_values: vals,
        }
    }
}

/// Diagonal [m/m] Pade approximant of sum a_k x^k, exactly, with q_0 = 1. Inside a
/// degenerate Pade block the approximant is taken from the block's leading entry
/// after checking that it matches the series through x^{2m}. None when no
/// approximant with q_0 = 1 exists.
pub fn pade_exact(a: &[Q], m: usize) -> Option<(Vec<Q>, Vec<Q>)> {
    if a.len() < 2 * m + 1 {
        return None;
    }
    let lcm = a[..2 * m + 1]
        .iter()
        .fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let ai: Vec<BigInt> = a[..2 * m + 1]
        .iter()
        .map(|x| (x * Q::from_integer(lcm.clone())).to_integer())
        .collect();
    let (p, qc) = pade_int(&ai, m)?;
    let d = Q::new(qc[0].clone(), BigInt::one());
    let norm = |v: Vec<BigInt>, extra: &BigInt| -> Vec<Q> {
        v.into_iter()
            .map(|x| Q::new(x, extra.clone()) / &d)
            .collect()
    };
    Some((norm(p, &lcm), norm(qc, &BigInt::one())))
}

/// Integer [m/m] Pade approximant: p and q with q_0 != 0 and p/q the approximant.
fn pade_int(a: &[BigInt], m: usize) -> Option<(Vec<BigInt>, Vec<BigInt>)> {
    if a.len() < 2 * m + 1 {
        return None;
    }
    for mm in (0..=m).rev() {
        if let Some(qc) = pade_denominator(a, mm) {
            let ok = (mm + 1..=2 * m).all(|k| {
                (0..=k.min(mm))
                    .map(|j| &qc[j] * &a[k - j])
                    .sum::<BigInt>()
                    .is_zero()
            });
            if !ok {
                return None;
            }
            let mut p: Vec<BigInt> = (0..=mm)
                .map(|k| (0..=k).map(|j| &qc[j] * &a[k - j]).sum::<BigInt>())
                .collect();
            let mut qc = qc;
            p.resize(m + 1, BigInt::zero());
            qc.resize(m + 1, BigInt::zero());
            return Some((p, qc));
        }
    }
    None
}

/// Denominator of the [m/m] approximant scaled to integers, by fraction-free
/// elimination of the Toeplitz system. None when the system is singular.
fn pade_denominator(a: &[BigInt], m: usize) -> Option<Vec<BigInt>> {
    if m == 0 {
        return Some(vec![BigInt::one()]);
    }
    let n = m;
    // rows k = m+1..2m, columns j = 1..m, plus right-hand side
    let mut mat: Vec<Vec<BigInt>> = (m + 1..=2 * m)
        .map(|k| {
            let mut row: Vec<BigInt> = (1..=m).map(|j| a[k - j].clone()).collect();
            row.push(-a[k].clone());
            row
        })
        .collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        let piv = (k..n).find(|&r| !mat[r][k].is_zero())?;
        mat.swap(k, piv);
        for i in k + 1..n {
            for j in k + 1..=n {
                mat[i][j] = (&mat[i][j] * &mat[k][k] - &mat[i][k] * &mat[k][j]) / &prev;
            }
            mat[i][k] = BigInt::zero();
        }
        prev = mat[k][k].clone();
    }
    let det = prev;
    // y_i = det x_i is integral by Cramer's rule
    let mut y = vec![BigInt::zero(); n];
    for i in (0..n).rev() {
        let mut s = &det * &mat[i][n];
        for j in i + 1..n {
            s -= &mat[i][j] * &y[j];
        }
        y[i] = s / &mat[i][i];
    }
    let mut qc = Vec::with_capacity(n + 1);
    qc.push(det);
    qc.extend(y);
    Some(qc)
}

/// n / d as f64 without overflow of either operand.
fn ratio_f64(n: &BigInt, d: &BigInt) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    let shift = 64 + d.bits() as i64 - n.bits() as i64;
    let r = if shift >= 0 {
        (n << shift as u64) / d
    } else {
        n / (d << (-shift) as u64)
    };
    r.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-shift as i32)
}

fn factorial_q(n: usize) -> Q {
    Q::from_integer((1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k)))
}

fn estimate_scale(a: &[Q]) -> f64 {
    let nz: Vec<(usize, f64)> = a
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(k, x)| (k, q_to_f64(&x.abs()).ln()))
        .collect();
    if nz.len() < 2 {
        return 1.0;
    }
    let (k1, l1) = nz[nz.len() - 2];
    let (k2, l2) = nz[nz.len() - 1];
    let s = (-(l2 - l1) / (k2 - k1) as f64).exp();
    if s.is_finite() {
        s.clamp(1e-3, 1e3)
    } else {
        1.0
    }
}

fn horner(c: &[f64], w: C) -> C {
    c.iter().rev().fold(C::new(0.0, 0.0), |acc, &x| acc * w + x)
}

struct Approximant {
    p: Vec<f64>,
    q: Vec<f64>,
}

/// Laplace integral of one approximant along the configured contour, or None when
/// a pole sits on the path or the result is not finite.
fn laplace(ap: &Approximant, g: C, scale: f64, cfg: &ResummationConfig) -> Option<C> {
    let phi = cfg.angle();
    let u = C::from_polar(1.0, phi);
    let r_max = cfg.cutoff / phi.cos();
    let qc: Vec<C> = ap.q.iter().map(|&x| C::new(x, 0.0)).collect();
    if let Ok(roots) = poly_roots(&qc) {
        for w in roots {
            let s = w * scale / g;
            let z = s / u;
            if z.re > 0.0 && z.re < r_max && z.im.abs() < cfg.pole_margin * z.norm() {
                return None;
            }
        }
    }
    let b = cfg.generalization as i32;
    let bfact: f64 = (1..=cfg.generalization).map(|k| k as f64).product();
    let f = |r: f64| -> C {
        let s = u * r;
        let w = g * s / scale;
        let mut v = (-s).exp() * horner(&ap.p, w) / horner(&ap.q, w) * u;
        if b > 0 {
            v *= s.powi(b) / bfact;
        }
        v
    };
    let mut breaks = vec![0.0];
    let mut x = 0.5;
    while x < r_max {
        breaks.push(x);
        x *= 2.0;
    }
    breaks.push(r_max);
    let v = quad::integrate(&f, &breaks, cfg.quad_tol);
    v.norm().is_finite().then_some(v)
}

/// Fractional bits kept when the scaled Borel coefficients are rounded to integers.
pub const FIXED_POINT_BITS: u64 = 256;

/// a_k scale^k rounded to integers on a common grid 2^{-FIXED_POINT_BITS} max|a_k scale^k|.
/// Integer inputs with unit scale are kept exactly. Returns the integers and the
/// grid exponent e, so that a_k scale^k ~ n_k 2^e.
fn fixed_point(a: &[Q], scale: f64) -> (Vec<BigInt>, i32) {
    let s = q_from_f64(scale);
    let mut pow = Q::one();
    let scaled: Vec<Q> = a
        .iter()
        .map(|x| {
            let v = x * &pow;
            pow *= &s;
            v
        })
        .collect();
    if scaled.iter().all(|x| x.is_integer()) {
        return (scaled.into_iter().map(|x| x.to_integer()).collect(), 0);
    }
    let big = scaled.iter().map(|x| x.abs()).max().unwrap_or_else(Q::zero);
    let exp = (q_to_f64(&big).log2().ceil() as i64).clamp(-4000, 4000);
    let shift = FIXED_POINT_BITS as i64 - exp;
    let unit = if shift >= 0 {
        Q::from_integer(BigInt::one() << shift as u64)
    } else {
        Q::new(BigInt::one(), BigInt::one() << (-shift) as u64)
    };
    let ints = scaled
        .iter()
        .map(|x| (x * &unit).round().to_integer())
        .collect();
    (ints, -shift as i32)
}

fn order_value(
    a: &[BigInt],
    exp: i32,
    m: usize,
    g: C,
    scale: f64,
    cfg: &ResummationConfig,
) -> Option<C> {
    let (p, qq) = pade_int(a, m)?;
    let sp: Vec<f64> = p
        .iter()
        .map(|x| ratio_f64(x, &qq[0]) * 2f64.powi(exp))
        .collect();
    let sq: Vec<f64> = qq.iter().map(|x| ratio_f64(x, &qq[0])).collect();
    if sp.iter().chain(&sq).any(|x| !x.is_finite()) {
        return None;
    }
    laplace(&Approximant { p: sp, q: sq }, g, scale, cfg)
}

fn alternation_check(c: &[Q], g: C, cfg: &ResummationConfig) -> Result<()> {
    if cfg.contour != Contour::RealAxis || g.im != 0.0 || g.re <= 0.0 {
        return Ok(());
    }
    let tail: Vec<&Q> = c[c.len() / 2..].iter().filter(|x| !x.is_zero()).collect();
    let same_sign = tail.len() > 1
        && tail
            .windows(2)
            .all(|w| w[0].is_positive() == w[1].is_positive());
    if same_sign {
        return Err(Error::InvalidInput(
            "non-alternating series at positive coupling has Borel-axis poles; use the C+1 contour"
                .into(),
        ));
    }
    Ok(())
}

/// Borel-Pade sum of sum_k c_k g^k from exact coefficients.
pub fn borel_pade_exact(c: &[Q], g: C, cfg: &ResummationConfig) -> Result<ResummedValue> {
    cfg.validate()?;
    if c.len() < 4 {
        return Err(Error::InvalidInput(
            "at least 4 coefficients required".into(),
        ));
    }
    if g == C::new(0.0, 0.0) {
        return Err(Error::InvalidInput("g must be nonzero".into()));
    }
    if c.iter().all(|x| x.is_zero()) {
        return Ok(ResummedValue::exact(C::new(0.0, 0.0)));
    }
    alternation_check(c, g, cfg)?;
    let b = cfg.generalization as usize;
    let bf = factorial_q(b);
    let a: Vec<Q> = c
        .iter()
        .enumerate()
        .map(|(k, x)| x * &bf / factorial_q(k + b))
        .collect();
    let scale = cfg.borel_scale.unwrap_or_else(|| estimate_scale(&a));
    let (a, exp) = fixed_point(&a, scale);
    let top = cfg.max_order.min((c.len() - 1) / 2);
    if top < cfg.min_order {
        return Err(Error::DefectivePade {
            finite: 0,
            window: cfg.window,
        });
    }
    let orders: Vec<usize> = (cfg.min_order..=top).rev().collect();
    let mut window = Vec::with_capacity(cfg.window);
    // evaluate in chunks from the top so that unneeded low orders are skipped
    for chunk in orders.chunks(cfg.window.max(4)) {
        let vals: Vec<(usize, Option<C>)> = chunk
            .par_iter()
            .map(|&m| (m, order_value(&a, exp, m, g, scale, cfg)))
            .collect();
        for (m, v) in vals {
            if let Some(v) = v {
                if window.len() < cfg.window {
                    window.push((m, v));
                }
            }
        }
        if window.len() == cfg.window {
            break;
        }
    }
    if window.len() < cfg.window {
        return Err(Error::DefectivePade {
            finite: window.len(),
            window: cfg.window,
        });
    }
    Ok(ResummedValue::from_window(window))
}

/// Borel-Pade sum from floating-point coefficients (taken as exact binary rationals).
pub fn borel_pade(coeffs: &[f64], g: C, cfg: &ResummationConfig) -> Result<ResummedValue> {
    if coeffs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("coefficients must be finite".into()));
    }
    let c: Vec<Q> = coeffs.iter().map(|&x| q_from_f64(x)).collect();
    borel_pade_exact(&c, g, cfg)
}

/// Borel length scale of the cubic series: the instanton action 2/15.
pub const CUBIC_BOREL_SCALE: f64 = 2.0 / 15.0;

fn with_cubic_scale(cfg: &ResummationConfig) -> ResummationConfig {
    ResummationConfig {
        borel_scale: Some(cfg.borel_scale.unwrap_or(CUBIC_BOREL_SCALE)),
        ..*cfg
    }
}

/// Number of g-orders of B or of the RSPT series needed by `cfg`.
pub fn series_orders_needed(cfg: &ResummationConfig) -> usize {
    2 * cfg.max_order
}

/// Resummed B(E, g) at fixed real E.
pub fn b_resummed(
    series: &BivariateSeries,
    e: f64,
    g: C,
    cfg: &ResummationConfig,
) -> Result<ResummedValue> {
    if !e.is_finite() {
        return Err(Error::InvalidInput("E must be finite".into()));
    }
    if g == C::new(0.0, 0.0) {
        return Ok(ResummedValue::exact(C::new(e, 0.0)));
    }
    let need = series_orders_needed(cfg);
    if series.k_max() < need {
        return Err(Error::InvalidInput(format!(
            "B series has {} orders, need {need}",
            series.k_max()
        )));
    }
    let c = series.coefficients_at(&q_from_f64(e));
    borel_pade_exact(&c[..=need], g, &with_cubic_scale(cfg))
}

/// Real root E of B(E, -beta^2) = n + 1/2 in the PT-symmetric case.
pub fn pt_energy(n: usize, beta: f64, cfg: &ResummationConfig) -> Result<ResummedValue> {
    let series = b_series(series_orders_needed(cfg).max(1))?;
    pt_energy_with(&series, n, beta, cfg)
}

pub fn pt_energy_with(
    series: &BivariateSeries,
    n: usize,
    beta: f64,
    cfg: &ResummationConfig,
) -> Result<ResummedValue> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidInput(
            "beta must be a nonnegative real".into(),
        ));
    }
    let nu = n as f64 + 0.5;
    if beta == 0.0 {
        return Ok(ResummedValue::exact(C::new(nu, 0.0)));
    }
    let g = C::new(-beta * beta, 0.0);
    let eval = |e: f64| -> Result<ResummedValue> { b_resummed(series, e, g, cfg) };
    let f = |e: f64| -> Result<f64> { Ok(eval(e)?.value.re - nu) };

    // bracket
    let mut lo = nu;
    let mut flo = f(lo)?;
    let b1 = series.orders[1].eval_f64(nu);
    let mut step = (2.0 * beta * beta * b1).abs().max(1e-3);
    let dir = if flo < 0.0 { 1.0 } else { -1.0 };
    let mut hi = lo + dir * step;
    let mut fhi = f(hi)?;
    let mut tries = 0;
    while flo.signum() == fhi.signum() {
        lo = hi;
        flo = fhi;
        step *= 2.0;
        hi = lo + dir * step;
        fhi = f(hi)?;
        tries += 1;
        if tries > 40 || hi <= 0.0 {
            return Err(Error::Bracketing(format!(
                "no sign change of B - {nu} near E = {nu}"
            )));
        }
    }
    // Illinois iteration on the bracket
    let (mut a, mut fa, mut b, mut fb) = if lo < hi {
        (lo, flo, hi, fhi)
    } else {
        (hi, fhi, lo, flo)
    };
    let mut side = 0i8;
    let mut e = 0.5 * (a + b);
    for _ in 0..100 {
        e = (a * fb - b * fa) / (fb - fa);
        if !(e > a && e < b) {
            e = 0.5 * (a + b);
        }
        let fe = f(e)?;
        if fe == 0.0 || b - a < 1e-14 * e.abs().max(1.0) {
            break;
        }
        if fe.signum() == fa.signum() {
            a = e;
            fa = fe;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = e;
            fb = fe;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    let h = 1e-6 * e.abs().max(1.0);
    let slope = (f(e + h)? - f(e - h)?) / (2.0 * h);
    let at_root = eval(e)?;
    let slope = slope.abs().max(f64::MIN_POSITIVE);
    let to_e = |x: f64| x / slope;
    let order_values = at_root
        .order_values
        .iter()
        .map(|&(m, v)| (m, C::new(e + (v.re - at_root.value.re) / slope, 0.0)))
        .collect();
    Ok(ResummedValue {
        value: C::new(e, 0.0),
        uncertainty: to_e(at_root.uncertainty_re),
        uncertainty_re: to_e(at_root.uncertainty_re),
        uncertainty_im: 0.0,
        orders_used: at_root.orders_used,
        order_values,
    })
}

/// Resummed Rayleigh-Schroedinger energy of level n at real g > 0 (Method II).
pub fn resummed_energy(n: usize, g: f64, cfg: &ResummationConfig) -> Result<ResummedValue> {
    let series = b_series(series_orders_needed(cfg).max(1))?;
    resummed_energy_with(&series, n, g, cfg)
}

pub fn resummed_energy_with(
    series: &BivariateSeries,
    n: usize,
    g: f64,
    cfg: &ResummationConfig,
) -> Result<ResummedValue> {
    if !(g >= 0.0) || !g.is_finite() {
        return Err(Error::InvalidInput("g must be a nonnegative real".into()));
    }
    if cfg.contour != Contour::CPlusOne {
        return Err(Error::InvalidInput(
            "resonance energies require the C+1 contour".into(),
        ));
    }
    if g == 0.0 {
        return Ok(ResummedValue::exact(C::new(n as f64 + 0.5, 0.0)));
    }
    let table = rspt_from_series(series, n, series_orders_needed(cfg))?;
    borel_pade_exact(&table.coefficients, C::new(g, 0.0), &with_cubic_scale(cfg))
}

/// Partial sum sum_{k<=K} c_k g^k, the reference for convergent inputs.
pub fn direct_sum(coeffs: &[f64], g: C) -> C {
    coeffs
        .iter()
        .rev()
        .fold(C::new(0.0, 0.0), |acc, &c| acc * g + c)
}
