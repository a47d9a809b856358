//! Crank-Nicolson propagation on a real box with Dirichlet walls, used as the
//! reference for the spectral dynamics.

use crate::dynamics::AnalyticPacket;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Box [-L, L].
    pub half_width: f64,
    pub spacing: f64,
    pub time_step: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            half_width: 300.0,
            spacing: 0.02,
            time_step: 0.002,
        }
    }
}

/// Fraction of the box at each end watched for boundary contamination.
pub const EDGE_FRACTION: f64 = 0.05;
/// Edge amplitude above which a contamination warning is raised.
pub const EDGE_THRESHOLD: f64 = 1e-6;

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0 && self.spacing > 0.0 && self.time_step > 0.0) {
            return Err(Error::InvalidInput(
                "half width, spacing and time step must be positive".into(),
            ));
        }
        let cells = 2.0 * self.half_width / self.spacing;
        if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) || cells.round() < 2.0 {
            return Err(Error::InvalidInput(
                "2 L / dq must be an integer of at least 2".into(),
            ));
        }
        Ok(())
    }

    fn cells(&self) -> usize {
        (2.0 * self.half_width / self.spacing).round() as usize
    }

    /// Interior points; the walls at +-L carry psi = 0.
    pub fn points(&self) -> Vec<f64> {
        (1..self.cells())
            .map(|i| -self.half_width + i as f64 * self.spacing)
            .collect()
    }
}

/// Precomputed Crank-Nicolson step for V(q) = q^2/2 + g_root q^3.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    cfg: GridConfig,
    q: Vec<f64>,
    /// Diagonal of H.
    diag: Vec<C>,
    /// Constant off-diagonal of H.
    off: f64,
    /// Thomas elimination factors of (I + i dt H / 2).
    upper: Vec<C>,
    pivot: Vec<C>,
}

impl CrankNicolson {
    pub fn new(cfg: GridConfig, g_root: C) -> Result<Self> {
        cfg.validate()?;
        let q = cfg.points();
        let h2 = cfg.spacing * cfg.spacing;
        let diag: Vec<C> = q
            .iter()
            .map(|&x| C::new(1.0 / h2 + 0.5 * x * x, 0.0) + g_root * x * x * x)
            .collect();
        let off = -0.5 / h2;
        let a = C::new(0.0, 0.5 * cfg.time_step);
        let n = q.len();
        let mut upper = vec![C::new(0.0, 0.0); n];
        let mut pivot = vec![C::new(0.0, 0.0); n];
        let lo = a * off;
        for i in 0..n {
            let d = C::new(1.0, 0.0) + a * diag[i];
            let p = if i == 0 { d } else { d - lo * upper[i - 1] };
            if p.norm() == 0.0 {
                return Err(Error::Singular(i));
            }
            pivot[i] = p;
            upper[i] = lo / p;
        }
        Ok(CrankNicolson {
            cfg,
            q,
            diag,
            off,
            upper,
            pivot,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.q
    }

    pub fn config(&self) -> &GridConfig {
        &self.cfg
    }

    /// (I + i H dt/2) psi' = (I - i H dt/2) psi.
    pub fn step(&self, psi: &mut [C]) {
        let n = psi.len();
        let a = C::new(0.0, 0.5 * self.cfg.time_step);
        let lo = a * self.off;
        let mut rhs = vec![C::new(0.0, 0.0); n];
        for i in 0..n {
            let mut hpsi = self.diag[i] * psi[i];
            if i > 0 {
                hpsi += self.off * psi[i - 1];
            }
            if i + 1 < n {
                hpsi += self.off * psi[i + 1];
            }
            rhs[i] = psi[i] - a * hpsi;
        }
        // forward sweep
        for i in 0..n {
            let prev = if i == 0 { C::new(0.0, 0.0) } else { rhs[i - 1] };
            rhs[i] = (rhs[i] - lo * prev) / self.pivot[i];
        }
        // back substitution
        psi[n - 1] = rhs[n - 1];
        for i in (0..n - 1).rev() {
            psi[i] = rhs[i] - self.upper[i] * psi[i + 1];
        }
    }

    /// Largest |psi| within EDGE_FRACTION of either wall.
    pub fn edge_amplitude(&self, psi: &[C]) -> f64 {
        let limit = (1.0 - EDGE_FRACTION) * self.cfg.half_width;
        self.q
            .iter()
            .zip(psi)
            .filter(|(x, _)| x.abs() >= limit)
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }
}

/// One Crank-Nicolson step on the interior samples of `cfg`.
pub fn cn_step(samples: &[C], cfg: &GridConfig, g_root: C) -> Result<Vec<C>> {
    let cn = CrankNicolson::new(*cfg, g_root)?;
    if samples.len() != cn.q.len() {
        return Err(Error::InvalidInput(format!(
            "expected {} samples, got {}",
            cn.q.len(),
            samples.len()
        )));
    }
    let mut psi = samples.to_vec();
    cn.step(&mut psi);
    Ok(psi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnTrace {
    /// (t, P(t), overlap, norm).
    pub points: Vec<(f64, f64, C, f64)>,
    /// Largest edge amplitude seen during the run.
    pub edge_amplitude: f64,
    pub warnings: Vec<String>,
}

/// Grid inner product <a|b> with the conjugating rule.
pub fn grid_overlap(a: &[C], b: &[C], h: f64) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C>() * h
}

/// P(t) = |<psi(t)|psi(0)>|^2 at the requested (nondecreasing, nonnegative) times.
/// Each time is reached with round(t / dt) steps.
pub fn cn_autocorrelation(
    packet: &AnalyticPacket,
    times: &[f64],
    cfg: &GridConfig,
    g_root: C,
) -> Result<CnTrace> {
    packet.validate()?;
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0])
    {
        return Err(Error::InvalidInput(
            "times must be nonnegative and nondecreasing".into(),
        ));
    }
    let cn = CrankNicolson::new(*cfg, g_root)?;
    let h = cfg.spacing;
    let psi0 =
        cn.q.iter()
            .map(|&x| packet.eval(C::new(x, 0.0)))
            .collect::<Result<Vec<C>>>()?;
    let mut psi = psi0.clone();
    let mut done = 0usize;
    let mut edge = cn.edge_amplitude(&psi);
    let mut points = Vec::with_capacity(times.len());
    for &t in times {
        let target = (t / cfg.time_step).round() as usize;
        while done < target {
            cn.step(&mut psi);
            done += 1;
            if done % 50 == 0 {
                edge = edge.max(cn.edge_amplitude(&psi));
            }
        }
        let ov = grid_overlap(&psi, &psi0, h);
        let norm = grid_overlap(&psi, &psi, h).re;
        points.push((t, ov.norm_sqr(), ov, norm));
    }
    edge = edge.max(cn.edge_amplitude(&psi));
    let mut warnings = Vec::new();
    if edge > EDGE_THRESHOLD {
        warnings.push(format!(
            "boundary contamination: edge amplitude {edge:.3e} exceeds {EDGE_THRESHOLD:.0e}"
        ));
    }
    Ok(CnTrace {
        points,
        edge_amplitude: edge,
        warnings,
    })
}
