//! Wave-packet propagation in the resonance eigenbasis of the complex-scaled
//! Hamiltonian.
//!
//! The scaled frame holds Psi_c(q) = Psi(q e^{i theta/2}) on real q, with theta the
//! continuum rotation angle used by the spectral module. Scaling and back-scaling
//! carry no Jacobian factor, so normalization is checked through P(0).

use crate::basis::{basis_functions, OscillatorSpec};
use crate::error::{Error, Result};
use crate::spectral::{converged_modes, ResonanceSet, DEFAULT_N_MAX, DEFAULT_THETA};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

type C = Complex64;

/// psi(q) = (2 / (pi w^2))^{1/4} exp(-((q - q0)/w)^2 + i p0 q), normalized to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacket {
    pub center: f64,
    pub width: f64,
    pub momentum: f64,
}

impl GaussianPacket {
    /// e^{-q^2} / (pi/2)^{1/4}.
    pub fn standard() -> Self {
        GaussianPacket {
            center: 0.0,
            width: 1.0,
            momentum: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0)
            || !self.center.is_finite()
            || !self.momentum.is_finite()
            || !self.width.is_finite()
        {
            return Err(Error::InvalidInput(
                "Gaussian needs finite center, momentum and positive width".into(),
            ));
        }
        Ok(())
    }

    pub fn eval(&self, z: C) -> C {
        let norm = (2.0 / (PI * self.width * self.width)).powf(0.25);
        let x = (z - self.center) / self.width;
        norm * (-x * x + C::i() * self.momentum * z).exp()
    }
}

/// Initial data with an analytic continuation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AnalyticPacket {
    /// sum_i a_i psi_i(q) over Gaussian packets.
    Gaussians(Vec<(C, GaussianPacket)>),
    /// sum_J c_J phi_J(q) over harmonic-oscillator functions.
    Oscillator(Vec<C>),
}

impl AnalyticPacket {
    pub fn gaussian(g: GaussianPacket) -> Self {
        AnalyticPacket::Gaussians(vec![(C::new(1.0, 0.0), g)])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AnalyticPacket::Gaussians(v) => v.iter().try_for_each(|(a, g)| {
                if !a.norm().is_finite() {
                    return Err(Error::InvalidInput("non-finite amplitude".into()));
                }
                g.validate()
            }),
            AnalyticPacket::Oscillator(c) => {
                if c.iter().any(|x| !x.norm().is_finite()) {
                    return Err(Error::InvalidInput(
                        "non-finite oscillator coefficient".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, z: C) -> Result<C> {
        match self {
            AnalyticPacket::Gaussians(v) => Ok(v.iter().map(|(a, g)| a * g.eval(z)).sum()),
            AnalyticPacket::Oscillator(c) => {
                if c.is_empty() {
                    return Ok(C::new(0.0, 0.0));
                }
                let phi = basis_functions(c.len() - 1, z)?;
                Ok(c.iter().zip(&phi).map(|(a, p)| a * p).sum())
            }
        }
    }
}

/// Uniform real grid for trapezoid quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        QuadratureGrid {
            min: -12.0,
            max: 12.0,
            step: 0.005,
        }
    }
}

impl QuadratureGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0)
            || !(self.max > self.min)
            || !self.min.is_finite()
            || !self.max.is_finite()
        {
            return Err(Error::InvalidInput(
                "grid needs min < max and a positive step".into(),
            ));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step).round() as usize;
        (0..=n).map(|i| self.min + i as f64 * self.step).collect()
    }

    /// Trapezoid weights matching `points`.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.points().len();
        (0..n)
            .map(|i| {
                if i == 0 || i + 1 == n {
                    0.5 * self.step
                } else {
                    self.step
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Normal,
    Scaled,
}

#[derive(Debug, Clone)]
pub enum Representation {
    Analytic(AnalyticPacket),
    Grid {
        q: Vec<f64>,
        samples: Vec<C>,
    },
    /// Coefficients b_N over the levels of a resonance set.
    Modal {
        coefficients: Vec<C>,
        basis: Arc<ResonanceSet>,
    },
}

#[derive(Debug, Clone)]
pub struct PacketState {
    pub frame: Frame,
    pub representation: Representation,
    pub time: f64,
}

impl PacketState {
    pub fn analytic(packet: AnalyticPacket) -> Self {
        PacketState {
            frame: Frame::Normal,
            representation: Representation::Analytic(packet),
            time: 0.0,
        }
    }

    pub fn modal_coefficients(&self) -> Option<&[C]> {
        match &self.representation {
            Representation::Modal { coefficients, .. } => Some(coefficients),
            _ => None,
        }
    }

    /// sum_N |b_N|^2 for modal states.
    pub fn modal_norm(&self) -> Option<f64> {
        self.modal_coefficients()
            .map(|b| b.iter().map(|x| x.norm_sqr()).sum())
    }
}

/// Multiplicative width corrections Gamma_N -> Gamma_N (1 + delta_N).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DissipationProfile {
    pub delta: BTreeMap<usize, f64>,
}

impl DissipationProfile {
    pub fn new(delta: BTreeMap<usize, f64>) -> Result<Self> {
        let p = DissipationProfile { delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (n, d) in &self.delta {
            if !(1.0 + d > 0.0) || !d.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "1 + delta_{n} must be positive"
                )));
            }
        }
        Ok(())
    }

    pub fn factor(&self, n: usize) -> f64 {
        1.0 + self.delta.get(&n).copied().unwrap_or(0.0)
    }
}

/// Psi_c(q) = Psi(q e^{i theta/2}) sampled on the grid.
pub fn scale_packet(psi: &PacketState, theta: f64, grid: &QuadratureGrid) -> Result<PacketState> {
    grid.validate()?;
    if psi.frame != Frame::Normal {
        return Err(Error::InvalidInput(
            "packet is already in the scaled frame".into(),
        ));
    }
    let packet = match &psi.representation {
        Representation::Analytic(p) => p,
        _ => {
            return Err(Error::InvalidInput(
                "scaling needs an analytic packet, not samples".into(),
            ))
        }
    };
    packet.validate()?;
    let rot = C::from_polar(1.0, 0.5 * theta);
    let q = grid.points();
    let samples = q
        .par_iter()
        .map(|&x| packet.eval(rot * x))
        .collect::<Result<Vec<_>>>()?;
    Ok(PacketState {
        frame: Frame::Scaled,
        representation: Representation::Grid { q, samples },
        time: psi.time,
    })
}

/// Coefficients d_J = sum_N b_N c_{N,J} over the oscillator functions.
fn oscillator_coefficients(b: &[C], basis: &ResonanceSet) -> Vec<C> {
    let dim = basis.spec.n_max + 1;
    let mut d = vec![C::new(0.0, 0.0); dim];
    for (bn, level) in b.iter().zip(&basis.levels) {
        for (dj, c) in d.iter_mut().zip(&level.coefficients) {
            *dj += bn * c;
        }
    }
    d
}

/// phi_J(z_i) for every grid point, row-major by point.
fn basis_table(j_max: usize, z: &[C]) -> Result<Vec<Vec<C>>> {
    z.par_iter().map(|&x| basis_functions(j_max, x)).collect()
}

#[derive(Debug, Clone)]
pub struct Expansion {
    pub state: PacketState,
    /// Grid norm of Psi_c - sum_N b_N Phi_N, or zero for exact oscillator input.
    pub residual: f64,
}

/// b_N = (Phi_N | Psi_c) with the bilinear product, over the first n_modes levels.
/// With `tol`, a reconstruction residual above it is an error.
pub fn expand(
    psi_scaled: &PacketState,
    basis: Arc<ResonanceSet>,
    n_modes: usize,
    tol: Option<f64>,
) -> Result<Expansion> {
    if psi_scaled.frame != Frame::Scaled {
        return Err(Error::InvalidInput(
            "expansion needs a scaled-frame packet".into(),
        ));
    }
    if n_modes == 0 || n_modes > basis.levels.len() {
        return Err(Error::InvalidInput(format!(
            "n_modes must lie in 1..={}",
            basis.levels.len()
        )));
    }
    let dim = basis.spec.n_max + 1;
    let levels = &basis.levels[..n_modes];
    let (a, grid) = match &psi_scaled.representation {
        Representation::Analytic(AnalyticPacket::Oscillator(c)) => {
            let mut a = c.clone();
            a.resize(dim, C::new(0.0, 0.0));
            (a, None)
        }
        Representation::Grid { q, samples } => {
            let h = if q.len() > 1 { q[1] - q[0] } else { 1.0 };
            let phi = basis_table(
                dim - 1,
                &q.iter().map(|&x| C::new(x, 0.0)).collect::<Vec<_>>(),
            )?;
            let last = q.len() - 1;
            let mut a = vec![C::new(0.0, 0.0); dim];
            for (i, (row, s)) in phi.iter().zip(samples).enumerate() {
                let w = if i == 0 || i == last { 0.5 * h } else { h };
                for (aj, p) in a.iter_mut().zip(row) {
                    *aj += p * s * w;
                }
            }
            (a, Some((phi, samples, h)))
        }
        _ => {
            return Err(Error::InvalidInput(
                "expansion needs samples or oscillator coefficients".into(),
            ))
        }
    };
    let b: Vec<C> = levels
        .iter()
        .map(|l| l.coefficients.iter().zip(&a).map(|(c, x)| c * x).sum())
        .collect();
    let residual = match grid {
        None => {
            let d = oscillator_coefficients(&b, &basis);
            d.iter()
                .zip(&a)
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt()
        }
        Some((phi, samples, h)) => {
            let d = oscillator_coefficients(&b, &basis);
            let s: f64 = phi
                .iter()
                .zip(samples)
                .map(|(row, s)| {
                    let r: C = row.iter().zip(&d).map(|(p, x)| p * x).sum();
                    (s - r).norm_sqr()
                })
                .sum();
            (s * h).sqrt()
        }
    };
    if let Some(t) = tol {
        if !(residual <= t) {
            return Err(Error::Residual { residual, tol: t });
        }
    }
    let state = PacketState {
        frame: Frame::Scaled,
        representation: Representation::Modal {
            coefficients: b,
            basis,
        },
        time: psi_scaled.time,
    };
    Ok(Expansion { state, residual })
}

/// b_N(t) = b_N exp(-Gamma_N (1 + delta_N) t / 2) exp(-i Re(E_N) t).
pub fn propagate(
    modal: &PacketState,
    t: f64,
    dissipation: &DissipationProfile,
) -> Result<PacketState> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(
            "propagation time must be finite and nonnegative".into(),
        ));
    }
    dissipation.validate()?;
    let (b, basis) = match &modal.representation {
        Representation::Modal {
            coefficients,
            basis,
        } => (coefficients, basis),
        _ => {
            return Err(Error::InvalidInput(
                "propagation needs a modal packet".into(),
            ))
        }
    };
    let out = b
        .iter()
        .zip(&basis.levels)
        .map(|(bn, l)| {
            let decay = -0.5 * l.width * dissipation.factor(l.index) * t;
            bn * C::from_polar(decay.exp(), -l.energy.re * t)
        })
        .collect();
    Ok(PacketState {
        frame: modal.frame,
        representation: Representation::Modal {
            coefficients: out,
            basis: basis.clone(),
        },
        time: modal.time + t,
    })
}

/// Psi(q, t) = Psi_c(q e^{-i theta/2}, t) on real coordinates.
pub fn back_transform(state: &PacketState, q: &[f64]) -> Result<PacketState> {
    let (b, basis) = match &state.representation {
        Representation::Modal {
            coefficients,
            basis,
        } => (coefficients, basis),
        _ => {
            return Err(Error::InvalidInput(
                "back transformation needs a modal packet".into(),
            ))
        }
    };
    let d = oscillator_coefficients(b, basis);
    let rot = C::from_polar(1.0, -0.5 * basis.spec.theta);
    let samples = q
        .par_iter()
        .map(|&x| {
            let phi = basis_functions(d.len() - 1, rot * x)?;
            Ok(phi.iter().zip(&d).map(|(p, c)| p * c).sum())
        })
        .collect::<Result<Vec<C>>>()?;
    Ok(PacketState {
        frame: Frame::Normal,
        representation: Representation::Grid {
            q: q.to_vec(),
            samples,
        },
        time: state.time,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub theta: f64,
    pub n_max: usize,
    /// Modes with a larger truncation uncertainty are excluded from the basis.
    pub mode_ceiling: f64,
    pub max_modes: usize,
    pub grid: QuadratureGrid,
    /// Optional bound on the expansion residual.
    pub residual_tol: Option<f64>,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            theta: DEFAULT_THETA,
            n_max: DEFAULT_N_MAX,
            mode_ceiling: 1e-8,
            max_modes: 60,
            grid: QuadratureGrid::default(),
            residual_tol: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutocorrelationPoint {
    pub t: f64,
    /// |<Psi(t)|Psi(0)>|^2.
    pub p: f64,
    /// p / P(0).
    pub p_normalized: f64,
    pub overlap: C,
    pub modal_norm: f64,
}

/// Scale, expand, propagate and back-transform one packet; overlaps with the
/// initial packet are taken in the normal frame.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub config: DynamicsConfig,
    pub initial: PacketState,
    pub expansion_residual: f64,
    pub dissipation: DissipationProfile,
    /// int conj(phi_J(q e^{-i theta/2})) Psi(q, 0) dq.
    weights: Vec<C>,
    overlap0: C,
}

impl Pipeline {
    pub fn new(
        g_root: C,
        packet: AnalyticPacket,
        config: DynamicsConfig,
        dissipation: DissipationProfile,
    ) -> Result<Self> {
        let spec = OscillatorSpec::new(g_root, config.theta, config.n_max)?;
        config.grid.validate()?;
        dissipation.validate()?;
        if config.max_modes == 0 {
            return Err(Error::InvalidInput("max_modes must be positive".into()));
        }
        let basis = Arc::new(converged_modes(
            &spec,
            config.max_modes,
            config.mode_ceiling,
        )?);
        Self::with_basis(basis, packet, config, dissipation)
    }

    pub fn with_basis(
        basis: Arc<ResonanceSet>,
        packet: AnalyticPacket,
        config: DynamicsConfig,
        dissipation: DissipationProfile,
    ) -> Result<Self> {
        packet.validate()?;
        let normal = PacketState::analytic(packet.clone());
        let scaled = scale_packet(&normal, basis.spec.theta, &config.grid)?;
        let n_modes = basis.levels.len();
        let expansion = expand(&scaled, basis.clone(), n_modes, config.residual_tol)?;
        let q = config.grid.points();
        let wts = config.grid.weights();
        let rot = C::from_polar(1.0, -0.5 * basis.spec.theta);
        let j_max = basis.spec.n_max;
        let per_point: Vec<Vec<C>> = q
            .par_iter()
            .zip(&wts)
            .map(|(&x, &w)| {
                let psi0 = packet.eval(C::new(x, 0.0))?;
                let phi = basis_functions(j_max, rot * x)?;
                Ok(phi.iter().map(|p| p.conj() * psi0 * w).collect())
            })
            .collect::<Result<_>>()?;
        let mut weights = vec![C::new(0.0, 0.0); j_max + 1];
        for row in &per_point {
            for (acc, v) in weights.iter_mut().zip(row) {
                *acc += v;
            }
        }
        let mut pipe = Pipeline {
            config,
            initial: expansion.state,
            expansion_residual: expansion.residual,
            dissipation,
            weights,
            overlap0: C::new(0.0, 0.0),
        };
        pipe.overlap0 = pipe.overlap_of(&pipe.initial);
        Ok(pipe)
    }

    pub fn basis(&self) -> &ResonanceSet {
        match &self.initial.representation {
            Representation::Modal { basis, .. } => basis,
            _ => unreachable!("pipeline state is modal"),
        }
    }

    /// <Psi(t)|Psi(0)> for a modal state over the pipeline basis.
    pub fn overlap_of(&self, state: &PacketState) -> C {
        let b = state.modal_coefficients().expect("modal state");
        let d = oscillator_coefficients(b, self.basis());
        d.iter().zip(&self.weights).map(|(x, w)| x.conj() * w).sum()
    }

    pub fn state_at(&self, t: f64) -> Result<PacketState> {
        propagate(&self.initial, t, &self.dissipation)
    }

    pub fn point(&self, t: f64) -> Result<AutocorrelationPoint> {
        let s = self.state_at(t)?;
        let overlap = self.overlap_of(&s);
        let p = overlap.norm_sqr();
        Ok(AutocorrelationPoint {
            t,
            p,
            p_normalized: p / self.overlap0.norm_sqr(),
            overlap,
            modal_norm: s.modal_norm().unwrap_or(0.0),
        })
    }

    pub fn autocorrelation(&self, times: &[f64]) -> Result<Vec<AutocorrelationPoint>> {
        times.par_iter().map(|&t| self.point(t)).collect()
    }
}

/// P(t) for an analytic packet under the cubic Hamiltonian with coupling g_root.
pub fn autocorrelation(
    g_root: C,
    packet: AnalyticPacket,
    times: &[f64],
    config: DynamicsConfig,
    dissipation: DissipationProfile,
) -> Result<Vec<AutocorrelationPoint>> {
    Pipeline::new(g_root, packet, config, dissipation)?.autocorrelation(times)
}

/// One interval of piecewise-constant driving.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticStep {
    pub g_root: C,
    pub duration: f64,
}

/// Piecewise-constant driven propagation: at each step the current packet is
/// re-expanded in the eigenbasis of that step's Hamiltonian and propagated for the
/// step's duration. All steps share theta and n_max of `config`.
pub fn adiabatic_propagate(
    initial: &PacketState,
    steps: &[AdiabaticStep],
    config: &DynamicsConfig,
    dissipation: &DissipationProfile,
) -> Result<PacketState> {
    let mut d = match &initial.representation {
        Representation::Modal {
            coefficients,
            basis,
        } => {
            if basis.spec.n_max != config.n_max || basis.spec.theta != config.theta {
                return Err(Error::InvalidInput(
                    "initial basis does not match the configuration".into(),
                ));
            }
            oscillator_coefficients(coefficients, basis)
        }
        Representation::Analytic(AnalyticPacket::Oscillator(c))
            if initial.frame == Frame::Scaled =>
        {
            let mut c = c.clone();
            c.resize(config.n_max + 1, C::new(0.0, 0.0));
            c
        }
        _ => {
            return Err(Error::InvalidInput(
                "adiabatic propagation needs a scaled modal packet".into(),
            ))
        }
    };
    let mut state = initial.clone();
    for step in steps {
        let spec = OscillatorSpec::new(step.g_root, config.theta, config.n_max)?;
        let basis = Arc::new(converged_modes(
            &spec,
            config.max_modes,
            config.mode_ceiling,
        )?);
        let b: Vec<C> = basis
            .levels
            .iter()
            .map(|l| l.coefficients.iter().zip(&d).map(|(c, x)| c * x).sum())
            .collect();
        let modal = PacketState {
            frame: Frame::Scaled,
            representation: Representation::Modal {
                coefficients: b,
                basis: basis.clone(),
            },
            time: state.time,
        };
        state = propagate(&modal, step.duration, dissipation)?;
        d = oscillator_coefficients(state.modal_coefficients().expect("modal"), &basis);
    }
    Ok(state)
}
