//! Resonance identification: diagonalization of the complex-scaled Hamiltonian,
//! rejection of rotated-continuum eigenvalues, truncation uncertainty and
//! c-normalized eigenvectors.

use crate::basis::{assemble_general, OscillatorSpec};
use crate::eigen::{eigvals, Decomposition};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

type C = Complex64;

/// Default rotation angle for real coupling.
pub const DEFAULT_THETA: f64 = PI / 5.0;
pub const DEFAULT_N_MAX: usize = 200;
pub const DEFAULT_DELTA_N: usize = 40;

/// Default rotation angle for a coupling: zero for purely imaginary g_root,
/// where the eigenfunctions already decay on the real axis, else [`DEFAULT_THETA`].
pub fn default_theta(g_root: C) -> f64 {
    if g_root.re == 0.0 && g_root.im != 0.0 {
        0.0
    } else {
        DEFAULT_THETA
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub index: usize,
    pub energy: C,
    /// Gamma = -2 Im E, clamped at zero for levels whose imaginary part is pure roundoff.
    pub width: f64,
    /// Expansion coefficients c_J with sum_J c_J^2 = 1.
    pub coefficients: Vec<C>,
    pub uncertainty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSet {
    pub spec: OscillatorSpec,
    pub levels: Vec<Level>,
}

impl ResonanceSet {
    pub fn energies(&self) -> Vec<C> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    /// Largest |sum_J c_{N,J} c_{M,J}| over distinct pairs.
    pub fn c_orthogonality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.levels.iter().enumerate() {
            for b in &self.levels[i + 1..] {
                let s: C = a
                    .coefficients
                    .iter()
                    .zip(&b.coefficients)
                    .map(|(x, y)| x * y)
                    .sum();
                worst = worst.max(s.norm());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceOptions {
    /// Basis increase used for the truncation uncertainty.
    pub delta_n: usize,
    /// Angle offset for the continuum test.
    pub delta_theta: f64,
    /// Eigenvalues whose angle spread exceeds this multiple of their uncertainty are
    /// treated as rotated continuum.
    pub continuum_factor: f64,
    /// Levels with larger uncertainty are not accepted.
    pub uncertainty_ceiling: f64,
    /// Relative roundoff floor added to every uncertainty.
    pub roundoff_floor: f64,
    /// Enforce count <= n_max/4.
    pub truncation_guard: bool,
}

impl Default for ResonanceOptions {
    fn default() -> Self {
        ResonanceOptions {
            delta_n: DEFAULT_DELTA_N,
            delta_theta: 0.05,
            continuum_factor: 100.0,
            uncertainty_ceiling: 1e-6,
            roundoff_floor: 1e-11,
            truncation_guard: true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    energy: C,
    raw_uncertainty: f64,
    uncertainty: f64,
    spread: f64,
}

fn nearest(values: &[C], z: C) -> (f64, f64) {
    let mut d1 = f64::INFINITY;
    let mut d2 = f64::INFINITY;
    for v in values {
        let d = (v - z).norm();
        if d < d1 {
            d2 = d1;
            d1 = d;
        } else if d < d2 {
            d2 = d;
        }
    }
    (d1, d2)
}

fn nearest_value(values: &[C], z: C) -> C {
    *values
        .iter()
        .min_by(|a, b| (*a - z).norm().total_cmp(&(*b - z).norm()))
        .expect("nonempty spectrum")
}

fn check_ambiguity(values: &[C], z: C, floor: f64) -> Result<()> {
    let (d1, d2) = nearest(values, z);
    if d1 > floor && d2 <= 2.0 * d1 {
        return Err(Error::MatchingAmbiguity { re: z.re, im: z.im });
    }
    Ok(())
}

fn offset_angle(theta: f64, delta: f64) -> f64 {
    if theta + delta < FRAC_PI_4 - 1e-9 {
        theta + delta
    } else {
        theta - delta
    }
}

fn hamiltonian(spec: &OscillatorSpec) -> crate::matrix::ComplexMatrix {
    assemble_general(spec.g_root, 0.5, spec.theta, spec.n_max)
}

/// Operator family e^{-i theta} T + quad e^{i theta} q^2 + g_root e^{3i theta/2} q^3.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Family {
    pub g_root: C,
    pub quad: f64,
    pub theta: f64,
    pub n_max: usize,
}

impl Family {
    fn of(spec: &OscillatorSpec) -> Self {
        Family {
            g_root: spec.g_root,
            quad: 0.5,
            theta: spec.theta,
            n_max: spec.n_max,
        }
    }

    fn matrix(&self) -> crate::matrix::ComplexMatrix {
        assemble_general(self.g_root, self.quad, self.theta, self.n_max)
    }
}

struct Scan {
    decomposition: Decomposition,
    candidates: Vec<Candidate>,
    extended: Vec<C>,
}

/// Diagonalizes at the base spec, at n_max + delta_n and at an offset angle, and
/// classifies each base eigenvalue. Returned candidates pass the continuum test and
/// are sorted by ascending real part.
fn scan(spec: &OscillatorSpec, opts: &ResonanceOptions) -> Result<Scan> {
    spec.validate()?;
    scan_family(&Family::of(spec), opts)
}

fn scan_family(fam: &Family, opts: &ResonanceOptions) -> Result<Scan> {
    if opts.delta_n < 1 {
        return Err(Error::InvalidInput("delta_n must be >= 1".into()));
    }
    let ext_fam = Family {
        n_max: fam.n_max + opts.delta_n,
        ..*fam
    };
    let rot_fam = Family {
        theta: offset_angle(fam.theta, opts.delta_theta),
        ..*fam
    };
    let (base, (ext, rot)) = rayon::join(
        || Decomposition::new(&fam.matrix()),
        || rayon::join(|| eigvals(&ext_fam.matrix()), || eigvals(&rot_fam.matrix())),
    );
    let base = base?;
    let ext = ext?;
    let rot = rot?;
    let real_coupling = fam.g_root.im == 0.0;
    let mut candidates: Vec<Candidate> = base
        .values
        .iter()
        .map(|&e| {
            let raw = nearest(&ext, e).0;
            let floor = opts.roundoff_floor * (1.0 + e.norm());
            let unc = raw.max(floor);
            let spread = nearest(&rot, e).0;
            Candidate {
                energy: e,
                raw_uncertainty: raw,
                uncertainty: unc,
                spread,
            }
        })
        .filter(|c| c.spread <= opts.continuum_factor * c.uncertainty)
        .filter(|c| !(real_coupling && c.energy.im > c.uncertainty))
        .collect();
    candidates.sort_by(|a, b| a.energy.re.total_cmp(&b.energy.re));
    Ok(Scan {
        decomposition: base,
        candidates,
        extended: ext,
    })
}

fn c_normalize(mut v: Vec<C>) -> Vec<C> {
    let s: C = v.iter().map(|z| z * z).sum();
    let r = s.sqrt();
    v.iter_mut().for_each(|z| *z /= r);
    let big = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or_default();
    if big.re < 0.0 {
        v.iter_mut().for_each(|z| *z = -*z);
    }
    v
}

/// The `count` lowest stable resonances with default options.
pub fn resonances(spec: &OscillatorSpec, count: usize) -> Result<ResonanceSet> {
    resonances_with(spec, count, &ResonanceOptions::default())
}

pub fn resonances_with(
    spec: &OscillatorSpec,
    count: usize,
    opts: &ResonanceOptions,
) -> Result<ResonanceSet> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be positive".into()));
    }
    if opts.truncation_guard && count > spec.n_max / 4 {
        return Err(Error::InvalidInput(format!(
            "count {count} exceeds n_max/4 = {} (truncation quality guard)",
            spec.n_max / 4
        )));
    }
    let levels = select_levels(&scan(spec, opts)?, count, opts)?;
    Ok(ResonanceSet {
        spec: *spec,
        levels,
    })
}

/// Stable levels of a general operator family, without the count guard.
pub(crate) fn family_levels(
    fam: &Family,
    count: usize,
    opts: &ResonanceOptions,
) -> Result<Vec<Level>> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be positive".into()));
    }
    select_levels(&scan_family(fam, opts)?, count, opts)
}

fn select_levels(scan: &Scan, count: usize, opts: &ResonanceOptions) -> Result<Vec<Level>> {
    let stable = scan.candidates.len();
    let accepted: Vec<Candidate> = scan
        .candidates
        .iter()
        .copied()
        .filter(|c| c.uncertainty <= opts.uncertainty_ceiling)
        .collect();
    if accepted.len() < count {
        if stable >= count {
            let mut u: Vec<f64> = scan.candidates.iter().map(|c| c.uncertainty).collect();
            u.sort_by(f64::total_cmp);
            return Err(Error::UncertaintyCeiling {
                value: u[count - 1],
                ceiling: opts.uncertainty_ceiling,
            });
        }
        return Err(Error::ThetaStability {
            requested: count,
            found: stable,
        });
    }
    let mut levels = Vec::with_capacity(count);
    for (index, c) in accepted.into_iter().take(count).enumerate() {
        check_ambiguity(
            &scan.extended,
            c.energy,
            opts.roundoff_floor * (1.0 + c.energy.norm()),
        )?;
        let coefficients = c_normalize(scan.decomposition.vector(c.energy));
        levels.push(Level {
            index,
            energy: c.energy,
            width: (-2.0 * c.energy.im).max(0.0),
            coefficients,
            uncertainty: c.uncertainty,
        });
    }
    Ok(levels)
}

/// Every stable eigenpair with uncertainty below `ceiling`, up to `max_modes` of them,
/// without the count guard. Used to build modal bases for dynamics.
pub fn converged_modes(
    spec: &OscillatorSpec,
    max_modes: usize,
    ceiling: f64,
) -> Result<ResonanceSet> {
    let opts = ResonanceOptions {
        uncertainty_ceiling: ceiling,
        truncation_guard: false,
        ..Default::default()
    };
    let scan = scan(spec, &opts)?;
    let levels = scan
        .candidates
        .iter()
        .filter(|c| c.uncertainty <= ceiling)
        .take(max_modes)
        .enumerate()
        .map(|(index, c)| Level {
            index,
            energy: c.energy,
            width: (-2.0 * c.energy.im).max(0.0),
            coefficients: c_normalize(scan.decomposition.vector(c.energy)),
            uncertainty: c.uncertainty,
        })
        .collect::<Vec<_>>();
    if levels.is_empty() {
        return Err(Error::ThetaStability {
            requested: 1,
            found: 0,
        });
    }
    Ok(ResonanceSet {
        spec: *spec,
        levels,
    })
}

/// Maximum pairwise spread of each tracked level over a set of angles. Levels are
/// identified at the first angle and followed by nearest-eigenvalue matching.
pub fn theta_stability(spec: &OscillatorSpec, thetas: &[f64], count: usize) -> Result<Vec<f64>> {
    if thetas.is_empty() {
        return Err(Error::InvalidInput("at least one angle required".into()));
    }
    for &t in thetas {
        spec.with_theta(t).validate()?;
    }
    let opts = ResonanceOptions::default();
    let first = resonances_with(&spec.with_theta(thetas[0]), count, &opts)?;
    let mut tracks: Vec<Vec<C>> = first.levels.iter().map(|l| vec![l.energy]).collect();
    let others: Vec<Result<Vec<C>>> = {
        use rayon::prelude::*;
        thetas[1..]
            .par_iter()
            .map(|&t| eigvals(&hamiltonian(&spec.with_theta(t))))
            .collect()
    };
    for vals in others {
        let vals = vals?;
        for (track, level) in tracks.iter_mut().zip(&first.levels) {
            let floor = opts.roundoff_floor * (1.0 + level.energy.norm());
            check_ambiguity(&vals, level.energy, floor)?;
            track.push(nearest_value(&vals, level.energy));
        }
    }
    Ok(tracks
        .iter()
        .map(|t| {
            let mut worst: f64 = 0.0;
            for i in 0..t.len() {
                for j in i + 1..t.len() {
                    worst = worst.max((t[i] - t[j]).norm());
                }
            }
            worst
        })
        .collect())
}

/// Basis dependence above which an eigenvalue is not treated as a level.
const UNRESOLVED: f64 = 1e-2;

/// |E(n_max) - E(n_max + delta_n)| for the `count` lowest stable levels.
pub fn truncation_uncertainty(
    spec: &OscillatorSpec,
    count: usize,
    delta_n: usize,
) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be positive".into()));
    }
    let opts = ResonanceOptions {
        delta_n,
        ..Default::default()
    };
    let scan = scan(spec, &opts)?;
    let resolved: Vec<&Candidate> = scan
        .candidates
        .iter()
        .filter(|c| c.raw_uncertainty <= UNRESOLVED)
        .collect();
    if resolved.len() < count {
        return Err(Error::ThetaStability {
            requested: count,
            found: resolved.len(),
        });
    }
    resolved[..count]
        .iter()
        .map(|c| {
            check_ambiguity(
                &scan.extended,
                c.energy,
                opts.roundoff_floor * (1.0 + c.energy.norm()),
            )?;
            Ok(c.raw_uncertainty)
        })
        .collect()
}
