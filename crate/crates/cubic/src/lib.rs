//! Complex resonance energies of the cubic anharmonic oscillator
//! H = p^2/2 + q^2/2 + sqrt(g) q^3 by complex scaling, Borel-Pade resummation and
//! strong-coupling expansion, plus spectral wave-packet propagation with a
//! Crank-Nicolson reference propagator.

pub mod basis;
pub mod borel;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod matrix;
pub mod poly;
pub mod quad;
pub mod series;
pub mod spectral;
pub mod strong;

pub use basis::OscillatorSpec;
pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use num_complex::Complex64;
