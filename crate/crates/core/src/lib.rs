//! Numerical laboratory for environment-induced decoherence.
//!
//! The crate covers a two-qubit measurement chain and quantum discord, the
//! high-temperature quantum Brownian motion master equation on a position
//! grid, Wigner phase-space portraits, the predictability sieve, and the
//! chaotic driven double-well correspondence experiment. Everything inside
//! the engine uses natural units `ħ = k_B = 1`; only
//! [`brownian::timescales`] works in SI.

pub mod brownian;
pub mod discord;
pub mod error;
pub mod grid;
pub mod lab;
pub mod linalg;
pub mod measurement;
pub mod phase_space;
pub mod sieve;
pub mod spectral;
pub mod state;
pub mod wigner;

pub use error::{Error, Result};
pub use grid::Grid;
pub use state::{DensityMatrix, GaussianSpec, WaveFunction};
