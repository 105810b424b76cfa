//! High-temperature quantum Brownian motion:
//!
//! ```text
//! dρ/dt = −i[H, ρ] − γ(x−x′)(∂ₓ − ∂ₓ′)ρ − D(x−x′)²ρ,   D = 2mγk_BT
//! ```
//!
//! solved on the position grid, plus the closed-form decoherence rates.

mod potential;
mod solver;
pub mod timescales;

use serde::{Deserialize, Serialize};

pub(crate) use solver::step_schedule;
pub use potential::PotentialSpec;
pub use solver::{
    evolve, evolve_with, step_limit, EvolutionResult, EvolveOptions, MasterEquation, Snapshot, SnapshotDiagnostics, Terms,
};
pub use timescales::{decoherence_time, timescale_report, Scenario, Timescales};

use crate::error::{invalid, Result};

/// Bath coupling: particle mass `m`, relaxation rate `γ` and momentum
/// diffusion `D`. A bath built from a temperature has `D = 2mγT`; the
/// high-temperature limit `γ → 0` at fixed `D` is available through
/// [`BathParams::with_diffusion`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    pub mass: f64,
    pub gamma: f64,
    pub diffusion: f64,
    pub temperature: Option<f64>,
}

impl BathParams {
    pub fn thermal(mass: f64, gamma: f64, temperature: f64) -> Result<Self> {
        check_non_negative("temperature", temperature)?;
        let b = Self { mass, gamma, diffusion: 2.0 * mass * gamma * temperature, temperature: Some(temperature) };
        b.validate()?;
        Ok(b)
    }

    pub fn with_diffusion(mass: f64, gamma: f64, diffusion: f64) -> Result<Self> {
        let b = Self { mass, gamma, diffusion, temperature: None };
        b.validate()?;
        Ok(b)
    }

    /// Closed system of the given mass.
    pub fn isolated(mass: f64) -> Result<Self> {
        Self::with_diffusion(mass, 0.0, 0.0)
    }

    /// `η = 2mγ`.
    pub fn viscosity(&self) -> f64 {
        2.0 * self.mass * self.gamma
    }

    /// Set when `γ ≳ k_BT`, outside the regime where the equation holds.
    pub fn validity_warning(&self) -> Option<String> {
        match self.temperature {
            Some(t) if self.gamma > 0.0 && self.gamma >= t => Some(format!(
                "gamma = {} is not small against k_B T = {}; the high-temperature master equation is unreliable",
                self.gamma, t
            )),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(invalid("mass", format!("{} must be positive", self.mass)));
        }
        check_non_negative("gamma", self.gamma)?;
        check_non_negative("diffusion", self.diffusion)
    }
}

fn check_non_negative(name: &'static str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(invalid(name, format!("{v} must be non-negative and finite")));
    }
    Ok(())
}

/// `τ_D⁻¹ = 2mγk_BT (Δx)²/ħ²`, the decay rate of coherences between packets
/// a distance `separation` apart.
pub fn fringe_decay_rate(bath: &BathParams, separation: f64) -> f64 {
    bath.diffusion * separation * separation
}
