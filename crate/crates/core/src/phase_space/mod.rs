//! Phase-space dynamics: Wigner frames of the open quantum evolution, a
//! classical Langevin comparator, and the driven double-well correspondence
//! experiment.
//!
//! Quantum states are always propagated as `ρ(x, x′)` and transformed;
//! the phase-space equation is only evaluated as a residual check, since
//! for anharmonic potentials it drops the higher quantum corrections.

mod chaos;
mod classical;
mod quantum;

pub use chaos::{
    coherence_length, double_well_experiment, entropy_production, entropy_rate, lyapunov_exponent, nonlinearity_scale,
    run_classical, run_quantum, ChaosConfig, ChaosRun, CorrespondenceReport, EntropyProductionTable, EntropyRate,
    LyapunovEstimate, Portraits,
};
pub use classical::{
    classical_step_limit, evolve_classical, ClassicalEnsemble, ClassicalSeries, LangevinOptions, PhaseSpaceMoments,
};
pub use quantum::{evolve_open_quantum, phase_space_generator, phase_space_residual, WignerFrame};
