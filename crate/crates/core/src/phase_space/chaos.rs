use std::f64::consts::PI;

use serde::Serialize;

use super::classical::{evolve_classical, ClassicalEnsemble, LangevinOptions};
use crate::brownian::{evolve_with, BathParams, EvolveOptions, PotentialSpec, Terms};
use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::state::{make_gaussian, DensityMatrix, GaussianSpec};
use crate::wigner::{negativity_volume, wigner_of_density, WignerGrid};

/// The driven double well `H = p²/2m − Ax² + Bx⁴ + Fx cos(ωt)` and the
/// numerical settings of a correspondence run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosConfig {
    pub mass: f64,
    pub a: f64,
    pub b: f64,
    pub drive_amplitude: f64,
    pub drive_frequency: f64,
    /// Momentum diffusion of the decohered run.
    pub diffusion: f64,
    /// Run length in driving periods.
    pub periods: u32,
    pub grid_points: usize,
    pub half_extent: f64,
    pub dt: f64,
    pub ensemble_size: usize,
    pub initial_center: f64,
    pub initial_momentum: f64,
    /// Position spread of the initial packet.
    pub initial_width: f64,
    pub seed: u64,
    /// Purity samples per driving period.
    pub samples_per_period: u32,
    /// Wigner frames per driving period; must divide `samples_per_period`.
    pub frames_per_period: u32,
    pub lyapunov_trajectories: usize,
    pub lyapunov_periods: u32,
    pub lyapunov_warmup: u32,
    /// Window, in driving periods, over which entropy production is fitted.
    pub entropy_window: (f64, f64),
}

impl Default for ChaosConfig {
    fn default() -> Self {
        let (mass, a, b) = (1.0, 10.0, 0.5);
        let (initial_center, initial_width) = Self::left_well_packet(mass, a, b).expect("the default potential has two wells");
        Self {
            mass,
            a,
            b,
            drive_amplitude: 10.0,
            drive_frequency: 6.07,
            diffusion: 0.025,
            periods: 8,
            grid_points: 512,
            half_extent: 8.0,
            dt: 2e-3,
            ensemble_size: 100_000,
            initial_center,
            initial_momentum: 0.0,
            initial_width,
            seed: 0,
            samples_per_period: 20,
            frames_per_period: 4,
            lyapunov_trajectories: 20,
            lyapunov_periods: 200,
            lyapunov_warmup: 20,
            entropy_window: (2.0, 6.0),
        }
    }
}

impl ChaosConfig {
    /// Centre and coherent width of a packet at rest in the left well,
    /// `x = −√(A/2B)` where `V″ = 4A`. Without the drive this is a regular
    /// orbit; a packet on the barrier top would instead sit on the
    /// separatrix. `None` unless `m, A, B > 0`.
    pub fn left_well_packet(mass: f64, a: f64, b: f64) -> Option<(f64, f64)> {
        if !(mass > 0.0 && a > 0.0 && b > 0.0) {
            return None;
        }
        let omega = (4.0 * a / mass).sqrt();
        Some((-(a / (2.0 * b)).sqrt(), (0.5 / (mass * omega)).sqrt()))
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.drive_frequency
    }

    pub fn t_final(&self) -> f64 {
        self.periods as f64 * self.period()
    }

    pub fn potential(&self) -> PotentialSpec {
        PotentialSpec::driven_double_well(self.a, self.b, self.drive_amplitude, self.drive_frequency)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid_points, self.half_extent)
    }

    pub fn bath(&self, diffusion: f64) -> Result<BathParams> {
        BathParams::with_diffusion(self.mass, 0.0, diffusion)
    }

    pub fn initial_packet(&self) -> GaussianSpec {
        GaussianSpec::new(self.initial_center, self.initial_momentum, self.initial_width)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("drive_frequency", self.drive_frequency),
            ("dt", self.dt),
            ("initial_width", self.initial_width),
            ("half_extent", self.half_extent),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("{v} must be positive")));
            }
        }
        for (name, v) in [("a", self.a), ("drive_amplitude", self.drive_amplitude), ("initial_center", self.initial_center)] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if !(self.b >= 0.0) || !(self.diffusion >= 0.0) {
            return Err(invalid("b", "quartic coefficient and diffusion must be non-negative"));
        }
        if self.periods == 0 || self.samples_per_period == 0 || self.frames_per_period == 0 {
            return Err(invalid("periods", "run length and sampling rates must be positive"));
        }
        if self.samples_per_period % self.frames_per_period != 0 {
            return Err(invalid("frames_per_period", "must divide samples_per_period"));
        }
        if self.ensemble_size == 0 || self.lyapunov_trajectories == 0 || self.lyapunov_periods == 0 {
            return Err(invalid("ensemble_size", "ensemble and trajectory counts must be positive"));
        }
        let (w0, w1) = self.entropy_window;
        if !(w0 >= 0.0 && w1 > w0 && w1 <= self.periods as f64) {
            return Err(invalid("entropy_window", format!("({w0}, {w1}) must lie inside the run")));
        }
        Ok(())
    }
}

/// One quantum run of the double well at a given diffusion.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosRun {
    pub diffusion: f64,
    pub drive_amplitude: f64,
    /// Purity samples `(t, Tr ρ²)`.
    pub purity: Vec<(f64, f64)>,
    /// Negativity of the Wigner frames `(t, ∬max(−W, 0))`.
    pub negativity: Vec<(f64, f64)>,
    pub final_wigner: WignerGrid,
    pub final_state: DensityMatrix,
    pub max_trace_error: f64,
    pub steps: usize,
}

impl ChaosRun {
    pub fn final_negativity(&self) -> f64 {
        self.negativity.last().map(|s| s.1).unwrap_or(0.0)
    }
}

/// Evolves the initial packet with the master equation at momentum
/// diffusion `diffusion` (no friction), sampling purity and Wigner frames.
pub fn run_quantum(cfg: &ChaosConfig, diffusion: f64) -> Result<ChaosRun> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let rho0 = DensityMatrix::pure(&make_gaussian(cfg.initial_packet(), grid)?);
    let bath = cfg.bath(diffusion)?;
    let terms = Terms { hamiltonian: true, friction: false, decoherence: diffusion > 0.0 };
    let options = EvolveOptions::new(cfg.t_final(), cfg.dt)
        .snapshot_every(cfg.period() / cfg.samples_per_period as f64)
        .terms(terms)
        .retain_states(false);
    let frame_every = (cfg.samples_per_period / cfg.frames_per_period) as usize;
    let mut index = 0usize;
    let mut negativity = Vec::new();
    let mut final_wigner = None;
    let result = evolve_with(&rho0, &bath, &cfg.potential(), &options, |snap| {
        if index % frame_every == 0 || (snap.time - cfg.t_final()).abs() < 1e-9 {
            let w = wigner_of_density(&snap.rho);
            negativity.push((snap.time, negativity_volume(&w)));
            final_wigner = Some(w);
        }
        index += 1;
    })?;
    let purity = result.history.iter().map(|d| (d.time, d.purity)).collect();
    Ok(ChaosRun {
        diffusion,
        drive_amplitude: cfg.drive_amplitude,
        purity,
        negativity,
        final_wigner: final_wigner.expect("the final state is always framed"),
        max_trace_error: result.max_trace_error(),
        final_state: result.final_state().clone(),
        steps: result.steps,
    })
}

/// Classical Langevin ensemble drawn from the initial packet's Wigner
/// function and evolved with the same potential and diffusion. Returns the
/// smoothed portrait at the end of the run and the fraction of particles
/// that left the lattice.
pub fn run_classical(cfg: &ChaosConfig, diffusion: f64) -> Result<(ClassicalEnsemble, WignerGrid, f64)> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let spec = cfg.initial_packet();
    let ensemble = ClassicalEnsemble::gaussian(spec.center, spec.momentum, spec.width, cfg.ensemble_size, cfg.seed)?;
    let series = evolve_classical(&ensemble, &cfg.bath(diffusion)?, &cfg.potential(), &LangevinOptions::new(cfg.t_final(), cfg.dt), cfg.seed)?;
    let last = series.final_ensemble().clone();
    let (portrait, lost) = last.to_grid(&grid);
    Ok((last, portrait, lost))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrespondenceReport {
    pub time: f64,
    pub diffusion: f64,
    /// `∬|W_decohered − W_classical|` at the end of the run.
    pub l1_decohered_classical: f64,
    pub l1_unitary_classical: f64,
    pub negativity_unitary: Vec<(f64, f64)>,
    pub negativity_decohered: Vec<(f64, f64)>,
    pub negativity_classical: f64,
    pub linear_entropy_unitary: Vec<(f64, f64)>,
    pub linear_entropy_decohered: Vec<(f64, f64)>,
    pub lyapunov: LyapunovEstimate,
    pub coherence_length: Option<f64>,
    /// `√|V′/V‴|` at `x = 1`.
    pub nonlinearity_scale: f64,
    pub classical_particles_lost: f64,
    /// Width of the smoothing kernel in cells.
    pub kernel_cells: f64,
    #[serde(skip)]
    pub portraits: Portraits,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Portraits {
    pub unitary: Option<WignerGrid>,
    pub decohered: Option<WignerGrid>,
    pub classical: Option<WignerGrid>,
}

/// Unitary quantum, decohered quantum and classical runs from the same
/// packet, compared after `cfg.periods` driving periods. The classical
/// comparator carries the same diffusion as the decohered run.
pub fn double_well_experiment(cfg: &ChaosConfig) -> Result<CorrespondenceReport> {
    cfg.validate()?;
    let unitary = run_quantum(cfg, 0.0)?;
    let decohered = run_quantum(cfg, cfg.diffusion)?;
    let (_, classical, lost) = run_classical(cfg, cfg.diffusion)?;
    let lyapunov = lyapunov_exponent(cfg)?;
    let linear = |run: &ChaosRun| run.purity.iter().map(|&(t, p)| (t, 1.0 - p)).collect::<Vec<_>>();
    Ok(CorrespondenceReport {
        time: cfg.t_final(),
        diffusion: cfg.diffusion,
        l1_decohered_classical: decohered.final_wigner.l1_distance(&classical),
        l1_unitary_classical: unitary.final_wigner.l1_distance(&classical),
        negativity_classical: negativity_volume(&classical),
        linear_entropy_unitary: linear(&unitary),
        linear_entropy_decohered: linear(&decohered),
        negativity_unitary: unitary.negativity.clone(),
        negativity_decohered: decohered.negativity.clone(),
        coherence_length: (cfg.diffusion > 0.0 && lyapunov.mean > 0.0)
            .then(|| coherence_length(cfg.diffusion, lyapunov.mean))
            .transpose()?,
        lyapunov,
        nonlinearity_scale: nonlinearity_scale(&cfg.potential(), 1.0)?,
        classical_particles_lost: lost,
        kernel_cells: 1.0,
        portraits: Portraits {
            unitary: Some(unitary.final_wigner),
            decohered: Some(decohered.final_wigner),
            classical: Some(classical),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub samples: Vec<f64>,
}

/// Largest classical Lyapunov exponent of the frictionless, noiseless
/// dynamics by Benettin's method: a tangent vector is carried along each
/// trajectory with RK4 and renormalized once per driving period; the
/// logarithmic growth is averaged over `lyapunov_periods` after a warm-up.
/// Trajectories start at `p = 0` on a row of points straddling the barrier.
pub fn lyapunov_exponent(cfg: &ChaosConfig) -> Result<LyapunovEstimate> {
    cfg.validate()?;
    let potential = cfg.potential();
    let m = cfg.mass;
    let period = cfg.period();
    let substeps = 400usize;
    let h = period / substeps as f64;
    let count = cfg.lyapunov_trajectories;

    let rhs = |t: f64, s: [f64; 4]| -> [f64; 4] {
        let [x, p, dx, dp] = s;
        [p / m, -potential.derivative(x, t), dp / m, -potential.second_derivative(x) * dx]
    };
    let samples: Vec<f64> = (0..count)
        .map(|k| {
            let x0 = if count == 1 { 0.1 } else { -1.0 + 2.0 * (k as f64 + 0.5) / count as f64 };
            let mut s = [x0, 0.0, 1.0, 0.0];
            let mut t = 0.0;
            let mut log_growth = 0.0;
            for period_index in 0..cfg.lyapunov_warmup + cfg.lyapunov_periods {
                for _ in 0..substeps {
                    let k1 = rhs(t, s);
                    let k2 = rhs(t + h / 2.0, add(s, k1, h / 2.0));
                    let k3 = rhs(t + h / 2.0, add(s, k2, h / 2.0));
                    let k4 = rhs(t + h, add(s, k3, h));
                    for i in 0..4 {
                        s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                    }
                    t += h;
                }
                let norm = (s[2] * s[2] + s[3] * s[3]).sqrt();
                s[2] /= norm;
                s[3] /= norm;
                if period_index >= cfg.lyapunov_warmup {
                    log_growth += norm.ln();
                }
            }
            log_growth / (cfg.lyapunov_periods as f64 * period)
        })
        .collect();
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 { samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Ok(LyapunovEstimate { mean, standard_error: (var / n).sqrt(), samples })
}

fn add(s: [f64; 4], k: [f64; 4], h: f64) -> [f64; 4] {
    [s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2], s[3] + h * k[3]]
}

/// `ℓ_C = ħ/√(2Dλ)`.
pub fn coherence_length(diffusion: f64, lyapunov: f64) -> Result<f64> {
    if !(diffusion > 0.0) || !(lyapunov > 0.0) {
        return Err(invalid("diffusion", "diffusion and Lyapunov exponent must be positive"));
    }
    Ok(1.0 / (2.0 * diffusion * lyapunov).sqrt())
}

/// `χ = √|V′(x)/V‴(x)|` of the undriven potential.
pub fn nonlinearity_scale(potential: &PotentialSpec, x: f64) -> Result<f64> {
    let third = potential.third_derivative(x);
    if third.abs() < 1e-300 {
        return Err(Error::ThirdDerivativeVanishes { x });
    }
    let first = potential.derivative(x, 0.0) - potential.drive_amplitude;
    Ok((first / third).abs().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyRate {
    pub diffusion: f64,
    pub drive_amplitude: f64,
    /// Least-squares slope of `1 − Tr ρ²` over the window.
    pub linear_entropy_rate: f64,
    /// Least-squares slope of `−ln Tr ρ²` over the window.
    pub log_purity_rate: f64,
}

/// Fits the entropy growth of a run over `window` (times).
pub fn entropy_rate(run: &ChaosRun, window: (f64, f64)) -> Result<EntropyRate> {
    let points: Vec<(f64, f64)> = run.purity.iter().copied().filter(|&(t, _)| t >= window.0 - 1e-9 && t <= window.1 + 1e-9).collect();
    if points.len() < 2 {
        return Err(invalid("entropy_window", "fewer than two samples inside the window"));
    }
    let linear: Vec<(f64, f64)> = points.iter().map(|&(t, p)| (t, 1.0 - p)).collect();
    let log: Vec<(f64, f64)> = points.iter().map(|&(t, p)| (t, -p.ln())).collect();
    Ok(EntropyRate {
        diffusion: run.diffusion,
        drive_amplitude: run.drive_amplitude,
        linear_entropy_rate: slope(&linear),
        log_purity_rate: slope(&log),
    })
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mt = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = points.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let den: f64 = points.iter().map(|p| (p.0 - mt).powi(2)).sum();
    num / den
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyProductionTable {
    /// Window in driving periods.
    pub window_periods: (f64, f64),
    pub chaotic: Vec<EntropyRate>,
    /// Same diffusion values with the drive switched off.
    pub regular: Vec<EntropyRate>,
    /// Largest over smallest chaotic linear-entropy rate.
    pub spread: f64,
}

impl EntropyProductionTable {
    pub fn from_runs(cfg: &ChaosConfig, chaotic: &[ChaosRun], regular: &[ChaosRun]) -> Result<Self> {
        let window = (cfg.entropy_window.0 * cfg.period(), cfg.entropy_window.1 * cfg.period());
        let chaotic = chaotic.iter().map(|r| entropy_rate(r, window)).collect::<Result<Vec<_>>>()?;
        let regular = regular.iter().map(|r| entropy_rate(r, window)).collect::<Result<Vec<_>>>()?;
        let rates: Vec<f64> = chaotic.iter().map(|r| r.linear_entropy_rate).collect();
        let max = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self { window_periods: cfg.entropy_window, chaotic, regular, spread: max / min })
    }
}

/// Entropy production of the driven and undriven double well for each
/// diffusion value, measured in the configured post-transient window.
pub fn entropy_production(cfg: &ChaosConfig, diffusions: &[f64]) -> Result<EntropyProductionTable> {
    if diffusions.is_empty() {
        return Err(invalid("diffusions", "need at least one value"));
    }
    let regular_cfg = ChaosConfig { drive_amplitude: 0.0, ..cfg.clone() };
    let chaotic = diffusions.iter().map(|&d| run_quantum(cfg, d)).collect::<Result<Vec<_>>>()?;
    let regular = diffusions.iter().map(|&d| run_quantum(&regular_cfg, d)).collect::<Result<Vec<_>>>()?;
    EntropyProductionTable::from_runs(cfg, &chaotic, &regular)
}
