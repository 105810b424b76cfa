use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BathParams, PotentialSpec};
use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::spectral::{derivative_multiplier, transpose_in_place, Spectral};
use crate::state::DensityMatrix;

/// Which generator terms are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Terms {
    pub hamiltonian: bool,
    pub friction: bool,
    pub decoherence: bool,
}

impl Default for Terms {
    fn default() -> Self {
        Self { hamiltonian: true, friction: true, decoherence: true }
    }
}

impl Terms {
    pub fn unitary() -> Self {
        Self { hamiltonian: true, friction: false, decoherence: false }
    }

    pub fn decoherence_only() -> Self {
        Self { hamiltonian: false, friction: false, decoherence: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub t_final: f64,
    pub dt: f64,
    /// Time between saved snapshots; `None` keeps only the initial and final state.
    pub snapshot_interval: Option<f64>,
    pub terms: Terms,
    /// Eigen-solve every snapshot for the minimum eigenvalue and entropy.
    pub track_spectrum: bool,
    /// Keep the state at every save point; otherwise only the final state is
    /// kept and earlier save points contribute diagnostics alone.
    pub retain_states: bool,
}

impl EvolveOptions {
    pub fn new(t_final: f64, dt: f64) -> Self {
        Self { t_final, dt, snapshot_interval: None, terms: Terms::default(), track_spectrum: false, retain_states: true }
    }

    pub fn retain_states(mut self, on: bool) -> Self {
        self.retain_states = on;
        self
    }

    pub fn snapshot_every(mut self, interval: f64) -> Self {
        self.snapshot_interval = Some(interval);
        self
    }

    pub fn terms(mut self, terms: Terms) -> Self {
        self.terms = terms;
        self
    }

    pub fn track_spectrum(mut self, on: bool) -> Self {
        self.track_spectrum = on;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDiagnostics {
    pub time: f64,
    pub purity: f64,
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub energy: f64,
    pub min_eigenvalue: Option<f64>,
    pub entropy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub rho: DensityMatrix,
    pub diagnostics: SnapshotDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    /// Saved states: every save point, or only the last one when states are
    /// not retained.
    pub snapshots: Vec<Snapshot>,
    /// Diagnostics at every save point, the initial state included.
    pub history: Vec<SnapshotDiagnostics>,
    pub warnings: Vec<String>,
    pub steps: usize,
    pub dt: f64,
}

impl EvolutionResult {
    pub fn final_state(&self) -> &DensityMatrix {
        &self.snapshots.last().expect("evolution keeps the initial snapshot").rho
    }

    pub fn max_trace_error(&self) -> f64 {
        self.history.iter().map(|d| d.trace_error).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> Option<f64> {
        self.history.iter().filter_map(|d| d.min_eigenvalue).reduce(f64::min)
    }
}

const TRACE_TOLERANCE: f64 = 1e-6;
const ESCAPE_TOLERANCE: f64 = 1e-6;
const ESCAPE_CELLS: usize = 4;
const STEP_SAFETY: f64 = 0.1;

/// Strang-split propagator for one fixed step size.
///
/// One step is `P(h/2) · K · P(h/2)` where `P` multiplies by the potential
/// phase `e^{−i(V(x)−V(x′))τ}` and the decoherence factor `e^{−D(x−x′)²τ}`
/// (both diagonal in `(x, x′)`), and `K` is the exact kinetic propagator in
/// the joint Fourier space. With friction on, `K` becomes
/// `K(h/2) · F(h) · K(h/2)`, where `F` integrates
/// `−γ(x−x′)(∂ₓ − ∂ₓ′)ρ` by a second-order Taylor step with spectral
/// derivatives.
pub struct MasterEquation {
    grid: Grid,
    bath: BathParams,
    potential: PotentialSpec,
    terms: Terms,
    dt: f64,
    spectral: Spectral,
    positions: Vec<f64>,
    kinetic: Vec<Complex64>,
    derivative: Vec<Complex64>,
    /// `e^{−D v² h/2}` indexed by `i − j + n − 1`.
    coherence: Vec<f64>,
    /// Static part of `e^{−iV h/2}` when the potential is undriven.
    static_phase: Vec<Complex64>,
    phase: Vec<Complex64>,
    work: Vec<Complex64>,
    work2: Vec<Complex64>,
}

/// Largest admissible step and the constraint that sets it.
///
/// The kinetic, potential and decoherence factors are exact exponentials, so
/// the bound follows the physical rates: the fastest dynamical frequency
/// (drive or `√|V″|/m` anywhere on the grid), decoherence across the whole
/// grid `D(2L)²`, and friction across the grid `γ·2L·2k_max`, which keeps
/// the explicit friction step stable for the shortest wavelengths.
pub fn step_limit(grid: &Grid, bath: &BathParams, potential: &PotentialSpec, terms: Terms) -> (f64, &'static str) {
    let mut rates: Vec<(f64, &'static str)> = Vec::new();
    if terms.hamiltonian {
        let curvature = grid.positions().iter().map(|&x| potential.second_derivative(x).abs()).fold(0.0, f64::max);
        let omega = (curvature / bath.mass).sqrt().max(potential.drive_frequency.abs());
        rates.push((omega, "dynamical frequency"));
    }
    if terms.decoherence {
        let span = 2.0 * grid.half_extent();
        rates.push((bath.diffusion * span * span, "decoherence across the grid"));
    }
    if terms.friction {
        // The explicit friction step sees γ(x−x′)(k−k′) at its largest.
        let span = 2.0 * grid.half_extent();
        let k_max = std::f64::consts::PI / grid.dx();
        rates.push((bath.gamma * span * 2.0 * k_max, "friction across the grid"));
    }
    rates
        .into_iter()
        .filter(|(r, _)| *r > 0.0)
        .map(|(r, c)| (STEP_SAFETY / r, c))
        .fold((f64::INFINITY, "none"), |a, b| if b.0 < a.0 { b } else { a })
}

impl MasterEquation {
    pub fn new(grid: Grid, bath: BathParams, potential: PotentialSpec, dt: f64, terms: Terms) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(invalid("dt", format!("{dt} must be positive")));
        }
        let (limit, constraint) = step_limit(&grid, &bath, &potential, terms);
        if dt > limit {
            return Err(Error::StepTooLarge { dt, limit, constraint });
        }
        let n = grid.n();
        let k = grid.fft_wavenumbers();
        let friction_on = terms.friction && bath.gamma > 0.0;
        let tau = if friction_on { dt / 2.0 } else { dt };
        let mut kinetic = Vec::with_capacity(n * n);
        let mut derivative = Vec::with_capacity(n * n);
        let dk = derivative_multiplier(&k);
        // Layout after the forward 2-D transform: index j * n + i holds x-mode i, x′-mode j.
        for j in 0..n {
            for i in 0..n {
                let phase = -(k[i] * k[i] - k[j] * k[j]) * tau / (2.0 * bath.mass);
                kinetic.push(Complex64::from_polar(1.0, phase));
                derivative.push(dk[i] - dk[j]);
            }
        }
        let dx = grid.dx();
        let coherence = (0..2 * n - 1)
            .map(|d| {
                let v = (d as f64 - (n - 1) as f64) * dx;
                if terms.decoherence {
                    (-bath.diffusion * v * v * dt / 2.0).exp()
                } else {
                    1.0
                }
            })
            .collect();
        let positions = grid.positions();
        let static_phase =
            positions.iter().map(|&x| Complex64::from_polar(1.0, -potential.value(x, 0.0) * dt / 2.0)).collect();
        Ok(Self {
            grid,
            bath,
            potential,
            terms,
            dt,
            spectral: Spectral::new(n),
            positions,
            kinetic,
            derivative,
            coherence,
            static_phase,
            phase: vec![Complex64::new(0.0, 0.0); n],
            work: vec![Complex64::new(0.0, 0.0); n * n],
            work2: vec![Complex64::new(0.0, 0.0); n * n],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn bath(&self) -> &BathParams {
        &self.bath
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    /// Advances `rho` from `t` to `t + dt`.
    pub fn step(&mut self, rho: &mut DensityMatrix, t: f64) {
        self.diagonal_half_step(rho.entries_mut(), t);
        if self.terms.hamiltonian {
            if self.terms.friction && self.bath.gamma > 0.0 {
                self.spectral.apply_multiplier_2d(rho.entries_mut(), &self.kinetic);
                self.friction_step(rho.entries_mut());
                self.spectral.apply_multiplier_2d(rho.entries_mut(), &self.kinetic);
            } else {
                self.spectral.apply_multiplier_2d(rho.entries_mut(), &self.kinetic);
            }
        } else if self.terms.friction && self.bath.gamma > 0.0 {
            self.friction_step(rho.entries_mut());
        }
        self.diagonal_half_step(rho.entries_mut(), t + self.dt);
    }

    fn diagonal_half_step(&mut self, rho: &mut [Complex64], t: f64) {
        let n = self.grid.n();
        let h = self.dt / 2.0;
        let with_phase = self.terms.hamiltonian;
        if with_phase {
            if self.potential.is_driven() {
                for (p, &x) in self.phase.iter_mut().zip(&self.positions) {
                    *p = Complex64::from_polar(1.0, -self.potential.value(x, t) * h);
                }
            } else {
                self.phase.copy_from_slice(&self.static_phase);
            }
        }
        if !with_phase && !self.terms.decoherence {
            return;
        }
        for i in 0..n {
            let row = &mut rho[i * n..(i + 1) * n];
            // coh[n − 1 − j] is the factor for offset i − j.
            let coh = &self.coherence[i..i + n];
            if with_phase {
                let pi = self.phase[i];
                for (j, e) in row.iter_mut().enumerate() {
                    *e *= pi * self.phase[j].conj() * coh[n - 1 - j];
                }
            } else {
                for (j, e) in row.iter_mut().enumerate() {
                    *e *= coh[n - 1 - j];
                }
            }
        }
    }

    /// `A ρ = −γ (x−x′)(∂ₓ − ∂ₓ′) ρ`, result in `out`.
    fn apply_friction_generator(
        spectral: &mut Spectral,
        derivative: &[Complex64],
        positions: &[f64],
        gamma: f64,
        input: &[Complex64],
        out: &mut [Complex64],
    ) {
        let n = positions.len();
        out.copy_from_slice(input);
        spectral.apply_multiplier_2d(out, derivative);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] *= -gamma * (positions[i] - positions[j]);
            }
        }
    }

    fn friction_step(&mut self, rho: &mut [Complex64]) {
        let h = self.dt;
        let gamma = self.bath.gamma;
        Self::apply_friction_generator(&mut self.spectral, &self.derivative, &self.positions, gamma, rho, &mut self.work);
        Self::apply_friction_generator(&mut self.spectral, &self.derivative, &self.positions, gamma, &self.work, &mut self.work2);
        for ((r, a), aa) in rho.iter_mut().zip(&self.work).zip(&self.work2) {
            *r += a * h + aa * (0.5 * h * h);
        }
    }

    /// `Tr(ρH)` at time `t`, using the spectral kinetic energy.
    pub fn energy(&mut self, rho: &DensityMatrix, t: f64) -> f64 {
        let n = self.grid.n();
        let dx = self.grid.dx();
        let potential: f64 =
            (0..n).map(|i| self.potential.value(self.positions[i], t) * rho.get(i, i).re).sum::<f64>() * dx;
        potential + kinetic_energy(&mut self.spectral, &self.grid, rho, self.bath.mass)
    }

    /// Probability within the outermost cells of the grid.
    pub fn boundary_mass(rho: &DensityMatrix) -> f64 {
        let n = rho.grid().n();
        let dx = rho.grid().dx();
        (0..ESCAPE_CELLS).chain(n - ESCAPE_CELLS..n).map(|i| rho.get(i, i).re.abs()).sum::<f64>() * dx
    }
}

/// `Tr(ρ p²/2m)` from the diagonal of `ρ` in the momentum representation.
pub fn kinetic_energy(spectral: &mut Spectral, grid: &Grid, rho: &DensityMatrix, mass: f64) -> f64 {
    let n = grid.n();
    let mut buf = rho.entries().to_vec();
    // Rows carry x′: e^{+ik′x′}; columns carry x: e^{−ikx}.
    spectral.inverse(&mut buf);
    transpose_in_place(&mut buf, n);
    spectral.forward(&mut buf);
    let k = grid.fft_wavenumbers();
    let (mut num, mut den) = (0.0, 0.0);
    for m in 0..n {
        let d = buf[m * n + m].re;
        num += k[m] * k[m] * d;
        den += d;
    }
    if den == 0.0 {
        return 0.0;
    }
    rho.trace() * num / den / (2.0 * mass)
}

fn diagnostics(eq: &mut MasterEquation, rho: &DensityMatrix, time: f64, spectrum: bool) -> SnapshotDiagnostics {
    let (min_eigenvalue, entropy) = if spectrum {
        let ev = rho.eigenvalues();
        (Some(ev[0]), crate::state::entropy_from_spectrum(&ev).ok())
    } else {
        (None, None)
    };
    SnapshotDiagnostics {
        time,
        purity: rho.purity(),
        trace_error: (rho.trace() - 1.0).abs(),
        hermiticity_error: rho.hermiticity_error(),
        energy: eq.energy(rho, time),
        min_eigenvalue,
        entropy,
    }
}

/// Number of steps, the step actually used, and the save cadence in steps
/// for a run of `t_final` with requested step `dt`.
///
/// The step is shortened so the run ends exactly at `t_final`. When the run
/// is also a whole number of save intervals, it is shortened further so
/// every interval is a whole number of steps and save times fall exactly on
/// multiples of the interval.
pub(crate) fn step_schedule(t_final: f64, dt: f64, interval: Option<f64>, name: &'static str) -> Result<(usize, f64, usize)> {
    let mut steps = if t_final == 0.0 { 0 } else { (t_final / dt - 1e-9).ceil().max(1.0) as usize };
    let mut used = if steps == 0 { dt } else { t_final / steps as f64 };
    if let Some(iv) = interval.filter(|&iv| iv > 0.0 && steps > 0) {
        let intervals = t_final / iv;
        if intervals >= 1.0 && (intervals - intervals.round()).abs() < 1e-9 * intervals {
            let per = (iv / dt - 1e-9).ceil().max(1.0) as usize;
            used = iv / per as f64;
            steps = per * intervals.round() as usize;
        }
    }
    let every = match interval {
        Some(iv) if iv > 0.0 => ((iv / used).round() as usize).max(1),
        Some(iv) => return Err(invalid(name, format!("{iv} must be positive"))),
        None => steps.max(1),
    };
    Ok((steps, used, every))
}

/// Runs the master equation and hands every snapshot to `on_snapshot` as it
/// is produced; the initial state is snapshot zero.
pub fn evolve_with(
    rho0: &DensityMatrix,
    bath: &BathParams,
    potential: &PotentialSpec,
    options: &EvolveOptions,
    mut on_snapshot: impl FnMut(&Snapshot),
) -> Result<EvolutionResult> {
    if !(options.t_final >= 0.0) || !options.t_final.is_finite() {
        return Err(invalid("t_final", format!("{} must be non-negative", options.t_final)));
    }
    let (steps, dt, save_every) = step_schedule(options.t_final, options.dt, options.snapshot_interval, "snapshot_interval")?;
    let mut eq = MasterEquation::new(*rho0.grid(), *bath, *potential, dt, options.terms)?;
    let mut warnings = Vec::new();
    if let Some(w) = bath.validity_warning() {
        warnings.push(w);
    }

    let mut rho = rho0.clone();
    let mut snapshots = Vec::new();
    let mut history = Vec::new();
    let mut record = |eq: &mut MasterEquation, rho: &DensityMatrix, time: f64, last: bool| -> Result<()> {
        let d = diagnostics(eq, rho, time, options.track_spectrum);
        let snap = Snapshot { time, rho: rho.clone(), diagnostics: d };
        on_snapshot(&snap);
        history.push(d);
        if options.retain_states || last {
            snapshots.push(snap);
        }
        if d.trace_error > TRACE_TOLERANCE {
            return Err(Error::TraceDrift { time, error: d.trace_error });
        }
        Ok(())
    };
    check_escape(&rho, 0.0)?;
    record(&mut eq, &rho, 0.0, steps == 0)?;
    for s in 0..steps {
        let t = s as f64 * dt;
        eq.step(&mut rho, t);
        let t_next = (s + 1) as f64 * dt;
        check_escape(&rho, t_next)?;
        if (s + 1) % save_every == 0 || s + 1 == steps {
            record(&mut eq, &rho, t_next, s + 1 == steps)?;
        }
    }
    if let Some(min) = history.iter().filter_map(|d| d.min_eigenvalue).reduce(f64::min) {
        if min < -crate::state::NEGATIVITY_TOLERANCE {
            warnings.push(format!("positivity violated: minimum eigenvalue {min:.3e}"));
        }
    }
    Ok(EvolutionResult { snapshots, history, warnings, steps, dt })
}

fn check_escape(rho: &DensityMatrix, time: f64) -> Result<()> {
    let mass = MasterEquation::boundary_mass(rho);
    if mass > ESCAPE_TOLERANCE {
        return Err(Error::GridEscape { time, mass });
    }
    Ok(())
}

pub fn evolve(
    rho0: &DensityMatrix,
    bath: &BathParams,
    potential: &PotentialSpec,
    options: &EvolveOptions,
) -> Result<EvolutionResult> {
    evolve_with(rho0, bath, potential, options, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{make_gaussian, GaussianSpec};

    #[test]
    fn rejects_oversized_steps() {
        let grid = Grid::new(64, 8.0).unwrap();
        let bath = BathParams::with_diffusion(1.0, 0.0, 1.0).unwrap();
        let err = MasterEquation::new(grid, bath, PotentialSpec::harmonic(1.0, 1.0), 0.01, Terms::default());
        assert!(matches!(err, Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn kinetic_energy_of_gaussian() {
        let grid = Grid::new(128, 10.0).unwrap();
        let psi = make_gaussian(GaussianSpec::new(0.0, 1.5, 0.8), grid).unwrap();
        let rho = DensityMatrix::pure(&psi);
        let mut sp = Spectral::new(grid.n());
        // ⟨p²⟩/2 = (p0² + 1/(4δ²))/2
        let expect = 0.5 * (1.5 * 1.5 + 1.0 / (4.0 * 0.64));
        assert!((kinetic_energy(&mut sp, &grid, &rho, 1.0) - expect).abs() < 1e-9);
    }

    #[test]
    fn escape_is_detected() {
        let grid = Grid::new(64, 8.0).unwrap();
        let psi = make_gaussian(GaussianSpec::new(7.0, 0.0, 0.5), grid).unwrap();
        let rho = DensityMatrix::pure(&psi);
        let bath = BathParams::isolated(1.0).unwrap();
        let r = evolve(&rho, &bath, &PotentialSpec::free(), &EvolveOptions::new(0.1, 0.01));
        assert!(matches!(r, Err(Error::GridEscape { .. })));
    }

    #[test]
    fn zero_duration_keeps_initial_state() {
        let grid = Grid::new(64, 8.0).unwrap();
        let rho = DensityMatrix::pure(&make_gaussian(GaussianSpec::new(0.0, 0.0, 1.0), grid).unwrap());
        let bath = BathParams::isolated(1.0).unwrap();
        let r = evolve(&rho, &bath, &PotentialSpec::free(), &EvolveOptions::new(0.0, 0.01)).unwrap();
        assert_eq!(r.snapshots.len(), 1);
        assert_eq!(r.final_state(), &rho);
    }
}
