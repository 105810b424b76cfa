//! The eight experiments. Each one is first planned, which parses and
//! validates everything without touching the disk, then executed.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::Serialize;

use super::config::{ConfigError, Experiment, ExperimentConfig};
use super::gridfile::{GridFile, GridPayload};
use super::manifest::{ArtifactSink, SolverSummary};
use super::series::Series;
use super::LabError;
use crate::brownian::timescales::{format_report, timescale_report, Scenario, TimescaleRow};
use crate::brownian::{evolve_with, step_limit, BathParams, EvolveOptions, PotentialSpec, Terms};
use crate::discord::{discord_landscape, min_discord, mutual_information};
use crate::grid::Grid;
use crate::measurement::{
    correlated_density, decohere_via_environment, entropy_gain, premeasure, reduce, rotate_detector_basis, EnvCoupling,
    QubitPairDensity,
};
use crate::phase_space::{
    coherence_length, lyapunov_exponent, nonlinearity_scale, run_classical, run_quantum, ChaosConfig, ChaosRun,
    EntropyProductionTable,
};
use crate::sieve::{run_sieve, SieveConfig};
use crate::state::{make_cat, make_gaussian, make_momentum_cat, DensityMatrix, GaussianSpec};
use crate::wigner::{
    cat_wigner_with_phase, diagnostics, gaussian_wigner_closed_form, marginals, sub_planck_action, wigner_of_density,
    WignerGrid,
};

/// Everything an experiment needs, already validated.
#[derive(Debug)]
pub(crate) enum Plan {
    Timescales(Vec<TimescaleRow>),
    Measure(MeasurePlan),
    Discord(DiscordPlan),
    Cat(CatPlan),
    Wigner(WignerPlan),
    Sieve(SieveConfig),
    Chaos(ChaosPlan),
    EntropyProduction(ChaosPlan),
}

/// Library errors found while planning are configuration problems.
fn bad(e: crate::Error) -> LabError {
    LabError::Config(e.to_string())
}

fn cfg_err(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}

impl From<ConfigError> for LabError {
    fn from(e: ConfigError) -> Self {
        LabError::Config(e.0)
    }
}

fn flag(cfg: &ExperimentConfig, key: &str) -> Result<bool, LabError> {
    Ok(cfg.get::<bool>(key)?)
}

fn count<T: FromStr>(cfg: &ExperimentConfig, key: &str) -> Result<T, LabError> {
    Ok(cfg.get::<T>(key)?)
}

pub(crate) fn plan(cfg: &ExperimentConfig) -> Result<Plan, LabError> {
    flag(cfg, "plot")?;
    Ok(match cfg.experiment {
        Experiment::Timescales => {
            let mut scenarios = vec![Scenario {
                name: cfg.raw("name").to_string(),
                mass: cfg.f64("mass")?,
                temperature: cfg.f64("temperature")?,
                relaxation_time: cfg.f64("relaxation_time")?,
                separation: cfg.f64("separation")?,
            }];
            if flag(cfg, "electron")? {
                scenarios.push(Scenario::electron());
            }
            Plan::Timescales(timescale_report(&scenarios).map_err(bad)?)
        }
        Experiment::Measure => Plan::Measure(MeasurePlan::new(cfg)?),
        Experiment::Discord => Plan::Discord(DiscordPlan::new(cfg)?),
        Experiment::Cat => Plan::Cat(CatPlan::new(cfg)?),
        Experiment::Wigner => Plan::Wigner(WignerPlan::new(cfg)?),
        Experiment::Sieve => Plan::Sieve(sieve_config(cfg)?),
        Experiment::Chaos => Plan::Chaos(ChaosPlan::new(cfg)?),
        Experiment::EntropyProduction => Plan::EntropyProduction(ChaosPlan::new(cfg)?),
    })
}

/// What a run leaves behind besides its files.
#[derive(Debug, Default)]
pub(crate) struct RunNotes {
    pub solver: SolverSummary,
    pub warnings: Vec<String>,
}

pub(crate) fn execute(plan: Plan, plot: bool, sink: &mut ArtifactSink, notes: &mut RunNotes) -> Result<(), LabError> {
    let script = match plan {
        Plan::Timescales(rows) => {
            sink.write("timescales.csv", format_report(&rows).as_bytes())?;
            None
        }
        Plan::Measure(p) => {
            p.execute(sink)?;
            None
        }
        Plan::Discord(p) => p.execute(sink)?,
        Plan::Cat(p) => Some(p.execute(sink, notes)?),
        Plan::Wigner(p) => Some(p.execute(sink)?),
        Plan::Sieve(c) => Some(sieve(&c, sink, notes)?),
        Plan::Chaos(p) => Some(p.chaos(sink, notes)?),
        Plan::EntropyProduction(p) => Some(p.entropy_production(sink, notes)?),
    };
    if let (true, Some(script)) = (plot, script) {
        sink.write("plot.gp", script.as_bytes())?;
    }
    Ok(())
}

fn write_series(sink: &mut ArtifactSink, name: &str, series: &Series) -> Result<(), LabError> {
    sink.write(name, series.to_csv()?.as_bytes())?;
    Ok(())
}

fn write_grid(sink: &mut ArtifactSink, name: &str, grid: &GridFile) -> Result<(), LabError> {
    sink.write(name, &grid.encode()?)?;
    Ok(())
}

fn write_json(sink: &mut ArtifactSink, name: &str, value: &impl Serialize) -> Result<(), LabError> {
    let mut text = serde_json::to_string_pretty(value).expect("summaries serialize");
    text.push('\n');
    sink.write(name, text.as_bytes())?;
    Ok(())
}

fn qubit_grid(rho: &QubitPairDensity) -> GridFile {
    // Row-major, like every other payload.
    let entries = (0..4).flat_map(|i| (0..4).map(move |j| rho.0[(i, j)])).collect();
    GridFile::new(4, 4, (0.0, 3.0), (0.0, 3.0), GridPayload::Complex(entries)).expect("4x4")
}

// ---------------------------------------------------------------- measure

#[derive(Debug)]
pub(crate) struct MeasurePlan {
    alpha: Complex64,
    beta: Complex64,
    env: EnvCoupling,
    theta: f64,
    azimuth: f64,
}

#[derive(Serialize)]
struct MeasureSummary {
    entropy_gain: f64,
    entropy_correlated: f64,
    entropy_reduced: f64,
    entropy_environment: f64,
    purity_correlated: f64,
    purity_reduced: f64,
    purity_environment: f64,
    schmidt_weights: [f64; 2],
    rotated_basis_deg: [f64; 2],
    branch_probabilities: [f64; 2],
    partner_overlap: f64,
}

impl MeasurePlan {
    fn new(cfg: &ExperimentConfig) -> Result<Self, LabError> {
        let alpha = Complex64::from_polar(cfg.f64("alpha")?, cfg.f64("alpha_phase")?);
        let beta = Complex64::from_polar(cfg.f64("beta")?, cfg.f64("beta_phase")?);
        premeasure(alpha, beta).map_err(bad)?;
        let env = EnvCoupling::new(Complex64::from_polar(cfg.f64("overlap")?, cfg.f64("overlap_phase")?)).map_err(bad)?;
        Ok(Self { alpha, beta, env, theta: cfg.f64("theta")?, azimuth: cfg.f64("azimuth")? })
    }

    fn execute(&self, sink: &mut ArtifactSink) -> Result<(), LabError> {
        let phi = premeasure(self.alpha, self.beta)?;
        let correlated = correlated_density(&phi);
        let reduced = reduce(&correlated);
        let environment = decohere_via_environment(&correlated, self.env);
        let branches = rotate_detector_basis(&phi, self.theta.to_radians(), self.azimuth.to_radians());
        let summary = MeasureSummary {
            entropy_gain: entropy_gain(self.alpha, self.beta)?,
            entropy_correlated: correlated.entropy(),
            entropy_reduced: reduced.entropy(),
            entropy_environment: environment.entropy(),
            purity_correlated: correlated.purity(),
            purity_reduced: reduced.purity(),
            purity_environment: environment.purity(),
            schmidt_weights: phi.schmidt_weights(),
            rotated_basis_deg: [self.theta, self.azimuth],
            branch_probabilities: branches.branches.map(|b| b.probability),
            partner_overlap: branches.partner_overlap(),
        };
        write_grid(sink, "rho_correlated.wgrd", &qubit_grid(&correlated))?;
        write_grid(sink, "rho_reduced.wgrd", &qubit_grid(&reduced))?;
        write_grid(sink, "rho_environment.wgrd", &qubit_grid(&environment))?;
        write_json(sink, "summary.json", &summary)
    }
}

// ---------------------------------------------------------------- discord

#[derive(Debug)]
pub(crate) struct DiscordPlan {
    rho: QubitPairDensity,
    landscape_step: f64,
}

#[derive(Serialize)]
struct DiscordSummary {
    mutual_information: f64,
    classical_correlation: f64,
    discord: f64,
    theta_deg: f64,
    phi_deg: f64,
    evaluations: usize,
    landscape_min: Option<f64>,
}

/// Named states, or a 4×4 matrix from a text file: one row per line,
/// entries like `0.5`, `0.5+0.1i`, separated by whitespace or commas.
pub fn named_qubit_state(name: &str) -> Option<QubitPairDensity> {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let correlated = || correlated_density(&premeasure(h, h).expect("normalized"));
    match name {
        "bell" => Some(correlated()),
        "reduced" => Some(reduce(&correlated())),
        "product" => {
            Some(correlated_density(&premeasure(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)).expect("normalized")))
        }
        _ => None,
    }
}

pub fn parse_qubit_matrix(text: &str) -> Result<QubitPairDensity, ConfigError> {
    let rows: Vec<Vec<Complex64>> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| Complex64::from_str(t).map_err(|_| ConfigError(format!("matrix: cannot parse entry `{t}`"))))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
        return Err(ConfigError("matrix: need 4 rows of 4 entries".into()));
    }
    let rho = QubitPairDensity(Matrix4::from_fn(|i, j| rows[i][j]));
    if !rho.is_valid(1e-9) {
        return Err(ConfigError("matrix: not a Hermitian, unit-trace, positive density matrix".into()));
    }
    Ok(rho)
}

impl DiscordPlan {
    fn new(cfg: &ExperimentConfig) -> Result<Self, LabError> {
        let state = cfg.raw("state");
        let rho = match state {
            "matrix" => {
                let path = PathBuf::from(cfg.raw("matrix"));
                if path.as_os_str().is_empty() {
                    return Err(cfg_err("state = matrix needs `matrix = <file>`"));
                }
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| LabError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
                parse_qubit_matrix(&text)?
            }
            name => named_qubit_state(name)
                .ok_or_else(|| cfg_err(format!("state: `{name}` is not one of bell, reduced, product, matrix")))?,
        };
        let landscape_step = cfg.f64("landscape_step")?;
        let cells = 180.0 / landscape_step;
        if landscape_step < 0.0 || (landscape_step > 0.0 && (cells - cells.round()).abs() > 1e-9) {
            return Err(cfg_err("landscape_step: must be 0 or divide 180 degrees evenly"));
        }
        Ok(Self { rho, landscape_step })
    }

    fn execute(&self, sink: &mut ArtifactSink) -> Result<Option<String>, LabError> {
        let best = min_discord(&self.rho)?;
        let mutual = mutual_information(&self.rho);
        let mut landscape_min = None;
        let mut script = None;
        if self.landscape_step > 0.0 {
            let rows = discord_landscape(&self.rho, self.landscape_step);
            let (r, c) = (rows.len(), rows[0].len());
            let values: Vec<f64> = rows.into_iter().flatten().collect();
            landscape_min = values.iter().copied().reduce(f64::min);
            let grid = GridFile::new(r as u32, c as u32, (0.0, 180.0), (0.0, 360.0 - self.landscape_step), GridPayload::Real(values))?;
            write_grid(sink, "landscape.wgrd", &grid)?;
            script = Some(format!(
                "# discord over detector bases; rows theta, columns phi (degrees)\n\
                 set xlabel 'phi (deg)'\nset ylabel 'theta (deg)'\nset view map\n\
                 splot 'landscape.wgrd' binary skip=48 array=({c},{r}) format='%float64' \
                 dx={s} dy={s} origin=(0,0,0) with image notitle\n",
                s = self.landscape_step
            ));
        }
        let summary = DiscordSummary {
            mutual_information: mutual,
            classical_correlation: mutual - best.value,
            discord: best.value,
            theta_deg: best.basis.theta.to_degrees(),
            phi_deg: best.basis.phi.to_degrees(),
            evaluations: best.evaluations,
            landscape_min,
        };
        write_json(sink, "summary.json", &summary)?;
        Ok(script)
    }
}

// ---------------------------------------------------------------- cat

#[derive(Debug)]
pub(crate) struct CatPlan {
    rho0: DensityMatrix,
    bath: BathParams,
    potential: PotentialSpec,
    separation: f64,
    t_final: f64,
    dt: f64,
    snapshots: usize,
    wigner: bool,
}

/// Refuses a time step above the solver's stability bound before any
/// output exists.
fn check_step(grid: &Grid, bath: &BathParams, potential: &PotentialSpec, terms: Terms, dt: f64) -> Result<(), LabError> {
    if !(dt > 0.0) {
        return Err(cfg_err("dt: must be positive"));
    }
    let (limit, constraint) = step_limit(grid, bath, potential, terms);
    if dt > limit {
        return Err(bad(crate::Error::StepTooLarge { dt, limit, constraint }));
    }
    Ok(())
}

impl CatPlan {
    fn new(cfg: &ExperimentConfig) -> Result<Self, LabError> {
        let grid = Grid::new(count(cfg, "n")?, cfg.f64("L")?).map_err(bad)?;
        let separation = cfg.f64("dx")?;
        let psi = make_cat(separation, cfg.f64("delta")?, cfg.f64("phase")?, grid).map_err(bad)?;
        let mass = cfg.f64("mass")?;
        let bath = BathParams::with_diffusion(mass, cfg.f64("gamma")?, cfg.f64("D")?).map_err(bad)?;
        let potential = PotentialSpec::harmonic(mass, cfg.f64("omega")?);
        let dt = cfg.f64("dt")?;
        check_step(&grid, &bath, &potential, Terms::default(), dt)?;
        let t_final = cfg.f64("t")?;
        if !(t_final > 0.0) {
            return Err(cfg_err("t: must be positive"));
        }
        let snapshots: usize = count(cfg, "snapshots")?;
        if snapshots == 0 {
            return Err(cfg_err("snapshots: must be at least 1"));
        }
        Ok(Self {
            rho0: DensityMatrix::pure(&psi),
            bath,
            potential,
            separation,
            t_final,
            dt,
            snapshots,
            wigner: flag(cfg, "wigner")?,
        })
    }

    fn execute(&self, sink: &mut ArtifactSink, notes: &mut RunNotes) -> Result<String, LabError> {
        let grid = *self.rho0.grid();
        let nearest = |x: f64| ((x + grid.half_extent()) / grid.dx()).round() as usize;
        let (a, b) = (nearest(-self.separation / 2.0), nearest(self.separation / 2.0));
        let initial = self.rho0.get(a, b).norm();
        let options = EvolveOptions::new(self.t_final, self.dt)
            .snapshot_every(self.t_final / self.snapshots as f64)
            .track_spectrum(true)
            .retain_states(false);
        let mut series = Series::new([
            "t",
            "purity",
            "trace_error",
            "energy",
            "min_eigenvalue",
            "entropy",
            "coherence",
            "coherence_pure_decoherence",
        ]);
        let mut failure: Option<LabError> = None;
        let mut index = 0usize;
        let rate = self.bath.diffusion * self.separation * self.separation;
        let outcome = evolve_with(&self.rho0, &self.bath, &self.potential, &options, |snap| {
            if failure.is_some() {
                return;
            }
            let d = &snap.diagnostics;
            let row = vec![
                snap.time,
                d.purity,
                d.trace_error,
                d.energy,
                d.min_eigenvalue.unwrap_or(f64::NAN),
                d.entropy.unwrap_or(f64::NAN),
                snap.rho.get(a, b).norm() / initial,
                (-rate * snap.time).exp(),
            ];
            let write = || -> Result<(), LabError> {
                series.push(row)?;
                write_grid(sink, &format!("rho_{index:03}.wgrd"), &GridFile::from(&snap.rho))?;
                if self.wigner {
                    write_grid(sink, &format!("wigner_{index:03}.wgrd"), &GridFile::from(&wigner_of_density(&snap.rho)))?;
                }
                Ok(())
            };
            failure = write().err();
            index += 1;
        });
        if let Some(e) = failure {
            return Err(e);
        }
        let result = match outcome {
            Ok(r) => r,
            Err(e) => {
                // Keep the samples taken before the failure.
                write_series(sink, "series.csv", &series)?;
                return Err(e.into());
            }
        };
        notes.solver.trace_error(result.max_trace_error());
        if let Some(m) = result.min_eigenvalue() {
            notes.solver.eigenvalue(m);
        }
        notes.warnings.extend(result.warnings.iter().cloned());
        write_series(sink, "series.csv", &series)?;
        Ok("set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\nset logscale y\n\
            plot 'series.csv' using 1:7 with linespoints, '' using 1:8 with lines, '' using 1:2 with lines\n"
            .to_string())
    }
}

// ---------------------------------------------------------------- wigner

#[derive(Debug)]
pub(crate) struct WignerPlan {
    rho: DensityMatrix,
    closed_form: Option<WignerGrid>,
    expected_fringe: Option<f64>,
    action: Option<f64>,
}

#[derive(Serialize)]
struct WignerSummary {
    normalization: f64,
    negativity: f64,
    purity: f64,
    density_purity: f64,
    fringe_wavelength: Option<f64>,
    expected_fringe_wavelength: Option<f64>,
    sub_planck_action: Option<f64>,
    closed_form_error: Option<f64>,
    imaginary_residue: f64,
}

impl WignerPlan {
    fn new(cfg: &ExperimentConfig) -> Result<Self, LabError> {
        let grid = Grid::new(count(cfg, "n")?, cfg.f64("L")?).map_err(bad)?;
        let (x0, p0, width) = (cfg.f64("x0")?, cfg.f64("p0")?, cfg.f64("width")?);
        let (sep, phase) = (cfg.f64("dx")?, cfg.f64("phase")?);
        let action = cfg.f64("action")?;
        if action < 0.0 {
            return Err(cfg_err("action: must be non-negative (0 skips the sub-Planck scale)"));
        }
        let (rho, closed_form, expected_fringe) = match cfg.raw("state") {
            "gaussian" => {
                let spec = GaussianSpec::new(x0, p0, width);
                let psi = make_gaussian(spec, grid).map_err(bad)?;
                (DensityMatrix::pure(&psi), Some(gaussian_wigner_closed_form(spec, grid)), None)
            }
            "cat" => {
                let psi = make_cat(sep, width, phase, grid).map_err(bad)?;
                let w = cat_wigner_with_phase(sep, width, phase, grid).map_err(bad)?;
                (DensityMatrix::pure(&psi), Some(w), Some(2.0 * PI / sep))
            }
            "momentum-cat" => {
                let psi = make_momentum_cat(cfg.f64("dp")?, width, grid).map_err(bad)?;
                (DensityMatrix::pure(&psi), None, None)
            }
            "mixture" => {
                let specs = [GaussianSpec::new(-sep / 2.0, 0.0, width), GaussianSpec::new(sep / 2.0, 0.0, width)];
                let left = make_gaussian(specs[0], grid).map_err(bad)?;
                let right = make_gaussian(specs[1], grid).map_err(bad)?;
                let rho = DensityMatrix::mixture(&[(0.5, &left), (0.5, &right)]).map_err(bad)?;
                let (l, r) = (gaussian_wigner_closed_form(specs[0], grid), gaussian_wigner_closed_form(specs[1], grid));
                let avg = l.values().iter().zip(r.values()).map(|(a, b)| 0.5 * (a + b)).collect();
                (rho, Some(WignerGrid::from_values(grid, avg).map_err(bad)?), None)
            }
            other => return Err(cfg_err(format!("state: `{other}` is not one of gaussian, cat, momentum-cat, mixture"))),
        };
        if action > 0.0 {
            sub_planck_action(action).map_err(bad)?;
        }
        Ok(Self { rho, closed_form, expected_fringe, action: (action > 0.0).then_some(action) })
    }

    fn execute(&self, sink: &mut ArtifactSink) -> Result<String, LabError> {
        let w = wigner_of_density(&self.rho);
        let d = diagnostics(&w, self.action)?;
        let (px, pp) = marginals(&w);
        let grid = *w.grid();
        let x = grid.positions();
        let p = grid.momenta();
        let series = Series::from_columns(&[("x", &x), ("position", &px), ("p", &p), ("momentum", &pp)])?;
        write_grid(sink, "wigner.wgrd", &GridFile::from(&w))?;
        write_grid(sink, "rho.wgrd", &GridFile::from(&self.rho))?;
        write_series(sink, "marginals.csv", &series)?;
        let summary = WignerSummary {
            normalization: d.normalization,
            negativity: d.negativity,
            purity: d.purity,
            density_purity: self.rho.purity(),
            fringe_wavelength: d.fringe_wavelength,
            expected_fringe_wavelength: self.expected_fringe,
            sub_planck_action: d.sub_planck_action,
            closed_form_error: self.closed_form.as_ref().map(|c| c.max_abs_difference(&w)),
            imaginary_residue: w.imaginary_residue(),
        };
        write_json(sink, "summary.json", &summary)?;
        let n = grid.n();
        Ok(format!(
            "# rows x, columns p\nset view map\nset xlabel 'p'\nset ylabel 'x'\n\
             splot 'wigner.wgrd' binary skip=48 array=({n},{n}) format='%float64' \
             dx={dp} dy={dx} origin=({p0},{x0},0) with image notitle\n",
            dp = grid.dp(),
            dx = grid.dx(),
            p0 = grid.p(0),
            x0 = grid.x(0),
        ))
    }
}

// ---------------------------------------------------------------- sieve

fn sieve_config(cfg: &ExperimentConfig) -> Result<SieveConfig, LabError> {
    let c = SieveConfig {
        mass: cfg.f64("mass")?,
        omega: cfg.f64("omega")?,
        gamma_ratio: cfg.f64("gamma_ratio")?,
        temperature: cfg.f64("temperature")?,
        squeezes: cfg.list("squeezes")?,
        horizon_periods: cfg.f64("horizon")?,
        samples_per_period: count(cfg, "samples_per_period")?,
        center: cfg.f64("center")?,
        grid_points: count(cfg, "n")?,
        half_extent: cfg.f64("L")?,
        dt: cfg.f64("dt")?,
        entropy: flag(cfg, "entropy")?,
    };
    c.validate().map_err(bad)?;
    let grid = Grid::new(c.grid_points, c.half_extent).map_err(bad)?;
    for &s in &c.squeezes {
        make_gaussian(GaussianSpec::squeezed(c.center, 0.0, c.mass, c.omega, s), grid).map_err(bad)?;
    }
    check_step(&grid, &c.bath().map_err(bad)?, &PotentialSpec::harmonic(c.mass, c.omega), Terms::default(), c.dt)?;
    Ok(c)
}

#[derive(Serialize)]
struct SieveSummary {
    winner_at_horizon: f64,
    horizon: f64,
    period: f64,
}

fn squeeze_label(s: f64) -> String {
    format!("s{s}")
}

fn sieve(c: &SieveConfig, sink: &mut ArtifactSink, notes: &mut RunNotes) -> Result<String, LabError> {
    let r = run_sieve(c)?;
    notes.solver.trace_error(r.max_trace_error);
    notes.warnings.extend(r.warnings.iter().cloned());
    for trace in &r.traces {
        let mut columns: Vec<(&str, &[f64])> = vec![("t", &r.times), ("purity", &trace.purity)];
        let entropy: Vec<f64> = trace.entropy.iter().map(|e| e.unwrap_or(f64::NAN)).collect();
        if c.entropy {
            columns.push(("entropy", &entropy));
        }
        write_series(sink, &format!("sieve_{}.csv", squeeze_label(trace.squeeze)), &Series::from_columns(&columns)?)?;
    }
    let mut ranking = Series::new(std::iter::once("t".to_string()).chain((1..=c.squeezes.len()).map(|k| format!("rank_{k}"))));
    for (t, order) in r.times.iter().zip(r.rankings()) {
        ranking.push(std::iter::once(*t).chain(order).collect())?;
    }
    write_series(sink, "ranking.csv", &ranking)?;
    let summary = SieveSummary { winner_at_horizon: r.winner_at_horizon(), horizon: *r.times.last().unwrap_or(&0.0), period: c.period() };
    write_json(sink, "summary.json", &summary)?;
    let plots: Vec<String> = r
        .traces
        .iter()
        .map(|t| format!("'sieve_{0}.csv' using 1:2 with lines title '{0}'", squeeze_label(t.squeeze)))
        .collect();
    Ok(format!("set datafile separator ','\nset xlabel 't'\nset ylabel 'purity'\nplot {}\n", plots.join(", ")))
}

// ---------------------------------------------------------------- chaos

#[derive(Debug)]
pub(crate) struct ChaosPlan {
    cfg: ChaosConfig,
    diffusions: Vec<f64>,
    action: Option<f64>,
}

impl ChaosPlan {
    fn new(c: &ExperimentConfig) -> Result<Self, LabError> {
        let defaults = ChaosConfig::default();
        let (mass, a, b) = (c.f64("mass")?, c.f64("A")?, c.f64("B")?);
        let well = ChaosConfig::left_well_packet(mass, a, b);
        let auto = |key: &str, pick: fn((f64, f64)) -> f64| -> Result<f64, LabError> {
            match c.f64_or_auto(key)? {
                Some(v) => Ok(v),
                None => well.map(pick).ok_or_else(|| cfg_err(format!("{key}: `auto` needs A > 0 and B > 0; set it explicitly"))),
            }
        };
        let is_chaos = c.experiment == Experiment::Chaos;
        let mut cfg = ChaosConfig {
            mass,
            a,
            b,
            drive_amplitude: c.f64("F")?,
            drive_frequency: c.f64("omega")?,
            periods: count(c, "periods")?,
            grid_points: count(c, "n")?,
            half_extent: c.f64("L")?,
            dt: c.f64("dt")?,
            initial_center: auto("x0", |w| w.0)?,
            initial_momentum: c.f64("p0")?,
            initial_width: auto("width", |w| w.1)?,
            samples_per_period: count(c, "samples_per_period")?,
            frames_per_period: count(c, "frames_per_period")?,
            seed: c.seed,
            ..defaults
        };
        let mut action = None;
        if is_chaos {
            cfg.diffusion = c.f64("D")?;
            cfg.ensemble_size = count(c, "ensemble")?;
            cfg.lyapunov_trajectories = count(c, "lyapunov_trajectories")?;
            cfg.lyapunov_periods = count(c, "lyapunov_periods")?;
            cfg.lyapunov_warmup = count(c, "lyapunov_warmup")?;
            let a = c.f64("action")?;
            if a < 0.0 {
                return Err(cfg_err("action: must be non-negative (0 skips the sub-Planck scale)"));
            }
            action = (a > 0.0).then_some(a);
            // The window is irrelevant here but must fit inside the run.
            cfg.entropy_window = (0.0, cfg.periods as f64);
        } else {
            cfg.entropy_window = (c.f64("window_start")?, c.f64("window_end")?);
        }
        cfg.validate().map_err(bad)?;
        let diffusions = c.list("diffusions")?;
        if diffusions.is_empty() || diffusions.iter().any(|&d| d < 0.0) {
            return Err(cfg_err("diffusions: need non-negative values"));
        }
        let grid = cfg.grid().map_err(bad)?;
        make_gaussian(cfg.initial_packet(), grid).map_err(bad)?;
        let strongest = diffusions.iter().copied().fold(cfg.diffusion, f64::max);
        let terms = Terms { hamiltonian: true, friction: false, decoherence: true };
        check_step(&grid, &cfg.bath(strongest).map_err(bad)?, &cfg.potential(), terms, cfg.dt)?;
        Ok(Self { cfg, diffusions, action })
    }

    /// One quantum run per diffusion, written out as it finishes.
    fn quantum_runs(&self, cfg: &ChaosConfig, tag: &str, sink: &mut ArtifactSink, notes: &mut RunNotes) -> Result<Vec<ChaosRun>, LabError> {
        let mut runs = Vec::new();
        for &d in &self.diffusions {
            let run = run_quantum(cfg, d)?;
            notes.solver.trace_error(run.max_trace_error);
            write_grid(sink, &format!("wigner_{tag}D{d}.wgrd"), &GridFile::from(&run.final_wigner))?;
            runs.push(run);
        }
        Ok(runs)
    }

    fn columns(runs: &[ChaosRun], pick: fn(&ChaosRun) -> &[(f64, f64)], prefix: &str) -> Result<Series, LabError> {
        let times: Vec<f64> = pick(&runs[0]).iter().map(|s| s.0).collect();
        let values: Vec<Vec<f64>> = runs.iter().map(|r| pick(r).iter().map(|s| s.1).collect()).collect();
        let labels: Vec<String> = runs.iter().map(|r| format!("{prefix}D{}", r.diffusion)).collect();
        let mut cols: Vec<(&str, &[f64])> = vec![("t", &times)];
        cols.extend(labels.iter().map(String::as_str).zip(values.iter().map(Vec::as_slice)));
        Ok(Series::from_columns(&cols)?)
    }

    fn chaos(&self, sink: &mut ArtifactSink, notes: &mut RunNotes) -> Result<String, LabError> {
        let cfg = &self.cfg;
        let runs = self.quantum_runs(cfg, "", sink, notes)?;
        let (_, classical, lost) = run_classical(cfg, cfg.diffusion)?;
        write_grid(sink, "classical.wgrd", &GridFile::from(&classical))?;

        let mut table = Series::new(["D", "l1_to_classical", "negativity", "purity", "max_trace_error"]);
        for r in &runs {
            let purity = r.purity.last().map(|s| s.1).unwrap_or(f64::NAN);
            table.push(vec![r.diffusion, r.final_wigner.l1_distance(&classical), r.final_negativity(), purity, r.max_trace_error])?;
        }
        write_series(sink, "correspondence.csv", &table)?;
        write_series(sink, "negativity.csv", &Self::columns(&runs, |r| &r.negativity, "")?)?;
        write_series(sink, "purity.csv", &Self::columns(&runs, |r| &r.purity, "")?)?;

        let lyapunov = lyapunov_exponent(cfg)?;
        let index: Vec<f64> = (0..lyapunov.samples.len()).map(|k| k as f64).collect();
        write_series(sink, "lyapunov.csv", &Series::from_columns(&[("trajectory", &index), ("exponent", &lyapunov.samples)])?)?;

        #[derive(Serialize)]
        struct Summary {
            time: f64,
            classical_diffusion: f64,
            lyapunov: f64,
            lyapunov_standard_error: f64,
            coherence_length: Option<f64>,
            nonlinearity_scale: Option<f64>,
            sub_planck_action: Option<f64>,
            classical_negativity: f64,
            classical_particles_lost: f64,
        }
        let summary = Summary {
            time: cfg.t_final(),
            classical_diffusion: cfg.diffusion,
            lyapunov: lyapunov.mean,
            lyapunov_standard_error: lyapunov.standard_error,
            coherence_length: (cfg.diffusion > 0.0 && lyapunov.mean > 0.0)
                .then(|| coherence_length(cfg.diffusion, lyapunov.mean))
                .transpose()?,
            nonlinearity_scale: nonlinearity_scale(&cfg.potential(), 1.0).ok(),
            sub_planck_action: self.action.map(sub_planck_action).transpose()?,
            classical_negativity: crate::wigner::negativity_volume(&classical),
            classical_particles_lost: lost,
        };
        write_json(sink, "summary.json", &summary)?;
        if lost > 0.0 {
            notes.warnings.push(format!("{:.3e} of the classical ensemble left the lattice", lost));
        }
        Ok("set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\nset ylabel 'negativity'\n\
            plot for [k=2:*] 'negativity.csv' using 1:k with lines\n"
            .to_string())
    }

    fn entropy_production(&self, sink: &mut ArtifactSink, notes: &mut RunNotes) -> Result<String, LabError> {
        let cfg = &self.cfg;
        let regular_cfg = ChaosConfig { drive_amplitude: 0.0, ..cfg.clone() };
        let chaotic = self.quantum_runs(cfg, "driven_", sink, notes)?;
        write_series(sink, "purity_driven.csv", &Self::columns(&chaotic, |r| &r.purity, "")?)?;
        let regular = self.quantum_runs(&regular_cfg, "undriven_", sink, notes)?;
        write_series(sink, "purity_undriven.csv", &Self::columns(&regular, |r| &r.purity, "")?)?;
        let table = EntropyProductionTable::from_runs(cfg, &chaotic, &regular)?;

        let mut rates = Series::new(["D", "F", "linear_entropy_rate", "log_purity_rate"]);
        for r in table.chaotic.iter().chain(&table.regular) {
            rates.push(vec![r.diffusion, r.drive_amplitude, r.linear_entropy_rate, r.log_purity_rate])?;
        }
        write_series(sink, "rates.csv", &rates)?;

        #[derive(Serialize)]
        struct Summary {
            window_periods: (f64, f64),
            spread: f64,
            driven_over_undriven: Vec<(f64, f64)>,
        }
        let ratios = table
            .chaotic
            .iter()
            .zip(&table.regular)
            .map(|(c, r)| (c.diffusion, c.linear_entropy_rate / r.linear_entropy_rate))
            .collect();
        write_json(sink, "summary.json", &Summary { window_periods: table.window_periods, spread: table.spread, driven_over_undriven: ratios })?;
        Ok("set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\nset ylabel 'purity'\n\
            plot for [k=2:*] 'purity_driven.csv' using 1:k with lines, for [k=2:*] 'purity_undriven.csv' using 1:k with lines dt 2\n"
            .to_string())
    }
}
