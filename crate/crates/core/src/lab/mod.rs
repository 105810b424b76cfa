//! Batch experiment runner.
//!
//! A run resolves its configuration, validates it completely, and only then
//! creates the output directory. Files are written as results become
//! available; `manifest.json` is always the last file written and records
//! checksums of everything else. Nothing but the manifest depends on the
//! wall clock, so a repeated run with the same configuration and seed
//! reproduces every other file byte for byte.

mod config;
mod experiments;
pub mod gridfile;
mod manifest;
pub mod series;

use std::fs;
use std::io;

pub use config::{parse_config_text, parse_overrides, ConfigError, Experiment, ExperimentConfig};
pub use experiments::{named_qubit_state, parse_qubit_matrix};
pub use gridfile::{read_grid, write_grid, GridFile, GridFileError, GridPayload};
pub use manifest::{
    sha256_hex, verify_manifest, ArtifactSink, DirLock, ExperimentManifest, OutputRecord, RunStatus, SolverSummary,
    LOCK_NAME, MANIFEST_NAME,
};
pub use series::Series;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(#[from] crate::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => EXIT_CONFIG,
            LabError::Solver(_) => EXIT_SOLVER,
            LabError::Io(_) => EXIT_IO,
        }
    }
}

impl From<GridFileError> for LabError {
    fn from(e: GridFileError) -> Self {
        match e {
            GridFileError::Io(e) => LabError::Io(e),
            other => LabError::Solver(crate::Error::Dimension(other.to_string())),
        }
    }
}

/// Result of [`run`]: the manifest, when one was written, and the error
/// that stopped the run, if any.
#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: Option<ExperimentManifest>,
    pub error: Option<LabError>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.error.as_ref().map_or(EXIT_OK, LabError::exit_code)
    }
}

/// Runs one experiment into `cfg.out_dir`.
///
/// Invalid configurations fail before the directory is created. A failure
/// during the computation keeps the files written so far and closes the
/// directory with a manifest whose status is `failed`.
pub fn run(cfg: &ExperimentConfig) -> RunOutcome {
    let started = manifest::timestamp();
    let fail = |e| RunOutcome { manifest: None, error: Some(e) };
    let plan = match experiments::plan(cfg) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let plot = cfg.get::<bool>("plot").unwrap_or(false);
    if let Err(e) = fs::create_dir_all(&cfg.out_dir) {
        return fail(e.into());
    }
    let _lock = match DirLock::acquire(&cfg.out_dir) {
        Ok(l) => l,
        Err(e) => return fail(e.into()),
    };

    let mut sink = ArtifactSink::new(&cfg.out_dir);
    let mut notes = experiments::RunNotes::default();
    let result = experiments::execute(plan, plot, &mut sink, &mut notes);
    notes.warnings.dedup();
    let manifest = ExperimentManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        experiment: cfg.experiment.name().into(),
        status: if result.is_ok() { RunStatus::Ok } else { RunStatus::Failed },
        error: result.as_ref().err().map(|e| e.to_string()),
        config: cfg.resolved(),
        started,
        finished: manifest::timestamp(),
        outputs: sink.into_records(),
        diagnostics: notes.solver,
        warnings: notes.warnings,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    let written = fs::write(cfg.out_dir.join(MANIFEST_NAME), text);
    let error = match (result, written) {
        (Err(e), _) => Some(e),
        (Ok(()), Err(e)) => Some(e.into()),
        (Ok(()), Ok(())) => None,
    };
    RunOutcome { manifest: Some(manifest), error }
}
