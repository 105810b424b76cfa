//! Output directory handling: checksummed artifacts, the single-writer lock
//! and the manifest that closes every run.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";
pub const LOCK_NAME: &str = ".decolab.lock";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SolverSummary {
    pub max_trace_error: Option<f64>,
    pub min_eigenvalue: Option<f64>,
}

impl SolverSummary {
    pub fn trace_error(&mut self, e: f64) {
        self.max_trace_error = Some(self.max_trace_error.map_or(e, |m| m.max(e)));
    }

    pub fn eigenvalue(&mut self, e: f64) {
        self.min_eigenvalue = Some(self.min_eigenvalue.map_or(e, |m| m.min(e)));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentManifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub config: BTreeMap<String, String>,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<OutputRecord>,
    pub diagnostics: SolverSummary,
    pub warnings: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Writes files into the output directory and remembers their checksums.
#[derive(Debug)]
pub struct ArtifactSink {
    dir: PathBuf,
    records: Vec<OutputRecord>,
}

impl ArtifactSink {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into(), records: Vec::new() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        let record = OutputRecord { path: name.to_string(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) };
        match self.records.iter_mut().find(|r| r.path == name) {
            Some(r) => *r = record,
            None => self.records.push(record),
        }
        Ok(())
    }

    pub fn records(&self) -> &[OutputRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<OutputRecord> {
        self.records
    }
}

/// Held for the lifetime of a run; a second writer to the same directory
/// fails instead of interleaving files.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
    _file: File,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> io::Result<Self> {
        let path = dir.join(LOCK_NAME);
        let file = OpenOptions::new().write(true).create_new(true).open(&path).map_err(|e| {
            if e.kind() == io::ErrorKind::AlreadyExists {
                io::Error::new(e.kind(), format!("{} is locked by another run ({})", dir.display(), path.display()))
            } else {
                e
            }
        })?;
        Ok(Self { path, _file: file })
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Recomputes every checksum in `manifest` against the files in `dir` and
/// returns the paths that do not match.
pub fn verify_manifest(dir: &Path, manifest: &serde_json::Value) -> io::Result<Vec<String>> {
    let mut bad = Vec::new();
    for out in manifest["outputs"].as_array().into_iter().flatten() {
        let path = out["path"].as_str().unwrap_or_default();
        let bytes = fs::read(dir.join(path))?;
        if Some(sha256_hex(&bytes).as_str()) != out["sha256"].as_str() {
            bad.push(path.to_string());
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn lock_is_exclusive_and_released() {
        let dir = tempfile::tempdir().unwrap();
        let first = DirLock::acquire(dir.path()).unwrap();
        assert!(DirLock::acquire(dir.path()).is_err());
        drop(first);
        assert!(!dir.path().join(LOCK_NAME).exists());
        DirLock::acquire(dir.path()).unwrap();
    }

    #[test]
    fn sink_tracks_rewrites() {
        let dir = tempfile::tempdir().unwrap();
        let mut sink = ArtifactSink::new(dir.path());
        sink.write("a.csv", b"x\n").unwrap();
        sink.write("a.csv", b"y\n").unwrap();
        assert_eq!(sink.records().len(), 1);
        assert_eq!(sink.records()[0].sha256, sha256_hex(b"y\n"));
        let manifest = serde_json::json!({ "outputs": sink.records() });
        assert!(verify_manifest(dir.path(), &manifest).unwrap().is_empty());
        fs::write(dir.path().join("a.csv"), b"z\n").unwrap();
        assert_eq!(verify_manifest(dir.path(), &manifest).unwrap(), vec!["a.csv".to_string()]);
    }
}
