//! Experiment configuration: a flat `key = value` file merged with
//! command-line overrides, checked against the keys each experiment knows.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::phase_space::ChaosConfig;
use crate::sieve::SieveConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Timescales,
    Measure,
    Discord,
    Cat,
    Wigner,
    Sieve,
    Chaos,
    EntropyProduction,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Timescales,
        Experiment::Measure,
        Experiment::Discord,
        Experiment::Cat,
        Experiment::Wigner,
        Experiment::Sieve,
        Experiment::Chaos,
        Experiment::EntropyProduction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Timescales => "timescales",
            Experiment::Measure => "measure",
            Experiment::Discord => "discord",
            Experiment::Cat => "cat",
            Experiment::Wigner => "wigner",
            Experiment::Sieve => "sieve",
            Experiment::Chaos => "chaos",
            Experiment::EntropyProduction => "entropy-production",
        }
    }

    /// Known keys and their defaults.
    pub fn defaults(self) -> Vec<(&'static str, String)> {
        let s = |v: &str| v.to_string();
        let mut keys = match self {
            Experiment::Timescales => vec![
                ("name", s("gram-centimetre")),
                ("mass", s("1e-3")),
                ("temperature", s("300")),
                ("relaxation_time", s("1e17")),
                ("separation", s("1e-2")),
                ("electron", s("false")),
            ],
            Experiment::Measure => vec![
                ("alpha", s("0.7071067811865476")),
                ("alpha_phase", s("0")),
                ("beta", s("0.7071067811865476")),
                ("beta_phase", s("0")),
                ("overlap", s("0")),
                ("overlap_phase", s("0")),
                ("theta", s("90")),
                ("azimuth", s("0")),
            ],
            Experiment::Discord => vec![("state", s("reduced")), ("matrix", s("")), ("landscape_step", s("1"))],
            Experiment::Cat => vec![
                ("dx", s("8")),
                ("delta", s("1")),
                ("phase", s("0")),
                ("D", s("1")),
                ("gamma", s("1e-4")),
                ("mass", s("1")),
                ("omega", s("1")),
                ("t", s("0.1")),
                ("dt", s("5e-5")),
                ("snapshots", s("4")),
                ("n", s("256")),
                ("L", s("16")),
                ("wigner", s("true")),
            ],
            Experiment::Wigner => vec![
                ("state", s("cat")),
                ("x0", s("0")),
                ("p0", s("0")),
                ("width", s("1")),
                ("dx", s("8")),
                ("dp", s("4")),
                ("phase", s("0")),
                ("action", s("0")),
                ("n", s("256")),
                ("L", s("24")),
            ],
            Experiment::Sieve => {
                let d = SieveConfig::default();
                vec![
                    ("mass", d.mass.to_string()),
                    ("omega", d.omega.to_string()),
                    ("gamma_ratio", d.gamma_ratio.to_string()),
                    ("temperature", d.temperature.to_string()),
                    ("squeezes", join(&d.squeezes)),
                    ("horizon", d.horizon_periods.to_string()),
                    ("samples_per_period", d.samples_per_period.to_string()),
                    ("center", d.center.to_string()),
                    ("n", d.grid_points.to_string()),
                    ("L", d.half_extent.to_string()),
                    ("dt", d.dt.to_string()),
                    ("entropy", d.entropy.to_string()),
                ]
            }
            Experiment::Chaos | Experiment::EntropyProduction => {
                let d = ChaosConfig::default();
                let mut keys = vec![
                    ("mass", d.mass.to_string()),
                    ("A", d.a.to_string()),
                    ("B", d.b.to_string()),
                    ("F", d.drive_amplitude.to_string()),
                    ("omega", d.drive_frequency.to_string()),
                    ("periods", d.periods.to_string()),
                    ("n", d.grid_points.to_string()),
                    ("L", d.half_extent.to_string()),
                    ("dt", d.dt.to_string()),
                    ("x0", s("auto")),
                    ("p0", d.initial_momentum.to_string()),
                    ("width", s("auto")),
                    ("samples_per_period", d.samples_per_period.to_string()),
                    ("frames_per_period", d.frames_per_period.to_string()),
                ];
                if self == Experiment::Chaos {
                    keys.extend([
                        ("D", d.diffusion.to_string()),
                        ("diffusions", s("0,0.0125,0.025,0.05")),
                        ("ensemble", d.ensemble_size.to_string()),
                        ("lyapunov_trajectories", d.lyapunov_trajectories.to_string()),
                        ("lyapunov_periods", d.lyapunov_periods.to_string()),
                        ("lyapunov_warmup", d.lyapunov_warmup.to_string()),
                        ("action", s("0")),
                    ]);
                } else {
                    keys.extend([
                        ("diffusions", s("0.0125,0.025,0.05")),
                        ("window_start", d.entropy_window.0.to_string()),
                        ("window_end", d.entropy_window.1.to_string()),
                    ]);
                }
                keys
            }
        };
        keys.push(("plot", s("false")));
        keys
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ConfigError(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError(format!("line {}: empty key", lineno + 1)));
        }
        if pairs.iter().any(|(k, _)| k == key) {
            return Err(ConfigError(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Splits `--key value` and `--key=value` arguments into pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let body = arg.strip_prefix("--").ok_or_else(|| ConfigError(format!("unexpected argument `{arg}`")))?;
        let (key, value) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| ConfigError(format!("`--{body}` needs a value")))?;
                (body.to_string(), v.clone())
            }
        };
        if key.is_empty() {
            return Err(ConfigError(format!("malformed argument `{arg}`")));
        }
        pairs.push((key, value));
    }
    Ok(pairs)
}

/// Fully resolved run description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Every known key with its effective value.
    pub params: BTreeMap<String, String>,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Defaults, then the file's pairs, then the overrides. Unknown keys are
    /// errors; `seed` is accepted everywhere.
    pub fn resolve(
        experiment: Experiment,
        file_pairs: &[(String, String)],
        overrides: &[(String, String)],
        out_dir: PathBuf,
    ) -> Result<Self, ConfigError> {
        let mut params: BTreeMap<String, String> =
            experiment.defaults().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        let mut seed = "0".to_string();
        for (key, value) in file_pairs.iter().chain(overrides) {
            if key == "seed" {
                seed = value.clone();
            } else if let Some(slot) = params.get_mut(key) {
                *slot = value.clone();
            } else {
                let known: Vec<&str> = params.keys().map(String::as_str).collect();
                return Err(ConfigError(format!(
                    "unknown key `{key}` for `{experiment}` (known: seed, {})",
                    known.join(", ")
                )));
            }
        }
        let seed = seed.parse::<u64>().map_err(|_| ConfigError(format!("seed: `{seed}` is not an unsigned integer")))?;
        Ok(Self { experiment, params, out_dir, seed })
    }

    pub fn defaults(experiment: Experiment, out_dir: PathBuf) -> Self {
        Self::resolve(experiment, &[], &[], out_dir).expect("defaults are valid")
    }

    pub fn raw(&self, key: &str) -> &str {
        self.params.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        let raw = self.raw(key);
        raw.parse::<T>().map_err(|_| ConfigError(format!("{key}: cannot parse `{raw}`")))
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let v: f64 = self.get(key)?;
        if !v.is_finite() {
            return Err(ConfigError(format!("{key}: must be finite")));
        }
        Ok(v)
    }

    /// A number, or `None` for `auto`.
    pub fn f64_or_auto(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        if self.raw(key) == "auto" {
            return Ok(None);
        }
        self.f64(key).map(Some)
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let raw = self.raw(key);
        let values = raw
            .split(',')
            .map(|s| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| ConfigError(format!("{key}: `{raw}` is not a comma-separated list of numbers")))?;
        Ok(values)
    }

    /// Resolved parameters including the seed, as written to the manifest.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        let mut m = self.params.clone();
        m.insert("seed".into(), self.seed.to_string());
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
        v.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn file_then_flags() {
        let file = parse_config_text("# cat run\ndx = 6\n\nD=2 # strong\nseed = 9\n").unwrap();
        let flags = parse_overrides(&["--D".into(), "3".into(), "--t=0.2".into()]).unwrap();
        let cfg = ExperimentConfig::resolve(Experiment::Cat, &file, &flags, "out".into()).unwrap();
        assert_eq!(cfg.raw("dx"), "6");
        assert_eq!(cfg.raw("D"), "3");
        assert_eq!(cfg.f64("t").unwrap(), 0.2);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.raw("delta"), "1");
        assert_eq!(cfg.resolved()["seed"], "9");
    }

    #[test]
    fn malformed_input() {
        assert!(parse_config_text("dx 6").is_err());
        assert!(parse_config_text("= 6").is_err());
        assert!(parse_config_text("a=1\na=2").is_err());
        assert!(parse_overrides(&["dx".into()]).is_err());
        assert!(parse_overrides(&["--dx".into()]).is_err());
        let unknown = ExperimentConfig::resolve(Experiment::Cat, &pairs(&[("bogus", "1")]), &[], "o".into());
        assert!(unknown.unwrap_err().0.contains("bogus"));
        assert!(ExperimentConfig::resolve(Experiment::Cat, &[], &pairs(&[("seed", "-1")]), "o".into()).is_err());
        let cfg = ExperimentConfig::resolve(Experiment::Cat, &[], &pairs(&[("dx", "eight")]), "o".into()).unwrap();
        assert!(cfg.f64("dx").is_err());
    }

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
            assert!(ExperimentConfig::defaults(e, "o".into()).params.contains_key("plot"));
        }
        assert!("nope".parse::<Experiment>().is_err());
    }

    #[test]
    fn lists_and_auto() {
        let cfg = ExperimentConfig::defaults(Experiment::Chaos, "o".into());
        assert_eq!(cfg.list("diffusions").unwrap(), vec![0.0, 0.0125, 0.025, 0.05]);
        assert_eq!(cfg.f64_or_auto("x0").unwrap(), None);
        let sieve = ExperimentConfig::defaults(Experiment::Sieve, "o".into());
        assert_eq!(sieve.list("squeezes").unwrap(), vec![0.25, 0.5, 1.0, 2.0, 4.0]);
    }
}
