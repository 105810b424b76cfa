//! Predictability sieve: squeezed packets in a weakly damped oscillator are
//! ranked by how much purity they keep.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::brownian::{evolve, BathParams, EvolveOptions, PotentialSpec};
use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::state::{make_gaussian, DensityMatrix, GaussianSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SieveConfig {
    pub mass: f64,
    pub omega: f64,
    /// `γ/ω`.
    pub gamma_ratio: f64,
    /// `k_BT`, in the same units as `ħω`.
    pub temperature: f64,
    /// Squeeze factors `s`; the packet's position variance is `s` times the
    /// coherent-state variance `1/2mω`.
    pub squeezes: Vec<f64>,
    pub horizon_periods: f64,
    pub samples_per_period: u32,
    /// Common starting point of every packet.
    pub center: f64,
    pub grid_points: usize,
    pub half_extent: f64,
    pub dt: f64,
    /// Also record the von Neumann entropy at every sample.
    pub entropy: bool,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            omega: 1.0,
            gamma_ratio: 1e-4,
            temperature: 10.0,
            squeezes: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            horizon_periods: 20.0,
            samples_per_period: 2,
            center: 3.0,
            grid_points: 256,
            half_extent: 16.0,
            dt: 0.04,
            entropy: true,
        }
    }
}

impl SieveConfig {
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn bath(&self) -> Result<BathParams> {
        BathParams::thermal(self.mass, self.gamma_ratio * self.omega, self.temperature)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("omega", self.omega),
            ("dt", self.dt),
            ("half_extent", self.half_extent),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("{v} must be positive")));
            }
        }
        if !(self.gamma_ratio >= 0.0) || !(self.temperature >= 0.0) {
            return Err(invalid("gamma_ratio", "damping and temperature must be non-negative"));
        }
        if self.squeezes.is_empty() || self.squeezes.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(invalid("squeezes", "need at least one positive squeeze factor"));
        }
        if !(self.horizon_periods > 0.0) || self.samples_per_period == 0 {
            return Err(invalid("horizon_periods", "horizon and sampling rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SieveTrace {
    pub squeeze: f64,
    pub purity: Vec<f64>,
    pub entropy: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SieveResult {
    pub times: Vec<f64>,
    pub traces: Vec<SieveTrace>,
    pub max_trace_error: f64,
    pub warnings: Vec<String>,
}

impl SieveResult {
    /// Ranking at every sample time.
    pub fn rankings(&self) -> Vec<Vec<f64>> {
        (0..self.times.len()).map(|k| self.rank_at_index(k)).collect()
    }

    pub fn winner_at(&self, t: f64) -> Result<f64> {
        Ok(rank_pointer_candidates(self, t)?[0])
    }

    pub fn winner_at_horizon(&self) -> f64 {
        self.rank_at_index(self.times.len() - 1)[0]
    }

    fn rank_at_index(&self, k: usize) -> Vec<f64> {
        // Purities equal to nine decimals are ties.
        let key = |p: f64| (p * 1e9).round();
        let mut order: Vec<(f64, f64)> = self.traces.iter().map(|t| (t.squeeze, key(t.purity[k]))).collect();
        order.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then(a.0.log10().abs().total_cmp(&b.0.log10().abs()))
                .then(a.0.total_cmp(&b.0))
        });
        order.into_iter().map(|(s, _)| s).collect()
    }

    fn index_of(&self, t: f64) -> Result<usize> {
        self.times.iter().position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0)).ok_or(Error::TimeNotSampled { time: t })
    }
}

/// Squeeze factors by descending purity at sample time `t`. Purities equal
/// to nine decimals are tied and ordered by `|lg s|`, so the packet closest
/// to the coherent shape comes first, and `s < 1` before `1/s`.
pub fn rank_pointer_candidates(result: &SieveResult, t: f64) -> Result<Vec<f64>> {
    let k = result.index_of(t)?;
    Ok(result.rank_at_index(k))
}

/// Evolves one packet per squeeze factor under the damped oscillator and
/// records purity (and optionally entropy) at every sample time.
pub fn run_sieve(cfg: &SieveConfig) -> Result<SieveResult> {
    cfg.validate()?;
    let grid = Grid::new(cfg.grid_points, cfg.half_extent)?;
    let bath = cfg.bath()?;
    let potential = PotentialSpec::harmonic(cfg.mass, cfg.omega);
    let period = cfg.period();
    let options = EvolveOptions::new(cfg.horizon_periods * period, cfg.dt)
        .snapshot_every(period / cfg.samples_per_period as f64)
        .track_spectrum(cfg.entropy)
        .retain_states(false);
    let runs = cfg
        .squeezes
        .par_iter()
        .map(|&s| {
            let spec = GaussianSpec::squeezed(cfg.center, 0.0, cfg.mass, cfg.omega, s);
            let rho0 = DensityMatrix::pure(&make_gaussian(spec, grid)?);
            evolve(&rho0, &bath, &potential, &options)
        })
        .collect::<Result<Vec<_>>>()?;

    let times = runs[0].history.iter().map(|d| d.time).collect();
    let max_trace_error = runs.iter().map(|r| r.max_trace_error()).fold(0.0, f64::max);
    let mut warnings: Vec<String> = runs.iter().flat_map(|r| r.warnings.iter().cloned()).collect();
    warnings.dedup();
    let traces = cfg
        .squeezes
        .iter()
        .zip(&runs)
        .map(|(&squeeze, r)| SieveTrace {
            squeeze,
            purity: r.history.iter().map(|d| d.purity).collect(),
            entropy: r.history.iter().map(|d| d.entropy).collect(),
        })
        .collect();
    Ok(SieveResult { times, traces, max_trace_error, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(purities: &[(f64, f64)]) -> SieveResult {
        SieveResult {
            times: vec![0.0, 1.0],
            traces: purities.iter().map(|&(s, p)| SieveTrace { squeeze: s, purity: vec![1.0, p], entropy: vec![None, None] }).collect(),
            max_trace_error: 0.0,
            warnings: vec![],
        }
    }

    #[test]
    fn ties_prefer_the_coherent_shape() {
        let r = result(&[(4.0, 0.9), (0.25, 0.9), (2.0, 0.9), (1.0, 0.9), (0.5, 0.9)]);
        assert_eq!(rank_pointer_candidates(&r, 0.0).unwrap(), vec![1.0, 0.5, 2.0, 0.25, 4.0]);
    }

    #[test]
    fn ranking_by_purity() {
        let r = result(&[(4.0, 0.7), (1.0, 0.95), (0.25, 0.8)]);
        assert_eq!(rank_pointer_candidates(&r, 1.0).unwrap(), vec![1.0, 0.25, 4.0]);
        assert_eq!(r.winner_at_horizon(), 1.0);
        assert!(matches!(rank_pointer_candidates(&r, 0.5), Err(Error::TimeNotSampled { .. })));
        let single = result(&[(2.0, 0.5)]);
        assert_eq!(rank_pointer_candidates(&single, 1.0).unwrap(), vec![2.0]);
    }

    #[test]
    fn no_environment_no_sieve() {
        let cfg = SieveConfig {
            gamma_ratio: 0.0,
            horizon_periods: 1.0,
            grid_points: 128,
            squeezes: vec![0.5, 1.0, 2.0],
            entropy: false,
            ..SieveConfig::default()
        };
        let r = run_sieve(&cfg).unwrap();
        for t in &r.traces {
            assert!(t.purity.iter().all(|p| (p - 1.0).abs() < 1e-9));
        }
    }
}
