use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::brownian::{step_schedule, BathParams, PotentialSpec};
use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::wigner::WignerGrid;

/// Equally weighted phase-space points `(x, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalEnsemble {
    particles: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSpaceMoments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub cov_xp: f64,
}

impl ClassicalEnsemble {
    pub fn new(particles: Vec<[f64; 2]>) -> Result<Self> {
        if particles.is_empty() {
            return Err(invalid("ensemble", "needs at least one particle"));
        }
        if particles.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("ensemble", "non-finite coordinates"));
        }
        Ok(Self { particles })
    }

    /// Samples the (positive) Wigner function of a minimum-uncertainty
    /// packet: `x ~ N(x₀, σ²)`, `p ~ N(p₀, 1/4σ²)`.
    pub fn gaussian(center: f64, momentum: f64, width: f64, count: usize, seed: u64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(invalid("width", format!("{width} must be positive")));
        }
        if count == 0 {
            return Err(invalid("ensemble_size", "must be positive"));
        }
        let sigma_p = 0.5 / width;
        let particles = (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = particle_rng(seed, i);
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                [center + width * a, momentum + sigma_p * b]
            })
            .collect();
        Ok(Self { particles })
    }

    pub fn particles(&self) -> &[[f64; 2]] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn moments(&self) -> PhaseSpaceMoments {
        let n = self.particles.len() as f64;
        let mean_x = self.particles.iter().map(|q| q[0]).sum::<f64>() / n;
        let mean_p = self.particles.iter().map(|q| q[1]).sum::<f64>() / n;
        let (mut vx, mut vp, mut c) = (0.0, 0.0, 0.0);
        for q in &self.particles {
            let (dx, dp) = (q[0] - mean_x, q[1] - mean_p);
            vx += dx * dx;
            vp += dp * dp;
            c += dx * dp;
        }
        PhaseSpaceMoments { mean_x, mean_p, var_x: vx / n, var_p: vp / n, cov_xp: c / n }
    }

    pub fn mean_energy(&self, mass: f64, potential: &PotentialSpec, t: f64) -> f64 {
        self.particles.iter().map(|q| q[1] * q[1] / (2.0 * mass) + potential.value(q[0], t)).sum::<f64>()
            / self.particles.len() as f64
    }

    /// Density on the phase-space lattice of `grid`, each particle spread
    /// by a Gaussian kernel one cell wide in both directions. Returns the
    /// portrait and the fraction of particles that fell off the lattice.
    pub fn to_grid(&self, grid: &Grid) -> (WignerGrid, f64) {
        const REACH: isize = 4;
        let n = grid.n();
        let (dx, dp) = (grid.dx(), grid.dp());
        let p_min = grid.p(0);
        let weight = 1.0 / self.particles.len() as f64;
        let mut values = vec![0.0; n * n];
        let mut lost = 0usize;
        let mut kx = [0.0; 2 * REACH as usize + 1];
        let mut kp = [0.0; 2 * REACH as usize + 1];
        for q in &self.particles {
            let ux = (q[0] + grid.half_extent()) / dx;
            let up = (q[1] - p_min) / dp;
            let (ci, cm) = (ux.round() as isize, up.round() as isize);
            if ci < 0 || ci >= n as isize || cm < 0 || cm >= n as isize {
                lost += 1;
                continue;
            }
            let sx = fill_kernel(&mut kx, ux - ci as f64, ci, n);
            let sp = fill_kernel(&mut kp, up - cm as f64, cm, n);
            let norm = weight / (sx * sp * dx * dp);
            for (a, wx) in kx.iter().enumerate().filter(|(_, w)| **w > 0.0) {
                let row = (ci + a as isize - REACH) as usize * n;
                for (b, wp) in kp.iter().enumerate().filter(|(_, w)| **w > 0.0) {
                    values[row + (cm + b as isize - REACH) as usize] += wx * wp * norm;
                }
            }
        }
        let w = WignerGrid::from_values(*grid, values).expect("square lattice");
        (w, lost as f64 / self.particles.len() as f64)
    }
}

/// Kernel weights `exp(−(k − offset)²/2)` for lattice offsets `k` within
/// reach, zeroed off the lattice; returns their sum.
fn fill_kernel(kernel: &mut [f64], offset: f64, centre: isize, n: usize) -> f64 {
    let reach = (kernel.len() / 2) as isize;
    let mut sum = 0.0;
    for (slot, k) in kernel.iter_mut().zip(-reach..=reach) {
        let cell = centre + k;
        *slot = if cell < 0 || cell >= n as isize {
            0.0
        } else {
            let u = k as f64 - offset;
            (-0.5 * u * u).exp()
        };
        sum += *slot;
    }
    sum
}

fn particle_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LangevinOptions {
    pub t_final: f64,
    pub dt: f64,
    /// `None` keeps only the initial and final ensembles.
    pub sample_interval: Option<f64>,
}

impl LangevinOptions {
    pub fn new(t_final: f64, dt: f64) -> Self {
        Self { t_final, dt, sample_interval: None }
    }

    pub fn sample_every(mut self, interval: f64) -> Self {
        self.sample_interval = Some(interval);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSeries {
    pub times: Vec<f64>,
    pub ensembles: Vec<ClassicalEnsemble>,
    pub dt: f64,
    pub steps: usize,
}

impl ClassicalSeries {
    pub fn final_ensemble(&self) -> &ClassicalEnsemble {
        self.ensembles.last().expect("series keeps the initial ensemble")
    }
}

const STEP_SAFETY: f64 = 0.1;

/// Largest admissible step: a tenth of the inverse of the fastest rate among
/// the drive, the relaxation `2γ`, and `√|V″|/m` over a box twice the size of
/// the ensemble's extent.
pub fn classical_step_limit(ensemble: &ClassicalEnsemble, bath: &BathParams, potential: &PotentialSpec) -> f64 {
    let (lo, hi) = ensemble.particles.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| (lo.min(q[0]), hi.max(q[0])));
    let pad = (hi - lo).max(1.0);
    let curvature = (0..=64)
        .map(|k| potential.second_derivative(lo - pad + (hi - lo + 2.0 * pad) * k as f64 / 64.0).abs())
        .fold(0.0, f64::max);
    let rate = (curvature / bath.mass).sqrt().max(potential.drive_frequency.abs()).max(2.0 * bath.gamma);
    if rate > 0.0 {
        STEP_SAFETY / rate
    } else {
        f64::INFINITY
    }
}

/// Langevin dynamics `ẋ = p/m`, `ṗ = −V′(x,t) − 2γp + ξ`, `⟨ξ(t)ξ(s)⟩ = 2Dδ(t−s)`,
/// integrated with the BAOAB splitting: half kick, half drift, exact
/// Ornstein–Uhlenbeck update, half drift, half kick. With `γ = D = 0` this is
/// velocity Verlet. Every particle draws from its own ChaCha stream, so the
/// output depends only on `seed`, never on thread scheduling.
pub fn evolve_classical(
    ensemble: &ClassicalEnsemble,
    bath: &BathParams,
    potential: &PotentialSpec,
    options: &LangevinOptions,
    seed: u64,
) -> Result<ClassicalSeries> {
    if !(options.dt > 0.0) || !options.dt.is_finite() {
        return Err(invalid("dt", format!("{} must be positive", options.dt)));
    }
    if !(options.t_final >= 0.0) || !options.t_final.is_finite() {
        return Err(invalid("t_final", format!("{} must be non-negative", options.t_final)));
    }
    let limit = classical_step_limit(ensemble, bath, potential);
    if options.dt > limit {
        return Err(Error::StepTooLarge { dt: options.dt, limit, constraint: "classical dynamical rate" });
    }
    let (steps, dt, every) = step_schedule(options.t_final, options.dt, options.sample_interval, "sample_interval")?;
    let saved: Vec<usize> = (0..=steps).filter(|&s| s == 0 || s % every == 0 || s == steps).collect();

    let m = bath.mass;
    let decay = (-2.0 * bath.gamma * dt).exp();
    let kick = if bath.gamma > 0.0 {
        (bath.diffusion / (2.0 * bath.gamma) * (1.0 - (-4.0 * bath.gamma * dt).exp())).sqrt()
    } else {
        (2.0 * bath.diffusion * dt).sqrt()
    };
    let noisy = kick > 0.0;

    let trajectories: Vec<Vec<[f64; 2]>> = ensemble
        .particles
        .par_iter()
        .enumerate()
        .map(|(index, &start)| {
            let mut rng = particle_rng(seed, index);
            let [mut x, mut p] = start;
            let mut out = Vec::with_capacity(saved.len());
            out.push(start);
            let mut next = 1;
            for s in 0..steps {
                let t = s as f64 * dt;
                p -= 0.5 * dt * potential.derivative(x, t);
                x += 0.5 * dt * p / m;
                p *= decay;
                if noisy {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    p += kick * z;
                }
                x += 0.5 * dt * p / m;
                p -= 0.5 * dt * potential.derivative(x, t + dt);
                if next < saved.len() && saved[next] == s + 1 {
                    out.push([x, p]);
                    next += 1;
                }
            }
            out
        })
        .collect();

    let mut ensembles = Vec::with_capacity(saved.len());
    for k in 0..saved.len() {
        let particles: Vec<[f64; 2]> = trajectories.iter().map(|tr| tr[k]).collect();
        if particles.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { column: "classical ensemble".into(), row: k });
        }
        ensembles.push(ClassicalEnsemble { particles });
    }
    Ok(ClassicalSeries { times: saved.iter().map(|&s| s as f64 * dt).collect(), ensembles, dt, steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_sampling_moments() {
        let e = ClassicalEnsemble::gaussian(1.0, -2.0, 0.5, 200_000, 3).unwrap();
        let m = e.moments();
        assert!((m.mean_x - 1.0).abs() < 5e-3);
        assert!((m.mean_p + 2.0).abs() < 5e-3);
        assert!((m.var_x - 0.25).abs() < 5e-3);
        assert!((m.var_p - 1.0).abs() < 1e-2);
    }

    #[test]
    fn smoothed_density_is_normalized() {
        let grid = Grid::new(64, 8.0).unwrap();
        let e = ClassicalEnsemble::gaussian(0.0, 0.0, 1.0, 10_000, 1).unwrap();
        let (w, lost) = e.to_grid(&grid);
        assert_eq!(lost, 0.0);
        assert!((w.normalization() - 1.0).abs() < 1e-12);
        assert!(w.min_value() >= 0.0);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let e = ClassicalEnsemble::gaussian(0.0, 0.0, 1.0, 10, 1).unwrap();
        let bath = BathParams::isolated(1.0).unwrap();
        let r = evolve_classical(&e, &bath, &PotentialSpec::harmonic(1.0, 10.0), &LangevinOptions::new(1.0, 0.1), 0);
        assert!(matches!(r, Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn rejects_non_finite_particles() {
        assert!(ClassicalEnsemble::new(vec![[0.0, f64::NAN]]).is_err());
        assert!(ClassicalEnsemble::new(vec![]).is_err());
    }
}
