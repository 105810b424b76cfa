//! Wave functions and position-representation density matrices on a [`Grid`],
//! with the Gaussian and cat-state constructors and scalar diagnostics.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::linalg::{hermitian_eigenvalues, shannon_bits};
use crate::spectral::Spectral;

/// Eigenvalues below this are a solver defect rather than round-off.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    amplitudes: Vec<Complex64>,
}

impl WaveFunction {
    /// Wraps amplitudes and rescales them to unit norm.
    pub fn normalized(grid: Grid, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n() {
            return Err(Error::Dimension(format!("{} amplitudes for a {}-point grid", amplitudes.len(), grid.n())));
        }
        let norm = (amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dx()).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(invalid("amplitudes", "zero or non-finite norm"));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { grid, amplitudes })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Mean and variance of position.
    pub fn position_moments(&self) -> (f64, f64) {
        moments(self.grid.positions().iter().copied().zip(self.density()))
    }

    /// Mean and variance of momentum from the discrete Fourier transform.
    pub fn momentum_moments(&self) -> (f64, f64) {
        let mut spectrum = self.amplitudes.clone();
        Spectral::new(self.grid.n()).forward(&mut spectrum);
        let k = self.grid.fft_wavenumbers();
        moments(k.into_iter().zip(spectrum.iter().map(|a| a.norm_sqr())))
    }

    /// Circular shift by `cells` lattice sites towards larger x.
    pub fn shifted(&self, cells: isize) -> Self {
        let n = self.grid.n() as isize;
        let amplitudes = (0..n).map(|j| self.amplitudes[(j - cells).rem_euclid(n) as usize]).collect();
        Self { grid: self.grid, amplitudes }
    }
}

fn moments(samples: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let (mut w, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (x, p) in samples {
        w += p;
        s1 += p * x;
        s2 += p * x * x;
    }
    let mean = s1 / w;
    (mean, s2 / w - mean * mean)
}

/// A Gaussian wave packet. The position spread is `width·√squeeze`, so
/// `squeeze = 1` leaves `width` untouched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub center: f64,
    pub momentum: f64,
    pub width: f64,
    pub squeeze: f64,
}

impl GaussianSpec {
    pub fn new(center: f64, momentum: f64, width: f64) -> Self {
        Self { center, momentum, width, squeeze: 1.0 }
    }

    /// Packet whose width is `√s` times the ground-state width `√(1/2mω)`
    /// of an oscillator with the given mass and frequency.
    pub fn squeezed(center: f64, momentum: f64, mass: f64, omega: f64, squeeze: f64) -> Self {
        Self { center, momentum, width: (0.5 / (mass * omega)).sqrt(), squeeze }
    }

    pub fn effective_width(&self) -> f64 {
        self.width * self.squeeze.sqrt()
    }

    fn validate(&self) -> Result<()> {
        if !(self.width > 0.0) {
            return Err(invalid("width", format!("{} must be positive", self.width)));
        }
        if !(self.squeeze > 0.0) {
            return Err(invalid("squeeze", format!("{} must be positive", self.squeeze)));
        }
        if !self.center.is_finite() || !self.momentum.is_finite() {
            return Err(invalid("center", "non-finite packet coordinates"));
        }
        Ok(())
    }
}

/// Normalized packet `exp[-(x-x0)²/4δ²]·exp(ip0·x)`.
pub fn make_gaussian(spec: GaussianSpec, grid: Grid) -> Result<WaveFunction> {
    spec.validate()?;
    let delta = spec.effective_width();
    if 4.0 * delta >= grid.half_extent() {
        return Err(Error::PacketTooWide { four_width: 4.0 * delta, half_extent: grid.half_extent() });
    }
    let limit = 0.8 * grid.p_max();
    if spec.momentum.abs() >= limit {
        return Err(Error::MomentumAliasing { momentum: spec.momentum, limit });
    }
    WaveFunction::normalized(grid, gaussian_amplitudes(&grid, spec.center, spec.momentum, delta))
}

fn gaussian_amplitudes(grid: &Grid, center: f64, momentum: f64, width: f64) -> Vec<Complex64> {
    let prefactor = (2.0 * PI * width * width).powf(-0.25);
    (0..grid.n())
        .map(|j| {
            let x = grid.x(j);
            let d = grid.wrapped_offset(x, center);
            Complex64::from_polar(prefactor * (-d * d / (4.0 * width * width)).exp(), momentum * x)
        })
        .collect()
}

/// Norm of `χ⁺ + e^{iφ}χ⁻` for unit-norm branches, including the overlap.
pub fn cat_normalization(separation: f64, width: f64, phase: f64) -> f64 {
    let overlap = (-separation * separation / (8.0 * width * width)).exp();
    (2.0 + 2.0 * phase.cos() * overlap).sqrt()
}

/// Superposition `(χ⁺ + e^{iφ}χ⁻)/N` of packets centered at `∓separation/2`.
pub fn make_cat(separation: f64, width: f64, phase: f64, grid: Grid) -> Result<WaveFunction> {
    if !(width > 0.0) {
        return Err(invalid("width", format!("{width} must be positive")));
    }
    if !(separation >= 0.0) {
        return Err(invalid("separation", format!("{separation} must be non-negative")));
    }
    let extent = separation + 4.0 * width;
    if extent >= grid.half_extent() {
        return Err(Error::PacketsExceedGrid { extent, half_extent: grid.half_extent() });
    }
    let norm = cat_normalization(separation, width, phase);
    if norm < 1e-8 {
        return Err(invalid("phase", "branches cancel exactly"));
    }
    let plus = gaussian_amplitudes(&grid, -separation / 2.0, 0.0, width);
    let minus = gaussian_amplitudes(&grid, separation / 2.0, 0.0, width);
    let rel = Complex64::from_polar(1.0, phase);
    let amplitudes = plus.iter().zip(&minus).map(|(a, b)| (a + rel * b) / norm).collect();
    Ok(WaveFunction { grid, amplitudes })
}

/// Superposition of two packets at the same place with momenta `±separation/2`.
pub fn make_momentum_cat(momentum_separation: f64, width: f64, grid: Grid) -> Result<WaveFunction> {
    let half = momentum_separation / 2.0;
    let a = make_gaussian(GaussianSpec::new(0.0, half, width), grid)?;
    let b = make_gaussian(GaussianSpec::new(0.0, -half, width), grid)?;
    WaveFunction::normalized(grid, a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x + y).collect())
}

/// `ρ(xᵢ, xⱼ)` stored row-major: row index x, column index x′.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    grid: Grid,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_entries(grid: Grid, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != grid.n() * grid.n() {
            return Err(Error::Dimension(format!("{} entries for a {}-point grid", entries.len(), grid.n())));
        }
        Ok(Self { grid, entries })
    }

    pub fn pure(psi: &WaveFunction) -> Self {
        let a = psi.amplitudes();
        let n = a.len();
        let mut entries = Vec::with_capacity(n * n);
        for ai in a {
            entries.extend(a.iter().map(|aj| ai * aj.conj()));
        }
        Self { grid: psi.grid, entries }
    }

    /// Convex combination `Σ wₖ|ψₖ⟩⟨ψₖ|`; weights must be non-negative and sum to 1.
    pub fn mixture(components: &[(f64, &WaveFunction)]) -> Result<Self> {
        let first = components.first().ok_or_else(|| invalid("components", "empty mixture"))?;
        let grid = first.1.grid;
        let total: f64 = components.iter().map(|c| c.0).sum();
        if components.iter().any(|c| c.0 < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(invalid("weights", "must be non-negative and sum to one"));
        }
        let n = grid.n();
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for (w, psi) in components {
            if psi.grid != grid {
                return Err(Error::Dimension("mixture components live on different grids".into()));
            }
            let a = psi.amplitudes();
            for i in 0..n {
                let wi = a[i] * *w;
                for (e, aj) in entries[i * n..(i + 1) * n].iter_mut().zip(a) {
                    *e += wi * aj.conj();
                }
            }
        }
        Ok(Self { grid, entries })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.grid.n() + j]
    }

    pub fn trace(&self) -> f64 {
        let n = self.grid.n();
        (0..n).map(|i| self.entries[i * n + i].re).sum::<f64>() * self.grid.dx()
    }

    pub fn purity(&self) -> f64 {
        let dx = self.grid.dx();
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>() * dx * dx
    }

    /// `max |ρ(x,x′) − ρ*(x′,x)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.grid.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.entries[i * n + j] - self.entries[j * n + i].conj()).norm());
            }
        }
        worst
    }

    /// Spectrum of the trace-one operator `ρ·dx`, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.grid.n();
        let dx = self.grid.dx();
        let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (self.entries[i * n + j] + self.entries[j * n + i].conj()) * dx);
        hermitian_eigenvalues(m)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Entropy in bits; eigenvalues in `[-1e-6, 0)` are truncated to zero.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        entropy_from_spectrum(&self.eigenvalues())
    }

    /// Diagonal `P(xᵢ) = ρ(xᵢ, xᵢ)`.
    pub fn position_marginal(&self) -> Vec<f64> {
        let n = self.grid.n();
        (0..n).map(|i| self.entries[i * n + i].re).collect()
    }
}

pub fn entropy_from_spectrum(eigenvalues: &[f64]) -> Result<f64> {
    let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -NEGATIVITY_TOLERANCE {
        return Err(Error::SignificantNegativity { min_eigenvalue: min });
    }
    Ok(shannon_bits(eigenvalues.iter().copied()))
}

pub fn density_of(psi: &WaveFunction) -> DensityMatrix {
    DensityMatrix::pure(psi)
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    rho.von_neumann_entropy()
}

pub fn position_marginal(rho: &DensityMatrix) -> Vec<f64> {
    rho.position_marginal()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(256, 16.0).unwrap()
    }

    #[test]
    fn gaussian_preconditions() {
        let g = grid();
        assert!(matches!(make_gaussian(GaussianSpec::new(0.0, 0.0, 4.0), g), Err(Error::PacketTooWide { .. })));
        let too_fast = 0.8 * g.p_max();
        assert!(matches!(make_gaussian(GaussianSpec::new(0.0, too_fast, 1.0), g), Err(Error::MomentumAliasing { .. })));
        assert!(make_gaussian(GaussianSpec::new(0.0, 0.0, -1.0), g).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let psi = make_gaussian(GaussianSpec::new(0.0, 0.0, 1.0), grid()).unwrap();
        let (m, v) = psi.position_moments();
        assert!(m.abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-6);
        let shifted = make_gaussian(GaussianSpec::new(2.0, 0.0, 1.0), grid()).unwrap();
        assert!((shifted.position_moments().0 - 2.0).abs() < 1e-6);
    }

    #[test]
    fn squeeze_scales_position_variance() {
        let spec = GaussianSpec::squeezed(0.0, 0.0, 1.0, 1.0, 4.0);
        let psi = make_gaussian(spec, grid()).unwrap();
        assert!((psi.position_moments().1 - 4.0 * 0.5).abs() < 1e-9);
    }

    #[test]
    fn cat_edge_cases() {
        let g = grid();
        assert!(matches!(make_cat(14.0, 1.0, 0.0, g), Err(Error::PacketsExceedGrid { .. })));
        let degenerate = make_cat(0.0, 1.0, 0.0, g).unwrap();
        let single = make_gaussian(GaussianSpec::new(0.0, 0.0, 1.0), g).unwrap();
        for (a, b) in degenerate.amplitudes().iter().zip(single.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(make_cat(0.0, 1.0, PI, g).is_err());
    }

    #[test]
    fn cat_peaks_carry_half_each() {
        let g = grid();
        let psi = make_cat(8.0, 1.0, 0.0, g).unwrap();
        let p = psi.density();
        // The x = 0 sample sits on the symmetry axis and is shared by both halves.
        let left: f64 = (0..g.n()).map(|j| if g.x(j) < 0.0 { p[j] } else if g.x(j) == 0.0 { 0.5 * p[j] } else { 0.0 }).sum::<f64>() * g.dx();
        assert!((left - 0.5).abs() < 1e-6);
        let peak = (0..g.n()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
        assert!((g.x(peak).abs() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn density_diagnostics() {
        let g = grid();
        let a = make_gaussian(GaussianSpec::new(-5.0, 0.0, 0.7), g).unwrap();
        let b = make_gaussian(GaussianSpec::new(5.0, 0.0, 0.7), g).unwrap();
        let rho = DensityMatrix::pure(&a);
        assert!((rho.trace() - 1.0).abs() < 1e-10);
        assert!((rho.purity() - 1.0).abs() < 1e-8);
        assert!(rho.von_neumann_entropy().unwrap().abs() < 1e-6);
        assert!(rho.hermiticity_error() < 1e-15);
        let half = DensityMatrix::mixture(&[(0.5, &a), (0.5, &b)]).unwrap();
        assert!((half.purity() - 0.5).abs() < 1e-6);
        assert!((half.von_neumann_entropy().unwrap() - 1.0).abs() < 1e-6);
        let skew = DensityMatrix::mixture(&[(0.9, &a), (0.1, &b)]).unwrap();
        // -0.9 lg 0.9 - 0.1 lg 0.1
        assert!((skew.von_neumann_entropy().unwrap() - 0.468_995_593_589_281).abs() < 1e-3);
        assert!(skew.position_marginal().iter().all(|&p| p >= -1e-8));
    }

    #[test]
    fn complex_coherences_keep_a_valid_spectrum() {
        let g = grid();
        let a = make_gaussian(GaussianSpec::new(-3.0, 2.0, 0.7), g).unwrap();
        let b = make_gaussian(GaussianSpec::new(3.0, -1.0, 0.7), g).unwrap();
        let rho = DensityMatrix::mixture(&[(0.25, &a), (0.75, &b)]).unwrap();
        let ev = rho.eigenvalues();
        assert!((ev[g.n() - 1] - 0.75).abs() < 1e-9);
        assert!((ev[g.n() - 2] - 0.25).abs() < 1e-9);
        assert!(ev[0] > -1e-12);
    }

    #[test]
    fn mixture_rejects_bad_weights() {
        let g = grid();
        let a = make_gaussian(GaussianSpec::new(0.0, 0.0, 1.0), g).unwrap();
        assert!(DensityMatrix::mixture(&[(0.7, &a), (0.7, &a)]).is_err());
        assert!(DensityMatrix::mixture(&[]).is_err());
    }

    #[test]
    fn negativity_is_reported() {
        let g = Grid::new(16, 4.0).unwrap();
        let n = g.n();
        let dx = g.dx();
        let mut e = vec![Complex64::new(0.0, 0.0); n * n];
        e[0] = Complex64::new(1.1 / dx, 0.0);
        e[n + 1] = Complex64::new(-0.1 / dx, 0.0);
        let rho = DensityMatrix::from_entries(g, e).unwrap();
        assert!(matches!(rho.von_neumann_entropy(), Err(Error::SignificantNegativity { .. })));
    }
}
