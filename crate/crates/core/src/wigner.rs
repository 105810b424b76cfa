//! Wigner quasi-distributions on the square phase-space lattice
//! `(xᵢ, pₘ)`, `pₘ = (m − n/2)·π/L`, with closed forms for Gaussians and
//! two-packet cats, marginals and interference diagnostics.
//!
//! The transform
//!
//! ```text
//! W(x, p) = (1/2π) ∫ e^{ipy} ρ(x − y/2, x + y/2) dy
//! ```
//!
//! is summed over `y = k·dx`, `k ∈ [−n, n)`, which covers every pair of
//! points `x ± y/2` on the grid. Even `k` lands on lattice entries of ρ; odd
//! `k` lands half a cell off both axes and is read from a spectrally
//! translated copy of ρ. On the `n`-point momentum lattice the phases repeat
//! with period `n` in `k`, so offsets `k` and `k ± n` share one slot of a
//! length-`n` transform.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::spectral::{translation_multiplier, Spectral};
use crate::state::{DensityMatrix, GaussianSpec};

/// Real `n × n` samples `W(xᵢ, pₘ)`, row-major with row index `i` (position).
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    grid: Grid,
    values: Vec<f64>,
    imaginary_residue: f64,
}

impl WignerGrid {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() * grid.n() {
            return Err(Error::Dimension(format!("{} values for a {}-point grid", values.len(), grid.n())));
        }
        Ok(Self { grid, values, imaginary_residue: 0.0 })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, m: usize) -> f64 {
        self.values[i * self.grid.n() + m]
    }

    pub fn momenta(&self) -> Vec<f64> {
        self.grid.momenta()
    }

    /// Largest imaginary part discarded by the transform.
    pub fn imaginary_residue(&self) -> f64 {
        self.imaginary_residue
    }

    fn cell(&self) -> f64 {
        self.grid.dx() * self.grid.dp()
    }

    /// `∬ W dx dp`.
    pub fn normalization(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sup-norm distance to another grid on the same lattice.
    pub fn max_abs_difference(&self, other: &WignerGrid) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `Σ |W − W'| dx dp`.
    pub fn l1_distance(&self, other: &WignerGrid) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum::<f64>() * self.cell()
    }
}

/// Phase-space transform of a density matrix.
pub fn wigner_of_density(rho: &DensityMatrix) -> WignerGrid {
    let grid = *rho.grid();
    let n = grid.n();
    let dx = grid.dx();
    let half = half_shifted(rho);
    let entries = rho.entries();
    let scale = dx / (2.0 * PI);

    let mut rows = vec![Complex64::new(0.0, 0.0); n * n];
    rows.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for k in -(n as isize)..n as isize {
            let (a, b) = anti_diagonal(i, k);
            let value = match (index(a, n), index(b, n)) {
                (Some(a), Some(b)) if k % 2 == 0 => entries[a * n + b],
                (Some(a), Some(b)) => half[a * n + b],
                _ => continue,
            };
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            row[k.rem_euclid(n as isize) as usize] += value * sign;
        }
    });
    let mut spectral = Spectral::new(n);
    spectral.inverse(&mut rows);
    let imaginary_residue = rows.iter().map(|c| c.im.abs()).fold(0.0, f64::max) * scale;
    WignerGrid { grid, values: rows.iter().map(|c| c.re * scale).collect(), imaginary_residue }
}

/// Inverse of [`wigner_of_density`]. Exact for states whose momentum content
/// stays below half the lattice cutoff and whose coherences are shorter
/// than `L`; longer coherences share transform slots with shorter ones and
/// cannot be told apart on a square lattice.
pub fn density_from_wigner(w: &WignerGrid) -> DensityMatrix {
    let grid = w.grid;
    let n = grid.n();
    let h = grid.dx() / 2.0;
    let mut spectral = Spectral::new(n);

    // Even offsets come from W itself, odd offsets from W at xᵢ − dx/2.
    let even = slices_to_offsets(&mut spectral, &grid, w.values.iter().map(|&v| Complex64::new(v, 0.0)).collect());
    let mut shifted: Vec<Complex64> = w.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    crate::spectral::transpose_in_place(&mut shifted, n);
    let mult = translation_multiplier(&grid.fft_wavenumbers(), -h);
    for column in shifted.chunks_mut(n) {
        spectral.apply_multiplier_1d(column, &mult);
    }
    crate::spectral::transpose_in_place(&mut shifted, n);
    let odd = slices_to_offsets(&mut spectral, &grid, shifted);

    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in -(n as isize / 2) + 1..n as isize / 2 {
            let (a, b) = anti_diagonal(i, k);
            if let (Some(a), Some(b)) = (index(a, n), index(b, n)) {
                let source = if k % 2 == 0 { &even } else { &odd };
                entries[a * n + b] = source[i * n + k.rem_euclid(n as isize) as usize];
            }
        }
    }
    DensityMatrix::from_entries(grid, entries).expect("square lattice")
}

/// Per-row forward transform turning `W(xᵢ, ·)` back into the anti-diagonal
/// samples `ρ(xᵢ − k·dx/2, xᵢ + k·dx/2)`, stored at `k mod n`.
fn slices_to_offsets(spectral: &mut Spectral, grid: &Grid, mut rows: Vec<Complex64>) -> Vec<Complex64> {
    let n = grid.n();
    spectral.forward(&mut rows);
    let scale = 2.0 * PI / (n as f64 * grid.dx());
    for row in rows.chunks_mut(n) {
        for (slot, v) in row.iter_mut().enumerate() {
            let sign = if slot % 2 == 0 { 1.0 } else { -1.0 };
            *v *= sign * scale;
        }
    }
    rows
}

/// Lattice indices `(a, b)` holding `ρ(xᵢ − k·dx/2, xᵢ + k·dx/2)`, in the
/// half-shifted copy when `k` is odd.
fn anti_diagonal(i: usize, k: isize) -> (isize, isize) {
    let i = i as isize;
    if k % 2 == 0 {
        (i - k / 2, i + k / 2)
    } else {
        (i - (k + 1).div_euclid(2), i + (k - 1).div_euclid(2))
    }
}

fn index(a: isize, n: usize) -> Option<usize> {
    (a >= 0 && (a as usize) < n).then_some(a as usize)
}

/// `ρ(x + dx/2, x′ + dx/2)` by spectral translation along both axes.
fn half_shifted(rho: &DensityMatrix) -> Vec<Complex64> {
    let grid = rho.grid();
    let n = grid.n();
    let t = translation_multiplier(&grid.fft_wavenumbers(), grid.dx() / 2.0);
    let mult: Vec<Complex64> = (0..n * n).map(|idx| t[idx % n] * t[idx / n]).collect();
    let mut data = rho.entries().to_vec();
    Spectral::new(n).apply_multiplier_2d(&mut data, &mult);
    data
}

/// `(1/π) exp[−(x−x₀)²/δ² − (p−p₀)²δ²]` with the phase-space width `δ`.
/// The position spread of this state is `δ/√2`.
pub fn gaussian_wigner(x: f64, p: f64, x0: f64, p0: f64, delta: f64) -> f64 {
    let u = (x - x0) / delta;
    let v = (p - p0) * delta;
    (-(u * u) - v * v).exp() / PI
}

/// Closed-form Wigner function of the packet built by
/// [`make_gaussian`](crate::state::make_gaussian) from the same spec, i.e.
/// phase-space width `δ = √2·σ` for position spread `σ`.
pub fn gaussian_wigner_closed_form(spec: GaussianSpec, grid: Grid) -> WignerGrid {
    let delta = std::f64::consts::SQRT_2 * spec.effective_width();
    tabulate(grid, |x, p| gaussian_wigner(grid.wrapped_offset(x, spec.center), p, 0.0, spec.momentum, delta))
}

/// Exact Wigner function of [`make_cat`](crate::state::make_cat) with
/// `φ = 0`: two lobes plus the interference term `∝ cos(Δx·p)`.
pub fn cat_wigner_closed_form(separation: f64, width: f64, grid: Grid) -> Result<WignerGrid> {
    cat_wigner_with_phase(separation, width, 0.0, grid)
}

pub fn cat_wigner_with_phase(separation: f64, width: f64, phase: f64, grid: Grid) -> Result<WignerGrid> {
    if !(separation > 0.0) {
        return Err(invalid("separation", format!("{separation} must be positive")));
    }
    if !(width > 0.0) {
        return Err(invalid("width", format!("{width} must be positive")));
    }
    let norm = crate::state::cat_normalization(separation, width, phase).powi(2);
    let delta = std::f64::consts::SQRT_2 * width;
    Ok(tabulate(grid, |x, p| {
        let lobes = gaussian_wigner(x, p, -separation / 2.0, 0.0, delta) + gaussian_wigner(x, p, separation / 2.0, 0.0, delta);
        let fringe = 2.0 * gaussian_wigner(x, p, 0.0, 0.0, delta) * (separation * p - phase).cos();
        (lobes + fringe) / norm
    }))
}

fn tabulate(grid: Grid, f: impl Fn(f64, f64) -> f64) -> WignerGrid {
    let n = grid.n();
    let momenta = grid.momenta();
    let values = (0..n).flat_map(|i| momenta.iter().map(move |&p| (i, p))).map(|(i, p)| f(grid.x(i), p)).collect();
    WignerGrid { grid, values, imaginary_residue: 0.0 }
}

/// `(∫W dp, ∫W dx)` as Riemann sums on the lattice.
pub fn marginals(w: &WignerGrid) -> (Vec<f64>, Vec<f64>) {
    let n = w.grid.n();
    let dx = w.grid.dx();
    let dp = w.grid.dp();
    let px = w.values.chunks(n).map(|row| row.iter().sum::<f64>() * dp).collect();
    let mut pp = vec![0.0; n];
    for row in w.values.chunks(n) {
        for (acc, v) in pp.iter_mut().zip(row) {
            *acc += v * dx;
        }
    }
    (px, pp)
}

/// `∬ max(−W, 0) dx dp`.
pub fn negativity_volume(w: &WignerGrid) -> f64 {
    w.values.iter().map(|&v| (-v).max(0.0)).sum::<f64>() * w.cell()
}

/// `2π ∬ W² dx dp = Tr ρ²`.
pub fn purity_from_wigner(w: &WignerGrid) -> f64 {
    2.0 * PI * w.values.iter().map(|v| v * v).sum::<f64>() * w.cell()
}

/// Fringes below this fraction of the slice's overall spectral weight are
/// treated as absent.
const FRINGE_FLOOR: f64 = 1e-6;

/// Period in `p` of the interference pattern on the slice through the
/// position mean. The slice spectrum is searched for its strongest local
/// maximum away from zero frequency; the peak is refined by a parabola
/// through the log-magnitudes, which is exact for Gaussian envelopes.
pub fn fringe_wavelength(w: &WignerGrid) -> Result<f64> {
    let grid = w.grid;
    let n = grid.n();
    let (px, _) = marginals(w);
    let total: f64 = px.iter().sum();
    let mean = px.iter().enumerate().map(|(i, p)| p * grid.x(i)).sum::<f64>() / total;
    let centre = ((mean + grid.half_extent()) / grid.dx()).round().clamp(0.0, (n - 1) as f64) as usize;

    let mut slice: Vec<Complex64> = w.values[centre * n..(centre + 1) * n].iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Spectral::new(n).forward(&mut slice);
    let mag: Vec<f64> = slice[..=n / 2].iter().map(|c| c.norm()).collect();
    let reference = mag.iter().copied().fold(0.0, f64::max);
    let peak = (1..n / 2)
        .filter(|&k| mag[k] > mag[k - 1] && mag[k] >= mag[k + 1] && mag[k] > FRINGE_FLOOR * reference)
        .max_by(|&a, &b| mag[a].total_cmp(&mag[b]))
        .ok_or(Error::NoFringeDetected)?;

    let (l, c, r) = (mag[peak - 1].ln(), mag[peak].ln(), mag[peak + 1].ln());
    let curvature = l - 2.0 * c + r;
    let offset = if curvature < 0.0 { 0.5 * (l - r) / curvature } else { 0.0 };
    // Slot k of the slice spectrum is the anti-diagonal offset y = k·dx.
    let y = (peak as f64 + offset) * grid.dx();
    Ok(2.0 * PI / y)
}

/// `a = ħ²/A`.
pub fn sub_planck_action(classical_action: f64) -> Result<f64> {
    if !(classical_action > 0.0) || !classical_action.is_finite() {
        return Err(invalid("classical_action", format!("{classical_action} must be positive")));
    }
    Ok(1.0 / classical_action)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSpaceDiagnostics {
    pub normalization: f64,
    pub negativity: f64,
    pub purity: f64,
    pub fringe_wavelength: Option<f64>,
    pub sub_planck_action: Option<f64>,
}

pub fn diagnostics(w: &WignerGrid, classical_action: Option<f64>) -> Result<PhaseSpaceDiagnostics> {
    let fringe_wavelength = match fringe_wavelength(w) {
        Ok(l) => Some(l),
        Err(Error::NoFringeDetected) => None,
        Err(e) => return Err(e),
    };
    Ok(PhaseSpaceDiagnostics {
        normalization: w.normalization(),
        negativity: negativity_volume(w),
        purity: purity_from_wigner(w),
        fringe_wavelength,
        sub_planck_action: classical_action.map(sub_planck_action).transpose()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{density_of, make_cat, make_gaussian};

    fn grid() -> Grid {
        Grid::new(256, 24.0).unwrap()
    }

    #[test]
    fn gaussian_matches_closed_form() {
        let g = Grid::new(256, 16.0).unwrap();
        // The last packet keeps coherences beyond |x − x′| = L on its grid.
        for (spec, g) in [
            (GaussianSpec::new(0.0, 0.0, 1.0), g),
            (GaussianSpec::new(1.5, -2.0, 0.8), g),
            (GaussianSpec::new(0.5, 0.0, 1.0), Grid::new(128, 10.0).unwrap()),
        ] {
            let w = wigner_of_density(&density_of(&make_gaussian(spec, g).unwrap()));
            let exact = gaussian_wigner_closed_form(spec, g);
            assert!(w.max_abs_difference(&exact) < 1e-8, "{}", w.max_abs_difference(&exact));
            assert!(w.imaginary_residue() < 1e-9);
            assert!((w.normalization() - 1.0).abs() < 1e-10);
            assert!(negativity_volume(&w) < 1e-9);
        }
    }

    #[test]
    fn closed_form_peak_and_marginal() {
        assert!((gaussian_wigner(0.0, 0.0, 0.0, 0.0, 1.0) - 1.0 / PI).abs() < 1e-15);
        // ∫ exp(−x² − p²) dp / π = exp(−x²)/√π, variance 1/2.
        let g = Grid::new(256, 16.0).unwrap();
        let spec = GaussianSpec::new(0.0, 0.0, std::f64::consts::FRAC_1_SQRT_2);
        let (px, _) = marginals(&gaussian_wigner_closed_form(spec, g));
        for (i, p) in px.iter().enumerate() {
            let x = g.x(i);
            assert!((p - (-x * x).exp() / PI.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn marginal_reproduces_density_diagonal() {
        let g = grid();
        let rho = density_of(&make_cat(8.0, 1.0, 0.7, g).unwrap());
        let (px, pp) = marginals(&wigner_of_density(&rho));
        for (i, p) in px.iter().enumerate() {
            assert!((p - rho.get(i, i).re).abs() < 1e-12);
        }
        assert!((pp.iter().sum::<f64>() * g.dp() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cat_matches_closed_form() {
        let g = grid();
        for phase in [0.0, 0.9] {
            let w = wigner_of_density(&density_of(&make_cat(8.0, 1.0, phase, g).unwrap()));
            let exact = cat_wigner_with_phase(8.0, 1.0, phase, g).unwrap();
            assert!(w.max_abs_difference(&exact) < 1e-8, "{}", w.max_abs_difference(&exact));
        }
        let exact = cat_wigner_closed_form(8.0, 1.0, g).unwrap();
        assert!(exact.min_value() < 0.0);
        assert!((exact.normalization() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn round_trip() {
        let g = grid();
        let a = make_gaussian(GaussianSpec::new(-3.0, 1.0, 0.9), g).unwrap();
        let b = make_cat(6.0, 1.2, 0.3, g).unwrap();
        let rho = DensityMatrix::mixture(&[(0.4, &a), (0.6, &b)]).unwrap();
        let back = density_from_wigner(&wigner_of_density(&rho));
        let err = rho.entries().iter().zip(back.entries()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn negativity_and_purity() {
        let g = grid();
        let cat = wigner_of_density(&density_of(&make_cat(8.0, 1.0, 0.0, g).unwrap()));
        assert!(negativity_volume(&cat) > 1e-2);
        assert!((purity_from_wigner(&cat) - 1.0).abs() < 1e-5);
        let left = make_gaussian(GaussianSpec::new(-4.0, 0.0, 1.0), g).unwrap();
        let right = make_gaussian(GaussianSpec::new(4.0, 0.0, 1.0), g).unwrap();
        let mix = wigner_of_density(&DensityMatrix::mixture(&[(0.5, &left), (0.5, &right)]).unwrap());
        assert!(negativity_volume(&mix) < 1e-6);
        assert!((purity_from_wigner(&mix) - 0.5).abs() < 1e-5);
    }

    #[test]
    fn fringe_period() {
        let g = grid();
        for sep in [8.0, 4.0] {
            let w = wigner_of_density(&density_of(&make_cat(sep, 1.0, 0.0, g).unwrap()));
            let l = fringe_wavelength(&w).unwrap();
            assert!((l - 2.0 * PI / sep).abs() < g.dp(), "{sep}: {l}");
        }
        let gauss = wigner_of_density(&density_of(&make_gaussian(GaussianSpec::new(0.0, 0.0, 1.0), g).unwrap()));
        assert_eq!(fringe_wavelength(&gauss), Err(Error::NoFringeDetected));
        let d = diagnostics(&gauss, Some(10.0)).unwrap();
        assert!(d.fringe_wavelength.is_none());
        assert!((d.sub_planck_action.unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn sub_planck_scale() {
        assert_eq!(sub_planck_action(1.0).unwrap(), 1.0);
        assert!((sub_planck_action(100.0).unwrap() - 0.01).abs() < 1e-15);
        assert!(sub_planck_action(0.0).is_err());
    }
}
