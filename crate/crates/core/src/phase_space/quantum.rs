use num_complex::Complex64;

use crate::brownian::{evolve_with, BathParams, EvolutionResult, EvolveOptions, PotentialSpec};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectral::{derivative_multiplier, transpose_in_place, Spectral};
use crate::state::DensityMatrix;
use crate::wigner::{wigner_of_density, WignerGrid};

/// A Wigner snapshot and its time.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerFrame {
    pub time: f64,
    pub wigner: WignerGrid,
}

/// Evolves `ρ(x, x′)` with the full master equation and transforms every
/// save point to phase space. The driven potential is re-evaluated inside
/// each step, so the quartic terms keep all their quantum corrections.
pub fn evolve_open_quantum(
    rho0: &DensityMatrix,
    bath: &BathParams,
    potential: &PotentialSpec,
    options: &EvolveOptions,
) -> Result<(EvolutionResult, Vec<WignerFrame>)> {
    let mut frames = Vec::new();
    let result = evolve_with(rho0, bath, potential, options, |snap| {
        frames.push(WignerFrame { time: snap.time, wigner: wigner_of_density(&snap.rho) });
    })?;
    Ok((result, frames))
}

/// Right-hand side of the phase-space equation
///
/// ```text
/// ∂W/∂t = −(p/m)∂ₓW + V′(x,t)∂ₚW + 2γ∂ₚ(pW) + D∂²ₚW
/// ```
///
/// which is exact for potentials at most quadratic in x.
pub fn phase_space_generator(w: &WignerGrid, bath: &BathParams, potential: &PotentialSpec, t: f64) -> Vec<f64> {
    let grid = *w.grid();
    let n = grid.n();
    let x = grid.positions();
    let p = grid.momenta();
    let mut spectral = Spectral::new(n);

    let along_p = |spectral: &mut Spectral, data: &[f64], order: u32| -> Vec<f64> {
        let mult = momentum_axis_multiplier(&grid, order);
        let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for row in buf.chunks_mut(n) {
            spectral.apply_multiplier_1d(row, &mult);
        }
        buf.iter().map(|c| c.re).collect()
    };

    let dwdp = along_p(&mut spectral, w.values(), 1);
    let d2wdp2 = along_p(&mut spectral, w.values(), 2);
    let pw: Vec<f64> = w.values().iter().enumerate().map(|(idx, v)| v * p[idx % n]).collect();
    let dpwdp = along_p(&mut spectral, &pw, 1);

    let mut dwdx: Vec<Complex64> = w.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transpose_in_place(&mut dwdx, n);
    let dx_mult = derivative_multiplier(&grid.fft_wavenumbers());
    for column in dwdx.chunks_mut(n) {
        spectral.apply_multiplier_1d(column, &dx_mult);
    }
    transpose_in_place(&mut dwdx, n);

    (0..n * n)
        .map(|idx| {
            let (i, m) = (idx / n, idx % n);
            -p[m] / bath.mass * dwdx[idx].re
                + potential.derivative(x[i], t) * dwdp[idx]
                + 2.0 * bath.gamma * dpwdp[idx]
                + bath.diffusion * d2wdp2[idx]
        })
        .collect()
}

/// Spectral derivative along p. The conjugate variable to p on this lattice
/// is the anti-diagonal offset `y = k·dx`.
fn momentum_axis_multiplier(grid: &Grid, order: u32) -> Vec<Complex64> {
    let n = grid.n();
    (0..n)
        .map(|k| {
            if k == n / 2 {
                return Complex64::new(0.0, 0.0);
            }
            let slot = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            // W carries e^{ipy}: ∂ₚ ↦ iy.
            Complex64::new(0.0, slot * grid.dx()).powu(order)
        })
        .collect()
}

/// Relative mismatch `max|∂ₜW − RHS| / max|RHS|` at the middle of three
/// frames spaced by `h`, with `∂ₜW` from the central difference.
pub fn phase_space_residual(
    frames: [&WignerGrid; 3],
    h: f64,
    bath: &BathParams,
    potential: &PotentialSpec,
    t: f64,
) -> Result<f64> {
    let [before, mid, after] = frames;
    if before.grid() != mid.grid() || after.grid() != mid.grid() {
        return Err(Error::Dimension("frames on different lattices".into()));
    }
    let rhs = phase_space_generator(mid, bath, potential, t);
    let (mut worst, mut scale) = (0.0_f64, 0.0_f64);
    for ((r, a), b) in rhs.iter().zip(after.values()).zip(before.values()) {
        let lhs = (a - b) / (2.0 * h);
        worst = worst.max((lhs - r).abs());
        scale = scale.max(r.abs());
    }
    Ok(worst / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{make_gaussian, GaussianSpec};
    use crate::wigner::gaussian_wigner;

    #[test]
    fn generator_of_a_free_gaussian() {
        let grid = Grid::new(128, 10.0).unwrap();
        let psi = make_gaussian(GaussianSpec::new(0.5, 0.0, 1.0), grid).unwrap();
        let w = wigner_of_density(&DensityMatrix::pure(&psi));
        let bath = BathParams::isolated(1.0).unwrap();
        let rhs = phase_space_generator(&w, &bath, &PotentialSpec::free(), 0.0);
        // −p ∂ₓW for W = exp(−(x−x₀)²/2 − 2p²)/π
        let n = grid.n();
        let p = grid.momenta();
        for idx in 0..n * n {
            let (x, pm) = (grid.x(idx / n), p[idx % n]);
            let exact = pm * (x - 0.5) * gaussian_wigner(x, pm, 0.5, 0.0, std::f64::consts::SQRT_2);
            assert!((rhs[idx] - exact).abs() < 1e-9);
        }
    }
}
