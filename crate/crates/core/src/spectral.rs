//! FFT plumbing shared by the solvers: 1-D transforms and diagonal Fourier
//! multipliers applied to both indices of a square row-major matrix.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct Spectral {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Spectral {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self { n, forward, inverse, scratch: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Unnormalized forward transform of every length-`n` chunk of `data`.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    /// Unnormalized inverse transform of every length-`n` chunk of `data`.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
    }

    /// Applies `F⁻¹ diag(mult) F` along the single axis of a vector.
    pub fn apply_multiplier_1d(&mut self, data: &mut [Complex64], mult: &[Complex64]) {
        debug_assert_eq!(data.len(), self.n);
        self.forward(data);
        let norm = 1.0 / self.n as f64;
        for (d, m) in data.iter_mut().zip(mult) {
            *d *= m * norm;
        }
        self.inverse(data);
    }

    /// Applies a diagonal multiplier in the joint Fourier space of both
    /// matrix indices. `mult[j * n + i]` multiplies the mode with wave number
    /// index `i` along the row index (x) and `j` along the column index (x′).
    /// Normalization is applied here; `mult` holds bare factors.
    pub fn apply_multiplier_2d(&mut self, data: &mut [Complex64], mult: &[Complex64]) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n);
        debug_assert_eq!(mult.len(), n * n);
        self.forward(data);
        transpose_in_place(data, n);
        self.forward(data);
        let norm = 1.0 / (n * n) as f64;
        for (d, m) in data.iter_mut().zip(mult) {
            *d *= m * norm;
        }
        self.inverse(data);
        transpose_in_place(data, n);
        self.inverse(data);
    }
}

/// Square in-place transpose, tiled for cache locality.
pub fn transpose_in_place(data: &mut [Complex64], n: usize) {
    const TILE: usize = 32;
    for bi in (0..n).step_by(TILE) {
        for bj in (bi..n).step_by(TILE) {
            for i in bi..(bi + TILE).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + TILE).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

/// Translation `f(x) -> f(x + h)` as a Fourier multiplier. The Nyquist mode
/// keeps only its real part so real functions stay real.
pub fn translation_multiplier(wavenumbers: &[f64], h: f64) -> Vec<Complex64> {
    let nyquist = wavenumbers.len() / 2;
    wavenumbers
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            if j == nyquist {
                Complex64::new((k * h).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, k * h)
            }
        })
        .collect()
}

/// Spectral first derivative multiplier `ik`, zero at Nyquist.
pub fn derivative_multiplier(wavenumbers: &[f64]) -> Vec<Complex64> {
    let nyquist = wavenumbers.len() / 2;
    wavenumbers
        .iter()
        .enumerate()
        .map(|(j, &k)| if j == nyquist { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, k) })
        .collect()
}
