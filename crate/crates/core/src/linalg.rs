//! Small dense linear-algebra helpers: Hermitian spectra and entropies in bits.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn hermitian_eigenvalues4(m: &Matrix4<Complex64>) -> [f64; 4] {
    let ev = m.symmetric_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2], ev[3]];
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

/// Closed-form eigenvalues of a 2×2 Hermitian matrix, ascending.
pub fn hermitian_eigenvalues2(m: &Matrix2<Complex64>) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean - radius, mean + radius]
}

/// `-Σ p lg p` with `0 lg 0 = 0`; entries below zero are treated as zero.
pub fn shannon_bits<I: IntoIterator<Item = f64>>(probabilities: I) -> f64 {
    probabilities
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}
