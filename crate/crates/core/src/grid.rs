//! Uniform periodic position lattice and its conjugate momentum lattice.
//!
//! Natural units are used throughout the engine (ħ = k_B = 1).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` points on `[-L, L)` with spacing `dx = 2L/n`, periodic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    half_extent: f64,
}

impl Grid {
    pub fn new(n: usize, half_extent: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n = {n} must be a power of two >= 16")));
        }
        if !(half_extent > 0.0) || !half_extent.is_finite() {
            return Err(Error::InvalidGrid(format!("half extent {half_extent} must be positive")));
        }
        Ok(Self { n, half_extent })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        2.0 * self.half_extent / self.n as f64
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        -self.half_extent + j as f64 * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Momentum spacing `2π/(2L)`.
    #[inline]
    pub fn dp(&self) -> f64 {
        PI / self.half_extent
    }

    /// Largest representable momentum magnitude, `π/dx`.
    #[inline]
    pub fn p_max(&self) -> f64 {
        PI / self.dx()
    }

    /// Momentum lattice in ascending order, spanning `[-π/dx, π/dx)`.
    #[inline]
    pub fn p(&self, m: usize) -> f64 {
        (m as f64 - (self.n / 2) as f64) * self.dp()
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.p(m)).collect()
    }

    /// Wave numbers in FFT storage order.
    pub fn fft_wavenumbers(&self) -> Vec<f64> {
        let dk = self.dp();
        let n = self.n as isize;
        (0..n).map(|j| if j < n / 2 { j as f64 * dk } else { (j - n) as f64 * dk }).collect()
    }

    /// Displacement `x - x0` folded into `[-L, L)`.
    pub fn wrapped_offset(&self, x: f64, x0: f64) -> f64 {
        let period = 2.0 * self.half_extent;
        let mut d = (x - x0 + self.half_extent).rem_euclid(period) - self.half_extent;
        if d >= self.half_extent {
            d -= period;
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(8, 1.0).is_err());
        assert!(Grid::new(100, 1.0).is_err());
        assert!(Grid::new(64, 0.0).is_err());
        assert!(Grid::new(64, -2.0).is_err());
    }

    #[test]
    fn lattices() {
        let g = Grid::new(256, 16.0).unwrap();
        assert_eq!(g.dx(), 0.125);
        assert_eq!(g.x(0), -16.0);
        assert_eq!(g.x(128), 0.0);
        assert!((g.p(0) + g.p_max()).abs() < 1e-12);
        assert!((g.p(1) - g.p(0) - 2.0 * PI / 32.0).abs() < 1e-12);
        let k = g.fft_wavenumbers();
        assert_eq!(k[0], 0.0);
        assert!((k[128] + g.p_max()).abs() < 1e-12);
    }

    #[test]
    fn wrapping() {
        let g = Grid::new(64, 4.0).unwrap();
        assert!((g.wrapped_offset(3.5, -3.5) + 1.0).abs() < 1e-12);
        assert!((g.wrapped_offset(1.0, 0.5) - 0.5).abs() < 1e-12);
    }
}
