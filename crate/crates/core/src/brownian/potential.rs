use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `V(x, t) = Σₖ cₖ xᵏ + F x cos(ωt)` with `k ≤ 4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub coefficients: [f64; 5],
    pub drive_amplitude: f64,
    pub drive_frequency: f64,
}

impl PotentialSpec {
    pub fn new(coefficients: [f64; 5], drive_amplitude: f64, drive_frequency: f64) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coefficients", "must be finite"));
        }
        if !drive_amplitude.is_finite() || !drive_frequency.is_finite() {
            return Err(invalid("drive", "must be finite"));
        }
        Ok(Self { coefficients, drive_amplitude, drive_frequency })
    }

    pub fn free() -> Self {
        Self { coefficients: [0.0; 5], drive_amplitude: 0.0, drive_frequency: 0.0 }
    }

    /// `m ω² x² / 2`.
    pub fn harmonic(mass: f64, omega: f64) -> Self {
        Self { coefficients: [0.0, 0.0, 0.5 * mass * omega * omega, 0.0, 0.0], ..Self::free() }
    }

    /// `−A x² + B x⁴ + F x cos(ωt)`.
    pub fn driven_double_well(a: f64, b: f64, drive_amplitude: f64, drive_frequency: f64) -> Self {
        Self { coefficients: [0.0, 0.0, -a, 0.0, b], drive_amplitude, drive_frequency }
    }

    pub fn is_driven(&self) -> bool {
        self.drive_amplitude != 0.0
    }

    /// At most quadratic in x, so phase-space transport is exactly classical.
    pub fn is_quadratic(&self) -> bool {
        self.coefficients[3] == 0.0 && self.coefficients[4] == 0.0
    }

    #[inline]
    fn drive(&self, t: f64) -> f64 {
        if self.drive_amplitude == 0.0 {
            0.0
        } else {
            self.drive_amplitude * (self.drive_frequency * t).cos()
        }
    }

    #[inline]
    pub fn value(&self, x: f64, t: f64) -> f64 {
        let c = &self.coefficients;
        c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * c[4]))) + self.drive(t) * x
    }

    #[inline]
    pub fn derivative(&self, x: f64, t: f64) -> f64 {
        let c = &self.coefficients;
        c[1] + x * (2.0 * c[2] + x * (3.0 * c[3] + x * 4.0 * c[4])) + self.drive(t)
    }

    #[inline]
    pub fn second_derivative(&self, x: f64) -> f64 {
        let c = &self.coefficients;
        2.0 * c[2] + x * (6.0 * c[3] + x * 12.0 * c[4])
    }

    #[inline]
    pub fn third_derivative(&self, x: f64) -> f64 {
        let c = &self.coefficients;
        6.0 * c[3] + 24.0 * c[4] * x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let v = PotentialSpec::new([0.3, -1.0, -10.0, 0.2, 0.5], 10.0, 6.07).unwrap();
        let h = 1e-5;
        for &x in &[-2.0, -0.3, 0.0, 1.7] {
            let t = 0.4;
            let fd1 = (v.value(x + h, t) - v.value(x - h, t)) / (2.0 * h);
            assert!((fd1 - v.derivative(x, t)).abs() < 1e-6);
            let fd2 = (v.derivative(x + h, t) - v.derivative(x - h, t)) / (2.0 * h);
            assert!((fd2 - v.second_derivative(x)).abs() < 1e-6);
            let fd3 = (v.second_derivative(x + h) - v.second_derivative(x - h)) / (2.0 * h);
            assert!((fd3 - v.third_derivative(x)).abs() < 1e-6);
        }
        assert!(PotentialSpec::new([f64::NAN, 0.0, 0.0, 0.0, 0.0], 0.0, 0.0).is_err());
    }
}
