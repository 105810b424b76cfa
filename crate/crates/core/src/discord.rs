//! Quantumness of system–detector correlations: mutual information,
//! basis-dependent discord for projective measurements on the detector, and
//! its minimum over detector bases.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues2, shannon_bits};
use crate::measurement::{MeasurementBasis, QubitPairDensity};

fn entropy2(m: &Matrix2<Complex64>) -> f64 {
    shannon_bits(hermitian_eigenvalues2(m))
}

/// `I(S:D) = H(S) + H(D) − H(S,D)`.
pub fn mutual_information(rho: &QubitPairDensity) -> f64 {
    entropy2(&rho.system_marginal()) + entropy2(&rho.detector_marginal()) - rho.entropy()
}

/// Outcome probabilities and conditional system states for a detector measurement.
pub fn conditional_states(rho: &QubitPairDensity, basis: MeasurementBasis) -> [(f64, Matrix2<Complex64>); 2] {
    let r = &rho.0;
    basis.vectors().map(|d| {
        // ⟨d̂|_D ρ |d̂⟩_D, a 2×2 operator on S.
        let mut s = Matrix2::zeros();
        for a in 0..2 {
            for b in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    for l in 0..2 {
                        acc += d[k].conj() * r[(2 * a + k, 2 * b + l)] * d[l];
                    }
                }
                s[(a, b)] = acc;
            }
        }
        let p = s.trace().re;
        if p > 1e-14 {
            (p, s / Complex64::new(p, 0.0))
        } else {
            (p.max(0.0), Matrix2::zeros())
        }
    })
}

/// `H(S|D)` after measuring the detector in `basis`: `Σₖ pₖ H(ρ_{S|k})`.
pub fn conditional_entropy(rho: &QubitPairDensity, basis: MeasurementBasis) -> f64 {
    conditional_states(rho, basis).iter().map(|(p, s)| if *p > 0.0 { p * entropy2(s) } else { 0.0 }).sum()
}

/// `δ = H(D) + H(S|D)_{d̂ₖ} − H(S,D)` in bits, with `H(D)` the von Neumann
/// entropy of the detector marginal.
pub fn discord_in_basis(rho: &QubitPairDensity, basis: MeasurementBasis) -> f64 {
    entropy2(&rho.detector_marginal()) + conditional_entropy(rho, basis) - rho.entropy()
}

/// Discord evaluated with precomputed basis-independent terms.
struct Objective<'a> {
    rho: &'a QubitPairDensity,
    offset: f64,
    evaluations: usize,
}

impl<'a> Objective<'a> {
    fn new(rho: &'a QubitPairDensity) -> Self {
        Self { rho, offset: entropy2(&rho.detector_marginal()) - rho.entropy(), evaluations: 0 }
    }

    fn eval(&mut self, theta: f64, phi: f64) -> f64 {
        self.evaluations += 1;
        self.offset + conditional_entropy(self.rho, MeasurementBasis::new(theta, phi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscordMinimum {
    pub value: f64,
    pub basis: MeasurementBasis,
    pub evaluations: usize,
}

const COARSE_STEP_DEG: f64 = 5.0;
const MAX_SWEEPS: usize = 40;
const GOLDEN_TOL: f64 = 1e-9;
const SWEEP_TOL: f64 = 1e-13;

/// Minimum of [`discord_in_basis`] over all detector bases: a 5° grid in
/// `(θ, φ)` seeds golden-section line searches along each coordinate,
/// repeated until a full sweep stops improving.
pub fn min_discord(rho: &QubitPairDensity) -> Result<DiscordMinimum> {
    let mut f = Objective::new(rho);
    let step = COARSE_STEP_DEG.to_radians();
    let n_theta = (180.0 / COARSE_STEP_DEG) as usize;
    let n_phi = (360.0 / COARSE_STEP_DEG) as usize;

    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=n_theta {
        let theta = i as f64 * step;
        for j in 0..n_phi {
            let phi = j as f64 * step;
            let v = f.eval(theta, phi);
            if v < best.0 {
                best = (v, theta, phi);
            }
        }
    }

    let (mut value, mut theta, mut phi) = best;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let before = value;
        let (t, vt) = golden_section(|t| f.eval(t, phi), theta - step, theta + step);
        if vt < value {
            value = vt;
            theta = t;
        }
        let (p, vp) = golden_section(|p| f.eval(theta, p), phi - step, phi + step);
        if vp < value {
            value = vp;
            phi = p;
        }
        if before - value < SWEEP_TOL {
            converged = true;
            break;
        }
    }
    let basis = MeasurementBasis::new(theta.rem_euclid(2.0 * PI), phi.rem_euclid(2.0 * PI));
    if !converged || !value.is_finite() {
        return Err(Error::OptimizerNotConverged { best: value, theta: basis.theta, phi: basis.phi });
    }
    Ok(DiscordMinimum { value, basis, evaluations: f.evaluations })
}

fn golden_section(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > GOLDEN_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Discord on a regular `(θ, φ)` grid with the given spacing in degrees.
/// Rows are θ in `[0°, 180°]`, columns φ in `[0°, 360°)`.
pub fn discord_landscape(rho: &QubitPairDensity, step_deg: f64) -> Vec<Vec<f64>> {
    let mut f = Objective::new(rho);
    let n_theta = (180.0 / step_deg).round() as usize;
    let n_phi = (360.0 / step_deg).round() as usize;
    (0..=n_theta)
        .map(|i| {
            let theta = (i as f64 * step_deg).to_radians();
            (0..n_phi).map(|j| f.eval(theta, (j as f64 * step_deg).to_radians())).collect()
        })
        .collect()
}
