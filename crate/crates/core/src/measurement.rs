//! Two-qubit von Neumann measurement chain: a system spin S and a detector D.
//!
//! Basis ordering is `|↑d↑⟩, |↑d↓⟩, |↓d↑⟩, |↓d↓⟩`, i.e. index `2·s + d`.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_eigenvalues4, shannon_bits};

const NORM_TOLERANCE: f64 = 1e-10;
const POINTER_TOLERANCE: f64 = 1e-10;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Pure system–detector state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitPairPure(pub Vector4<Complex64>);

/// System–detector density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitPairDensity(pub Matrix4<Complex64>);

/// Single-qubit Hermitian observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observable2(pub Matrix2<Complex64>);

/// Overlap `z = ⟨E↑|E↓⟩` of the environment states correlated with the records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvCoupling {
    pub overlap: Complex64,
}

impl EnvCoupling {
    pub fn new(overlap: Complex64) -> Result<Self> {
        if overlap.norm() > 1.0 + 1e-12 {
            return Err(invalid("overlap", format!("|z| = {} exceeds 1", overlap.norm())));
        }
        Ok(Self { overlap })
    }
}

impl QubitPairPure {
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Schmidt coefficients (squared), descending.
    pub fn schmidt_weights(&self) -> [f64; 2] {
        let m = Matrix2::new(self.0[0], self.0[1], self.0[2], self.0[3]);
        let gram = m * m.adjoint();
        let ev = crate::linalg::hermitian_eigenvalues2(&gram);
        [ev[1].max(0.0), ev[0].max(0.0)]
    }
}

impl QubitPairDensity {
    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        hermitian_eigenvalues4(&self.0)
    }

    pub fn entropy(&self) -> f64 {
        shannon_bits(self.eigenvalues())
    }

    /// Reduced state of the system spin.
    pub fn system_marginal(&self) -> Matrix2<Complex64> {
        let r = &self.0;
        Matrix2::new(
            r[(0, 0)] + r[(1, 1)],
            r[(0, 2)] + r[(1, 3)],
            r[(2, 0)] + r[(3, 1)],
            r[(2, 2)] + r[(3, 3)],
        )
    }

    /// Reduced state of the detector.
    pub fn detector_marginal(&self) -> Matrix2<Complex64> {
        let r = &self.0;
        Matrix2::new(
            r[(0, 0)] + r[(2, 2)],
            r[(0, 1)] + r[(2, 3)],
            r[(1, 0)] + r[(3, 2)],
            r[(1, 1)] + r[(3, 3)],
        )
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        let herm = (self.0 - self.0.adjoint()).iter().all(|e| e.norm() < tol);
        herm && (self.trace() - 1.0).abs() < tol && self.eigenvalues()[0] > -tol
    }
}

impl Observable2 {
    pub fn new(m: Matrix2<Complex64>) -> Result<Self> {
        if (m - m.adjoint()).iter().any(|e| e.norm() > 1e-12) {
            return Err(invalid("observable", "not Hermitian"));
        }
        Ok(Self(m))
    }

    pub fn sigma_x() -> Self {
        Self(Matrix2::new(ZERO, ONE, ONE, ZERO))
    }

    pub fn sigma_y() -> Self {
        let i = Complex64::new(0.0, 1.0);
        Self(Matrix2::new(ZERO, -i, i, ZERO))
    }

    pub fn sigma_z() -> Self {
        Self(Matrix2::new(ONE, ZERO, ZERO, -ONE))
    }
}

/// `α|↑⟩|d↑⟩ + β|↓⟩|d↓⟩`.
pub fn premeasure(alpha: Complex64, beta: Complex64) -> Result<QubitPairPure> {
    let norm_sqr = alpha.norm_sqr() + beta.norm_sqr();
    if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NonNormalizedInput { norm_sqr });
    }
    Ok(QubitPairPure(Vector4::new(alpha, ZERO, ZERO, beta)))
}

/// `|Φ⟩⟨Φ|`.
pub fn correlated_density(phi: &QubitPairPure) -> QubitPairDensity {
    QubitPairDensity(phi.0 * phi.0.adjoint())
}

#[inline]
fn detector_index(k: usize) -> usize {
    k & 1
}

/// Drops every coherence between different detector records.
pub fn reduce(rho: &QubitPairDensity) -> QubitPairDensity {
    QubitPairDensity(Matrix4::from_fn(|i, j| {
        if detector_index(i) == detector_index(j) {
            rho.0[(i, j)]
        } else {
            ZERO
        }
    }))
}

/// Correlates an environment with the detector record, `|d_k⟩|E₀⟩ → |d_k⟩|E_k⟩`,
/// and traces it out. Record coherences `|·d↑⟩⟨·d↓|` pick up `⟨E↓|E↑⟩ = z*`.
pub fn decohere_via_environment(rho: &QubitPairDensity, env: EnvCoupling) -> QubitPairDensity {
    let z = env.overlap;
    QubitPairDensity(Matrix4::from_fn(|i, j| {
        let e = rho.0[(i, j)];
        match (detector_index(i), detector_index(j)) {
            (0, 1) => e * z.conj(),
            (1, 0) => e * z,
            _ => e,
        }
    }))
}

/// `-(|α|² lg|α|² + |β|² lg|β|²)`.
pub fn entropy_gain(alpha: Complex64, beta: Complex64) -> Result<f64> {
    let norm_sqr = alpha.norm_sqr() + beta.norm_sqr();
    if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NonNormalizedInput { norm_sqr });
    }
    Ok(shannon_bits([alpha.norm_sqr(), beta.norm_sqr()]))
}

/// Detector basis `{|d̂₀⟩, |d̂₁⟩}` at Bloch angles `(θ, φ)`; `θ = 0` is the
/// record basis `{|d↑⟩, |d↓⟩}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBasis {
    pub theta: f64,
    pub phi: f64,
}

impl MeasurementBasis {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn pointer() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    pub fn vectors(&self) -> [Vector2<Complex64>; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        let e = Complex64::from_polar(1.0, self.phi);
        [
            Vector2::new(Complex64::new(c, 0.0), e * s),
            Vector2::new(-e.conj() * s, Complex64::new(c, 0.0)),
        ]
    }

    pub fn projectors(&self) -> [Matrix2<Complex64>; 2] {
        let [a, b] = self.vectors();
        [a * a.adjoint(), b * b.adjoint()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub probability: f64,
    /// Normalized partner state of the system (zero when the branch is empty).
    pub system_state: Vector2<Complex64>,
    pub detector_state: Vector2<Complex64>,
}

/// `Φ = Σₖ √pₖ |sₖ⟩|d̂ₖ⟩` in a rotated detector basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchDecomposition {
    pub basis: MeasurementBasis,
    pub branches: [Branch; 2],
}

impl BranchDecomposition {
    /// `|⟨s₀|s₁⟩|`: 0 for perfectly correlated records, 1 for identical partners.
    pub fn partner_overlap(&self) -> f64 {
        self.branches[0].system_state.dotc(&self.branches[1].system_state).norm()
    }

    pub fn reconstruct(&self) -> QubitPairPure {
        let mut v = Vector4::zeros();
        for b in &self.branches {
            let amp = b.probability.sqrt();
            for s in 0..2 {
                for d in 0..2 {
                    v[2 * s + d] += amp * b.system_state[s] * b.detector_state[d];
                }
            }
        }
        QubitPairPure(v)
    }
}

pub fn rotate_detector_basis(phi: &QubitPairPure, theta: f64, azimuth: f64) -> BranchDecomposition {
    let basis = MeasurementBasis::new(theta, azimuth);
    let vectors = basis.vectors();
    let branches = vectors.map(|d| {
        // (I ⊗ ⟨d̂|)Φ
        let s = Vector2::new(
            d[0].conj() * phi.0[0] + d[1].conj() * phi.0[1],
            d[0].conj() * phi.0[2] + d[1].conj() * phi.0[3],
        );
        let probability = s.norm_squared();
        let system_state = if probability > 1e-300 { s / Complex64::new(probability.sqrt(), 0.0) } else { Vector2::zeros() };
        Branch { probability, system_state, detector_state: d }
    });
    BranchDecomposition { basis, branches }
}

/// `I ⊗ Λ` as a 4×4 matrix.
pub fn detector_operator(lambda: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|i, j| if i / 2 == j / 2 { lambda[(i % 2, j % 2)] } else { ZERO })
}

/// `A ⊗ B` for 2×2 factors.
pub fn kron2(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerCheck {
    pub is_pointer: bool,
    /// Spectral norm of `[I⊗Λ, H_int]`.
    pub commutator_norm: f64,
}

pub fn is_pointer_observable(lambda: &Observable2, interaction: &Matrix4<Complex64>) -> PointerCheck {
    let op = detector_operator(&lambda.0);
    let c = op * interaction - interaction * op;
    // [A, H] is anti-Hermitian, so c†c is Hermitian PSD with eigenvalues σ².
    let gram = c.adjoint() * c;
    let largest = hermitian_eigenvalues4(&gram)[3].max(0.0);
    let commutator_norm = largest.sqrt();
    PointerCheck { is_pointer: commutator_norm < POINTER_TOLERANCE, commutator_norm }
}

/// `e^{-iHt}` for Hermitian `H` through its eigendecomposition.
pub fn unitary_evolution(h: &Matrix4<Complex64>, t: f64) -> Matrix4<Complex64> {
    let eig = h.symmetric_eigen();
    let v = eig.eigenvectors;
    let phases = Matrix4::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * t)));
    v * phases * v.adjoint()
}
