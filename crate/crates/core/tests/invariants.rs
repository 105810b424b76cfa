use std::f64::consts::{PI, TAU};

use decolab::discord::{discord_in_basis, min_discord, mutual_information};
use decolab::lab::{GridFile, GridFileError, GridPayload, Series};
use decolab::measurement::{
    correlated_density, decohere_via_environment, entropy_gain, premeasure, reduce, EnvCoupling, MeasurementBasis,
    QubitPairDensity,
};
use decolab::state::{make_gaussian, DensityMatrix, GaussianSpec};
use decolab::wigner::{density_from_wigner, marginals, purity_from_wigner, wigner_of_density};
use decolab::Grid;
use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use proptest::prelude::*;

fn packet() -> impl Strategy<Value = GaussianSpec> {
    (-2.0f64..2.0, -1.5f64..1.5, 0.6f64..1.0).prop_map(|(x, p, w)| GaussianSpec::new(x, p, w))
}

fn mixture() -> impl Strategy<Value = DensityMatrix> {
    prop::collection::vec((0.1f64..1.0, packet()), 1..4).prop_map(|parts| {
        // Coherences of every component stay shorter than L.
        let grid = Grid::new(128, 12.0).unwrap();
        let psis: Vec<_> = parts.iter().map(|(_, s)| make_gaussian(*s, grid).unwrap()).collect();
        let total: f64 = parts.iter().map(|p| p.0).sum();
        let comps: Vec<(f64, _)> = parts.iter().zip(&psis).map(|((w, _), psi)| (w / total, psi)).collect();
        DensityMatrix::mixture(&comps).unwrap()
    })
}

fn amplitude() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

/// Random two-qubit state: a weighted mixture of up to three pure states.
fn qubit_pair() -> impl Strategy<Value = QubitPairDensity> {
    prop::collection::vec((0.05f64..1.0, prop::array::uniform4(amplitude())), 1..4).prop_filter_map("degenerate", |parts| {
        let mut m = Matrix4::<Complex64>::zeros();
        let total: f64 = parts.iter().map(|p| p.0).sum();
        for (w, a) in parts {
            let v = Vector4::from(a);
            let norm = v.norm();
            if norm < 1e-3 {
                return None;
            }
            let v = v / Complex64::new(norm, 0.0);
            m += v * v.adjoint() * Complex64::new(w / total, 0.0);
        }
        Some(QubitPairDensity(m))
    })
}

fn sup(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn wigner_is_real_normalized_and_invertible(rho in mixture()) {
        let w = wigner_of_density(&rho);
        prop_assert!(w.imaginary_residue() < 1e-12);
        prop_assert!((w.normalization() - rho.trace()).abs() < 1e-10);
        prop_assert!((purity_from_wigner(&w) - rho.purity()).abs() < 1e-8);

        let (position, _) = marginals(&w);
        let diag = rho.position_marginal();
        let worst = position.iter().zip(&diag).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-10);

        let back = density_from_wigner(&w);
        let err = back.entries().iter().zip(rho.entries()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err / sup(rho.entries()) < 1e-8, "round trip error {err:e}");
    }

    #[test]
    fn discord_lies_between_zero_and_mutual_information(rho in qubit_pair(), theta in 0.0f64..PI, phi in 0.0f64..TAU) {
        prop_assert!(rho.is_valid(1e-9));
        let i = mutual_information(&rho);
        let d = min_discord(&rho).unwrap();
        prop_assert!(i > -1e-12);
        prop_assert!(d.value > -1e-9, "discord {}", d.value);
        prop_assert!(d.value <= i + 1e-9, "discord {} above mutual information {i}", d.value);
        // No basis does better than the reported minimum.
        prop_assert!(discord_in_basis(&rho, MeasurementBasis::new(theta, phi)) >= d.value - 1e-9);
    }

    #[test]
    fn measurement_entropy_is_the_record_entropy(a in amplitude(), b in amplitude()) {
        prop_assume!(a.norm() + b.norm() > 1e-2);
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (alpha, beta) = (a / n, b / n);
        let gain = entropy_gain(alpha, beta).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&gain));

        let rho = correlated_density(&premeasure(alpha, beta).unwrap());
        prop_assert!(rho.entropy().abs() < 1e-8);
        let reduced = reduce(&rho);
        prop_assert!((reduced.entropy() - gain).abs() < 1e-8);
        let traced = decohere_via_environment(&rho, EnvCoupling::new(Complex64::new(0.0, 0.0)).unwrap());
        prop_assert!((traced.0 - reduced.0).iter().all(|e| e.norm() < 1e-12));
        let untouched = decohere_via_environment(&rho, EnvCoupling::new(Complex64::new(1.0, 0.0)).unwrap());
        prop_assert!((untouched.0 - rho.0).iter().all(|e| e.norm() < 1e-12));
    }

    #[test]
    fn grid_files_round_trip(rows in 1u32..9, cols in 1u32..9, complex in any::<bool>(), seed in any::<u64>()) {
        let len = (rows * cols) as usize;
        let value = |k: usize| ((seed.wrapping_mul(6364136223846793005).wrapping_add(k as u64) >> 11) as f64) * 1e-9 - 4e3;
        let payload = if complex {
            GridPayload::Complex((0..len).map(|k| Complex64::new(value(2 * k), value(2 * k + 1))).collect())
        } else {
            GridPayload::Real((0..len).map(value).collect())
        };
        let file = GridFile::new(rows, cols, (-1.5, 2.0), (0.0, 3.25), payload).unwrap();
        let bytes = file.encode().unwrap();
        prop_assert_eq!(GridFile::decode(&bytes).unwrap(), file);
        let truncated = matches!(GridFile::decode(&bytes[..bytes.len() - 1]), Err(GridFileError::Truncated { .. }));
        prop_assert!(truncated);
    }

    #[test]
    fn csv_floats_parse_back_exactly(values in prop::collection::vec(-1e300f64..1e300, 1..20)) {
        let series = Series::from_columns(&[("v", &values)]).unwrap();
        let text = series.to_csv().unwrap();
        let parsed: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
        prop_assert_eq!(parsed, values);
    }
}

#[test]
fn corrupted_grid_files_are_rejected() {
    let file = GridFile::new(2, 2, (0.0, 1.0), (0.0, 1.0), GridPayload::Real(vec![1.0, 2.0, 3.0, 4.0])).unwrap();
    let mut bytes = file.encode().unwrap();
    bytes[0] = b'X';
    assert!(matches!(GridFile::decode(&bytes), Err(GridFileError::BadMagic)));
    assert!(GridFile::new(2, 2, (0.0, 1.0), (0.0, 1.0), GridPayload::Real(vec![1.0])).is_err());
    let nan = GridFile::new(1, 1, (0.0, 0.0), (0.0, 0.0), GridPayload::Real(vec![f64::NAN])).unwrap();
    assert!(nan.encode().is_err());
}
