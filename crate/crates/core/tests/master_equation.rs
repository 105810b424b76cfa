use decolab::brownian::{evolve, BathParams, EvolveOptions, MasterEquation, PotentialSpec, Terms};
use decolab::state::{make_cat, make_gaussian, DensityMatrix, GaussianSpec};
use decolab::Grid;
use num_complex::Complex64;
use proptest::prelude::*;
use rustfft::FftPlanner;

fn sup(entries: &[Complex64]) -> f64 {
    entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn sup_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    /// Without the Hamiltonian and friction, every coherence decays by
    /// exactly `exp(−D(x−x′)²t)` and the populations do not move.
    #[test]
    fn decoherence_alone_is_exact(d in 0.1f64..2.0, sep in 2.0f64..4.0, phase in 0.0f64..6.2) {
        let grid = Grid::new(64, 8.0).unwrap();
        let rho0 = DensityMatrix::pure(&make_cat(sep, 0.8, phase, grid).unwrap());
        let bath = BathParams::with_diffusion(1.0, 0.0, d).unwrap();
        let dt = 0.05 / (d * 256.0);
        let opts = EvolveOptions::new(200.0 * dt, dt).terms(Terms::decoherence_only());
        let r = evolve(&rho0, &bath, &PotentialSpec::free(), &opts).unwrap();
        let t = r.snapshots.last().unwrap().time;
        let n = grid.n();
        let exact: Vec<Complex64> = (0..n * n)
            .map(|k| {
                let v = grid.x(k / n) - grid.x(k % n);
                rho0.entries()[k] * (-d * v * v * t).exp()
            })
            .collect();
        let got = r.final_state().entries();
        prop_assert!(sup_diff(got, &exact) / sup(&exact) < 1e-10);
        let diag_drift = (0..n).map(|i| (got[i * n + i] - rho0.get(i, i)).norm()).fold(0.0, f64::max);
        prop_assert!(diag_drift < 1e-12);
    }

    /// Trace and Hermiticity survive the full equation for arbitrary baths.
    #[test]
    fn trace_and_hermiticity_are_preserved(
        gamma in 0.0f64..0.1,
        temperature in 0.0f64..0.5,
        drive in 0.0f64..5.0,
        center in -1.5f64..1.5,
    ) {
        let grid = Grid::new(64, 8.0).unwrap();
        let rho0 = DensityMatrix::pure(&make_gaussian(GaussianSpec::new(center, 0.5, 0.7), grid).unwrap());
        let bath = BathParams::thermal(1.0, gamma, temperature).unwrap();
        let potential = PotentialSpec::driven_double_well(2.0, 0.5, drive, 3.0);
        let r = evolve(&rho0, &bath, &potential, &EvolveOptions::new(0.4, 2e-3).snapshot_every(0.1)).unwrap();
        for s in &r.snapshots {
            prop_assert!(s.diagnostics.trace_error < 1e-6);
            prop_assert!(s.rho.hermiticity_error() < 1e-8);
        }
    }
}

/// Independent pure-state split-step solver: half potential kick, exact
/// kinetic propagation in Fourier space, half kick.
fn schrodinger(psi: &mut [Complex64], grid: &Grid, mass: f64, potential: impl Fn(f64) -> f64, dt: f64, steps: usize) {
    let n = grid.n();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let dk = std::f64::consts::PI / grid.half_extent();
    let kinetic: Vec<Complex64> = (0..n)
        .map(|j| {
            let k = if j < n / 2 { j as f64 } else { j as f64 - n as f64 } * dk;
            Complex64::from_polar(1.0 / n as f64, -k * k * dt / (2.0 * mass))
        })
        .collect();
    let kick: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(1.0, -potential(grid.x(j)) * dt / 2.0)).collect();
    for _ in 0..steps {
        psi.iter_mut().zip(&kick).for_each(|(a, k)| *a *= k);
        forward.process(psi);
        psi.iter_mut().zip(&kinetic).for_each(|(a, k)| *a *= k);
        inverse.process(psi);
        psi.iter_mut().zip(&kick).for_each(|(a, k)| *a *= k);
    }
}

#[test]
fn unitary_part_matches_a_wave_function_solver() {
    let grid = Grid::new(128, 8.0).unwrap();
    let psi0 = make_gaussian(GaussianSpec::new(-1.5, 0.8, 0.6), grid).unwrap();
    let (a, b) = (3.0, 0.6);
    let potential = PotentialSpec::new([0.0, 0.0, -a, 0.0, b], 0.0, 0.0).unwrap();
    let bath = BathParams::isolated(1.0).unwrap();
    let (dt, steps) = (2e-3, 500);
    let r = evolve(&DensityMatrix::pure(&psi0), &bath, &potential, &EvolveOptions::new(dt * steps as f64, dt).terms(Terms::unitary()))
        .unwrap();

    let mut psi = psi0.amplitudes().to_vec();
    schrodinger(&mut psi, &grid, 1.0, |x| -a * x * x + b * x.powi(4), dt, steps);
    let n = grid.n();
    let expected: Vec<Complex64> = (0..n * n).map(|k| psi[k / n] * psi[k % n].conj()).collect();
    let err = sup_diff(r.final_state().entries(), &expected) / sup(&expected);
    assert!(err < 1e-6, "relative difference {err:e}");
}

#[test]
fn closed_harmonic_evolution_is_periodic_and_conservative() {
    let grid = Grid::new(128, 10.0).unwrap();
    let (mass, omega) = (1.0, 1.0);
    let psi = make_gaussian(GaussianSpec::squeezed(2.0, 0.0, mass, omega, 1.0), grid).unwrap();
    let rho0 = DensityMatrix::pure(&psi);
    let bath = BathParams::thermal(mass, 0.0, 5.0).unwrap();
    assert_eq!(bath.diffusion, 0.0);
    let period = 2.0 * std::f64::consts::PI / omega;
    let r = evolve(&rho0, &bath, &PotentialSpec::harmonic(mass, omega), &EvolveOptions::new(period, 1e-3).snapshot_every(period / 8.0))
        .unwrap();
    let e0 = r.history[0].energy;
    for d in &r.history {
        assert!((d.purity - 1.0).abs() < 1e-6);
        assert!(((d.energy - e0) / e0).abs() < 1e-6, "energy drift at t = {}", d.time);
    }
    let back = sup_diff(r.final_state().entries(), rho0.entries()) / sup(rho0.entries());
    assert!(back < 1e-4, "state after one period differs by {back:e}");
}

/// Snapshot error of the damped, decohering oscillator against the step
/// size: halving `dt` cuts the error by about four.
#[test]
fn splitting_is_second_order() {
    let grid = Grid::new(64, 10.0).unwrap();
    let rho0 = DensityMatrix::pure(&make_cat(4.0, 0.8, 0.0, grid).unwrap());
    let bath = BathParams::with_diffusion(1.0, 0.02, 0.005).unwrap();
    let potential = PotentialSpec::harmonic(1.0, 1.0);
    let run = |dt: f64| evolve(&rho0, &bath, &potential, &EvolveOptions::new(1.0, dt)).unwrap().final_state().clone();
    let (a, b, c) = (run(0.01), run(0.005), run(0.0025));
    let ratio = sup_diff(a.entries(), b.entries()) / sup_diff(b.entries(), c.entries());
    assert!((3.6..4.4).contains(&ratio), "convergence ratio {ratio}");
}

#[test]
fn friction_drains_energy_towards_equilibrium() {
    // A displaced packet relaxes towards k_B T; the excess decays as e^{−2γt}.
    let grid = Grid::new(64, 10.0).unwrap();
    let rho0 = DensityMatrix::pure(&make_gaussian(GaussianSpec::new(4.0, 0.0, 0.7), grid).unwrap());
    let bath = BathParams::thermal(1.0, 0.5, 1.0).unwrap();
    let r = evolve(&rho0, &bath, &PotentialSpec::harmonic(1.0, 1.0), &EvolveOptions::new(4.0, 2.5e-4).snapshot_every(1.0)).unwrap();
    let energies: Vec<f64> = r.history.iter().map(|d| d.energy).collect();
    assert!(energies.windows(2).all(|w| w[1] < w[0]), "{energies:?}");
    assert!(energies[4] < 0.3 * energies[0], "{energies:?}");
}

#[test]
fn save_points_are_exact_multiples() {
    let grid = Grid::new(32, 6.0).unwrap();
    let rho0 = DensityMatrix::pure(&make_gaussian(GaussianSpec::new(0.0, 0.0, 0.7), grid).unwrap());
    let bath = BathParams::isolated(1.0).unwrap();
    let r = evolve(&rho0, &bath, &PotentialSpec::harmonic(1.0, 1.0), &EvolveOptions::new(2.0 * std::f64::consts::PI, 0.03).snapshot_every(std::f64::consts::PI / 2.0))
        .unwrap();
    assert_eq!(r.history.len(), 5);
    for (k, d) in r.history.iter().enumerate() {
        assert!((d.time - k as f64 * std::f64::consts::PI / 2.0).abs() < 1e-12);
    }
    assert!(r.dt <= 0.03);
}

#[test]
fn strong_damping_is_flagged() {
    let grid = Grid::new(32, 6.0).unwrap();
    let rho0 = DensityMatrix::pure(&make_gaussian(GaussianSpec::new(0.0, 0.0, 0.7), grid).unwrap());
    let bath = BathParams::thermal(1.0, 2.0, 1.0).unwrap();
    let r = evolve(&rho0, &bath, &PotentialSpec::harmonic(1.0, 1.0), &EvolveOptions::new(0.01, 1e-4).track_spectrum(true)).unwrap();
    assert!(r.warnings.iter().any(|w| w.contains("high-temperature")));
    assert!(r.min_eigenvalue().is_some());
}

#[test]
fn manual_stepping_agrees_with_evolve() {
    let grid = Grid::new(32, 6.0).unwrap();
    let rho0 = DensityMatrix::pure(&make_gaussian(GaussianSpec::new(0.5, 0.0, 0.7), grid).unwrap());
    let bath = BathParams::with_diffusion(1.0, 0.1, 0.05).unwrap();
    let potential = PotentialSpec::driven_double_well(1.0, 0.2, 1.0, 2.0);
    let dt = 4e-3;
    let mut eq = MasterEquation::new(grid, bath, potential, dt, Terms::default()).unwrap();
    let mut rho = rho0.clone();
    for s in 0..50 {
        eq.step(&mut rho, s as f64 * dt);
    }
    let r = evolve(&rho0, &bath, &potential, &EvolveOptions::new(50.0 * dt, dt)).unwrap();
    assert!(sup_diff(rho.entries(), r.final_state().entries()) < 1e-13);
}
