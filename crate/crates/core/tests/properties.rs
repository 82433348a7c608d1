mod common;

use common::*;
use effham::bloch::{iterate_bloch, perturbative_bloch, t_map, IterationOptions};
use effham::dynamics::{evolve_constant, low_pass_signal, populations, uniform_times, StateVector};
use effham::effective::{
    hermitian_effective, hermitian_from_b, match_spectra, reconstruct_full_eigenvector,
};
use effham::floquet::fold_quasi_energy;
use effham::matrixkit::{
    general_eig, hermitian_deviation, inverse, norm, spectral_norm, sylvester_residual, sylvester_solve,
    unitarity_deviation, NormKind,
};
use effham::partition::{coupling_scales, partition_hamiltonian};
use effham::schriefferwolff::{block_offdiagonal_norm, generator_from_b, generator_from_embedding};
use effham::scalar::CMatrix;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_round_trip(seed in any::<u64>(), n in 2usize..9) {
        let mut r = rng(seed);
        let h = random_hermitian(&mut r, n).scale(0.3) + CMatrix::identity(n, n).scale(4.0);
        let k = r.random_range(1..n);
        let mut idx: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            idx.swap(i, r.random_range(0..=i));
        }
        let slow = &idx[..k];
        let ph = partition_hamiltonian(&h, slow).unwrap();
        prop_assert_eq!(ph.reassemble(), h);
        prop_assert_eq!(ph.slow_dim() + ph.fast_dim(), n);
    }

    #[test]
    fn inverse_is_inverse(seed in any::<u64>(), n in 1usize..9) {
        let mut r = rng(seed);
        let a = random_complex(&mut r, n, n) + CMatrix::identity(n, n).scale(3.0);
        let inv = inverse(&a).unwrap();
        prop_assert!((&a * inv - CMatrix::identity(n, n)).norm() < 1e-12);
    }

    #[test]
    fn sylvester_solves(seed in any::<u64>(), p in 1usize..7, q in 1usize..7) {
        let mut r = rng(seed);
        let ph = instance_with(&mut r, p, q, 0.3, 0.2);
        let x = sylvester_solve(ph.omega(), ph.delta(), ph.coupling()).unwrap();
        prop_assert!(sylvester_residual(ph.omega(), ph.delta(), ph.coupling(), &x) < 1e-12);
    }

    #[test]
    fn hermitization_is_universal(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ph = random_instance(&mut r, 0.5);
        let b = random_complex(&mut r, ph.fast_dim(), ph.slow_dim()).scale(r.random_range(0.0..3.0));
        let (h, s) = hermitian_from_b(&ph, &b).unwrap();
        prop_assert!(hermitian_deviation(&h) <= 1e-12 * h.norm());
        prop_assert!(hermitian_deviation(&s) <= 1e-12 * s.norm());
    }

    #[test]
    fn rotation_is_unitary(seed in any::<u64>(), p in 1usize..9, q in 1usize..9) {
        let mut r = rng(seed);
        let b = random_complex(&mut r, q, p).scale(r.random_range(0.0..2.0));
        let g = generator_from_b(&b).unwrap();
        prop_assert!(unitarity_deviation(&g.rotation) <= 1e-11);
        let s = g.generator();
        prop_assert_eq!(s.adjoint(), -s);
    }

    #[test]
    fn ball_invariance(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ph = random_instance(&mut r, 0.9);
        let sc = coupling_scales(&ph, NormKind::Spectral);
        if let Some(radius) = sc.radius.filter(|x| x.is_finite()) {
            let a = random_complex(&mut r, ph.fast_dim(), ph.slow_dim());
            let a = a.scale(radius * r.random_range(0.0..=1.0) / spectral_norm(&a));
            let ta = t_map(&ph, &a).unwrap();
            prop_assert!(spectral_norm(&ta) <= radius + 1e-12);
        }
    }

    #[test]
    fn iteration_matches_oracle_and_lifts(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ph = random_instance(&mut r, 0.5);
        let it = iterate_bloch(&ph, IterationOptions { max_iter: 200, ..Default::default() }).unwrap();
        prop_assert!(it.residual <= 1e-12);
        if let Ok(b) = brute_force_b(&ph) {
            prop_assert!((it.b() - b).norm() < 1e-9);
        }
        let eo = hermitian_effective(&ph, &it).unwrap();
        let eig = general_eig(&eo.h_nonhermitian).unwrap();
        let h = ph.block_matrix();
        for (lambda, v) in eig.values.iter().zip(eig.vectors.column_iter()) {
            let psi = reconstruct_full_eigenvector(it.b(), &v.into_owned()).unwrap();
            prop_assert!((&h * &psi - psi.map(|z| z * lambda)).norm() <= 1e-8);
        }
        let full = full_spectrum(&ph);
        let m = match_spectra(&eig.real_values(), &full).unwrap();
        prop_assert!(m.max_error <= 1e-8);
    }

    #[test]
    fn series_approaches_iterate(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = r.random_range(1..5);
        let q = r.random_range(1..5);
        let ph = instance_with(&mut r, p, q, 0.1, 0.05);
        let it = iterate_bloch(&ph, IterationOptions::default()).unwrap();
        let s = perturbative_bloch(&ph, 25).unwrap();
        prop_assert!(norm(&(s.b() - it.b()), NormKind::Spectral) < 1e-10);
    }

    #[test]
    fn converged_b_block_diagonalizes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ph = random_instance(&mut r, 0.5);
        let it = iterate_bloch(&ph, IterationOptions { max_iter: 200, ..Default::default() }).unwrap();
        let g = generator_from_embedding(&it).unwrap();
        prop_assert!(block_offdiagonal_norm(&ph.block_matrix(), &g, ph.slow_dim()).unwrap() <= 1e-10);
    }

    #[test]
    fn folding_is_idempotent(x in -1e3f64..1e3, w in 0.1f64..50.0) {
        let f = fold_quasi_energy(x, w);
        prop_assert!(f > -w / 2.0 && f <= w / 2.0);
        prop_assert_eq!(fold_quasi_energy(f, w), f);
    }

    #[test]
    fn hermitian_evolution_conserves_norm(seed in any::<u64>(), n in 1usize..7) {
        let mut r = rng(seed);
        let h = random_hermitian(&mut r, n);
        let hn = spectral_norm(&h).max(1e-3);
        let times = uniform_times(100.0 / hn, 25).unwrap();
        let psi = StateVector::basis(n, r.random_range(0..n)).unwrap();
        let ts = evolve_constant(&h, &psi, &times).unwrap();
        for v in ts.norms() {
            prop_assert!((v - 1.0).abs() <= 1e-9);
        }
        let all: Vec<usize> = (0..n).collect();
        for row in populations(&ts, &all).unwrap() {
            prop_assert!(row.iter().sum::<f64>() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn low_pass_keeps_affine_signals(a in -2.0f64..2.0, b in -1.0f64..1.0, w in 0.2f64..3.0) {
        let dt = 0.05;
        let x: Vec<f64> = (0..400).map(|i| a + b * i as f64 * dt).collect();
        let y = low_pass_signal(&x, w, dt).unwrap();
        for (u, v) in x.iter().zip(&y) {
            prop_assert!((u - v).abs() < 1e-10);
        }
    }
}

#[test]
fn single_precision_instantiation() {
    let h = effham::presets::lambda_system::<f32>(-0.0175, 1.0, (0.4, 0.0), (0.3, 0.0));
    let ph = partition_hamiltonian(&h, &[0, 1]).unwrap();
    let ad = effham::effective::adiabatic_hamiltonian(&ph);
    assert!((ad[(0, 0)].re + 0.03125).abs() < 1e-6);
    assert!((ad[(0, 1)].re + 0.03).abs() < 1e-6);
    let it = iterate_bloch(&ph, IterationOptions::default()).unwrap();
    assert!(it.residual < 1e-5);
}
