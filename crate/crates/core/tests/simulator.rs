mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vqalab::linalg::{eigh, ComplexMatrix};
use vqalab::simulator::{apply_circuit, apply_circuit_depolarizing, DensityMatrix, StateVector};

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn pure_and_mixed_evolution_agree(seed in any::<u64>(), n in 1usize..=6, gates in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(&mut rng, n, gates);
        let params = random_params(&mut rng, c.param_count());
        let obs = random_observable(&mut rng, n);
        let psi0 = StateVector::zero(n).unwrap();
        let psi = apply_circuit(&c, &params, &psi0).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-10);

        let rho = apply_circuit_depolarizing(&c, &params, &DensityMatrix::from_pure(&psi0), 0.0).unwrap();
        let direct = DensityMatrix::from_pure(&psi);
        prop_assert!(rho.matrix().max_abs_diff(direct.matrix()) < 1e-12);
        prop_assert!(rho.matrix().hermitian_deviation() < 1e-12);

        let e = psi.expectation(&obs).unwrap();
        prop_assert!((e - rho.expectation(&obs).unwrap()).abs() < 1e-10);
        let spectrum = oracle_eigenvalues(obs.dense());
        prop_assert!(e >= spectrum[0] - 1e-9 && e <= spectrum[spectrum.len() - 1] + 1e-9);
    }

    #[test]
    fn noisy_states_stay_physical(seed in any::<u64>(), n in 1usize..=4, p in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(&mut rng, n, 12);
        let params = random_params(&mut rng, c.param_count());
        let rho0 = DensityMatrix::from_pure(&StateVector::zero(n).unwrap());
        let rho = apply_circuit_depolarizing(&c, &params, &rho0, p).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-10);
        prop_assert!(rho.min_eigenvalue().unwrap() >= -1e-9);
    }

    #[test]
    fn global_phase_is_unobservable(seed in any::<u64>(), phi in -10.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(&mut rng, 3, 10);
        let params = random_params(&mut rng, c.param_count());
        let obs = random_observable(&mut rng, 3);
        let psi0 = StateVector::zero(3).unwrap();
        let a = apply_circuit(&c, &params, &psi0).unwrap().expectation(&obs).unwrap();
        let b = apply_circuit(&c, &params, &psi0.with_global_phase(phi)).unwrap().expectation(&obs).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn eigh_matches_nalgebra_on_random_hermitian_matrices() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for dim in [1, 2, 3, 5, 8, 16, 33, 64] {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for r in 0..dim {
            m[(r, r)] = Complex64::new(rng.gen_range(-2.0..2.0), 0.0);
            for c in r + 1..dim {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(r, c)] = z;
                m[(c, r)] = z.conj();
            }
        }
        let ours = eigh(&m, true).unwrap();
        let oracle = oracle_eigenvalues(&m);
        for (a, b) in ours.values.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9, "dim {dim}: {a} vs {b}");
        }
        let norm = m.operator_norm().unwrap();
        let expected = oracle[0].abs().max(oracle[dim - 1].abs());
        assert!((norm - expected).abs() < 1e-9);
    }
}

#[test]
fn observable_spectra_match_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for n in 1..=7 {
        let obs = random_observable(&mut rng, n);
        let (lo, hi) = obs.extreme_eigenvalues().unwrap();
        let oracle = oracle_eigenvalues(obs.dense());
        assert!((lo - oracle[0]).abs() < 1e-9);
        assert!((hi - oracle[oracle.len() - 1]).abs() < 1e-9);
    }
}
