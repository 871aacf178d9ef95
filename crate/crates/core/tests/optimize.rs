use std::f64::consts::TAU;

use vqalab::circuits::{build_hardware_efficient, build_vqe_ansatz, VqeAnsatz};
use vqalab::data::{default_h2_table, generate_dataset, qnn_observable};
use vqalab::optimize::*;
use vqalab::simulator::{expectation, StateVector};

#[test]
fn restricted_vqe_matches_a_dense_scan() {
    let c = build_vqe_ansatz(VqeAnsatz::Restricted, 4).unwrap();
    let psi0 = StateVector::zero(4).unwrap();
    let opt = Optimizer::Sgd(SgdConfig::vqe());
    for problem in default_h2_table().iter().step_by(4) {
        let h = &problem.observable;
        let scan = (0..20_000)
            .map(|i| expectation(&c, &[TAU * i as f64 / 20_000.0], h, &psi0).unwrap())
            .fold(f64::INFINITY, f64::min);
        let mut best = f64::INFINITY;
        for seed in 0..3 {
            let trace = train_vqe(h, &c, &opt, init_params(seed, 1)).unwrap();
            best = best.min(trace.final_loss().unwrap());
        }
        assert!((best - scan).abs() < 1e-4, "r = {}: {best} vs {scan}", problem.bond_length);
    }
}

#[test]
fn vqe_energies_respect_the_variational_bound() {
    let problem = &default_h2_table()[5];
    let floor = problem.observable.extreme_eigenvalues().unwrap().0;
    for kind in VqeAnsatz::ALL {
        let c = build_vqe_ansatz(kind, 4).unwrap();
        for opt in [Optimizer::Sgd(SgdConfig::vqe()), Optimizer::Adam(AdamConfig::default())] {
            let trace = train_vqe(&problem.observable, &c, &opt, init_params(1, c.param_count())).unwrap();
            assert!(trace.losses.iter().all(|&e| e >= floor - 1e-9));
            if let Some(t) = trace.converged_at {
                let l = &trace.losses;
                assert_eq!(t, l.len() - 1);
                assert!((l[t] - l[t - 1]).abs() <= 1e-6);
            }
        }
    }
}

#[test]
fn zero_noise_matches_noiseless_training() {
    let ds = generate_dataset(2, 40, 0.1).unwrap();
    let ansatz = build_hardware_efficient(7, 1).unwrap();
    let obs = qnn_observable();
    let cfg = SgdConfig { epochs: 3, seed: 2, ..SgdConfig::qnn() };
    let clean = train_qnn(&ds, &ansatz, &obs, &cfg, None, None).unwrap();
    let noisy = train_qnn(&ds, &ansatz, &obs, &cfg, Some(0.0), None).unwrap();
    for (a, b) in clean.losses.iter().zip(&noisy.losses) {
        assert!((a - b).abs() < 1e-10);
    }
    for (a, b) in clean.final_params.iter().zip(&noisy.final_params) {
        assert!((a - b).abs() < 1e-10);
    }
    assert_eq!(clean.train_acc, noisy.train_acc);

    let again = train_qnn(&ds, &ansatz, &obs, &cfg, None, None).unwrap();
    assert_eq!(clean, again);
    assert_eq!(clean.train_acc.len(), 4);
}

#[test]
fn full_noise_predicts_a_single_class() {
    let ds = generate_dataset(2, 40, 0.1).unwrap();
    let ansatz = build_hardware_efficient(7, 2).unwrap();
    let cfg = SgdConfig { epochs: 2, ..SgdConfig::qnn() };
    let trace = train_qnn(&ds, &ansatz, &qnn_observable(), &cfg, Some(0.9), None).unwrap();
    assert!(trace.test_acc.iter().all(|&a| a == 0.5));
}
