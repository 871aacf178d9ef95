use vqalab::circuits::build_hardware_efficient;
use vqalab::data::*;
use vqalab::optimize::{train_qnn, SgdConfig};

#[test]
fn full_dataset_is_balanced_separated_and_realizable() {
    let ds = generate_dataset(0, 400, 0.2).unwrap();
    assert_eq!(ds.examples.len(), 400);
    assert_eq!(ds.examples.iter().filter(|e| e.y == 1).count(), 200);
    assert_eq!((ds.train.len(), ds.test.len()), (60, 340));
    assert_eq!(ds.train_examples().filter(|e| e.y == 1).count(), 30);

    let concept = Dataset::concept_circuit();
    let obs = qnn_observable();
    for e in &ds.examples {
        assert!((e.score - 0.5).abs() >= 0.2, "score {} inside the margin", e.score);
        assert_eq!(e.y, u8::from(e.score >= 0.5));
        let again = score(&e.x, &concept, &ds.target_params, &obs).unwrap();
        assert!((again - e.score).abs() < 1e-12);
    }

    // The concept class is the L = 2 ansatz, so the target parameters
    // classify every example correctly.
    let ansatz = build_hardware_efficient(7, 2).unwrap();
    let cfg = SgdConfig { epochs: 0, ..SgdConfig::qnn() };
    let trace = train_qnn(&ds, &ansatz, &obs, &cfg, None, Some(ds.target_params.clone())).unwrap();
    assert_eq!(trace.train_acc, vec![1.0]);
    assert_eq!(trace.test_acc, vec![1.0]);
}

#[test]
fn generation_is_deterministic_per_seed() {
    let a = generate_dataset(3, 40, 0.1).unwrap();
    let b = generate_dataset(3, 40, 0.1).unwrap();
    let c = generate_dataset(4, 40, 0.1).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_ne!(a.to_csv(), c.to_csv());
    assert!(a.to_csv().starts_with("x0,x1,x2,x3,x4,x5,x6,y,score,split\n"));
}

#[test]
fn h2_table_has_physical_shape() {
    let table = default_h2_table();
    let energies: Vec<(f64, f64)> = table
        .iter()
        .map(|p| (p.bond_length, p.observable.extreme_eigenvalues().unwrap().0))
        .collect();
    let (argmin, emin) = energies.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert!((0.6..=0.9).contains(&argmin), "minimum at {argmin}");
    // Full-CI STO-3G energy of H2 at 0.74 Å, including nuclear repulsion.
    let at_eq = energies.iter().find(|(r, _)| (r - 0.74).abs() < 1e-9).unwrap().1;
    assert!((at_eq - -1.137284).abs() < 1e-5, "λ_min(0.74) = {at_eq}");
    assert_eq!(emin, at_eq);
    for p in &table {
        assert!(p.observable.operator_norm().unwrap() < 3.0);
    }
}
