#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use vqalab::circuits::{Axis, Circuit};
use vqalab::linalg::{ComplexMatrix, Observable, Pauli, PauliTerm};

const AXES: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
const PAULIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

/// Random mix of trainable rotations, fixed rotations and CNOTs. Some
/// trainable gates reuse an earlier parameter index.
pub fn random_circuit(rng: &mut impl Rng, n_qubits: usize, n_gates: usize) -> Circuit {
    let mut c = Circuit::new(n_qubits);
    for _ in 0..n_gates {
        let q = rng.gen_range(0..n_qubits);
        let roll = rng.gen_range(0..10);
        if n_qubits > 1 && roll < 3 {
            let mut t = rng.gen_range(0..n_qubits - 1);
            if t >= q {
                t += 1;
            }
            c.cnot(q, t);
        } else if roll < 4 {
            c.fixed(AXES[rng.gen_range(0..3)], q, rng.gen_range(-3.0..3.0));
        } else {
            c.trainable(AXES[rng.gen_range(0..3)], q);
        }
    }
    if c.param_count() == 0 {
        c.trainable(Axis::Y, 0);
    }
    c
}

pub fn random_params(rng: &mut impl Rng, count: usize) -> Vec<f64> {
    (0..count).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect()
}

/// Sum of 1 to 5 random Pauli strings with coefficients in [-1, 1].
pub fn random_observable(rng: &mut impl Rng, n_qubits: usize) -> Observable {
    let terms = (0..rng.gen_range(1..=5))
        .map(|_| {
            let ops: Vec<(usize, Pauli)> = (0..n_qubits).map(|q| (q, PAULIS[rng.gen_range(0..4)])).collect();
            PauliTerm::new(rng.gen_range(-1.0..1.0), ops)
        })
        .collect();
    Observable::new(terms, n_qubits).unwrap()
}

pub fn to_nalgebra(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

/// Ascending eigenvalues of a Hermitian matrix, from nalgebra.
pub fn oracle_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = to_nalgebra(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}
