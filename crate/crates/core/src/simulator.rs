//! Exact statevector and density-matrix simulation.
//!
//! Rotations follow `R_P(θ) = exp(−iθP/2)`. Gates act in place through
//! index arithmetic on the amplitude array; no full-register unitary is
//! ever materialised.

use num_complex::Complex64;

use crate::circuits::{Axis, Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::{eigh, qubit_mask, ComplexMatrix, Observable, MAX_QUBITS};

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩ on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps amplitudes whose squared norm is 1 within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not a power of two ≥ 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_register(n_qubits)?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Multiplies every amplitude by `e^{iφ}`.
    pub fn with_global_phase(mut self, phi: f64) -> Self {
        let ph = Complex64::from_polar(1.0, phi);
        for a in &mut self.amps {
            *a *= ph;
        }
        self
    }

    pub fn apply_gate(&mut self, gate: &Gate, params: &[f64]) {
        apply_gate_to(&mut self.amps, self.n_qubits, gate, params, false);
    }

    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        if obs.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: obs.n_qubits(),
            });
        }
        Ok(obs.expectation_state(&self.amps))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// |ψ⟩⟨ψ|.
    pub fn from_pure(psi: &StateVector) -> Self {
        Self {
            n_qubits: psi.n_qubits,
            matrix: ComplexMatrix::outer(&psi.amps),
        }
    }

    /// I/2^N.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        Ok(Self {
            n_qubits,
            matrix: ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eigh(&self.matrix, false)?.values[0])
    }

    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        if obs.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: obs.n_qubits(),
            });
        }
        Ok(obs.expectation_density(&self.matrix))
    }

    /// ρ ← UρU† for one gate: U on every column, then conj(U) on every row.
    pub fn apply_gate(&mut self, gate: &Gate, params: &[f64]) {
        let dim = 1usize << self.n_qubits;
        let n = self.n_qubits;
        let data = self.matrix.as_mut_slice();
        let mut column = vec![Complex64::new(0.0, 0.0); dim];
        for c in 0..dim {
            for r in 0..dim {
                column[r] = data[r * dim + c];
            }
            apply_gate_to(&mut column, n, gate, params, false);
            for r in 0..dim {
                data[r * dim + c] = column[r];
            }
        }
        for row in data.chunks_mut(dim) {
            apply_gate_to(row, n, gate, params, true);
        }
    }

    /// ρ ← (1−p)ρ + p·I/2^N.
    pub fn depolarize(&mut self, p: f64) {
        let dim = 1usize << self.n_qubits;
        let mix = p / dim as f64;
        let data = self.matrix.as_mut_slice();
        for z in data.iter_mut() {
            *z *= 1.0 - p;
        }
        for i in 0..dim {
            data[i * dim + i] += mix;
        }
    }
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::InvalidArgument("register needs at least one qubit".into()));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::TooManyQubits(n_qubits));
    }
    Ok(())
}

/// Applies `gate` (or its complex conjugate) to an amplitude array.
#[inline]
pub(crate) fn apply_gate_to(amps: &mut [Complex64], n_qubits: usize, gate: &Gate, params: &[f64], conjugate: bool) {
    match *gate {
        Gate::Rotation { axis, qubit, param } => {
            let theta = param.angle(params);
            apply_rotation(amps, n_qubits, axis, qubit, theta, conjugate);
        }
        Gate::Cnot { control, target } => {
            let cm = qubit_mask(control, n_qubits);
            let tm = qubit_mask(target, n_qubits);
            for i in 0..amps.len() {
                if i & cm != 0 && i & tm == 0 {
                    amps.swap(i, i | tm);
                }
            }
        }
    }
}

#[inline]
pub(crate) fn apply_rotation(amps: &mut [Complex64], n_qubits: usize, axis: Axis, qubit: usize, theta: f64, conjugate: bool) {
    let m = qubit_mask(qubit, n_qubits);
    let (s, c) = (0.5 * theta).sin_cos();
    match axis {
        Axis::Z => {
            // conj(RZ(θ)) = RZ(−θ)
            let s = if conjugate { -s } else { s };
            let lo = Complex64::new(c, -s);
            let hi = Complex64::new(c, s);
            for (i, a) in amps.iter_mut().enumerate() {
                *a *= if i & m == 0 { lo } else { hi };
            }
        }
        Axis::Y => {
            for i in 0..amps.len() {
                if i & m == 0 {
                    let a0 = amps[i];
                    let a1 = amps[i | m];
                    amps[i] = a0 * c - a1 * s;
                    amps[i | m] = a0 * s + a1 * c;
                }
            }
        }
        Axis::X => {
            let s = if conjugate { -s } else { s };
            let mis = Complex64::new(0.0, -s);
            for i in 0..amps.len() {
                if i & m == 0 {
                    let a0 = amps[i];
                    let a1 = amps[i | m];
                    amps[i] = a0 * c + a1 * mis;
                    amps[i | m] = a0 * mis + a1 * c;
                }
            }
        }
    }
}

fn check_inputs(c: &Circuit, params: &[f64], n_qubits: usize) -> Result<()> {
    if params.len() != c.param_count() {
        return Err(Error::ParamLength {
            expected: c.param_count(),
            actual: params.len(),
        });
    }
    if n_qubits != c.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: c.n_qubits(),
            actual: n_qubits,
        });
    }
    Ok(())
}

/// Runs `c` at `params` on `psi0`.
pub fn apply_circuit(c: &Circuit, params: &[f64], psi0: &StateVector) -> Result<StateVector> {
    check_inputs(c, params, psi0.n_qubits)?;
    let mut psi = psi0.clone();
    for g in c.gates() {
        psi.apply_gate(g, params);
    }
    Ok(psi)
}

/// ⟨ψ_out|O|ψ_out⟩ with ψ_out = U(θ)ψ₀.
pub fn expectation(c: &Circuit, params: &[f64], obs: &Observable, psi0: &StateVector) -> Result<f64> {
    apply_circuit(c, params, psi0)?.expectation(obs)
}

/// Exact noisy evolution: after every gate, trainable or fixed, the state is
/// mixed with the maximally mixed state at rate `p`.
pub fn apply_circuit_depolarizing(c: &Circuit, params: &[f64], rho0: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::NoiseOutOfRange(p));
    }
    check_inputs(c, params, rho0.n_qubits)?;
    let mut rho = rho0.clone();
    for g in c.gates() {
        rho.apply_gate(g, params);
        rho.depolarize(p);
    }
    Ok(rho)
}

/// Survival factor `(1−p)^{N_g}` of the signal under per-gate depolarizing noise.
pub fn depolarizing_factor(n_gates: usize, p: f64) -> f64 {
    (1.0 - p).powi(n_gates as i32)
}

/// Mixes an ideal expectation with the maximally mixed value Tr(O)/2^N:
/// `(1−p)^{N_g}·E + (1 − (1−p)^{N_g})·Tr(O)/2^N`.
pub fn depolarize_expectation(ideal: f64, n_gates: usize, p: f64, obs: &Observable) -> f64 {
    let f = depolarizing_factor(n_gates, p);
    f * ideal + (1.0 - f) * obs.trace() / obs.dim() as f64
}

/// Closed-form noisy expectation, valid for the global depolarizing channel
/// applied after each of the circuit's `N_g` gates.
pub fn depolarizing_closed_form(
    c: &Circuit,
    params: &[f64],
    obs: &Observable,
    psi0: &StateVector,
    p: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::NoiseOutOfRange(p));
    }
    let ideal = expectation(c, params, obs, psi0)?;
    Ok(depolarize_expectation(ideal, c.gate_counts().n_g, p, obs))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::circuits::{build_encoding_circuit, build_hardware_efficient};
    use crate::linalg::{build_observable, Pauli, PauliTerm};

    fn ry_circuit() -> Circuit {
        let mut c = Circuit::new(1);
        c.trainable(Axis::Y, 0);
        c
    }

    fn z0(n: usize) -> Observable {
        build_observable(vec![PauliTerm::new(1.0, vec![(0, Pauli::Z)])], n).unwrap()
    }

    #[test]
    fn empty_circuit_is_identity() {
        let psi = StateVector::zero(3).unwrap();
        let out = apply_circuit(&Circuit::new(3), &[], &psi).unwrap();
        assert_eq!(out, psi);
        assert_eq!(expectation(&Circuit::new(1), &[], &z0(1), &StateVector::zero(1).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn ry_pi_flips() {
        let out = apply_circuit(&ry_circuit(), &[PI], &StateVector::zero(1).unwrap()).unwrap();
        assert!(out.amplitudes()[0].norm() < 1e-15);
        assert!((out.amplitudes()[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ry_expectation_is_cosine() {
        let psi = StateVector::zero(1).unwrap();
        for theta in [0.0, PI / 3.0, PI / 2.0, PI] {
            let e = expectation(&ry_circuit(), &[theta], &z0(1), &psi).unwrap();
            assert!((e - theta.cos()).abs() < 1e-14, "θ = {theta}");
        }
    }

    #[test]
    fn rotations_match_dense_matrices() {
        // exp(−iθP/2) = cos(θ/2)I − i sin(θ/2)P
        let theta: f64 = 0.7;
        let amps = vec![Complex64::new(0.6, 0.1), Complex64::new(-0.2, 0.77)];
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<_> = amps.iter().map(|a| a / norm).collect();
        for (axis, pauli) in [(Axis::X, Pauli::X), (Axis::Y, Pauli::Y), (Axis::Z, Pauli::Z)] {
            let u = ComplexMatrix::identity(2)
                .scale(Complex64::new((theta / 2.0).cos(), 0.0))
                .add(&pauli.matrix().scale(Complex64::new(0.0, -(theta / 2.0).sin())))
                .unwrap();
            let expected = u.matvec(&amps).unwrap();
            let mut got = amps.clone();
            apply_rotation(&mut got, 1, axis, 0, theta, false);
            for (a, b) in got.iter().zip(&expected) {
                assert!((a - b).norm() < 1e-15);
            }
            let expected_conj: Vec<_> = u
                .as_slice()
                .iter()
                .map(|z| z.conj())
                .collect::<Vec<_>>()
                .chunks(2)
                .map(|row| row[0] * amps[0] + row[1] * amps[1])
                .collect();
            let mut got = amps.clone();
            apply_rotation(&mut got, 1, axis, 0, theta, true);
            for (a, b) in got.iter().zip(&expected_conj) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn encoding_of_zero_is_all_zeros_state() {
        let c = build_encoding_circuit(&[0.0; 7]).unwrap();
        let out = apply_circuit(&c, &[], &StateVector::zero(7).unwrap()).unwrap();
        assert!((out.amplitudes()[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn encoding_first_feature_pi_flips_first_qubit_first() {
        let mut x = [0.0; 7];
        x[0] = PI;
        // After the first rotation layer only qubit 0 is flipped.
        let c = build_encoding_circuit(&x).unwrap();
        let mut psi = StateVector::zero(7).unwrap();
        for g in &c.gates()[..7] {
            psi.apply_gate(g, &[]);
        }
        assert!((psi.amplitudes()[0b100_0000].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cnot_control_is_big_endian() {
        let mut c = Circuit::new(2);
        c.fixed(Axis::X, 0, PI).cnot(0, 1);
        let out = apply_circuit(&c, &[], &StateVector::zero(2).unwrap()).unwrap();
        assert!((out.amplitudes()[3].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn depolarizing_limits() {
        let c = build_hardware_efficient(3, 1).unwrap();
        let params: Vec<f64> = (0..c.param_count()).map(|i| 0.3 * i as f64).collect();
        let psi = StateVector::zero(3).unwrap();
        let rho0 = DensityMatrix::from_pure(&psi);

        let pure = apply_circuit(&c, &params, &psi).unwrap();
        let noiseless = apply_circuit_depolarizing(&c, &params, &rho0, 0.0).unwrap();
        assert!(noiseless.matrix().max_abs_diff(&DensityMatrix::from_pure(&pure).matrix) < 1e-12);

        let full = apply_circuit_depolarizing(&c, &params, &rho0, 1.0).unwrap();
        assert!(full.matrix().max_abs_diff(DensityMatrix::maximally_mixed(3).unwrap().matrix()) < 1e-15);

        assert_eq!(
            apply_circuit_depolarizing(&c, &params, &rho0, 1.5).unwrap_err(),
            Error::NoiseOutOfRange(1.5)
        );
    }

    #[test]
    fn closed_form_limits() {
        let c = build_hardware_efficient(3, 1).unwrap();
        let params: Vec<f64> = (0..c.param_count()).map(|i| 0.1 * i as f64).collect();
        let psi = StateVector::zero(3).unwrap();
        let obs = Observable::zero_projector(2, 3).unwrap();
        let ideal = expectation(&c, &params, &obs, &psi).unwrap();
        assert_eq!(depolarizing_closed_form(&c, &params, &obs, &psi, 0.0).unwrap(), ideal);
        assert!((depolarizing_closed_form(&c, &params, &obs, &psi, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(depolarizing_closed_form(&c, &params, &obs, &psi, -0.1).is_err());
    }

    #[test]
    fn mismatches_are_reported() {
        let c = build_hardware_efficient(3, 1).unwrap();
        let psi = StateVector::zero(3).unwrap();
        assert_eq!(
            apply_circuit(&c, &[0.0; 3], &psi).unwrap_err(),
            Error::ParamLength { expected: 9, actual: 3 }
        );
        let psi4 = StateVector::zero(4).unwrap();
        assert!(matches!(
            apply_circuit(&c, &[0.0; 9], &psi4),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            expectation(&c, &[0.0; 9], &z0(2), &psi),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(StateVector::zero(11).is_err());
        assert!(StateVector::from_amplitudes(vec![Complex64::new(1.0, 0.0); 2]).is_err());
    }
}
