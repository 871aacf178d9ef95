//! Gradients of circuit expectation values with respect to trainable angles.

use std::f64::consts::FRAC_PI_2;

use crate::circuits::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::Observable;
use crate::simulator::{apply_circuit, apply_gate_to, apply_rotation, StateVector};

fn check(c: &Circuit, params: &[f64], obs: &Observable, psi0: &StateVector) -> Result<()> {
    if params.len() != c.param_count() {
        return Err(Error::ParamLength {
            expected: c.param_count(),
            actual: params.len(),
        });
    }
    for n in [psi0.n_qubits(), obs.n_qubits()] {
        if n != c.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: c.n_qubits(),
                actual: n,
            });
        }
    }
    Ok(())
}

/// Expectation value and its parameter-shift gradient.
///
/// Each trainable gate occurrence is evaluated at `θ ± π/2`; component `j`
/// sums `½[E(θ+π/2) − E(θ−π/2)]` over every gate driven by parameter `j`.
/// The unshifted prefix of the circuit is shared between evaluations; every
/// shifted run still executes the remaining gates in full.
pub fn expectation_and_gradient(
    c: &Circuit,
    params: &[f64],
    obs: &Observable,
    psi0: &StateVector,
) -> Result<(f64, Vec<f64>)> {
    check(c, params, obs, psi0)?;
    let n = c.n_qubits();
    let gates = c.gates();
    let mut grad = vec![0.0; c.param_count()];
    let mut prefix = psi0.amplitudes().to_vec();
    let mut scratch = prefix.clone();

    for (pos, gate) in gates.iter().enumerate() {
        if let Gate::Rotation {
            axis,
            qubit,
            param,
        } = *gate
        {
            if let Some(j) = gate.trainable_index() {
                let theta = param.angle(params);
                let mut shifted = [0.0; 2];
                for (slot, shift) in [FRAC_PI_2, -FRAC_PI_2].into_iter().enumerate() {
                    scratch.copy_from_slice(&prefix);
                    apply_rotation(&mut scratch, n, axis, qubit, theta + shift, false);
                    for g in &gates[pos + 1..] {
                        apply_gate_to(&mut scratch, n, g, params, false);
                    }
                    shifted[slot] = obs.expectation_state(&scratch);
                }
                grad[j] += 0.5 * (shifted[0] - shifted[1]);
            }
        }
        apply_gate_to(&mut prefix, n, gate, params, false);
    }
    Ok((obs.expectation_state(&prefix), grad))
}

/// Parameter-shift gradient of ⟨O⟩.
pub fn parameter_shift_gradient(c: &Circuit, params: &[f64], obs: &Observable, psi0: &StateVector) -> Result<Vec<f64>> {
    expectation_and_gradient(c, params, obs, psi0).map(|(_, g)| g)
}

/// Central finite differences `(E(θ_j + h) − E(θ_j − h)) / 2h`.
pub fn finite_difference_gradient(
    c: &Circuit,
    params: &[f64],
    obs: &Observable,
    psi0: &StateVector,
    step: f64,
) -> Result<Vec<f64>> {
    check(c, params, obs, psi0)?;
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {step}")));
    }
    let mut work = params.to_vec();
    (0..params.len())
        .map(|j| {
            work[j] = params[j] + step;
            let plus = apply_circuit(c, &work, psi0)?.expectation(obs)?;
            work[j] = params[j] - step;
            let minus = apply_circuit(c, &work, psi0)?.expectation(obs)?;
            work[j] = params[j];
            Ok((plus - minus) / (2.0 * step))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::circuits::Axis;
    use crate::linalg::{build_observable, Pauli, PauliTerm};

    fn ry() -> (Circuit, Observable, StateVector) {
        let mut c = Circuit::new(1);
        c.trainable(Axis::Y, 0);
        let obs = build_observable(vec![PauliTerm::new(1.0, vec![(0, Pauli::Z)])], 1).unwrap();
        (c, obs, StateVector::zero(1).unwrap())
    }

    #[test]
    fn single_ry_gradient_is_minus_sine() {
        let (c, obs, psi) = ry();
        let g = parameter_shift_gradient(&c, &[PI / 2.0], &obs, &psi).unwrap();
        assert!((g[0] + 1.0).abs() < 1e-14);
        let g = parameter_shift_gradient(&c, &[0.0], &obs, &psi).unwrap();
        assert!(g[0].abs() < 1e-15);
    }

    #[test]
    fn finite_difference_single_ry() {
        let (c, obs, psi) = ry();
        let h = 1e-4;
        let g = finite_difference_gradient(&c, &[PI / 3.0], &obs, &psi, h).unwrap();
        // central-difference truncation error is h²/6·|f'''|
        assert!((g[0] + (PI / 3.0).sin()).abs() < h * h);
        assert!(finite_difference_gradient(&c, &[0.0], &obs, &psi, 0.0).is_err());
    }

    #[test]
    fn no_trainable_gates_gives_empty_gradient() {
        let mut c = Circuit::new(1);
        c.fixed(Axis::X, 0, 0.3);
        let (_, obs, psi) = ry();
        assert!(parameter_shift_gradient(&c, &[], &obs, &psi).unwrap().is_empty());
        assert!(finite_difference_gradient(&c, &[], &obs, &psi, 1e-5).unwrap().is_empty());
    }

    #[test]
    fn shared_parameter_sums_occurrences() {
        // RY(θ)RY(θ) = RY(2θ): d/dθ cos(2θ) = −2 sin(2θ)
        let c = Circuit::from_text("qubits 1\nRY 0 t0\nRY 0 t0\n").unwrap();
        let (_, obs, psi) = ry();
        let theta = 0.4;
        let g = parameter_shift_gradient(&c, &[theta], &obs, &psi).unwrap();
        assert!((g[0] + 2.0 * (2.0 * theta).sin()).abs() < 1e-14);
    }

    #[test]
    fn value_matches_plain_expectation() {
        let c = crate::circuits::build_hardware_efficient(3, 2).unwrap();
        let params: Vec<f64> = (0..c.param_count()).map(|i| 0.17 * i as f64).collect();
        let obs = Observable::zero_projector(1, 3).unwrap();
        let psi = StateVector::zero(3).unwrap();
        let (v, _) = expectation_and_gradient(&c, &params, &obs, &psi).unwrap();
        let direct = crate::simulator::expectation(&c, &params, &obs, &psi).unwrap();
        assert!((v - direct).abs() < 1e-14);
    }
}
