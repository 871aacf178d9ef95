//! Browser bindings: covering-bound curves, the depolarizing contraction of
//! a circuit output, and an H₂ VQE scan. Every function returns JSON text.

use serde::Serialize;
use vqalab::bounds::{ln_covering_ansatz_family, AnsatzFamily};
use vqalab::circuits::{build_hardware_efficient, build_vqe_ansatz, VqeAnsatz};
use vqalab::data::default_h2_table;
use vqalab::linalg::Observable;
use vqalab::optimize::{init_params, train_vqe, Optimizer, SgdConfig};
use vqalab::simulator::{apply_circuit_depolarizing, depolarizing_closed_form, DensityMatrix, StateVector};
use wasm_bindgen::prelude::*;

fn to_js<T: Serialize>(r: vqalab::Result<T>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[derive(Serialize)]
struct BoundPoint {
    layers: usize,
    ln_ideal: f64,
    ln_depolarizing: f64,
}

/// ln covering bound of the N-qubit hardware-efficient family for
/// L = 1..=max_layers, ideal and under depolarizing rate `p`.
#[wasm_bindgen]
pub fn bounds_curve(n_qubits: usize, max_layers: usize, epsilon: f64, p: f64) -> Result<String, JsError> {
    to_js((1..=max_layers.max(1)).map(|layers| {
        let family = AnsatzFamily::HardwareEfficient { n: n_qubits, layers };
        Ok(BoundPoint {
            layers,
            ln_ideal: ln_covering_ansatz_family(family, 1.0, epsilon, None)?.ln_value,
            ln_depolarizing: ln_covering_ansatz_family(family, 1.0, epsilon, Some(p))?.ln_value,
        })
    })
    .collect::<vqalab::Result<Vec<_>>>())
}

#[derive(Serialize)]
struct NoisePoint {
    layers: usize,
    n_gates: usize,
    exact: f64,
    closed_form: f64,
}

/// ⟨|0⟩⟨0|₀⟩ of a random 3-qubit hardware-efficient circuit under per-gate
/// depolarizing noise, from the density-matrix simulation and from the
/// closed form, for L = 1..=max_layers.
#[wasm_bindgen]
pub fn noise_contraction(p: f64, max_layers: usize, seed: u64) -> Result<String, JsError> {
    const N: usize = 3;
    to_js((|| {
        let obs = Observable::zero_projector(0, N)?;
        let psi0 = StateVector::zero(N)?;
        let rho0 = DensityMatrix::from_pure(&psi0);
        (1..=max_layers.max(1))
            .map(|layers| {
                let c = build_hardware_efficient(N, layers)?;
                let params = init_params(seed, c.param_count());
                let rho = apply_circuit_depolarizing(&c, &params, &rho0, p)?;
                Ok(NoisePoint {
                    layers,
                    n_gates: c.gate_counts().n_g,
                    exact: rho.expectation(&obs)?,
                    closed_form: depolarizing_closed_form(&c, &params, &obs, &psi0, p)?,
                })
            })
            .collect::<vqalab::Result<Vec<_>>>()
    })())
}

#[derive(Serialize)]
struct ScanPoint {
    bond_length: f64,
    exact: f64,
    vqe: f64,
    iterations: usize,
}

/// Exact ground energy and SGD-trained VQE energy for every row of the
/// shipped H₂ table. `ansatz` is `restricted`, `modest` or `overwhelming`.
#[wasm_bindgen]
pub fn vqe_scan(ansatz: &str, seed: u64) -> Result<String, JsError> {
    to_js((|| {
        let kind: VqeAnsatz = ansatz.parse()?;
        let c = build_vqe_ansatz(kind, 4)?;
        let opt = Optimizer::Sgd(SgdConfig::vqe());
        let mut table = default_h2_table();
        table.sort_by(|a, b| a.bond_length.total_cmp(&b.bond_length));
        table
            .iter()
            .map(|row| {
                let trace = train_vqe(&row.observable, &c, &opt, init_params(seed, c.param_count()))?;
                Ok(ScanPoint {
                    bond_length: row.bond_length,
                    exact: row.observable.extreme_eigenvalues()?.0,
                    vqe: trace.final_loss().unwrap_or(f64::NAN),
                    iterations: trace.losses.len() - 1,
                })
            })
            .collect::<vqalab::Result<Vec<_>>>()
    })())
}
