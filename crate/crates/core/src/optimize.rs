//! Training loops for the QNN classifier and the VQE energy minimisation.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::circuits::Circuit;
use crate::data::{encode, Dataset};
use crate::error::{Error, Result};
use crate::gradients::expectation_and_gradient;
use crate::linalg::Observable;
use crate::rng::{stream, uniform_angles, Stream};
use crate::simulator::{depolarizing_factor, expectation, StateVector};

/// Squared error `(h − y)²`.
pub fn qnn_loss(h: f64, y: u8) -> f64 {
    let d = h - f64::from(y);
    d * d
}

/// Threshold classifier; ties go to class 1.
pub fn predict(h: f64) -> u8 {
    u8::from(h >= 0.5)
}

pub fn sgd_step(theta: &mut [f64], gradient: &[f64], eta: f64) {
    for (t, g) in theta.iter_mut().zip(gradient) {
        *t -= eta * g;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SgdConfig {
    pub learning_rate: f64,
    /// Ignored by VQE, which always uses the exact full gradient.
    pub batch_size: usize,
    /// Epochs for QNN training, iterations for VQE.
    pub epochs: usize,
    pub shuffle_each_epoch: bool,
    pub seed: u64,
    /// Stop once `|L(θ⁽ᵗ⁾) − L(θ⁽ᵗ⁻¹⁾)|` drops to this value (VQE only).
    pub tolerance: Option<f64>,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self::qnn()
    }
}

impl SgdConfig {
    pub fn qnn() -> Self {
        Self {
            learning_rate: 0.2,
            batch_size: 4,
            epochs: 20,
            shuffle_each_epoch: true,
            seed: 0,
            tolerance: None,
        }
    }

    pub fn vqe() -> Self {
        Self {
            learning_rate: 0.4,
            batch_size: 1,
            epochs: 300,
            shuffle_each_epoch: false,
            seed: 0,
            tolerance: Some(1e-6),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        check_tolerance(self.tolerance)
    }
}

fn check_tolerance(tol: Option<f64>) -> Result<()> {
    match tol {
        Some(t) if !(t >= 0.0) => Err(Error::InvalidArgument(format!("tolerance must be non-negative, got {t}"))),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdamVariant {
    /// The printed recurrence: moments divided by (1−β) at every step and
    /// the rate rescaled by √(1−β₂)/(1−β₁).
    PaperLiteral,
    /// Bias-corrected Adam with a fixed rate.
    #[default]
    Standard,
}

impl std::str::FromStr for AdamVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Self::Standard),
            "paper" | "paper_literal" => Ok(Self::PaperLiteral),
            other => Err(Error::InvalidArgument(format!("unknown Adam variant '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamConfig {
    pub eta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub tolerance: Option<f64>,
    pub variant: AdamVariant,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            eta0: 0.4,
            beta1: 0.9,
            beta2: 0.99,
            epsilon: 1e-6,
            max_iterations: 81,
            tolerance: Some(1e-6),
            variant: AdamVariant::Standard,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta0 > 0.0 && self.eta0.is_finite()) {
            return Err(Error::InvalidArgument(format!("Adam rate must be positive, got {}", self.eta0)));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::InvalidArgument(format!("{name} must lie in (0, 1), got {b}")));
            }
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be non-negative, got {}", self.epsilon)));
        }
        check_tolerance(self.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub theta: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub eta: f64,
    pub t: u32,
}

impl AdamState {
    pub fn new(theta: Vec<f64>, cfg: &AdamConfig) -> Self {
        let n = theta.len();
        Self {
            theta,
            a: vec![0.0; n],
            b: vec![0.0; n],
            eta: cfg.eta0,
            t: 0,
        }
    }
}

pub fn adam_step(state: &mut AdamState, gradient: &[f64], cfg: &AdamConfig) {
    let (b1, b2) = (cfg.beta1, cfg.beta2);
    state.t += 1;
    match cfg.variant {
        AdamVariant::PaperLiteral => {
            state.eta *= (1.0 - b2).sqrt() / (1.0 - b1);
            for (i, &g) in gradient.iter().enumerate() {
                state.a[i] = (b1 * state.a[i] + (1.0 - b1) * g) / (1.0 - b1);
                state.b[i] = (b2 * state.b[i] + (1.0 - b2) * g * g) / (1.0 - b2);
                state.theta[i] -= state.eta * state.a[i] / (state.b[i].sqrt() + cfg.epsilon);
            }
        }
        AdamVariant::Standard => {
            let c1 = 1.0 - b1.powi(state.t as i32);
            let c2 = 1.0 - b2.powi(state.t as i32);
            for (i, &g) in gradient.iter().enumerate() {
                state.a[i] = b1 * state.a[i] + (1.0 - b1) * g;
                state.b[i] = b2 * state.b[i] + (1.0 - b2) * g * g;
                let m = state.a[i] / c1;
                let v = state.b[i] / c2;
                state.theta[i] -= state.eta * m / (v.sqrt() + cfg.epsilon);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    Sgd(SgdConfig),
    Adam(AdamConfig),
}

impl Optimizer {
    pub fn validate(&self) -> Result<()> {
        match self {
            Optimizer::Sgd(c) => c.validate(),
            Optimizer::Adam(c) => c.validate(),
        }
    }
}

/// Initial parameters uniform on [0, 2π) from the `ParamInit` stream.
pub fn init_params(seed: u64, count: usize) -> Vec<f64> {
    uniform_angles(&mut stream(seed, Stream::ParamInit), count)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainTrace {
    /// Energy per VQE iterate, or mean training loss per QNN epoch.
    /// Index 0 is the initial point.
    pub losses: Vec<f64>,
    /// Mean test loss per QNN epoch; empty for VQE.
    pub test_losses: Vec<f64>,
    pub train_acc: Vec<f64>,
    pub test_acc: Vec<f64>,
    pub final_params: Vec<f64>,
    /// First iteration `t` with `|L(θ⁽ᵗ⁾) − L(θ⁽ᵗ⁻¹⁾)| ≤ tolerance`.
    pub converged_at: Option<usize>,
}

impl TrainTrace {
    /// `|L(θ⁽ᵗ⁾) − L(θ⁽ᵗ⁻¹⁾)|` for t ≥ 1.
    pub fn deltas(&self) -> Vec<f64> {
        self.losses.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.losses.last().copied()
    }

    /// CSV `step,energy_or_loss,train_acc,test_acc`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,energy_or_loss,train_acc,test_acc\n");
        let cell = |v: Option<&f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for (i, l) in self.losses.iter().enumerate() {
            let _ = writeln!(s, "{i},{l},{},{}", cell(self.train_acc.get(i)), cell(self.test_acc.get(i)));
        }
        s
    }
}

struct Encoded {
    states: Vec<StateVector>,
    labels: Vec<u8>,
    train: Vec<usize>,
    test: Vec<usize>,
}

impl Encoded {
    fn new(ds: &Dataset) -> Result<Self> {
        Ok(Self {
            states: ds.examples.iter().map(|e| encode(&e.x)).collect::<Result<_>>()?,
            labels: ds.examples.iter().map(|e| e.y).collect(),
            train: ds.train.clone(),
            test: ds.test.clone(),
        })
    }
}

/// Noise model of the classifier hypotheses: the global depolarizing channel
/// after each of `n_gates` gates, collapsed to its closed form.
#[derive(Debug, Clone, Copy)]
struct Noise {
    factor: f64,
    floor: f64,
}

impl Noise {
    fn apply(&self, ideal: f64) -> f64 {
        self.factor * ideal + (1.0 - self.factor) * self.floor
    }
}

/// Mini-batch gradient descent on the mean squared loss.
///
/// Hypotheses are `⟨O⟩` on `ansatz · U_E(x)|0⟩`. With `noise_p` set every
/// gate of the encoding and the ansatz is followed by a depolarizing channel;
/// since that channel commutes with unitaries, the hypothesis becomes
/// `(1−p)^{N_g}·h + (1 − (1−p)^{N_g})·Tr(O)/2^N` and its gradient is the
/// ideal gradient times `(1−p)^{N_g}`.
///
/// Starts from `init`, or from [`init_params`] with `cfg.seed` when `None`.
pub fn train_qnn(
    dataset: &Dataset,
    ansatz: &Circuit,
    observable: &Observable,
    cfg: &SgdConfig,
    noise_p: Option<f64>,
    init: Option<Vec<f64>>,
) -> Result<TrainTrace> {
    cfg.validate()?;
    if dataset.train.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    if cfg.batch_size > dataset.train.len() {
        return Err(Error::Training(format!(
            "batch size {} exceeds training set of {}",
            cfg.batch_size,
            dataset.train.len()
        )));
    }
    let noise = match noise_p {
        None => None,
        Some(p) if (0.0..=1.0).contains(&p) => {
            let n_gates = crate::circuits::ENCODING_GATES + ansatz.gate_counts().n_g;
            Some(Noise {
                factor: depolarizing_factor(n_gates, p),
                floor: observable.trace() / observable.dim() as f64,
            })
        }
        Some(p) => return Err(Error::NoiseOutOfRange(p)),
    };
    let enc = Encoded::new(dataset)?;
    let mut theta = match init {
        Some(t) if t.len() != ansatz.param_count() => {
            return Err(Error::ParamLength {
                expected: ansatz.param_count(),
                actual: t.len(),
            })
        }
        Some(t) => t,
        None => init_params(cfg.seed, ansatz.param_count()),
    };
    let hypothesis = |theta: &[f64], psi: &StateVector| -> Result<f64> {
        let h = expectation(ansatz, theta, observable, psi)?;
        Ok(noise.map_or(h, |n| n.apply(h)))
    };
    let evaluate = |theta: &[f64], idx: &[usize]| -> Result<(f64, f64)> {
        let mut loss = 0.0;
        let mut correct = 0usize;
        for &i in idx {
            let h = hypothesis(theta, &enc.states[i])?;
            loss += qnn_loss(h, enc.labels[i]);
            correct += usize::from(predict(h) == enc.labels[i]);
        }
        let n = idx.len().max(1) as f64;
        Ok((loss / n, correct as f64 / n))
    };

    let mut trace = TrainTrace::default();
    let record = |theta: &[f64], trace: &mut TrainTrace| -> Result<()> {
        let (train_loss, train_acc) = evaluate(theta, &enc.train)?;
        let (test_loss, test_acc) = evaluate(theta, &enc.test)?;
        trace.losses.push(train_loss);
        trace.test_losses.push(test_loss);
        trace.train_acc.push(train_acc);
        trace.test_acc.push(test_acc);
        Ok(())
    };
    record(&theta, &mut trace)?;

    let mut order = enc.train.clone();
    let mut shuffle_rng = stream(cfg.seed, Stream::Shuffle);
    let scale = noise.map_or(1.0, |n| n.factor);
    let mut grad = vec![0.0; theta.len()];
    for _ in 0..cfg.epochs {
        if cfg.shuffle_each_epoch {
            order.shuffle(&mut shuffle_rng);
        }
        for batch in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for &i in batch {
                let (e, de) = expectation_and_gradient(ansatz, &theta, observable, &enc.states[i])?;
                let h = noise.map_or(e, |n| n.apply(e));
                let w = 2.0 * (h - f64::from(enc.labels[i])) * scale / batch.len() as f64;
                for (g, d) in grad.iter_mut().zip(&de) {
                    *g += w * d;
                }
            }
            sgd_step(&mut theta, &grad, cfg.learning_rate);
        }
        record(&theta, &mut trace)?;
    }
    trace.final_params = theta;
    Ok(trace)
}

/// Minimises `⟨0|U(θ)† H U(θ)|0⟩` from `init` with full-gradient SGD or Adam.
pub fn train_vqe(hamiltonian: &Observable, ansatz: &Circuit, optimizer: &Optimizer, init: Vec<f64>) -> Result<TrainTrace> {
    optimizer.validate()?;
    if init.len() != ansatz.param_count() {
        return Err(Error::ParamLength {
            expected: ansatz.param_count(),
            actual: init.len(),
        });
    }
    let psi0 = StateVector::zero(ansatz.n_qubits())?;
    let (max_iter, tol) = match optimizer {
        Optimizer::Sgd(c) => (c.epochs, c.tolerance),
        Optimizer::Adam(c) => (c.max_iterations, c.tolerance),
    };
    let mut trace = TrainTrace::default();
    let mut adam = match optimizer {
        Optimizer::Adam(c) => Some(AdamState::new(init.clone(), c)),
        Optimizer::Sgd(_) => None,
    };
    let mut theta = init;
    let (mut energy, mut grad) = expectation_and_gradient(ansatz, &theta, hamiltonian, &psi0)?;
    trace.losses.push(energy);
    for t in 1..=max_iter {
        match (optimizer, adam.as_mut()) {
            (Optimizer::Adam(c), Some(state)) => {
                adam_step(state, &grad, c);
                theta.copy_from_slice(&state.theta);
            }
            (Optimizer::Sgd(c), _) => sgd_step(&mut theta, &grad, c.learning_rate),
            _ => unreachable!("Adam state exists exactly when Adam is selected"),
        }
        let prev = energy;
        (energy, grad) = expectation_and_gradient(ansatz, &theta, hamiltonian, &psi0)?;
        if !energy.is_finite() {
            return Err(Error::Training(format!("energy diverged at iteration {t}")));
        }
        trace.losses.push(energy);
        if tol.is_some_and(|tol| (energy - prev).abs() <= tol) {
            trace.converged_at = Some(t);
            break;
        }
    }
    trace.final_params = theta;
    Ok(trace)
}
