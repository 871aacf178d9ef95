//! Parameterised circuits and the ansatz families used by the experiments.
//!
//! A [`Circuit`] is an ordered list of gates. Rotation angles are either
//! fixed or refer to an entry of the trainable parameter vector, so the same
//! circuit can be re-evaluated at any parameter setting.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of classical features consumed by the QNN encoding circuit.
pub const FEATURE_DIM: usize = 7;

/// Gate count of [`build_encoding_circuit`]: two R_Y layers and two CNOT chains.
pub const ENCODING_GATES: usize = 2 * (2 * FEATURE_DIM - 1);

/// Pauli axis of a single-qubit rotation `exp(-iθP/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Param {
    Trainable(usize),
    Fixed(f64),
}

impl Param {
    /// Resolves the angle against a parameter vector.
    #[inline]
    pub fn angle(self, params: &[f64]) -> f64 {
        match self {
            Param::Trainable(i) => params[i],
            Param::Fixed(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Rotation { axis: Axis, qubit: usize, param: Param },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn arity(&self) -> usize {
        match self {
            Gate::Rotation { .. } => 1,
            Gate::Cnot { .. } => 2,
        }
    }

    pub fn is_trainable(&self) -> bool {
        matches!(
            self,
            Gate::Rotation {
                param: Param::Trainable(_),
                ..
            }
        )
    }

    pub fn trainable_index(&self) -> Option<usize> {
        match self {
            Gate::Rotation {
                param: Param::Trainable(i),
                ..
            } => Some(*i),
            _ => None,
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Gate::Rotation { axis: Axis::X, .. } => "RX",
            Gate::Rotation { axis: Axis::Y, .. } => "RY",
            Gate::Rotation { axis: Axis::Z, .. } => "RZ",
            Gate::Cnot { .. } => "CNOT",
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Rotation { qubit, param, .. } => {
                write!(f, "{} {} ", self.kind_name(), qubit)?;
                match param {
                    Param::Trainable(i) => write!(f, "t{i}"),
                    // `{:?}` prints the shortest representation that round-trips.
                    Param::Fixed(a) => write!(f, "f{a:?}"),
                }
            }
            Gate::Cnot { control, target } => write!(f, "CNOT {control},{target}"),
        }
    }
}

/// Gate-count metadata: total gates, trainable gates, widest gate, and
/// widest trainable gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub n_g: usize,
    pub n_gt: usize,
    pub k: usize,
    pub k_trainable: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    param_count: usize,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
            param_count: 0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a rotation driven by a fresh trainable parameter and returns its index.
    pub fn trainable(&mut self, axis: Axis, qubit: usize) -> usize {
        let idx = self.param_count;
        self.param_count += 1;
        self.gates.push(Gate::Rotation {
            axis,
            qubit,
            param: Param::Trainable(idx),
        });
        idx
    }

    pub fn fixed(&mut self, axis: Axis, qubit: usize, angle: f64) -> &mut Self {
        self.gates.push(Gate::Rotation {
            axis,
            qubit,
            param: Param::Fixed(angle),
        });
        self
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> &mut Self {
        self.gates.push(Gate::Cnot { control, target });
        self
    }

    /// Appends `R_Z R_Y R_Z` with three fresh parameters on `qubit`.
    fn euler_block(&mut self, qubit: usize) {
        self.trainable(Axis::Z, qubit);
        self.trainable(Axis::Y, qubit);
        self.trainable(Axis::Z, qubit);
    }

    /// Assembles a circuit from raw parts and checks every invariant.
    pub fn from_parts(n_qubits: usize, gates: Vec<Gate>, param_count: usize) -> Result<Self> {
        let c = Self {
            n_qubits,
            gates,
            param_count,
        };
        c.validate()?;
        Ok(c)
    }

    /// Checks qubit ranges, gate arity and that every parameter index is used.
    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::InvalidCircuit("circuit needs at least one qubit".into()));
        }
        let mut used = vec![false; self.param_count];
        for (pos, g) in self.gates.iter().enumerate() {
            match *g {
                Gate::Rotation { qubit, param, .. } => {
                    if qubit >= self.n_qubits {
                        return Err(Error::QubitOutOfRange {
                            index: qubit,
                            n_qubits: self.n_qubits,
                        });
                    }
                    match param {
                        Param::Trainable(i) if i >= self.param_count => {
                            return Err(Error::InvalidCircuit(format!(
                                "gate {pos} references parameter {i} but param_count is {}",
                                self.param_count
                            )))
                        }
                        Param::Trainable(i) => used[i] = true,
                        Param::Fixed(a) if !a.is_finite() => {
                            return Err(Error::InvalidCircuit(format!("gate {pos} has non-finite angle")))
                        }
                        Param::Fixed(_) => {}
                    }
                }
                Gate::Cnot { control, target } => {
                    for q in [control, target] {
                        if q >= self.n_qubits {
                            return Err(Error::QubitOutOfRange {
                                index: q,
                                n_qubits: self.n_qubits,
                            });
                        }
                    }
                    if control == target {
                        return Err(Error::InvalidCircuit(format!("gate {pos}: CNOT on a single qubit")));
                    }
                }
            }
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::InvalidCircuit(format!("parameter {i} is never used")));
        }
        Ok(())
    }

    /// `self` followed by `next`; trainable indices of `next` are shifted
    /// past those of `self`.
    pub fn then(&self, next: &Circuit) -> Result<Circuit> {
        if self.n_qubits != next.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: next.n_qubits,
            });
        }
        let offset = self.param_count;
        let mut gates = self.gates.clone();
        gates.extend(next.gates.iter().map(|g| match *g {
            Gate::Rotation {
                axis,
                qubit,
                param: Param::Trainable(i),
            } => Gate::Rotation {
                axis,
                qubit,
                param: Param::Trainable(i + offset),
            },
            other => other,
        }));
        Ok(Circuit {
            n_qubits: self.n_qubits,
            gates,
            param_count: self.param_count + next.param_count,
        })
    }

    pub fn gate_counts(&self) -> GateCounts {
        gate_counts(self)
    }

    /// Line-oriented text form: a `qubits <N>` header, then one gate per
    /// line as `KIND q0[,q1] [t<index>|f<angle>]`.
    pub fn to_text(&self) -> String {
        let mut s = format!("qubits {}\n", self.n_qubits);
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    /// Parses [`Circuit::to_text`] output. Blank lines and `#` comments are
    /// ignored. Without a `qubits` header the register is sized to the
    /// largest index used.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut declared: Option<usize> = None;
        let mut gates = Vec::new();
        let mut max_param: Option<usize> = None;
        let mut max_qubit = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: lineno + 1, msg };
            let mut parts = line.split_whitespace();
            let kind = parts.next().expect("non-empty line");
            if kind.eq_ignore_ascii_case("qubits") {
                let n = parts
                    .next()
                    .ok_or_else(|| err("missing qubit count".into()))?
                    .parse::<usize>()
                    .map_err(|e| err(e.to_string()))?;
                declared = Some(n);
                continue;
            }
            let qubits = parts.next().ok_or_else(|| err("missing qubit list".into()))?;
            let qs: Vec<usize> = qubits
                .split(',')
                .map(|q| q.trim().parse::<usize>().map_err(|e| err(format!("bad qubit '{q}': {e}"))))
                .collect::<Result<_>>()?;
            max_qubit = max_qubit.max(*qs.iter().max().expect("split yields one item"));
            let gate = match kind.to_ascii_uppercase().as_str() {
                "CNOT" => {
                    if qs.len() != 2 {
                        return Err(err(format!("CNOT takes two qubits, got {}", qs.len())));
                    }
                    if parts.next().is_some() {
                        return Err(err("CNOT takes no parameter".into()));
                    }
                    Gate::Cnot {
                        control: qs[0],
                        target: qs[1],
                    }
                }
                k @ ("RX" | "RY" | "RZ") => {
                    if qs.len() != 1 {
                        return Err(err(format!("{k} takes one qubit, got {}", qs.len())));
                    }
                    let axis = match k {
                        "RX" => Axis::X,
                        "RY" => Axis::Y,
                        _ => Axis::Z,
                    };
                    let p = parts.next().ok_or_else(|| err("rotation needs a parameter".into()))?;
                    let param = if let Some(i) = p.strip_prefix('t') {
                        let i = i.parse::<usize>().map_err(|e| err(e.to_string()))?;
                        max_param = Some(max_param.map_or(i, |m| m.max(i)));
                        Param::Trainable(i)
                    } else if let Some(a) = p.strip_prefix('f') {
                        Param::Fixed(a.parse::<f64>().map_err(|e| err(e.to_string()))?)
                    } else {
                        return Err(err(format!("parameter '{p}' must start with 't' or 'f'")));
                    };
                    Gate::Rotation {
                        axis,
                        qubit: qs[0],
                        param,
                    }
                }
                other => return Err(err(format!("unknown gate kind '{other}'"))),
            };
            if parts.next().is_some() {
                return Err(err("trailing tokens".into()));
            }
            gates.push(gate);
        }
        let n_qubits = declared.unwrap_or(if gates.is_empty() { 1 } else { max_qubit + 1 });
        Circuit::from_parts(n_qubits, gates, max_param.map_or(0, |m| m + 1))
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Circuit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Circuit::from_text(s)
    }
}

pub fn gate_counts(c: &Circuit) -> GateCounts {
    let mut counts = GateCounts {
        n_g: c.gates.len(),
        n_gt: 0,
        k: 0,
        k_trainable: 0,
    };
    for g in &c.gates {
        counts.k = counts.k.max(g.arity());
        if g.is_trainable() {
            counts.n_gt += 1;
            counts.k_trainable = counts.k_trainable.max(g.arity());
        }
    }
    counts
}

/// `layers` repetitions of per-qubit `R_Z R_Y R_Z` followed by a ring of
/// `n_qubits` CNOTs `(q, q+1 mod N)`. Gate count is exactly `4·N·L`.
pub fn build_hardware_efficient(n_qubits: usize, layers: usize) -> Result<Circuit> {
    if n_qubits < 2 {
        return Err(Error::InvalidArgument(format!(
            "hardware-efficient ansatz needs at least 2 qubits, got {n_qubits}"
        )));
    }
    if layers < 1 {
        return Err(Error::InvalidArgument("layers must be at least 1".into()));
    }
    let mut c = Circuit::new(n_qubits);
    for _ in 0..layers {
        for q in 0..n_qubits {
            c.euler_block(q);
        }
        for q in 0..n_qubits {
            c.cnot(q, (q + 1) % n_qubits);
        }
    }
    Ok(c)
}

/// CNOT chain `(i, i+1)` over all qubits of the register.
fn entangling_chain(c: &mut Circuit) {
    for q in 0..c.n_qubits - 1 {
        c.cnot(q, q + 1);
    }
}

/// Qubit-encoding circuit `U_Eng · R_Y(x) · U_Eng · R_Y(x)` for a
/// seven-feature input, with `U_Eng` a CNOT chain. Contains no trainable
/// parameters.
pub fn build_encoding_circuit(x: &[f64]) -> Result<Circuit> {
    if x.len() != FEATURE_DIM {
        return Err(Error::DimensionMismatch {
            expected: FEATURE_DIM,
            actual: x.len(),
        });
    }
    if let Some((j, v)) = x.iter().enumerate().find(|(_, v)| !(0.0..TAU).contains(*v)) {
        return Err(Error::InvalidArgument(format!("feature {j} = {v} outside [0, 2π)")));
    }
    let mut c = Circuit::new(FEATURE_DIM);
    for _ in 0..2 {
        for (q, &angle) in x.iter().enumerate() {
            c.fixed(Axis::Y, q, angle);
        }
        entangling_chain(&mut c);
    }
    Ok(c)
}

/// Staircase of `⌈N/(M−1)⌉` blocks of width `M`, neighbouring blocks sharing
/// one qubit. Each block carries `R_Z R_Y R_Z` on its `M` qubits and `M`
/// CNOTs: the chain through the block closed by one CNOT from its last qubit
/// back to its first. Blocks that would run past the register are shifted
/// back so that every block spans exactly `M` qubits.
pub fn build_mps_ansatz(n_qubits: usize, block_width: usize) -> Result<Circuit> {
    if block_width < 2 || block_width >= n_qubits {
        return Err(Error::InvalidArgument(format!(
            "block width must satisfy 2 ≤ M < N, got M = {block_width}, N = {n_qubits}"
        )));
    }
    let stride = block_width - 1;
    let blocks = n_qubits.div_ceil(stride);
    let mut c = Circuit::new(n_qubits);
    for l in 0..blocks {
        let start = (stride * l).min(n_qubits - block_width);
        let qubits: Vec<usize> = (start..start + block_width).collect();
        for &q in &qubits {
            c.euler_block(q);
        }
        for w in qubits.windows(2) {
            c.cnot(w[0], w[1]);
        }
        c.cnot(qubits[block_width - 1], qubits[0]);
    }
    Ok(c)
}

/// Binary-tree ansatz: level `l` has `N/2^l` two-qubit blocks (six trainable
/// rotations and one CNOT each); levels stop once a level holds two blocks.
/// Block `i` at level `l` joins qubits `i·2^l + 2^(l−1) − 1` and `i·2^l + 2^l − 1`.
pub fn build_tree_ansatz(n_qubits: usize) -> Result<Circuit> {
    if n_qubits < 4 || !n_qubits.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "tree ansatz needs a power-of-two register of at least 4 qubits, got {n_qubits}"
        )));
    }
    let mut c = Circuit::new(n_qubits);
    let mut level = 1;
    loop {
        let span = 1usize << level;
        let blocks = n_qubits / span;
        for i in 0..blocks {
            let a = i * span + span / 2 - 1;
            let b = i * span + span - 1;
            c.euler_block(a);
            c.euler_block(b);
            c.cnot(a, b);
        }
        if blocks <= 2 {
            break;
        }
        level += 1;
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VqeAnsatz {
    Restricted,
    Modest,
    Overwhelming,
}

impl VqeAnsatz {
    pub const ALL: [VqeAnsatz; 3] = [VqeAnsatz::Restricted, VqeAnsatz::Modest, VqeAnsatz::Overwhelming];

    pub fn name(self) -> &'static str {
        match self {
            VqeAnsatz::Restricted => "restricted",
            VqeAnsatz::Modest => "modest",
            VqeAnsatz::Overwhelming => "overwhelming",
        }
    }
}

impl FromStr for VqeAnsatz {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "restricted" | "under" => Ok(VqeAnsatz::Restricted),
            "modest" => Ok(VqeAnsatz::Modest),
            "overwhelming" | "over" => Ok(VqeAnsatz::Overwhelming),
            other => Err(Error::InvalidArgument(format!("unknown VQE ansatz '{other}'"))),
        }
    }
}

/// The three four-qubit VQE ansätze of increasing expressivity.
pub fn build_vqe_ansatz(kind: VqeAnsatz, n_qubits: usize) -> Result<Circuit> {
    if n_qubits != 4 {
        return Err(Error::InvalidArgument(format!(
            "VQE ansätze are defined on 4 qubits, got {n_qubits}"
        )));
    }
    let mut c = Circuit::new(n_qubits);
    let repeats = match kind {
        VqeAnsatz::Restricted => {
            c.trainable(Axis::Y, 0);
            return Ok(c);
        }
        VqeAnsatz::Modest => 1,
        VqeAnsatz::Overwhelming => 4,
    };
    for _ in 0..repeats {
        for q in 0..n_qubits {
            c.euler_block(q);
        }
        entangling_chain(&mut c);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hardware_efficient_counts() {
        let c = build_hardware_efficient(7, 2).unwrap();
        assert_eq!(
            c.gate_counts(),
            GateCounts {
                n_g: 56,
                n_gt: 42,
                k: 2,
                k_trainable: 1
            }
        );
        assert_eq!(build_hardware_efficient(7, 1).unwrap().param_count(), 21);
        assert!(build_hardware_efficient(7, 0).is_err());
        assert!(build_hardware_efficient(1, 3).is_err());
    }

    #[test]
    fn hardware_efficient_two_qubit_layout() {
        let c = build_hardware_efficient(2, 1).unwrap();
        let text: Vec<String> = c.gates().iter().map(|g| g.to_string()).collect();
        assert_eq!(
            text,
            ["RZ 0 t0", "RY 0 t1", "RZ 0 t2", "RZ 1 t3", "RY 1 t4", "RZ 1 t5", "CNOT 0,1", "CNOT 1,0"]
        );
    }

    #[test]
    fn encoding_circuit_shape() {
        let c = build_encoding_circuit(&[0.1; 7]).unwrap();
        assert_eq!(c.gate_counts().n_g, 26);
        assert_eq!(c.param_count(), 0);
        assert_eq!(c.gate_counts().n_gt, 0);
        assert!(build_encoding_circuit(&[0.1; 6]).is_err());
        assert!(build_encoding_circuit(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, TAU]).is_err());
        assert!(build_encoding_circuit(&[-0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn mps_counts() {
        let c = build_mps_ansatz(4, 2).unwrap();
        assert_eq!(c.gate_counts().n_g, 32);
        assert_eq!(c.gate_counts().k, 2);
        let c = build_mps_ansatz(9, 3).unwrap();
        assert_eq!(c.gate_counts().n_g, 60);
        assert!(build_mps_ansatz(4, 4).is_err());
        assert!(build_mps_ansatz(4, 1).is_err());
    }

    #[test]
    fn tree_counts() {
        let c = build_tree_ansatz(8).unwrap();
        assert_eq!(c.gate_counts().n_g, 42);
        assert_eq!(c.gate_counts().n_gt, 36);
        let c = build_tree_ansatz(4).unwrap();
        assert_eq!(c.gate_counts().n_g, 14);
        assert!(build_tree_ansatz(6).is_err());
        assert!(build_tree_ansatz(2).is_err());
    }

    #[test]
    fn vqe_ansatz_counts() {
        let r = build_vqe_ansatz(VqeAnsatz::Restricted, 4).unwrap();
        assert_eq!(
            r.gate_counts(),
            GateCounts {
                n_g: 1,
                n_gt: 1,
                k: 1,
                k_trainable: 1
            }
        );
        assert_eq!(build_vqe_ansatz(VqeAnsatz::Modest, 4).unwrap().gate_counts().n_gt, 12);
        assert_eq!(build_vqe_ansatz(VqeAnsatz::Overwhelming, 4).unwrap().gate_counts().n_gt, 48);
        assert!(build_vqe_ansatz(VqeAnsatz::Modest, 5).is_err());
        assert!("sideways".parse::<VqeAnsatz>().is_err());
    }

    #[test]
    fn empty_circuit_counts() {
        assert_eq!(
            Circuit::new(3).gate_counts(),
            GateCounts {
                n_g: 0,
                n_gt: 0,
                k: 0,
                k_trainable: 0
            }
        );
    }

    #[test]
    fn text_round_trip_preserves_fixed_angles() {
        let mut c = build_encoding_circuit(&[0.1, 1.0 / 3.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        c = c.then(&build_hardware_efficient(7, 1).unwrap()).unwrap();
        let back = Circuit::from_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Circuit::from_text("qubits 2\nRY 0 t0\nFOO 1 t1\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 3,
                msg: "unknown gate kind 'FOO'".into()
            }
        );
        assert!(matches!(Circuit::from_text("RY 0 x1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(Circuit::from_text("CNOT 0 t1"), Err(Error::Parse { line: 1, .. })));
        // parameter t0 skipped
        assert!(matches!(Circuit::from_text("RY 0 t1"), Err(Error::InvalidCircuit(_))));
        assert!(matches!(
            Circuit::from_text("qubits 2\nCNOT 0,2"),
            Err(Error::QubitOutOfRange { index: 2, n_qubits: 2 })
        ));
    }

    #[test]
    fn then_offsets_parameters() {
        let a = build_vqe_ansatz(VqeAnsatz::Restricted, 4).unwrap();
        let b = build_vqe_ansatz(VqeAnsatz::Modest, 4).unwrap();
        let c = a.then(&b).unwrap();
        assert_eq!(c.param_count(), 13);
        c.validate().unwrap();
        assert_eq!(c.gates()[1].trainable_index(), Some(1));
    }
}
