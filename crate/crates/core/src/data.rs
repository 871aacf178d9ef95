//! Synthetic QNN classification data and H₂ Hamiltonian tables.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::circuits::{build_encoding_circuit, build_hardware_efficient, Circuit, FEATURE_DIM};
use crate::error::{Error, Result};
use crate::linalg::{Observable, Pauli, PauliTerm};
use crate::rng::{stream, uniform_angles, Stream};
use crate::simulator::{apply_circuit, StateVector};

/// Layers of the hardware-efficient circuit realising the hidden concept.
pub const CONCEPT_LAYERS: usize = 2;
/// Draws within which both classes must fill before the concept is
/// declared degenerate. Draws are shared, so each class gets this many.
pub const ATTEMPTS_PER_CLASS: u64 = 1_000_000;
/// Fresh concepts tried before giving up.
pub const MAX_CONCEPT_ATTEMPTS: u64 = 32;

/// Measurement operator of the classifier: projector onto |0⟩ of the last qubit.
pub fn qnn_observable() -> Observable {
    Observable::zero_projector(FEATURE_DIM - 1, FEATURE_DIM).expect("valid projector")
}

/// The state U_E(x)|0…0⟩ fed to the trainable part of the classifier.
pub fn encode(x: &[f64]) -> Result<StateVector> {
    let enc = build_encoding_circuit(x)?;
    apply_circuit(&enc, &[], &StateVector::zero(FEATURE_DIM)?)
}

/// ⟨O⟩ after encoding `x` and running `ansatz` at `params`.
pub fn score(x: &[f64], ansatz: &Circuit, params: &[f64], obs: &Observable) -> Result<f64> {
    apply_circuit(ansatz, params, &encode(x)?)?.expectation(obs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub x: Vec<f64>,
    pub y: u8,
    /// Labelling expectation of the hidden concept.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub examples: Vec<Example>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Parameters θ* of the hidden concept.
    pub target_params: Vec<f64>,
    pub delta: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetConfig {
    pub n: usize,
    pub delta: f64,
    pub train_size: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            n: 400,
            delta: 0.2,
            train_size: 60,
        }
    }
}

impl Dataset {
    pub fn split_of(&self, idx: usize) -> Split {
        if self.train.binary_search(&idx).is_ok() {
            Split::Train
        } else {
            Split::Test
        }
    }

    pub fn train_examples(&self) -> impl Iterator<Item = &Example> {
        self.train.iter().map(move |&i| &self.examples[i])
    }

    pub fn test_examples(&self) -> impl Iterator<Item = &Example> {
        self.test.iter().map(move |&i| &self.examples[i])
    }

    /// The ansatz realising the hidden concept.
    pub fn concept_circuit() -> Circuit {
        build_hardware_efficient(FEATURE_DIM, CONCEPT_LAYERS).expect("valid concept circuit")
    }

    /// CSV with header `x0,...,x6,y,score,split`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for j in 0..FEATURE_DIM {
            let _ = write!(s, "x{j},");
        }
        s.push_str("y,score,split\n");
        for (i, e) in self.examples.iter().enumerate() {
            for v in &e.x {
                let _ = write!(s, "{v},");
            }
            let _ = writeln!(s, "{},{},{}", e.y, e.score, self.split_of(i).name());
        }
        s
    }
}

/// [`generate_dataset_with`] using the 60/340 split when `n = 400`, and a
/// 15 % stratified training share otherwise.
pub fn generate_dataset(seed: u64, n: usize, delta: f64) -> Result<Dataset> {
    let train_size = if n == 400 { 60 } else { ((n * 3 / 20) / 2 * 2).max(2) };
    generate_dataset_with(seed, DatasetConfig { n, delta, train_size })
}

/// Draws features uniformly from [0, 2π)^7 and labels them with a random
/// two-layer hardware-efficient concept, rejecting points whose score falls
/// inside the margin band (0.5 − Δ, 0.5 + Δ). Stops once each class holds
/// n/2 examples, then splits stratified into train and test.
pub fn generate_dataset_with(seed: u64, cfg: DatasetConfig) -> Result<Dataset> {
    let DatasetConfig { n, delta, train_size } = cfg;
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("dataset size must be even and positive, got {n}")));
    }
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::InvalidArgument(format!("margin Δ must lie in [0, 0.5), got {delta}")));
    }
    if train_size % 2 != 0 || train_size == 0 || train_size >= n {
        return Err(Error::InvalidArgument(format!(
            "training split must be even and in (0, {n}), got {train_size}"
        )));
    }
    let concept = Dataset::concept_circuit();
    let obs = qnn_observable();
    let per_class = n / 2;

    let mut last_err = None;
    for attempt in 0..MAX_CONCEPT_ATTEMPTS {
        let target_params = uniform_angles(&mut stream(seed, Stream::Concept { attempt }), concept.param_count());
        match sample_examples(seed, &concept, &target_params, &obs, per_class, delta) {
            Ok(examples) => {
                let (train, test) = stratified_split(seed, &examples, train_size)?;
                return Ok(Dataset {
                    examples,
                    train,
                    test,
                    target_params,
                    delta,
                    seed,
                });
            }
            Err(e @ Error::RejectionCapExceeded { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// Real-arithmetic scorer for one concept.
///
/// The encoded state is real (R_Y and CNOT only), so the labelling
/// expectation is the quadratic form `φᵀ Re(V†OV) φ` with the 128×128 matrix
/// formed once per concept.
pub struct ConceptScorer {
    m: Vec<f64>,
}

impl ConceptScorer {
    pub fn new(concept: &Circuit, params: &[f64], obs: &Observable) -> Result<Self> {
        let dim = 1usize << FEATURE_DIM;
        let mut columns = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); dim];
            amps[j] = num_complex::Complex64::new(1.0, 0.0);
            let psi = apply_circuit(concept, params, &StateVector::from_amplitudes(amps)?)?;
            columns.push(psi.amplitudes().to_vec());
        }
        let o = obs.dense();
        let mut ov = vec![num_complex::Complex64::new(0.0, 0.0); dim * dim];
        for (j, col) in columns.iter().enumerate() {
            for (k, v) in o.matvec(col)?.into_iter().enumerate() {
                ov[k * dim + j] = v;
            }
        }
        let mut m = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = num_complex::Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += columns[i][k].conj() * ov[k * dim + j];
                }
                m[i * dim + j] = acc.re;
            }
        }
        Ok(Self { m })
    }

    pub fn score(&self, phi: &[f64]) -> f64 {
        let dim = phi.len();
        // M is symmetric: accumulate y_j = Σ_{i<j} φ_i M_ij row by row (an
        // axpy, which vectorises) and add the diagonal separately
        let mut y = [0.0; 1 << FEATURE_DIM];
        let mut diag = 0.0;
        for (i, &a) in phi.iter().enumerate() {
            let row = &self.m[i * dim..(i + 1) * dim];
            diag += a * a * row[i];
            for (yj, m) in y[i + 1..dim].iter_mut().zip(&row[i + 1..]) {
                *yj += a * m;
            }
        }
        diag + 2.0 * phi.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Real amplitudes of `U_E(x)|0…0⟩`.
pub fn encode_real(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let dim = 1usize << n;
    let half: Vec<(f64, f64)> = x.iter().map(|v| ((v / 2.0).cos(), (v / 2.0).sin())).collect();
    // first R_Y layer on |0…0⟩: product state, qubit 0 most significant
    let mut prod = Vec::with_capacity(dim);
    prod.push(1.0);
    for &(c, s) in &half {
        let len = prod.len();
        prod.resize(2 * len, 0.0);
        for b in (0..len).rev() {
            let a = prod[b];
            prod[2 * b] = a * c;
            prod[2 * b + 1] = a * s;
        }
    }
    let mut amps = chain_permute(&prod);
    for (q, &(c, s)) in half.iter().enumerate() {
        let mask = 1usize << (n - 1 - q);
        for b in 0..dim {
            if b & mask == 0 {
                let (a0, a1) = (amps[b], amps[b | mask]);
                amps[b] = c * a0 - s * a1;
                amps[b | mask] = s * a0 + c * a1;
            }
        }
    }
    chain_permute(&amps)
}

/// CNOT(0,1)…CNOT(n−2,n−1) as a basis permutation. Qubit q ends up holding
/// the parity of qubits 0..=q, i.e. `b ↦ b ⊕ (b≫1) ⊕ (b≫2) ⊕ …`.
fn chain_permute(amps: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; amps.len()];
    for (b, &a) in amps.iter().enumerate() {
        let mut y = b;
        let mut shift = 1;
        while shift < usize::BITS {
            y ^= y >> shift;
            shift <<= 1;
        }
        out[y] = a;
    }
    out
}

fn sample_examples(
    seed: u64,
    concept: &Circuit,
    params: &[f64],
    obs: &Observable,
    per_class: usize,
    delta: f64,
) -> Result<Vec<Example>> {
    let scorer = ConceptScorer::new(concept, params, obs)?;
    let mut rng = stream(seed, Stream::DatasetFeatures);
    let mut counts = [0usize; 2];
    let mut examples = Vec::with_capacity(2 * per_class);
    let mut attempts = 0u64;
    while counts[0] < per_class || counts[1] < per_class {
        if attempts >= ATTEMPTS_PER_CLASS {
            return Err(Error::RejectionCapExceeded { attempts });
        }
        attempts += 1;
        let x: Vec<f64> = (0..FEATURE_DIM).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        let s = scorer.score(&encode_real(&x));
        let y = if s >= 0.5 + delta {
            1
        } else if s <= 0.5 - delta {
            0
        } else {
            continue;
        };
        if counts[y as usize] < per_class {
            counts[y as usize] += 1;
            examples.push(Example { x, y, score: s });
        }
    }
    Ok(examples)
}

fn stratified_split(seed: u64, examples: &[Example], train_size: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut rng = stream(seed, Stream::DatasetSplit);
    let mut train = Vec::with_capacity(train_size);
    let mut test = Vec::new();
    for label in [0u8, 1] {
        let mut idx: Vec<usize> = (0..examples.len()).filter(|&i| examples[i].y == label).collect();
        idx.shuffle(&mut rng);
        let take = train_size / 2;
        if take > idx.len() {
            return Err(Error::InvalidArgument("training split larger than a class".into()));
        }
        train.extend_from_slice(&idx[..take]);
        test.extend_from_slice(&idx[take..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// One row of the H₂ coefficient table.
#[derive(Debug, Clone)]
pub struct H2Problem {
    /// Ångström.
    pub bond_length: f64,
    /// f₀ … f₇ in Hartree.
    pub f: [f64; 8],
    pub observable: Observable,
}

impl H2Problem {
    pub fn new(bond_length: f64, f: [f64; 8]) -> Result<Self> {
        Ok(Self {
            bond_length,
            f,
            observable: h2_observable(&f)?,
        })
    }
}

/// 15-term four-qubit Bravyi-Kitaev H₂ Hamiltonian with its coefficient
/// sharing: f₁ on Z₀ and Z₀Z₁, f₃ on Z₂ and Z₁Z₂Z₃, f₄ on Z₀Z₂ and Z₀Z₂Z₃,
/// f₆ on the four XZX/YZY strings, f₇ on Z₀Z₁Z₂ and Z₀Z₁Z₂Z₃.
pub fn h2_observable(f: &[f64; 8]) -> Result<Observable> {
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    use Pauli::{X, Y, Z};
    let t = |c: f64, ops: &[(usize, Pauli)]| PauliTerm::new(c, ops.to_vec());
    let terms = vec![
        PauliTerm::identity(f[0]),
        t(f[1], &[(0, Z)]),
        t(f[2], &[(1, Z)]),
        t(f[3], &[(2, Z)]),
        t(f[1], &[(0, Z), (1, Z)]),
        t(f[4], &[(0, Z), (2, Z)]),
        t(f[5], &[(1, Z), (3, Z)]),
        t(f[6], &[(0, X), (1, Z), (2, X)]),
        t(f[6], &[(0, Y), (1, Z), (2, Y)]),
        t(f[7], &[(0, Z), (1, Z), (2, Z)]),
        t(f[4], &[(0, Z), (2, Z), (3, Z)]),
        t(f[3], &[(1, Z), (2, Z), (3, Z)]),
        t(f[6], &[(0, X), (1, Z), (2, X), (3, Z)]),
        t(f[6], &[(0, Y), (1, Z), (2, Y), (3, Z)]),
        t(f[7], &[(0, Z), (1, Z), (2, Z), (3, Z)]),
    ];
    Observable::new(terms, 4)
}

pub fn build_h2_observable(problem: &H2Problem) -> Result<Observable> {
    h2_observable(&problem.f)
}

const H2_HEADER: [&str; 9] = ["bond_length", "f0", "f1", "f2", "f3", "f4", "f5", "f6", "f7"];

/// Shipped STO-3G table, 0.3–2.1 Å. See `scripts/gen_h2_table.py`.
pub const DEFAULT_H2_TABLE: &str = include_str!("../data/h2_sto3g_bk.csv");

/// Parses `bond_length,f0,...,f7` CSV text (header required).
pub fn parse_h2_table(text: &str) -> Result<Vec<H2Problem>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty table".into(),
    })?;
    let cols: Vec<&str> = header.trim_start_matches('\u{feff}').split(',').map(str::trim).collect();
    for name in H2_HEADER {
        if !cols.contains(&name) {
            return Err(Error::Parse {
                line: 1,
                msg: format!("missing column '{name}'"),
            });
        }
    }
    let positions: Vec<usize> = H2_HEADER
        .iter()
        .map(|name| cols.iter().position(|c| c == name).expect("checked above"))
        .collect();

    let mut out: Vec<H2Problem> = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != cols.len() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {} fields, found {}", cols.len(), fields.len()),
            });
        }
        let mut vals = [0.0; 9];
        for (slot, &pos) in positions.iter().enumerate() {
            vals[slot] = fields[pos].parse::<f64>().map_err(|e| Error::Parse {
                line: lineno,
                msg: format!("column '{}': {e}", H2_HEADER[slot]),
            })?;
            if !vals[slot].is_finite() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("column '{}' is not finite", H2_HEADER[slot]),
                });
            }
        }
        let bond = vals[0];
        if !(bond > 0.0) {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("bond length must be positive, got {bond}"),
            });
        }
        if out.iter().any(|p| p.bond_length == bond) {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("duplicate bond length {bond}"),
            });
        }
        let mut f = [0.0; 8];
        f.copy_from_slice(&vals[1..]);
        out.push(H2Problem::new(bond, f)?);
    }
    Ok(out)
}

pub fn load_h2_table(path: impl AsRef<Path>) -> Result<Vec<H2Problem>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("{}: {e}", path.display()),
    })?;
    parse_h2_table(&text)
}

pub fn default_h2_table() -> Vec<H2Problem> {
    parse_h2_table(DEFAULT_H2_TABLE).expect("shipped table is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_only_row() {
        let table = parse_h2_table("bond_length,f0,f1,f2,f3,f4,f5,f6,f7\n0.5,-0.8,0,0,0,0,0,0,0\n").unwrap();
        let (lo, hi) = table[0].observable.extreme_eigenvalues().unwrap();
        assert!((lo + 0.8).abs() < 1e-12 && (hi + 0.8).abs() < 1e-12);
    }

    #[test]
    fn table_errors() {
        let dup = "bond_length,f0,f1,f2,f3,f4,f5,f6,f7\n0.5,1,0,0,0,0,0,0,0\n0.5,1,0,0,0,0,0,0,0\n";
        assert!(matches!(parse_h2_table(dup), Err(Error::Parse { line: 3, .. })));
        let missing = "bond_length,f0,f1,f2,f3,f4,f5,f6\n0.5,1,0,0,0,0,0,0\n";
        assert_eq!(
            parse_h2_table(missing).unwrap_err(),
            Error::Parse {
                line: 1,
                msg: "missing column 'f7'".into()
            }
        );
        let bad = "bond_length,f0,f1,f2,f3,f4,f5,f6,f7\n0.5,1,0,0,zero,0,0,0,0\n";
        assert!(matches!(parse_h2_table(bad), Err(Error::Parse { line: 2, .. })));
        let short = "bond_length,f0,f1,f2,f3,f4,f5,f6,f7\n0.5,1,0\n";
        assert!(matches!(parse_h2_table(short), Err(Error::Parse { line: 2, .. })));
        assert!(load_h2_table("/nonexistent/h2.csv").is_err());
    }

    #[test]
    fn h2_term_structure() {
        let obs = h2_observable(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(obs.terms().len(), 15);
        assert!(obs.dense().max_abs_diff(&crate::linalg::ComplexMatrix::identity(16)) < 1e-15);

        let f = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
        let obs = h2_observable(&f).unwrap();
        let mut uses = [0usize; 8];
        for t in obs.terms() {
            let j = f.iter().position(|&v| v == t.coefficient).unwrap();
            uses[j] += 1;
        }
        assert_eq!(uses, [1, 2, 1, 2, 2, 1, 4, 2]);
        assert!(obs.dense().is_hermitian());
        assert!(h2_observable(&[f64::NAN; 8]).is_err());
    }

    #[test]
    fn dataset_argument_checks() {
        assert!(generate_dataset(0, 7, 0.2).is_err());
        assert!(generate_dataset(0, 10, 0.5).is_err());
        assert!(generate_dataset_with(
            0,
            DatasetConfig {
                n: 10,
                delta: 0.1,
                train_size: 3
            }
        )
        .is_err());
    }

    #[test]
    fn fast_scorer_matches_simulator() {
        let concept = Dataset::concept_circuit();
        let obs = qnn_observable();
        let mut rng = stream(11, Stream::DatasetFeatures);
        let params = uniform_angles(&mut rng, concept.param_count());
        let scorer = ConceptScorer::new(&concept, &params, &obs).unwrap();
        for _ in 0..20 {
            let x = uniform_angles(&mut rng, FEATURE_DIM);
            let phi = encode_real(&x);
            let psi = encode(&x).unwrap();
            for (a, b) in phi.iter().zip(psi.amplitudes()) {
                assert!((a - b.re).abs() < 1e-13 && b.im.abs() < 1e-13);
            }
            let slow = score(&x, &concept, &params, &obs).unwrap();
            assert!((scorer.score(&phi) - slow).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_margin_fills_quickly() {
        let ds = generate_dataset(3, 20, 0.0).unwrap();
        assert_eq!(ds.examples.len(), 20);
        assert_eq!(ds.train.len(), 2);
    }
}
