use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("duplicate qubit index {0} within a single Pauli term")]
    DuplicateQubit(usize),

    #[error("observable needs at least one term")]
    EmptyTerms,

    #[error("{0} qubits exceeds the dense-simulation cap of {max}", max = crate::linalg::MAX_QUBITS)]
    TooManyQubits(usize),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("parameter vector has length {actual}, circuit expects {expected}")]
    ParamLength { expected: usize, actual: usize },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("depolarizing rate {0} outside [0, 1]")]
    NoiseOutOfRange(f64),

    #[error("epsilon {0} outside (0, 1/10)")]
    EpsilonOutOfRange(f64),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dataset generation exhausted {attempts} attempts without filling both classes")]
    RejectionCapExceeded { attempts: u64 },

    #[error("training failed: {0}")]
    Training(String),
}

pub type Result<T> = std::result::Result<T, Error>;
