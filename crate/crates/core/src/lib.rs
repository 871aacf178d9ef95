//! Expressivity bounds and exact simulation for variational quantum
//! algorithms.
//!
//! The crate covers three layers:
//!
//! * analytic covering-number, Rademacher and generalization bounds
//!   ([`bounds`]), all in log space;
//! * an exact qubit simulator (statevector and per-gate depolarizing density
//!   matrix) with parameter-shift gradients ([`simulator`], [`gradients`]);
//! * training loops and reproducible experiments for QNN classification and
//!   H₂ ground-state VQE ([`optimize`], [`data`], [`experiments`]).

pub mod bounds;
pub mod circuits;
pub mod data;
pub mod error;
pub mod experiments;
pub mod gradients;
pub mod linalg;
pub mod optimize;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};
