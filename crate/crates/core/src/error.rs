use thiserror::Error;

use crate::topology::Spot;

/// QASM parsing failure, tagged with the 1-based source line.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("qubit index {index} out of range for register of size {size}")]
    QubitOutOfRange { index: usize, size: usize },
    #[error("malformed statement: {0}")]
    Malformed(String),
    #[error("exactly one qubit register must be declared")]
    Register,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("grid {width}x{height} is empty")]
    EmptyGrid { width: usize, height: usize },
    #[error("qubit {qubit} placed at {spot} outside the {width}x{height} grid")]
    OutOfGrid {
        qubit: usize,
        spot: Spot,
        width: usize,
        height: usize,
    },
    #[error("spot {spot} holds more than one qubit")]
    NotInjective { spot: Spot },
    #[error("{n_qubits} qubits exceed the density limit {limit} for a {width}x{height} grid")]
    TooDense {
        n_qubits: usize,
        limit: usize,
        width: usize,
        height: usize,
    },
    #[error("no valid topology found after {attempts} attempts")]
    NoValidTopology { attempts: usize },
    #[error("dense layout needs m, n >= 1")]
    BadDenseShape,
    #[error("qubit ids must be 0..{expected} without gaps")]
    BadQubitIds { expected: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("circuit has {circuit} qubits but topology places {topology}")]
    QubitCountMismatch { circuit: usize, topology: usize },
    #[error("no CNOT path between control {control} and target {target}")]
    Unroutable { control: usize, target: usize },
    #[error("correlation needs equal-length samples of size >= 2 (got {0} and {1})")]
    SampleSize(usize, usize),
    #[error("correlation undefined: zero variance")]
    ZeroVariance,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("circuit has {circuit} qubits but topology places {topology}")]
    QubitCountMismatch { circuit: usize, topology: usize },
    #[error("topology violates the mapping constraints: {0}")]
    InvalidTopology(String),
    /// `dump` holds the per-qubit state and grid at the time of the abort.
    #[error("no progress for {idle} consecutive cycles at t = {t}")]
    Deadlock { t: u64, idle: u64, dump: String },
    #[error("invalid run configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("topology {topology_id}")]
    Sim { topology_id: usize, source: SimError },
    #[error("topology {topology_id}")]
    Estimator { topology_id: usize, source: EstimatorError },
    #[error(transparent)]
    Topology(#[from] TopologyError),
}
