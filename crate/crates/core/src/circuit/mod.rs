//! Circuits over the analog-rotation basis {CNOT, Rx, Rz}.
//!
//! The pipeline is [`parse_qasm`] (which applies [`rewrite_to_basis`]) followed by
//! [`fuse_single_qubit`]; [`layerize`] and [`densities`] then describe the result.

mod euler;
mod layers;
mod qasm;
mod transpile;

use serde::{Deserialize, Serialize};

use crate::scalar::{normalize_angle, Scalar};

pub use euler::{zxz_decompose, EulerZxz, Mat2};
pub use layers::{densities, layerize, Densities, Layer, LayerDecomposition};
pub use qasm::{parse_qasm, parse_source, SourceGate, SourceProgram};
pub use transpile::{fuse_single_qubit, rewrite_to_basis, transpile};

/// Pauli axis of an analog rotation, and of the patch edge it is measured through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate<T> {
    Cnot { control: usize, target: usize },
    Rz { qubit: usize, angle: T },
    Rx { qubit: usize, angle: T },
}

impl<T: Scalar> Gate<T> {
    pub fn cnot(control: usize, target: usize) -> Self {
        assert_ne!(control, target, "CNOT control and target must differ");
        Gate::Cnot { control, target }
    }

    pub fn rz(qubit: usize, angle: T) -> Self {
        Gate::Rz {
            qubit,
            angle: normalize_angle(angle),
        }
    }

    pub fn rx(qubit: usize, angle: T) -> Self {
        Gate::Rx {
            qubit,
            angle: normalize_angle(angle),
        }
    }

    pub fn rotation(axis: Axis, qubit: usize, angle: T) -> Self {
        match axis {
            Axis::X => Self::rx(qubit, angle),
            Axis::Z => Self::rz(qubit, angle),
        }
    }

    pub fn is_cnot(&self) -> bool {
        matches!(self, Gate::Cnot { .. })
    }

    /// `(axis, qubit, angle)` for rotations, `None` for CNOT.
    pub fn as_rotation(&self) -> Option<(Axis, usize, T)> {
        match *self {
            Gate::Rz { qubit, angle } => Some((Axis::Z, qubit, angle)),
            Gate::Rx { qubit, angle } => Some((Axis::X, qubit, angle)),
            Gate::Cnot { .. } => None,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Rz { qubit, .. } | Gate::Rx { qubit, .. } => vec![qubit],
        }
    }

    pub fn touches(&self, q: usize) -> bool {
        match *self {
            Gate::Cnot { control, target } => control == q || target == q,
            Gate::Rz { qubit, .. } | Gate::Rx { qubit, .. } => qubit == q,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit<T> {
    pub n_qubits: usize,
    pub gates: Vec<Gate<T>>,
    pub source_name: String,
}

impl<T: Scalar> Circuit<T> {
    /// Builds a circuit, panicking if a gate addresses a qubit outside the register.
    pub fn new(name: impl Into<String>, n_qubits: usize, gates: Vec<Gate<T>>) -> Self {
        for g in &gates {
            for q in g.qubits() {
                assert!(q < n_qubits, "gate {g:?} addresses qubit {q} >= {n_qubits}");
            }
        }
        Circuit {
            n_qubits,
            gates,
            source_name: name.into(),
        }
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_cnot()).count()
    }

    /// Rotations with a nonzero angle; Clifford angles are counted.
    pub fn rotation_count(&self) -> usize {
        self.gates
            .iter()
            .filter_map(|g| g.as_rotation())
            .filter(|&(_, _, a)| normalize_angle(a).abs() > T::tolerance())
            .count()
    }

    /// Gate indices touching `q`, in circuit order.
    pub fn qubit_projection(&self, q: usize) -> Vec<usize> {
        (0..self.gates.len())
            .filter(|&i| self.gates[i].touches(q))
            .collect()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = CircuitDoc {
            name: self.source_name.clone(),
            n_qubits: self.n_qubits,
            gates: self.gates.iter().map(GateDoc::from_gate).collect(),
        };
        serde_json::to_value(doc).expect("circuit serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("circuit serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CircuitJsonError> {
        let doc: CircuitDoc = serde_json::from_str(text)?;
        let mut gates = Vec::with_capacity(doc.gates.len());
        for (i, g) in doc.gates.iter().enumerate() {
            let bad = || CircuitJsonError::BadGate(i);
            let gate = match (g.kind.as_str(), g.qubits.as_slice(), g.angle) {
                ("CNOT", &[c, t], _) if c != t => Gate::cnot(c, t),
                ("RZ", &[q], Some(a)) => Gate::rz(q, T::of(a)),
                ("RX", &[q], Some(a)) => Gate::rx(q, T::of(a)),
                _ => return Err(bad()),
            };
            if gate.qubits().iter().any(|&q| q >= doc.n_qubits) {
                return Err(bad());
            }
            gates.push(gate);
        }
        Ok(Circuit {
            n_qubits: doc.n_qubits,
            gates,
            source_name: doc.name,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CircuitJsonError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("gate #{0} is malformed")]
    BadGate(usize),
}

#[derive(Serialize, Deserialize)]
struct CircuitDoc {
    name: String,
    n_qubits: usize,
    gates: Vec<GateDoc>,
}

#[derive(Serialize, Deserialize)]
struct GateDoc {
    kind: String,
    qubits: Vec<usize>,
    angle: Option<f64>,
}

impl GateDoc {
    fn from_gate<T: Scalar>(g: &Gate<T>) -> Self {
        match *g {
            Gate::Cnot { control, target } => GateDoc {
                kind: "CNOT".into(),
                qubits: vec![control, target],
                angle: None,
            },
            Gate::Rz { qubit, angle } => GateDoc {
                kind: "RZ".into(),
                qubits: vec![qubit],
                angle: Some(angle.to_f64_lossy()),
            },
            Gate::Rx { qubit, angle } => GateDoc {
                kind: "RX".into(),
                qubits: vec![qubit],
                angle: Some(angle.to_f64_lossy()),
            },
        }
    }
}
