use std::collections::VecDeque;

use serde::Serialize;

use crate::scalar::Scalar;

use super::Circuit;

/// One layer of gate indices into the source circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Layer {
    /// CNOTs, each qubit used at most once.
    M(Vec<usize>),
    /// Single-qubit rotations.
    S(Vec<usize>),
}

impl Layer {
    pub fn gates(&self) -> &[usize] {
        match self {
            Layer::M(g) | Layer::S(g) => g,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerDecomposition {
    pub layers: Vec<Layer>,
    /// Number of non-empty S-layers.
    pub n_s: usize,
}

impl LayerDecomposition {
    /// Gate indices in layer order.
    pub fn replay(&self) -> Vec<usize> {
        self.layers.iter().flat_map(|l| l.gates().iter().copied()).collect()
    }
}

/// ASAP layering: drain each qubit's leading single-qubit run into an S-layer, then
/// take every CNOT now at the head of both operand queues as the next M-layer.
pub fn layerize<T: Scalar>(circuit: &Circuit<T>) -> LayerDecomposition {
    let n = circuit.n_qubits;
    let mut queues: Vec<VecDeque<usize>> = vec![VecDeque::new(); n];
    for (i, g) in circuit.gates.iter().enumerate() {
        for q in g.qubits() {
            queues[q].push_back(i);
        }
    }

    let mut layers = Vec::new();
    let mut n_s = 0;
    loop {
        let mut s = Vec::new();
        for queue in queues.iter_mut() {
            while let Some(&i) = queue.front() {
                if circuit.gates[i].is_cnot() {
                    break;
                }
                s.push(i);
                queue.pop_front();
            }
        }
        s.sort_unstable();

        let mut m = Vec::new();
        for q in 0..n {
            if let Some(&i) = queues[q].front() {
                if let super::Gate::Cnot { control, target } = circuit.gates[i] {
                    let other = if control == q { target } else { control };
                    if q < other && queues[other].front() == Some(&i) {
                        m.push(i);
                    }
                }
            }
        }
        for &i in &m {
            for q in circuit.gates[i].qubits() {
                queues[q].pop_front();
            }
        }
        m.sort_unstable();

        if s.is_empty() && m.is_empty() {
            break;
        }
        if !s.is_empty() {
            n_s += 1;
            layers.push(Layer::S(s));
        }
        if !m.is_empty() {
            layers.push(Layer::M(m));
        }
    }
    debug_assert!(queues.iter().all(VecDeque::is_empty));
    LayerDecomposition { layers, n_s }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Densities<T> {
    pub n_analog: usize,
    pub n_cnot: usize,
    pub n_s: usize,
    /// N_analog / (3q(n_s + 1)).
    pub d_analog: T,
    /// N_cnot / (n_s·⌊q/2⌋); `None` when the denominator vanishes.
    pub d_cnot: Option<T>,
}

impl<T: Scalar> Densities<T> {
    /// Upper bound on `d_analog` implied by N_analog ≤ 3q + 6·N_cnot.
    pub fn analog_bound(&self, n_qubits: usize) -> Option<T> {
        let d_cnot = self.d_cnot?;
        let ns = T::of_usize(self.n_s);
        let one = T::one();
        let q = T::of_usize(n_qubits);
        let pairs = T::of_usize(n_qubits / 2);
        Some(one / (ns + one) + T::of(2.0) * d_cnot * ns * pairs / ((ns + one) * q))
    }
}

pub fn densities<T: Scalar>(circuit: &Circuit<T>) -> Densities<T> {
    let layers = layerize(circuit);
    let q = circuit.n_qubits;
    let n_analog = circuit.rotation_count();
    let n_cnot = circuit.cnot_count();
    let denom_a = 3 * q * (layers.n_s + 1);
    let d_analog = if denom_a == 0 {
        T::zero()
    } else {
        T::of_usize(n_analog) / T::of_usize(denom_a)
    };
    let denom_c = layers.n_s * (q / 2);
    let d_cnot = (denom_c > 0).then(|| T::of_usize(n_cnot) / T::of_usize(denom_c));
    Densities {
        n_analog,
        n_cnot,
        n_s: layers.n_s,
        d_analog,
        d_cnot,
    }
}
