//! Static affinity estimators between a circuit and a topology, and the ensemble
//! statistics that relate them to simulated clock counts.
//!
//! `E_analog` rewards open edges on the axes a qubit rotates about, `E_cnot` penalises
//! long ancilla paths between frequently interacting pairs, and `E_comb` mixes them
//! with a weight `w`.

mod stats;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::circuit::{Axis, Circuit, Gate};
use crate::error::EstimatorError;
use crate::scalar::{normalize_angle, Scalar};
use crate::topology::{route_cnot, Topology};

pub use stats::{mean_std, pearson_r, Correlations, EnsembleStats, TopologyRow};

pub const DEFAULT_W: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QubitTerm {
    pub qubit: usize,
    pub open_x: usize,
    pub open_z: usize,
    pub n_ops_x: usize,
    pub n_ops_z: usize,
}

impl QubitTerm {
    pub fn contribution(&self) -> usize {
        self.open_x * self.n_ops_x + self.open_z * self.n_ops_z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairTerm {
    pub control: usize,
    pub target: usize,
    pub n_cnot: usize,
    /// Spots on the shortest ancilla path.
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorReport<T> {
    pub e_analog: T,
    pub e_cnot: T,
    pub e_comb: T,
    pub w: T,
    pub qubits: Vec<QubitTerm>,
    /// Ordered pairs with at least one CNOT, by (control, target).
    pub pairs: Vec<PairTerm>,
}

fn check_counts<T: Scalar>(topo: &Topology, circuit: &Circuit<T>) -> Result<(), EstimatorError> {
    if topo.n_qubits() != circuit.n_qubits {
        return Err(EstimatorError::QubitCountMismatch {
            circuit: circuit.n_qubits,
            topology: topo.n_qubits(),
        });
    }
    Ok(())
}

/// Rotation counts per qubit as `(x, z)`; zero angles are skipped.
pub fn rotation_counts<T: Scalar>(circuit: &Circuit<T>) -> Vec<(usize, usize)> {
    let mut counts = vec![(0, 0); circuit.n_qubits];
    for g in &circuit.gates {
        if let Some((axis, q, a)) = g.as_rotation() {
            if normalize_angle(a).abs() <= T::tolerance() {
                continue;
            }
            match axis {
                Axis::X => counts[q].0 += 1,
                Axis::Z => counts[q].1 += 1,
            }
        }
    }
    counts
}

/// CNOT multiplicities keyed by `(control, target)`.
pub fn cnot_counts<T: Scalar>(circuit: &Circuit<T>) -> BTreeMap<(usize, usize), usize> {
    let mut counts = BTreeMap::new();
    for g in &circuit.gates {
        if let Gate::Cnot { control, target } = *g {
            *counts.entry((control, target)).or_insert(0) += 1;
        }
    }
    counts
}

/// Number of spots on the shortest CNOT path with only data qubits as obstacles.
pub fn cnot_length(topo: &Topology, control: usize, target: usize) -> Result<usize, EstimatorError> {
    route_cnot(topo, &topo.empty_spot_set(), control, target)
        .map(|p| p.len())
        .ok_or(EstimatorError::Unroutable { control, target })
}

pub fn qubit_terms<T: Scalar>(topo: &Topology, circuit: &Circuit<T>) -> Result<Vec<QubitTerm>, EstimatorError> {
    check_counts(topo, circuit)?;
    Ok(rotation_counts(circuit)
        .into_iter()
        .enumerate()
        .map(|(q, (nx, nz))| {
            let open = topo.open_edges(q);
            QubitTerm {
                qubit: q,
                open_x: open.x,
                open_z: open.z,
                n_ops_x: nx,
                n_ops_z: nz,
            }
        })
        .collect())
}

pub fn pair_terms<T: Scalar>(topo: &Topology, circuit: &Circuit<T>) -> Result<Vec<PairTerm>, EstimatorError> {
    check_counts(topo, circuit)?;
    cnot_counts(circuit)
        .into_iter()
        .map(|((c, t), n)| {
            Ok(PairTerm {
                control: c,
                target: t,
                n_cnot: n,
                length: cnot_length(topo, c, t)?,
            })
        })
        .collect()
}

pub fn e_analog<T: Scalar>(topo: &Topology, circuit: &Circuit<T>) -> Result<T, EstimatorError> {
    let total: usize = qubit_terms(topo, circuit)?.iter().map(QubitTerm::contribution).sum();
    Ok(T::of_usize(total))
}

pub fn e_cnot<T: Scalar>(topo: &Topology, circuit: &Circuit<T>) -> Result<T, EstimatorError> {
    let total: usize = pair_terms(topo, circuit)?.iter().map(|p| p.n_cnot * p.length).sum();
    Ok(T::zero() - T::of_usize(total))
}

pub fn e_comb<T: Scalar>(topo: &Topology, circuit: &Circuit<T>, w: T) -> Result<T, EstimatorError> {
    Ok(e_analog(topo, circuit)? + w * e_cnot(topo, circuit)?)
}

/// All three estimators with their per-qubit and per-pair terms.
pub fn evaluate<T: Scalar>(topo: &Topology, circuit: &Circuit<T>, w: T) -> Result<EstimatorReport<T>, EstimatorError> {
    let qubits = qubit_terms(topo, circuit)?;
    let pairs = pair_terms(topo, circuit)?;
    let e_analog = T::of_usize(qubits.iter().map(QubitTerm::contribution).sum());
    let e_cnot = T::zero() - T::of_usize(pairs.iter().map(|p| p.n_cnot * p.length).sum());
    Ok(EstimatorReport {
        e_analog,
        e_cnot,
        e_comb: e_analog + w * e_cnot,
        w,
        qubits,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Spot;

    fn topo(w: usize, h: usize, spots: &[(usize, usize)]) -> Topology {
        Topology::new(w, h, spots.iter().map(|&(x, y)| Spot::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn no_rotations_no_analog_score() {
        let t = topo(3, 3, &[(0, 0), (2, 2)]);
        let c = Circuit::new("c", 2, vec![Gate::cnot(0, 1)]);
        assert_eq!(e_analog::<f64>(&t, &c).unwrap(), 0.0);
        let c = Circuit::<f64>::new("e", 2, vec![]);
        assert_eq!(e_cnot(&t, &c).unwrap(), 0.0);
    }

    #[test]
    fn centre_qubit_formula() {
        // centre of a 3x3 grid: two free X-edges and two free Z-edges
        let t = topo(3, 3, &[(1, 1)]);
        let mut gates = vec![Gate::rz(0, 0.3f64); 3];
        gates.push(Gate::rx(0, 0.2));
        let c = Circuit::new("c", 1, gates);
        let r = evaluate(&t, &c, 0.3).unwrap();
        assert_eq!((r.qubits[0].open_x, r.qubits[0].open_z), (2, 2));
        assert_eq!(r.e_analog, 8.0);
    }

    #[test]
    fn adjacent_pair_repeated() {
        // Z-neighbour of q0 below it is an X-neighbour of q1: one-spot path
        let t = topo(2, 2, &[(0, 0), (1, 1)]);
        let c = Circuit::new("c", 2, vec![Gate::cnot(0, 1); 5]);
        let r = evaluate::<f64>(&t, &c, 0.3).unwrap();
        assert_eq!(r.pairs, vec![PairTerm { control: 0, target: 1, n_cnot: 5, length: 1 }]);
        assert_eq!(r.e_cnot, -5.0);
    }

    #[test]
    fn comb_arithmetic() {
        let t = topo(3, 3, &[(1, 1), (0, 0)]);
        let c = Circuit::new(
            "c",
            2,
            vec![Gate::rz(0, 0.3f64), Gate::rz(0, 0.3), Gate::rz(0, 0.3), Gate::rx(0, 0.2), Gate::cnot(0, 1)],
        );
        let r = evaluate(&t, &c, 0.3).unwrap();
        assert_eq!(r.e_comb, r.e_analog + 0.3 * r.e_cnot);
        assert_eq!(e_comb(&t, &c, 0.0).unwrap(), r.e_analog);
        assert_eq!(e_comb(&t, &c, 0.3).unwrap(), r.e_comb);
    }

    #[test]
    fn mismatch_and_unroutable() {
        let t = topo(3, 3, &[(1, 1)]);
        let c = Circuit::<f64>::new("c", 2, vec![]);
        assert!(matches!(e_analog(&t, &c), Err(EstimatorError::QubitCountMismatch { .. })));
        // q1 in a corner walled in by q0 and q2 has no free neighbour at all
        let t = topo(3, 3, &[(1, 0), (0, 0), (0, 1)]);
        let c = Circuit::new("c", 3, vec![Gate::cnot(0, 1)]);
        assert_eq!(e_cnot::<f64>(&t, &c), Err(EstimatorError::Unroutable { control: 0, target: 1 }));
    }
}
