use crate::scalar::Scalar;

use super::euler::{zxz_decompose, Mat2};
use super::qasm::{SourceGate, SourceProgram};
use super::{Circuit, Gate};

/// Replaces every symbolic gate by an Rz/Rx(π/2) word equal to it up to global phase.
pub fn rewrite_to_basis<T: Scalar>(program: &SourceProgram<T>) -> Circuit<T> {
    let half = T::FRAC_PI_2();
    let quarter = T::FRAC_PI_4();
    let mut gates = Vec::with_capacity(program.gates.len());
    for g in &program.gates {
        match *g {
            SourceGate::Cx(c, t) => gates.push(Gate::cnot(c, t)),
            SourceGate::Rz(q, a) => gates.push(Gate::rz(q, a)),
            SourceGate::Rx(q, a) => gates.push(Gate::rx(q, a)),
            SourceGate::H(q) => {
                gates.extend([Gate::rz(q, half), Gate::rx(q, half), Gate::rz(q, half)])
            }
            SourceGate::X(q) => gates.extend([Gate::rx(q, half), Gate::rx(q, half)]),
            SourceGate::Z(q) => gates.push(Gate::rz(q, T::PI())),
            SourceGate::S(q) => gates.push(Gate::rz(q, half)),
            SourceGate::Sdg(q) => gates.push(Gate::rz(q, -half)),
            SourceGate::T(q) => gates.push(Gate::rz(q, quarter)),
            SourceGate::Tdg(q) => gates.push(Gate::rz(q, -quarter)),
        }
    }
    Circuit {
        n_qubits: program.n_qubits,
        gates,
        source_name: program.name.clone(),
    }
}

/// Collapses every maximal single-qubit run into at most three rotations Rz·Rx·Rz.
///
/// A run is flushed when a CNOT touches its qubit; remaining runs are flushed at the
/// end in qubit order. Runs equal to the identity up to phase disappear.
pub fn fuse_single_qubit<T: Scalar>(circuit: &Circuit<T>) -> Circuit<T> {
    let n = circuit.n_qubits;
    let mut pending: Vec<Option<Mat2<T>>> = vec![None; n];
    let mut out = Vec::with_capacity(circuit.gates.len());

    fn flush<T: Scalar>(q: usize, pending: &mut [Option<Mat2<T>>], out: &mut Vec<Gate<T>>) {
        if let Some(u) = pending[q].take() {
            out.extend(zxz_decompose(&u).gates(q));
        }
    }

    for g in &circuit.gates {
        match *g {
            Gate::Cnot { control, target } => {
                flush(control, &mut pending, &mut out);
                flush(target, &mut pending, &mut out);
                out.push(*g);
            }
            Gate::Rz { qubit, angle } | Gate::Rx { qubit, angle } => {
                let (axis, _, _) = g.as_rotation().expect("rotation");
                let r = Mat2::rotation(axis, angle);
                pending[qubit] = Some(match pending[qubit] {
                    Some(acc) => r.mul(&acc),
                    None => r,
                });
            }
        }
    }
    for q in 0..n {
        flush(q, &mut pending, &mut out);
    }
    Circuit {
        n_qubits: n,
        gates: out,
        source_name: circuit.source_name.clone(),
    }
}

/// Full pipeline: rewrite to {CNOT, Rx(π/2), Rz} then fuse runs.
pub fn transpile<T: Scalar>(program: &SourceProgram<T>) -> Circuit<T> {
    fuse_single_qubit(&rewrite_to_basis(program))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_source;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    // Independent oracle: textbook matrices written out entry by entry.
    fn textbook(g: &SourceGate<f64>) -> Mat2<f64> {
        use num_complex::Complex;
        let c = |re: f64, im: f64| Complex::new(re, im);
        let r = 1.0 / 2f64.sqrt();
        let m = match g {
            SourceGate::H(_) => [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]],
            SourceGate::X(_) => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
            SourceGate::Z(_) => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
            SourceGate::S(_) => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]],
            SourceGate::Sdg(_) => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, -1.0)]],
            SourceGate::T(_) => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(r, r)]],
            SourceGate::Tdg(_) => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(r, -r)]],
            _ => unreachable!(),
        };
        Mat2 { m }
    }

    fn program(gates: Vec<SourceGate<f64>>) -> SourceProgram<f64> {
        SourceProgram {
            name: "t".into(),
            n_qubits: 1,
            gates,
        }
    }

    #[test]
    fn s_and_t_rewrite_to_single_rz() {
        let c = rewrite_to_basis(&program(vec![SourceGate::S(0)]));
        assert_eq!(c.gates, vec![Gate::rz(0, PI / 2.0)]);
        let c = rewrite_to_basis(&program(vec![SourceGate::T(0)]));
        assert_eq!(c.gates, vec![Gate::rz(0, PI / 4.0)]);
    }

    #[test]
    fn h_rewrite_matches_hadamard_matrix() {
        let c = rewrite_to_basis(&program(vec![SourceGate::H(0)]));
        assert_eq!(
            c.gates,
            vec![
                Gate::rz(0, PI / 2.0),
                Gate::rx(0, PI / 2.0),
                Gate::rz(0, PI / 2.0)
            ]
        );
        let u = Mat2::from_sequence(c.gates.iter());
        assert!(u.equal_up_to_phase(&textbook(&SourceGate::H(0)), 1e-12));
    }

    #[test]
    fn every_clifford_t_rewrite_matches_textbook() {
        for g in [
            SourceGate::H(0),
            SourceGate::X(0),
            SourceGate::Z(0),
            SourceGate::S(0),
            SourceGate::Sdg(0),
            SourceGate::T(0),
            SourceGate::Tdg(0),
        ] {
            let c = rewrite_to_basis(&program(vec![g]));
            let u = Mat2::from_sequence(c.gates.iter());
            assert!(u.equal_up_to_phase(&textbook(&g), 1e-12), "{g:?}");
        }
    }

    #[test]
    fn commuting_rz_merge() {
        let c = Circuit::new("t", 1, vec![Gate::rz(0, 2.0f64), Gate::rz(0, 2.5)]);
        let f = fuse_single_qubit(&c);
        assert_eq!(f.gates.len(), 1);
        let (_, _, a) = f.gates[0].as_rotation().unwrap();
        assert!((a - (4.5 - 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn hadamard_pair_is_elided() {
        let c = rewrite_to_basis(&program(vec![SourceGate::H(0), SourceGate::H(0)]));
        assert!(fuse_single_qubit(&c).gates.is_empty());
    }

    #[test]
    fn five_gate_word_becomes_zxz() {
        let input = vec![
            Gate::rz(0, PI / 3.0),
            Gate::rx(0, PI / 2.0),
            Gate::rz(0, PI / 5.0),
            Gate::rx(0, PI / 2.0),
            Gate::rz(0, PI / 7.0),
        ];
        let f = fuse_single_qubit(&Circuit::new("t", 1, input.clone()));
        assert_eq!(f.gates.len(), 3);
        assert!(matches!(f.gates[0], Gate::Rz { .. }));
        assert!(matches!(f.gates[1], Gate::Rx { .. }));
        assert!(matches!(f.gates[2], Gate::Rz { .. }));
        // oracle: direct matrix product of the input word
        let want = Mat2::from_sequence(input.iter());
        let got = Mat2::from_sequence(f.gates.iter());
        assert!((got.phase_overlap(&want) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn runs_split_at_cnot_endpoints() {
        let text = "qreg q[2]; t q[0]; t q[1]; cx q[0],q[1]; t q[0]; s q[0]; h q[1];";
        let p: SourceProgram<f64> = parse_source("t", text).unwrap();
        let f = transpile(&p);
        let cx = f.gates.iter().position(|g| g.is_cnot()).unwrap();
        assert_eq!(f.gates[..cx].len(), 2);
        // q0 after the CNOT: T·S fuses into a single Rz(3π/4)
        let q0_after: Vec<_> = f.gates[cx + 1..].iter().filter(|g| g.touches(0)).collect();
        assert_eq!(q0_after.len(), 1);
        let (_, _, a) = q0_after[0].as_rotation().unwrap();
        assert!((a - 3.0 * PI / 4.0).abs() < 1e-12);
    }

    fn arb_run() -> impl Strategy<Value = Vec<Gate<f64>>> {
        prop::collection::vec(
            (any::<bool>(), -7.0f64..7.0).prop_map(|(x, a)| {
                if x {
                    Gate::rx(0, a)
                } else {
                    Gate::rz(0, a)
                }
            }),
            1..12,
        )
    }

    proptest! {
        #[test]
        fn fusion_preserves_unitary(run in arb_run()) {
            let f = fuse_single_qubit(&Circuit::new("p", 1, run.clone()));
            prop_assert!(f.gates.len() <= 3);
            let want = Mat2::from_sequence(run.iter());
            let got = Mat2::from_sequence(f.gates.iter());
            prop_assert!((got.phase_overlap(&want) - 2.0).abs() < 1e-9);
        }
    }
}
