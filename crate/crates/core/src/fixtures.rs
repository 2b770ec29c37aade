//! Benchmark-shaped circuits: QASM generators and the vendored copies they produce.

use std::fmt::Write as _;

use crate::circuit::{parse_source, transpile, Circuit};
use crate::error::ParseError;
use crate::scalar::Scalar;

pub const NAMES: [&str; 4] = ["ising_n10", "adder_n10", "qpe_n9", "dnn_n8"];

/// Vendored QASM text for a named fixture.
pub fn vendored(name: &str) -> Option<&'static str> {
    match name {
        "ising_n10" => Some(include_str!("../fixtures/ising_n10.qasm")),
        "adder_n10" => Some(include_str!("../fixtures/adder_n10.qasm")),
        "qpe_n9" => Some(include_str!("../fixtures/qpe_n9.qasm")),
        "dnn_n8" => Some(include_str!("../fixtures/dnn_n8.qasm")),
        _ => None,
    }
}

/// Regenerates a named fixture from its generator.
pub fn generate(name: &str) -> Option<String> {
    match name {
        "ising_n10" => Some(ising_qasm(10, 5)),
        "adder_n10" => Some(adder_qasm(4)),
        "qpe_n9" => Some(qpe_qasm(8)),
        "dnn_n8" => Some(dnn_qasm(8, 20)),
        _ => None,
    }
}

/// Parses and transpiles a vendored fixture.
pub fn load<T: Scalar>(name: &str) -> Option<Result<Circuit<T>, ParseError>> {
    vendored(name).map(|text| parse_source(name, text).map(|p| transpile(&p)))
}

struct Qasm {
    out: String,
}

impl Qasm {
    fn new(name: &str, n: usize) -> Self {
        let mut out = String::new();
        let _ = writeln!(out, "// {name}");
        out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
        let _ = writeln!(out, "qreg q[{n}];");
        let _ = writeln!(out, "creg c[{n}];");
        Qasm { out }
    }

    fn g1(&mut self, gate: &str, q: usize) {
        let _ = writeln!(self.out, "{gate} q[{q}];");
    }

    fn rot(&mut self, gate: &str, angle: f64, q: usize) {
        let _ = writeln!(self.out, "{gate}({angle:.6}) q[{q}];");
    }

    fn cx(&mut self, c: usize, t: usize) {
        let _ = writeln!(self.out, "cx q[{c}],q[{t}];");
    }

    /// Doubly-controlled phase in the six-CNOT, seven-T form.
    fn ccz(&mut self, a: usize, b: usize, c: usize) {
        self.cx(b, c);
        self.g1("tdg", c);
        self.cx(a, c);
        self.g1("t", c);
        self.cx(b, c);
        self.g1("tdg", c);
        self.cx(a, c);
        self.g1("t", b);
        self.g1("t", c);
        self.cx(a, b);
        self.g1("t", a);
        self.g1("tdg", b);
        self.cx(a, b);
    }

    fn cu1(&mut self, lambda: f64, c: usize, t: usize) {
        self.rot("rz", lambda / 2.0, c);
        self.cx(c, t);
        self.rot("rz", -lambda / 2.0, t);
        self.cx(c, t);
        self.rot("rz", lambda / 2.0, t);
    }

    fn finish(mut self, n: usize) -> String {
        for q in 0..n {
            let _ = writeln!(self.out, "measure q[{q}] -> c[{q}];");
        }
        self.out
    }
}

/// Transverse-field Ising chain: Trotter steps of ZZ couplings on even then odd
/// bonds, each followed by a single-qubit field layer.
pub fn ising_qasm(n: usize, steps: usize) -> String {
    let mut b = Qasm::new(&format!("ising_n{n}"), n);
    for q in 0..n {
        b.g1("h", q);
    }
    for step in 0..steps {
        let j = 0.2 + 0.01 * step as f64;
        for parity in [0, 1] {
            for q in (parity..n.saturating_sub(1)).step_by(2) {
                b.cx(q, q + 1);
                b.rot("rz", 2.0 * j, q + 1);
                b.cx(q, q + 1);
            }
        }
        for q in 0..n {
            let h = 0.3 + 0.02 * q as f64;
            if q % 2 == 0 {
                b.rot("rz", 0.4, q);
            }
            b.rot("rx", 2.0 * h, q);
            b.rot("rz", 0.15, q);
        }
    }
    b.finish(n)
}

/// Ripple-carry adder skeleton on `bits`-bit registers: carry-in, interleaved a/b
/// registers and carry-out. The majority/unmajority Toffolis appear in phase form,
/// i.e. without the target basis changes, and small phases separate the bare CNOTs
/// of each block.
pub fn adder_qasm(bits: usize) -> String {
    let n = 2 * bits + 2;
    let cin = 0;
    let a = |i: usize| 1 + 2 * i;
    let bq = |i: usize| 2 + 2 * i;
    let cout = n - 1;
    let phase = |i: usize| 0.1 + 0.05 * i as f64;
    let mut b = Qasm::new(&format!("adder_n{n}"), n);
    // majority chain
    let mut carry = cin;
    for i in 0..bits {
        b.cx(a(i), carry);
        b.rot("rz", phase(i), a(i));
        b.cx(a(i), bq(i));
        b.rot("rz", phase(i), bq(i));
        b.ccz(carry, bq(i), a(i));
        carry = a(i);
    }
    b.cx(a(bits - 1), cout);
    // unmajority chain
    for i in (0..bits).rev() {
        let prev = if i == 0 { cin } else { a(i - 1) };
        b.ccz(prev, bq(i), a(i));
        b.rot("rz", -phase(i), prev);
        b.cx(a(i), prev);
        b.rot("rz", -phase(i), prev);
        b.cx(prev, bq(i));
    }
    b.finish(n)
}

/// Phase estimation of a single-qubit phase gate with `counting` ancillas, followed
/// by a nearest-neighbour approximate inverse QFT on the counting register.
pub fn qpe_qasm(counting: usize) -> String {
    let n = counting + 1;
    let target = counting;
    let phase = 2.0 * std::f64::consts::PI * 0.3;
    let mut b = Qasm::new(&format!("qpe_n{n}"), n);
    b.g1("x", target);
    for q in 0..counting {
        b.g1("h", q);
    }
    for q in 0..counting {
        let reps = 1u32 << q.min(3);
        let lambda = phase * f64::from(1u32 << q) / f64::from(reps);
        for _ in 0..reps {
            b.cu1(lambda, q, target);
        }
    }
    for j in (0..counting).rev() {
        if j + 1 < counting {
            b.cu1(-std::f64::consts::FRAC_PI_2, j + 1, j);
        }
        b.g1("h", j);
    }
    b.finish(n)
}

/// Dense layered network: each layer rotates every qubit and then entangles disjoint
/// neighbour pairs, alternating the pairing between layers.
pub fn dnn_qasm(n: usize, layers: usize) -> String {
    let mut b = Qasm::new(&format!("dnn_n{n}"), n);
    for layer in 0..layers {
        for q in 0..n {
            let w = 0.1 + 0.037 * (layer * n + q) as f64;
            if q == layer % n {
                b.rot("rz", 0.5 * w + 0.1, q);
            }
            b.rot("rx", 1.3 * w + 0.2, q);
        }
        let shift = layer % 2;
        for q in (0..n).step_by(2) {
            b.cx((q + shift) % n, (q + shift + 1) % n);
        }
    }
    b.finish(n)
}
