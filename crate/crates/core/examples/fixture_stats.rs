//! Prints gate counts and densities of the fixture circuits. With `--write`, run from
//! `crates/core`, it also regenerates the vendored QASM files.

use star_sched::circuit::{densities, parse_source, transpile};
use star_sched::fixtures;

fn main() {
    let write = std::env::args().any(|a| a == "--write");
    for name in fixtures::NAMES {
        let text = fixtures::generate(name).unwrap();
        if write {
            std::fs::write(format!("fixtures/{name}.qasm"), &text).unwrap();
        }
        let c = transpile(&parse_source::<f64>(name, &text).unwrap());
        let d = densities(&c);
        println!(
            "{name}: q={} n_analog={} n_cnot={} n_s={} d_analog={:?} d_cnot={:?}",
            c.n_qubits, d.n_analog, d.n_cnot, d.n_s, d.d_analog, d.d_cnot
        );
    }
}
