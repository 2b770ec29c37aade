//! Clock-cycle simulation of a circuit on a patch grid.
//!
//! Costs per cycle: a CNOT takes two cycles with its ancilla route held for both, a
//! resource-state creation trial takes one cycle and succeeds with `p_cr`, a move
//! takes one cycle, and a joint measurement takes one cycle and succeeds with `p_cm`.
//! A failed measurement applies the opposite rotation, so the next attempt targets
//! twice the angle until the residual becomes a Pauli or the rotation succeeds.

mod sim;

use serde::Serialize;

use crate::allocator::{DEFAULT_A, DEFAULT_B};
use crate::circuit::{Axis, Circuit};
use crate::error::SimError;
use crate::scalar::{normalize_angle, Scalar};
use crate::topology::{Spot, Topology};

pub use sim::{Resource, Simulator};

pub const DEFAULT_DEADLOCK_LIMIT: u64 = 1000;
pub const DEFAULT_TRIALS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig<T> {
    pub p_cr: T,
    pub p_cm: T,
    /// Ensemble seed; single runs take their own seed.
    pub seed: u64,
    pub trials: usize,
    pub a: T,
    pub b: T,
    pub deadlock_limit: u64,
    pub record_events: bool,
}

impl<T: Scalar> RunConfig<T> {
    pub fn new(p_cr: T) -> Self {
        RunConfig {
            p_cr,
            p_cm: T::of(0.5),
            seed: 0,
            trials: DEFAULT_TRIALS,
            a: T::of(DEFAULT_A),
            b: T::of(DEFAULT_B),
            deadlock_limit: DEFAULT_DEADLOCK_LIMIT,
            record_events: false,
        }
    }

    pub fn check(&self) -> Result<(), SimError> {
        let unit = |p: T| p > T::zero() && p <= T::one();
        if !unit(self.p_cr) {
            return Err(SimError::Config(format!("p_cr = {} outside (0, 1]", self.p_cr)));
        }
        if !(self.p_cm >= T::zero() && self.p_cm <= T::one()) {
            return Err(SimError::Config(format!("p_cm = {} outside [0, 1]", self.p_cm)));
        }
        if self.deadlock_limit == 0 {
            return Err(SimError::Config("deadlock limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleClass {
    Identity,
    /// Angle π: a Pauli, absorbed by the frame.
    Pauli,
    /// Angle ±π/2: the resource state is a Pauli eigenstate and prepares for free.
    CliffordHalf,
    Generic,
}

impl AngleClass {
    pub fn is_trivial(self) -> bool {
        matches!(self, AngleClass::Identity | AngleClass::Pauli)
    }
}

pub fn classify_angle<T: Scalar>(theta: T) -> AngleClass {
    let t = normalize_angle(theta);
    let tol = T::tolerance();
    let half = T::FRAC_PI_2();
    if t.abs() <= tol {
        AngleClass::Identity
    } else if (t.abs() - T::PI()).abs() <= tol {
        AngleClass::Pauli
    } else if (t.abs() - half).abs() <= tol {
        AngleClass::CliffordHalf
    } else {
        AngleClass::Generic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Category {
    Idle,
    Cnot1,
    Cnot2,
    #[serde(rename = "CNOT2_RX")]
    Cnot2Rx,
    #[serde(rename = "CNOT2_RZ")]
    Cnot2Rz,
    Rx1,
    Rx2,
    Rx3,
    Rz1,
    Rz2,
    Rz3,
}

impl Category {
    /// Rotation category for `axis` at readiness level 1, 2 or 3.
    pub fn rotation(axis: Axis, level: u8) -> Self {
        match (axis, level) {
            (Axis::X, 1) => Category::Rx1,
            (Axis::X, 2) => Category::Rx2,
            (Axis::X, 3) => Category::Rx3,
            (Axis::Z, 1) => Category::Rz1,
            (Axis::Z, 2) => Category::Rz2,
            (Axis::Z, 3) => Category::Rz3,
            _ => panic!("rotation level {level} out of range"),
        }
    }

    pub fn rotation_level(self) -> Option<(Axis, u8)> {
        match self {
            Category::Rx1 => Some((Axis::X, 1)),
            Category::Rx2 => Some((Axis::X, 2)),
            Category::Rx3 => Some((Axis::X, 3)),
            Category::Rz1 => Some((Axis::Z, 1)),
            Category::Rz2 => Some((Axis::Z, 2)),
            Category::Rz3 => Some((Axis::Z, 3)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Discard,
    Move,
    Route,
    Create,
    Measure,
    Cnot,
    Frame,
}

/// One log record; `t` is the cycle the event belongs to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub t: u64,
    pub phase: Phase,
    pub qubits: Vec<usize>,
    pub spots: Vec<Spot>,
    pub outcome: &'static str,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub creations_attempted: u64,
    pub creations_succeeded: u64,
    /// Free preparations of Pauli-eigenstate resources.
    pub clifford_preparations: u64,
    pub measurements_attempted: u64,
    pub measurements_succeeded: u64,
    /// Rotations finished by a successful measurement.
    pub rotations_measured: u64,
    /// Rotations finished through the Pauli frame, with or without prior attempts.
    pub rotations_framed: u64,
    pub cnots_completed: u64,
    pub cnot_route_failures: u64,
    pub moves: u64,
    pub move_failures: u64,
    pub resources_discarded: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub t_clock: u64,
    #[serde(flatten)]
    pub counts: Counts,
    /// Gate indices in the order they completed.
    #[serde(skip)]
    pub completed: Vec<usize>,
    #[serde(skip)]
    pub events: Option<Vec<Event>>,
}

impl SimResult {
    pub fn summary_json(&self) -> String {
        serde_json::to_string(self).expect("result serializes")
    }

    /// Event log as JSON lines, empty when events were not recorded.
    pub fn events_jsonl(&self) -> String {
        let mut out = String::new();
        for e in self.events.iter().flatten() {
            out.push_str(&serde_json::to_string(e).expect("event serializes"));
            out.push('\n');
        }
        out
    }
}

/// Simulates `circuit` on `topo` until every gate has completed.
pub fn run<T: Scalar>(
    circuit: &Circuit<T>,
    topo: &Topology,
    config: &RunConfig<T>,
    seed: u64,
) -> Result<SimResult, SimError> {
    let mut sim = Simulator::new(circuit, topo, config, seed)?;
    let mut idle = 0u64;
    while !sim.is_done() {
        if sim.step() {
            idle = 0;
        } else {
            idle += 1;
            if idle >= config.deadlock_limit {
                return Err(SimError::Deadlock {
                    t: sim.clock(),
                    idle,
                    dump: sim.dump(),
                });
            }
        }
    }
    Ok(sim.finish())
}
