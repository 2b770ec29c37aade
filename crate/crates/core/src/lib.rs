//! Scheduling and mapping of analog-rotation circuits on a lattice-surgery patch grid.
//!
//! Numeric code is generic over [`scalar::Scalar`] (`f32` or `f64`); the aliases below
//! fix the scalar for the common cases.

pub mod allocator;
pub mod circuit;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod fixtures;
pub mod scalar;
pub mod scheduler;
pub mod topology;

pub use topology::{Spot, Topology};

pub type Circuit = circuit::Circuit<f64>;
pub type Gate = circuit::Gate<f64>;
pub type RunConfig = scheduler::RunConfig<f64>;
pub type QuboProblem = allocator::QuboProblem<f64>;
pub type Assignment = allocator::Assignment<f64>;
pub type EstimatorReport = estimators::EstimatorReport<f64>;
pub type EnsembleStats = estimators::EnsembleStats<f64>;

pub type Circuit32 = circuit::Circuit<f32>;
pub type Gate32 = circuit::Gate<f32>;
pub type RunConfig32 = scheduler::RunConfig<f32>;
pub type QuboProblem32 = allocator::QuboProblem<f32>;
pub type Assignment32 = allocator::Assignment<f32>;
pub type EstimatorReport32 = estimators::EstimatorReport<f32>;
pub type EnsembleStats32 = estimators::EnsembleStats<f32>;
