//! Loading circuits, topologies and embedded configurations.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use thiserror::Error;

use star_sched::circuit::{parse_source, transpile, CircuitJsonError};
use star_sched::error::ParseError;
use star_sched::experiment::{ExperimentConfig, TopologySource};
use star_sched::fixtures;
use star_sched::topology::{gen_dense, gen_random_many, TopologyJsonError};
use star_sched::{Circuit, Topology};

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}")]
    Qasm { path: String, source: ParseError },
    #[error("{path}")]
    CircuitJson { path: PathBuf, source: CircuitJsonError },
    #[error("{path}")]
    TopologyJson { path: PathBuf, source: TopologyJsonError },
    #[error("{path}: {reason}")]
    Report { path: PathBuf, reason: String },
    #[error("unknown fixture `{0}` (known: {known})", known = fixtures::NAMES.join(", "))]
    UnknownFixture(String),
}

impl InputError {
    pub fn is_parse(&self) -> bool {
        !matches!(self, InputError::Io { .. } | InputError::UnknownFixture(_))
    }
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|source| InputError::Io { path: path.to_owned(), source })
}

/// Reads a circuit from `fixture:<name>`, a circuit JSON file, or QASM source.
pub fn load_circuit(input: &str) -> Result<Circuit, InputError> {
    if let Some(name) = input.strip_prefix("fixture:") {
        let text = fixtures::vendored(name).ok_or_else(|| InputError::UnknownFixture(name.into()))?;
        let program = parse_source(name, text).map_err(|source| InputError::Qasm { path: input.into(), source })?;
        return Ok(transpile(&program));
    }
    let path = Path::new(input);
    let text = read(path)?;
    if path.extension().is_some_and(|x| x == "json") {
        return Circuit::from_json(&text).map_err(|source| InputError::CircuitJson { path: path.to_owned(), source });
    }
    let name = path.file_stem().map_or_else(|| input.to_string(), |s| s.to_string_lossy().into_owned());
    let program = parse_source(&name, &text).map_err(|source| InputError::Qasm { path: input.into(), source })?;
    Ok(transpile(&program))
}

pub fn load_topology(path: &Path) -> Result<Topology, InputError> {
    let text = read(path)?;
    Topology::from_json(&text).map_err(|source| InputError::TopologyJson { path: path.to_owned(), source })
}

pub fn resolve_topologies(source: &TopologySource, n_qubits: usize) -> Result<Vec<Topology>> {
    Ok(match source {
        TopologySource::Files { paths } => paths
            .iter()
            .map(|p| load_topology(Path::new(p)))
            .collect::<Result<_, _>>()?,
        TopologySource::Random { count, width, height, seed } => {
            gen_random_many(*width, *height, n_qubits, *count, *seed).context("generating random topologies")?
        }
        TopologySource::Dense { m, n } => vec![gen_dense(*m, *n)?],
    })
}

/// A top-level section of a JSON report written by an earlier run.
pub fn load_section<T: DeserializeOwned>(path: &Path, key: &str) -> Result<T, InputError> {
    let text = read(path)?;
    let bad = |reason: String| InputError::Report { path: path.to_owned(), reason };
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let section = doc.get(key).ok_or_else(|| bad(format!("no `{key}` section")))?;
    serde_json::from_value(section.clone()).map_err(|e| bad(format!("`{key}`: {e}")))
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    Ok(load_section(path, "config")?)
}
