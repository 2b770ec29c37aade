//! CSV and JSON renderings of experiment results. Rows are always ordered by
//! topology id (then trial id), so identical inputs give identical bytes.

use serde::Serialize;
use serde_json::{json, Value};

use super::{ExperimentConfig, TopologyRun};
use crate::estimators::{mean_std, EnsembleStats, EstimatorReport};
use crate::scalar::Scalar;

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

const TRIAL_HEADER: [&str; 16] = [
    "topology_id",
    "trial_id",
    "seed",
    "t_clock",
    "creations_attempted",
    "creations_succeeded",
    "clifford_preparations",
    "measurements_attempted",
    "measurements_succeeded",
    "rotations_measured",
    "rotations_framed",
    "cnots_completed",
    "cnot_route_failures",
    "moves",
    "move_failures",
    "resources_discarded",
];

/// One row per trial with the run's counters.
pub fn trials_csv(runs: &[TopologyRun]) -> String {
    let rows = runs.iter().flat_map(|run| {
        run.trials.iter().map(move |t| {
            let c = &t.result.counts;
            [
                run.topology_id as u64,
                t.trial_id as u64,
                t.seed,
                t.result.t_clock,
                c.creations_attempted,
                c.creations_succeeded,
                c.clifford_preparations,
                c.measurements_attempted,
                c.measurements_succeeded,
                c.rotations_measured,
                c.rotations_framed,
                c.cnots_completed,
                c.cnot_route_failures,
                c.moves,
                c.move_failures,
                c.resources_discarded,
            ]
            .iter()
            .map(u64::to_string)
            .collect()
        })
    });
    csv_string(&TRIAL_HEADER, rows)
}

pub fn trials_json(config: &ExperimentConfig, runs: &[TopologyRun]) -> Value {
    let means: Vec<f64> = runs.iter().map(|r| r.t_clock_stats::<f64>().0).collect();
    let (mean, std) = mean_std(&means);
    let topologies: Vec<Value> = runs
        .iter()
        .map(|run| {
            let (m, s) = run.t_clock_stats::<f64>();
            let trials: Vec<Value> = run
                .trials
                .iter()
                .map(|t| {
                    let mut v = serde_json::to_value(&t.result).expect("result serializes");
                    v["trial_id"] = json!(t.trial_id);
                    v["seed"] = json!(t.seed);
                    v
                })
                .collect();
            json!({"topology_id": run.topology_id, "t_clock_mean": m, "t_clock_std": s, "trials": trials})
        })
        .collect();
    json!({
        "config": config,
        "topologies": topologies,
        "summary": {"t_clock_mean": mean, "t_clock_std": std},
    })
}

pub fn estimates_csv<T: Scalar>(reports: &[EstimatorReport<T>]) -> String {
    let rows = reports.iter().enumerate().map(|(id, r)| {
        vec![id.to_string(), r.e_analog.to_string(), r.e_cnot.to_string(), r.e_comb.to_string()]
    });
    csv_string(&["topology_id", "e_analog", "e_cnot", "e_comb"], rows)
}

pub fn estimates_json<T: Scalar>(config: &ExperimentConfig, reports: &[EstimatorReport<T>]) -> Value {
    let topologies: Vec<Value> = reports
        .iter()
        .enumerate()
        .map(|(id, r)| {
            let mut v = serde_json::to_value(r).expect("report serializes");
            v["topology_id"] = json!(id);
            v
        })
        .collect();
    json!({"config": config, "topologies": topologies})
}

/// Names of the estimators whose correlation is undefined; reported as 0.
fn undefined_r<T: Scalar>(stats: &EnsembleStats<T>) -> Vec<&'static str> {
    let r = &stats.r;
    [("e_analog", r.e_analog), ("e_cnot", r.e_cnot), ("e_comb", r.e_comb)]
        .into_iter()
        .filter(|(_, v)| v.is_none())
        .map(|(k, _)| k)
        .collect()
}

/// Per-topology rows followed by a summary row `R` whose estimator columns hold the
/// Pearson R against mean clock count and whose clock columns hold the ensemble
/// mean and standard deviation of the per-topology means.
pub fn ensemble_csv<T: Scalar>(stats: &EnsembleStats<T>) -> String {
    let pct = stats.percentiles();
    let mut rows: Vec<Vec<String>> = stats
        .rows
        .iter()
        .zip(&pct)
        .map(|(r, p)| {
            vec![
                r.topology_id.to_string(),
                r.e_analog.to_string(),
                r.e_cnot.to_string(),
                r.e_comb.to_string(),
                r.t_clock_mean.to_string(),
                r.t_clock_std.to_string(),
                p.to_string(),
            ]
        })
        .collect();
    let r = |v: Option<T>| v.unwrap_or_else(T::zero).to_string();
    rows.push(vec![
        "R".into(),
        r(stats.r.e_analog),
        r(stats.r.e_cnot),
        r(stats.r.e_comb),
        stats.t_clock_mean.to_string(),
        stats.t_clock_std.to_string(),
        String::new(),
    ]);
    csv_string(
        &["topology_id", "e_analog", "e_cnot", "e_comb", "t_clock_mean", "t_clock_std", "percentile"],
        rows,
    )
}

pub fn ensemble_json<T: Scalar>(config: &ExperimentConfig, stats: &EnsembleStats<T>) -> Value {
    let pct = stats.percentiles();
    let rows: Vec<Value> = stats
        .rows
        .iter()
        .zip(&pct)
        .map(|(r, p)| {
            let mut v = serde_json::to_value(r).expect("row serializes");
            v["percentile"] = json!(p);
            v
        })
        .collect();
    let r = |v: Option<T>| v.unwrap_or_else(T::zero);
    json!({
        "config": config,
        "rows": rows,
        "summary": {
            "r": {"e_analog": r(stats.r.e_analog), "e_cnot": r(stats.r.e_cnot), "e_comb": r(stats.r.e_comb)},
            "r_undefined": undefined_r(stats),
            "t_clock_mean": stats.t_clock_mean,
            "t_clock_std": stats.t_clock_std,
        },
    })
}

/// A search pick or baseline member; clock statistics are present once simulated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchEntry<T> {
    pub rank: usize,
    pub topology_id: usize,
    pub e_analog: T,
    pub e_cnot: T,
    pub e_comb: T,
    pub t_clock_mean: Option<T>,
    pub t_clock_std: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchComparison<T> {
    pub top_t_clock_mean: T,
    pub baseline_t_clock_mean: T,
    pub baseline_count: usize,
}

pub fn search_csv<T: Scalar>(entries: &[SearchEntry<T>]) -> String {
    let opt = |v: Option<T>| v.map(|x| x.to_string()).unwrap_or_default();
    let rows = entries.iter().map(|e| {
        vec![
            e.rank.to_string(),
            e.topology_id.to_string(),
            e.e_analog.to_string(),
            e.e_cnot.to_string(),
            e.e_comb.to_string(),
            opt(e.t_clock_mean),
            opt(e.t_clock_std),
        ]
    });
    csv_string(
        &["rank", "topology_id", "e_analog", "e_cnot", "e_comb", "t_clock_mean", "t_clock_std"],
        rows,
    )
}

pub fn search_json<T: Scalar>(
    config: &ExperimentConfig,
    entries: &[SearchEntry<T>],
    comparison: Option<&SearchComparison<T>>,
) -> Value {
    json!({"config": config, "picks": entries, "comparison": comparison})
}
