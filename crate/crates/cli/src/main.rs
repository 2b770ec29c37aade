//! Command-line harness: transpile circuits, generate and validate topologies, run
//! simulation ensembles, evaluate estimators and search for good topologies.

mod inputs;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use star_sched::circuit::densities;
use star_sched::error::{ExperimentError, SimError};
use star_sched::estimators::{mean_std, DEFAULT_W};
use star_sched::experiment::{self, ExperimentConfig, SearchComparison, SearchEntry, TopologySource};
use star_sched::scheduler::{self, DEFAULT_DEADLOCK_LIMIT, DEFAULT_TRIALS};
use star_sched::topology::{gen_dense, RandomTopologies, DEFAULT_ATTEMPT_BUDGET};
use star_sched::allocator::{DEFAULT_A, DEFAULT_B};

use inputs::{load_circuit, load_config, resolve_topologies, InputError};

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_DEADLOCK: u8 = 3;

#[derive(Parser)]
#[command(name = "star-sched", version, about = "Clock-cycle experiments for analog-rotation lattice surgery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rewrite a QASM program to {CNOT, Rx, Rz} and fuse single-qubit runs.
    Transpile {
        input: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded simulation trials on each topology.
    Simulate(RunArgs),
    /// Estimator table, optionally joined with simulation results.
    Estimate {
        #[command(flatten)]
        run: RunArgs,
        /// Per-trial CSV written by `simulate` for the same topologies.
        #[arg(long)]
        join: Option<PathBuf>,
    },
    /// Rank random topologies by E_comb and keep the best.
    Search(SearchArgs),
    /// Write dense or random topologies as JSON.
    GenTopology {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Check the mapping constraints of topology files.
    Validate {
        #[arg(required = true)]
        topologies: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenKind {
    Dense {
        m: usize,
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Random {
        width: usize,
        height: usize,
        n_qubits: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory; JSON lines on stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// QASM file, circuit JSON, or `fixture:<name>`.
    #[arg(required_unless_present = "config")]
    circuit: Option<String>,
    /// Re-run the configuration embedded in an earlier report.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "topology")]
    topology: Vec<PathBuf>,
    #[arg(long)]
    topology_dir: Option<PathBuf>,
    /// Random topologies on a WxH grid, e.g. 5x5.
    #[arg(long)]
    random: Option<String>,
    /// Dense layout of MxN unit cells, e.g. 2x1.
    #[arg(long)]
    dense: Option<String>,
    #[arg(long, default_value_t = experiment::DEFAULT_TOPOLOGY_COUNT)]
    count: usize,
    #[arg(long, default_value_t = 0.8)]
    p_cr: f64,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_W)]
    w: f64,
    #[arg(long, default_value_t = DEFAULT_DEADLOCK_LIMIT)]
    deadlock_limit: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Event log (JSON lines) of trial 0 on topology 0.
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(required_unless_present = "config")]
    circuit: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = experiment::DEFAULT_SEARCH_CANDIDATES)]
    candidates: usize,
    #[arg(long, default_value_t = experiment::DEFAULT_SEARCH_KEEP)]
    keep: usize,
    #[arg(long, default_value = "5x5")]
    grid: String,
    /// Simulate the picks and the first `baseline` candidates.
    #[arg(long)]
    simulate: bool,
    #[arg(long, default_value_t = experiment::DEFAULT_TOPOLOGY_COUNT)]
    baseline: usize,
    #[arg(long, default_value_t = 0.8)]
    p_cr: f64,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_W)]
    w: f64,
    #[arg(long, default_value_t = DEFAULT_DEADLOCK_LIMIT)]
    deadlock_limit: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Directory receiving the picked topologies as JSON.
    #[arg(long)]
    save_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<InputError>().is_some_and(InputError::is_parse) {
            return EXIT_PARSE;
        }
        if let Some(ExperimentError::Sim { source: SimError::Deadlock { .. }, .. }) = cause.downcast_ref() {
            return EXIT_DEADLOCK;
        }
    }
    EXIT_USAGE
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Transpile { input, out } => cmd_transpile(&input, out.as_deref()),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Estimate { run, join } => cmd_estimate(&run, join.as_deref()),
        Command::Search(args) => cmd_search(&args),
        Command::GenTopology { kind } => cmd_gen_topology(kind),
        Command::Validate { topologies } => cmd_validate(&topologies),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn parse_dims(text: &str) -> Result<(usize, usize)> {
    let (a, b) = text
        .split_once(['x', 'X'])
        .with_context(|| format!("expected WxH, got `{text}`"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn cmd_transpile(input: &str, out: Option<&Path>) -> Result<()> {
    let circuit = load_circuit(input)?;
    let d = densities(&circuit);
    let summary = format!(
        "{}: qubits={} cnot={} analog={} n_s={} d_analog={:.4} d_cnot={}",
        circuit.source_name,
        circuit.n_qubits,
        d.n_cnot,
        d.n_analog,
        d.n_s,
        d.d_analog,
        d.d_cnot.map_or("undefined".into(), |v| format!("{v:.4}")),
    );
    let mut text = circuit.to_json();
    text.push('\n');
    emit(out, &text)?;
    // keep stdout clean when it carries the circuit
    if out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

/// Resolves the configuration of a run command from its flags or an earlier report.
fn run_config(args: &RunArgs) -> Result<ExperimentConfig> {
    if let Some(path) = &args.config {
        return load_config(path);
    }
    let circuit = args.circuit.clone().expect("clap requires a circuit without --config");
    let sources = [
        !args.topology.is_empty() || args.topology_dir.is_some(),
        args.random.is_some(),
        args.dense.is_some(),
    ];
    if sources.iter().filter(|&&s| s).count() != 1 {
        bail!("give exactly one topology source: --topology/--topology-dir, --random or --dense");
    }
    let topology = if let Some(dims) = &args.random {
        let (width, height) = parse_dims(dims)?;
        TopologySource::Random { count: args.count, width, height, seed: args.seed }
    } else if let Some(dims) = &args.dense {
        let (m, n) = parse_dims(dims)?;
        TopologySource::Dense { m, n }
    } else {
        let mut paths: Vec<String> = args.topology.iter().map(|p| p.display().to_string()).collect();
        if let Some(dir) = &args.topology_dir {
            let mut found: Vec<String> = fs::read_dir(dir)
                .with_context(|| format!("reading {}", dir.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .map(|p| p.display().to_string())
                .collect();
            found.sort();
            paths.extend(found);
        }
        TopologySource::Files { paths }
    };
    Ok(ExperimentConfig {
        circuit,
        topology,
        p_cr: args.p_cr,
        p_cm: 0.5,
        trials: args.trials,
        w: args.w,
        seed: args.seed,
        deadlock_limit: args.deadlock_limit,
        a: DEFAULT_A,
        b: DEFAULT_B,
    })
}

/// Writes the deadlock dump next to the output and names it in the error.
fn deadlock_context(err: ExperimentError, out: Option<&Path>) -> anyhow::Error {
    if let ExperimentError::Sim { topology_id, source: SimError::Deadlock { dump, .. } } = &err {
        let dir = out.and_then(Path::parent).filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let path = dir.join(format!("deadlock_topology_{topology_id}.txt"));
        let note = match fs::write(&path, dump) {
            Ok(()) => format!("diagnostic written to {}", path.display()),
            Err(e) => format!("could not write diagnostic to {}: {e}", path.display()),
        };
        return anyhow::Error::new(err).context(note);
    }
    anyhow::Error::new(err)
}

fn cmd_simulate(args: &RunArgs) -> Result<()> {
    let config = run_config(args)?;
    let circuit = load_circuit(&config.circuit)?;
    let topos = resolve_topologies(&config.topology, circuit.n_qubits)?;
    let rc = config.run_config::<f64>();
    rc.check()?;
    let runs = experiment::simulate_all(&circuit, &topos, &rc).map_err(|e| deadlock_context(e, args.out.as_deref()))?;
    if let (Some(path), Some(first)) = (&args.events, topos.first()) {
        let mut rc = rc.clone();
        rc.record_events = true;
        let seed = experiment::trial_seed(rc.seed, 0, 0);
        let result = scheduler::run(&circuit, first, &rc, seed)?;
        fs::write(path, result.events_jsonl()).with_context(|| format!("writing {}", path.display()))?;
    }
    let text = match args.format {
        Format::Csv => experiment::trials_csv(&runs),
        Format::Json => pretty(&experiment::trials_json(&config, &runs)),
    };
    emit(args.out.as_deref(), &text)?;
    let means: Vec<f64> = runs.iter().map(|r| r.t_clock_stats::<f64>().0).collect();
    let (mean, std) = mean_std(&means);
    eprintln!("{} topologies x {} trials: t_clock mean {mean:.2} (std of means {std:.2})", runs.len(), config.trials);
    Ok(())
}

/// Per-topology clock samples from a `simulate` CSV, indexed by topology id.
fn read_trials_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).with_context(|| format!("{}: no `{name}` column", path.display()));
    let (id_col, t_col) = (col("topology_id")?, col("t_clock")?);
    let mut samples: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let id: usize = record[id_col].parse()?;
        let t: f64 = record[t_col].parse()?;
        if samples.len() <= id {
            samples.resize(id + 1, Vec::new());
        }
        samples[id].push(t);
    }
    Ok(samples)
}

fn cmd_estimate(args: &RunArgs, join: Option<&Path>) -> Result<()> {
    let config = run_config(args)?;
    let circuit = load_circuit(&config.circuit)?;
    let topos = resolve_topologies(&config.topology, circuit.n_qubits)?;
    let reports = experiment::estimate_all(&circuit, &topos, config.w)?;
    let Some(join) = join else {
        let text = match args.format {
            Format::Csv => experiment::estimates_csv(&reports),
            Format::Json => pretty(&experiment::estimates_json(&config, &reports)),
        };
        return emit(args.out.as_deref(), &text);
    };
    let samples = read_trials_csv(join)?;
    if samples.len() != reports.len() || samples.iter().any(Vec::is_empty) {
        bail!("{} holds results for {} topologies, expected {}", join.display(), samples.len(), reports.len());
    }
    let rows = reports
        .iter()
        .zip(&samples)
        .enumerate()
        .map(|(id, (r, s))| {
            let (t_clock_mean, t_clock_std) = mean_std(s);
            star_sched::estimators::TopologyRow {
                topology_id: id,
                e_analog: r.e_analog,
                e_cnot: r.e_cnot,
                e_comb: r.e_comb,
                t_clock_mean,
                t_clock_std,
            }
        })
        .collect();
    let stats = star_sched::EnsembleStats::new(rows);
    let text = match args.format {
        Format::Csv => experiment::ensemble_csv(&stats),
        Format::Json => pretty(&experiment::ensemble_json(&config, &stats)),
    };
    emit(args.out.as_deref(), &text)?;
    for (name, r) in [("E_analog", stats.r.e_analog), ("E_cnot", stats.r.e_cnot), ("E_comb", stats.r.e_comb)] {
        match r {
            Some(r) => eprintln!("R(t_clock, {name}) = {r:.4}"),
            None => eprintln!("R(t_clock, {name}) undefined (zero variance), reported as 0"),
        }
    }
    Ok(())
}

fn cmd_search(args: &SearchArgs) -> Result<()> {
    let (config, search) = match &args.config {
        Some(path) => {
            let config = load_config(path)?;
            let search: SearchSettings = inputs::load_section(path, "search")?;
            (config, search)
        }
        None => {
            let (width, height) = parse_dims(&args.grid)?;
            let config = ExperimentConfig {
                circuit: args.circuit.clone().expect("clap requires a circuit without --config"),
                topology: TopologySource::Random { count: args.candidates, width, height, seed: args.seed },
                p_cr: args.p_cr,
                p_cm: 0.5,
                trials: args.trials,
                w: args.w,
                seed: args.seed,
                deadlock_limit: args.deadlock_limit,
                a: DEFAULT_A,
                b: DEFAULT_B,
            };
            let search = SearchSettings { keep: args.keep, simulate: args.simulate, baseline: args.baseline };
            (config, search)
        }
    };
    let TopologySource::Random { count, .. } = config.topology else {
        bail!("search needs a random topology source");
    };
    if search.keep == 0 || search.keep > count {
        bail!("need 1 <= keep ({}) <= candidates ({count})", search.keep);
    }
    let circuit = load_circuit(&config.circuit)?;
    let topos = resolve_topologies(&config.topology, circuit.n_qubits)?;
    let reports = experiment::estimate_all(&circuit, &topos, config.w)?;
    let picks: Vec<usize> = experiment::rank_by_comb(&reports).into_iter().take(search.keep).collect();

    let mut entries: Vec<SearchEntry<f64>> = picks
        .iter()
        .enumerate()
        .map(|(rank, &id)| SearchEntry {
            rank,
            topology_id: id,
            e_analog: reports[id].e_analog,
            e_cnot: reports[id].e_cnot,
            e_comb: reports[id].e_comb,
            t_clock_mean: None,
            t_clock_std: None,
        })
        .collect();
    let mut comparison = None;
    if search.simulate {
        let rc = config.run_config::<f64>();
        rc.check()?;
        let sim = |ids: &[usize]| -> Result<Vec<(f64, f64)>> {
            let runs = experiment::simulate_ids(&circuit, &topos, ids, &rc)
                .map_err(|e| deadlock_context(e, args.out.as_deref()))?;
            Ok(runs.iter().map(|run| run.t_clock_stats::<f64>()).collect())
        };
        let top = sim(&picks)?;
        for (e, (m, s)) in entries.iter_mut().zip(&top) {
            e.t_clock_mean = Some(*m);
            e.t_clock_std = Some(*s);
        }
        let baseline_ids: Vec<usize> = (0..search.baseline.min(count)).collect();
        let base = sim(&baseline_ids)?;
        let c = SearchComparison {
            top_t_clock_mean: mean_std(&top.iter().map(|t| t.0).collect::<Vec<_>>()).0,
            baseline_t_clock_mean: mean_std(&base.iter().map(|t| t.0).collect::<Vec<_>>()).0,
            baseline_count: baseline_ids.len(),
        };
        eprintln!(
            "top-{} mean t_clock {:.2} vs baseline ({}) {:.2}",
            picks.len(),
            c.top_t_clock_mean,
            c.baseline_count,
            c.baseline_t_clock_mean
        );
        comparison = Some(c);
    }
    if let Some(dir) = &args.save_dir {
        fs::create_dir_all(dir)?;
        for e in &entries {
            let path = dir.join(format!("rank_{:03}_topology_{}.json", e.rank, e.topology_id));
            fs::write(&path, topos[e.topology_id].to_json())?;
        }
    }
    let text = match args.format {
        Format::Csv => experiment::search_csv(&entries),
        Format::Json => {
            let mut v = experiment::search_json(&config, &entries, comparison.as_ref());
            v["search"] = serde_json::to_value(search)?;
            pretty(&v)
        }
    };
    emit(args.out.as_deref(), &text)
}

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
struct SearchSettings {
    keep: usize,
    simulate: bool,
    baseline: usize,
}

fn cmd_gen_topology(kind: GenKind) -> Result<()> {
    match kind {
        GenKind::Dense { m, n, out } => {
            let t = gen_dense(m, n)?;
            let mut text = t.to_json();
            text.push('\n');
            emit(out.as_deref(), &text)
        }
        GenKind::Random { width, height, n_qubits, count, seed, out } => {
            let mut gen = RandomTopologies::new(width, height, n_qubits, seed, DEFAULT_ATTEMPT_BUDGET)?;
            if let Some(dir) = &out {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            for id in 0..count {
                let t = gen.next_valid()?;
                match &out {
                    Some(dir) => {
                        let mut text = t.to_json();
                        text.push('\n');
                        fs::write(dir.join(format!("topology_{id:04}.json")), text)?;
                    }
                    None => println!("{}", serde_json::to_string(&t.to_json_value())?),
                }
            }
            Ok(())
        }
    }
}

fn cmd_validate(paths: &[PathBuf]) -> Result<()> {
    let mut invalid = 0;
    for path in paths {
        let t = inputs::load_topology(path)?;
        let report = t.validate();
        println!(
            "{}",
            json!({"path": path.display().to_string(), "valid": report.is_valid(), "violations": report.violations})
        );
        if !report.is_valid() {
            invalid += 1;
        }
    }
    if invalid > 0 {
        bail!("{invalid} of {} topologies violate the mapping constraints", paths.len());
    }
    Ok(())
}
