//! Command implementations behind the `longcause` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use longcause::data::{load_csv, save_csv, save_meta};
use longcause::graph::import_json;
use longcause::metrics::{save_rows, score, ResultRow, Score};
use longcause::pipeline::{
    baseline, discover, run_experiment, write_baseline, write_discovery, Config, ExperimentRow, GRAPH_JSON,
};
use longcause::simgen::{generate_dataset, GroundTruthGraph};
use longcause::Error;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

/// Failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: msg.into(),
        }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: msg.into(),
        }
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_RUNTIME,
            message: msg.into(),
        }
    }

    /// Failure while reading inputs: anything but a configuration problem
    /// is bad data.
    fn loading(e: Error) -> Self {
        match e {
            Error::Config(_) => Self::config(e.to_string()),
            _ => Self::data(e.to_string()),
        }
    }

    /// Failure while computing or writing results.
    fn running(e: Error) -> Self {
        match e {
            Error::Config(_) => Self::config(e.to_string()),
            Error::Data(_) | Error::NoObservations(_) | Error::UnknownVariable(_) | Error::Csv(_) | Error::Graph(_) => {
                Self::data(e.to_string())
            }
            Error::Io { .. } | Error::Json(_) | Error::Diverged { .. } => Self::runtime(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "longcause", version, about = "Causal discovery for sparse longitudinal data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset and its true graph.
    Simulate(SimulateArgs),
    /// Discover a causal graph with the recurrent ΔMSE test.
    Discover(DiscoverArgs),
    /// Discover a causal graph with the linear Granger baseline.
    Baseline(BaselineArgs),
    /// Score a discovered graph against a true graph.
    Evaluate(EvaluateArgs),
    /// Run a simulate/discover/baseline/evaluate grid.
    Experiment(ExperimentArgs),
    /// Print the default configuration file.
    Defaults,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// TOML configuration; missing keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Base seed for every random stream.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Output directory for data.csv, data.meta.json and truth.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Builtin graph name or graph spec file.
    #[arg(long)]
    pub graph: Option<String>,
    /// Causal lag of every edge, in steps.
    #[arg(long)]
    pub lag: Option<usize>,
    /// Number of simulated individuals.
    #[arg(long)]
    pub n_individuals: Option<usize>,
    /// Fraction of cells removed uniformly at random.
    #[arg(long)]
    pub missing_rate: Option<f64>,
}

/// Overrides for the discovery settings.
#[derive(Debug, Args, Default)]
pub struct DiscoverFlags {
    /// Significance level of the one-sided t-test.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Keep an aggregated edge if it appears in more than this fraction of runs.
    #[arg(long)]
    pub keep_threshold: Option<f64>,
    /// GRU hidden units.
    #[arg(long)]
    pub hidden_size: Option<usize>,
    /// Cross-validation repetitions; each adds five splits.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Concurrent split jobs; 0 uses every core.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Independent detection runs to aggregate.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Training epoch limit per split.
    #[arg(long)]
    pub max_epochs: Option<usize>,
    /// Skip resolving bidirectional pairs.
    #[arg(long)]
    pub no_orient: bool,
    /// Skip removing indirect edges.
    #[arg(long)]
    pub no_prune: bool,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[command(flatten)]
    pub flags: DiscoverFlags,
    /// Long-format CSV: individual_id,time,<variables...>
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory for the graph, ΔMSE tables and run metadata.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Long-format CSV: individual_id,time,<variables...>
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory for the graph, F-tests and run metadata.
    #[arg(long)]
    pub out: PathBuf,
    /// Significance level of the F-test.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Autoregressive lag order.
    #[arg(long)]
    pub lag: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Graph JSON written by `discover` or `baseline`.
    #[arg(long)]
    pub predicted: PathBuf,
    /// True graph spec (as written by `simulate`) or builtin graph name.
    #[arg(long)]
    pub truth: String,
    /// Write the score and per-edge ledger as JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Append a summary row to this CSV, creating it with a header if needed.
    #[arg(long)]
    pub results: Option<PathBuf>,
    /// Dataset label for the results row.
    #[arg(long, default_value = "")]
    pub dataset: String,
    /// Method label for the results row.
    #[arg(long, default_value = "")]
    pub method: String,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[command(flatten)]
    pub flags: DiscoverFlags,
    /// Output directory for results.csv (and per-cell artifacts if enabled).
    #[arg(long)]
    pub out: PathBuf,
}

/// Reads a TOML config; parse errors carry line and column.
pub fn load_config(path: Option<&Path>) -> CliResult<Config> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn default_config_toml() -> String {
    toml::to_string_pretty(&Config::default()).expect("default config serializes")
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::runtime(format!("{}: {e}", dir.display())))
}

fn save_effective_config(dir: &Path, cfg: &Config) -> CliResult<()> {
    let text = toml::to_string_pretty(cfg).map_err(|e| CliError::runtime(format!("serializing config: {e}")))?;
    write_text(&dir.join("config.toml"), &text)
}

impl DiscoverFlags {
    pub fn apply(&self, cfg: &mut Config) {
        let d = &mut cfg.discover;
        if let Some(a) = self.alpha {
            d.gc.alpha = a;
        }
        if let Some(k) = self.keep_threshold {
            d.keep_threshold = k;
        }
        if let Some(h) = self.hidden_size {
            d.gc.train.hidden_size = h;
        }
        if let Some(r) = self.reps {
            d.gc.repetitions = r;
        }
        if let Some(w) = self.workers {
            d.gc.workers = w;
        }
        if let Some(r) = self.runs {
            d.runs = r;
        }
        if let Some(e) = self.max_epochs {
            d.gc.train.max_epochs = e;
        }
        if self.no_orient {
            d.orient = false;
        }
        if self.no_prune {
            d.prune = false;
        }
        if let Some(a) = self.alpha {
            cfg.baseline.alpha = a;
        }
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let mut cfg = load_config(args.cfg.config.as_deref())?;
    let sim = &mut cfg.simulate;
    if let Some(s) = args.cfg.seed {
        sim.seed = s;
    }
    if let Some(g) = &args.graph {
        sim.graph = g.clone();
    }
    if let Some(l) = args.lag {
        sim.lag = l;
    }
    if let Some(n) = args.n_individuals {
        sim.n_individuals = n;
    }
    if let Some(m) = args.missing_rate {
        sim.missing_rate = m;
    }
    sim.validate().map_err(CliError::loading)?;
    let (data, truth) = generate_dataset(sim).map_err(|e| match e {
        Error::Io { .. } | Error::Json(_) | Error::Graph(_) => CliError::config(e.to_string()),
        e => CliError::running(e),
    })?;
    create_dir(&args.out)?;
    let csv = args.out.join("data.csv");
    save_csv(&data, &csv).map_err(CliError::running)?;
    save_meta(&data.meta, &csv).map_err(CliError::running)?;
    truth.save(args.out.join("truth.json")).map_err(CliError::running)?;
    save_effective_config(&args.out, &cfg)?;
    info!(
        "wrote {} individuals, {} of {} cells observed",
        data.len(),
        data.observed_cells(),
        data.total_cells()
    );
    Ok(())
}

/// Wall-clock record kept apart from the reproducible outputs.
#[derive(Debug, Serialize, Deserialize)]
pub struct Timing {
    pub runtime_seconds: f64,
}

pub const TIMING_JSON: &str = "timing.json";

fn write_timing(dir: &Path, start: Instant) -> CliResult<()> {
    let t = Timing {
        runtime_seconds: start.elapsed().as_secs_f64(),
    };
    write_text(
        &dir.join(TIMING_JSON),
        &serde_json::to_string_pretty(&t).expect("timing serializes"),
    )
}

pub fn cmd_discover(args: &DiscoverArgs) -> CliResult<()> {
    let mut cfg = load_config(args.cfg.config.as_deref())?;
    if let Some(s) = args.cfg.seed {
        cfg.discover.gc.seed = s;
    }
    args.flags.apply(&mut cfg);
    cfg.discover.validate().map_err(CliError::loading)?;
    let data = load_csv(&args.data).map_err(CliError::loading)?;
    let start = Instant::now();
    let d = discover(&data, &cfg.discover).map_err(CliError::running)?;
    for r in &d.runs {
        for (u, v) in r.table.untestable() {
            warn!(
                "untestable pair {} -> {}: too few ΔMSE samples",
                data.variable_names()[u],
                data.variable_names()[v]
            );
        }
    }
    write_discovery(&args.out, &d).map_err(CliError::running)?;
    save_effective_config(&args.out, &cfg)?;
    write_timing(&args.out, start)?;
    info!("final graph has {} edges", d.graph.n_edges());
    Ok(())
}

pub fn cmd_baseline(args: &BaselineArgs) -> CliResult<()> {
    let mut cfg = load_config(args.cfg.config.as_deref())?;
    if let Some(a) = args.alpha {
        cfg.baseline.alpha = a;
    }
    if let Some(l) = args.lag {
        cfg.baseline.lag = l;
    }
    cfg.baseline.validate().map_err(CliError::loading)?;
    let data = load_csv(&args.data).map_err(CliError::loading)?;
    let start = Instant::now();
    let b = baseline(&data, &cfg.baseline).map_err(CliError::running)?;
    for (id, var) in &b.flagged {
        warn!("individual {id} has no observations of {var}; filled with zero");
    }
    write_baseline(&args.out, &b).map_err(CliError::running)?;
    save_effective_config(&args.out, &cfg)?;
    write_timing(&args.out, start)?;
    Ok(())
}

fn runtime_near(predicted: &Path) -> f64 {
    let Some(dir) = predicted.parent() else {
        return f64::NAN;
    };
    fs::read_to_string(dir.join(TIMING_JSON))
        .ok()
        .and_then(|s| serde_json::from_str::<Timing>(&s).ok())
        .map_or(f64::NAN, |t| t.runtime_seconds)
}

/// Appends to an existing results file, or creates it with a header.
fn append_row(path: &Path, row: &ResultRow) -> CliResult<()> {
    if !path.exists() {
        return save_rows(path, std::slice::from_ref(row)).map_err(CliError::running);
    }
    let mut buf = Vec::new();
    longcause::metrics::write_rows(&mut buf, std::slice::from_ref(row)).map_err(CliError::running)?;
    let body = buf.splitn(2, |&b| b == b'\n').nth(1).unwrap_or_default();
    use std::io::Write;
    let mut f = fs::OpenOptions::new()
        .append(true)
        .open(path)
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
    f.write_all(body)
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> CliResult<Score> {
    let predicted = import_json(&args.predicted).map_err(CliError::loading)?;
    let truth = GroundTruthGraph::resolve(&args.truth).map_err(CliError::loading)?;
    let s = score(&predicted, &truth).map_err(CliError::running)?;
    if let Some(out) = &args.out {
        let text = serde_json::to_string_pretty(&s).expect("score serializes");
        write_text(out, &(text + "\n"))?;
    }
    if let Some(results) = &args.results {
        let row = ResultRow::new(&args.dataset, &args.method, &s, runtime_near(&args.predicted));
        append_row(results, &row)?;
    }
    println!("precision {:.4} recall {:.4} f1 {:.4}", s.precision, s.recall, s.f1);
    Ok(s)
}

pub fn cmd_experiment(args: &ExperimentArgs) -> CliResult<Vec<ExperimentRow>> {
    let mut cfg = load_config(args.cfg.config.as_deref())?;
    if let Some(s) = args.cfg.seed {
        cfg.experiment.seeds = vec![s];
    }
    args.flags.apply(&mut cfg);
    cfg.validate().map_err(CliError::loading)?;
    create_dir(&args.out)?;
    save_effective_config(&args.out, &cfg)?;
    let rows =
        run_experiment(&cfg.experiment, &cfg.discover, &cfg.baseline, Some(&args.out)).map_err(CliError::running)?;
    save_rows(&args.out.join("results.csv"), &rows).map_err(CliError::running)?;
    let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
    if failed > 0 {
        warn!("{failed} of {} grid rows failed; see the error column", rows.len());
    }
    Ok(rows)
}

/// Dispatches a parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Discover(a) => cmd_discover(&a),
        Command::Baseline(a) => cmd_baseline(&a),
        Command::Evaluate(a) => cmd_evaluate(&a).map(|_| ()),
        Command::Experiment(a) => cmd_experiment(&a).map(|_| ()),
        Command::Defaults => {
            print!("{}", default_config_toml());
            Ok(())
        }
    }
}

/// File the final graph is written to inside an output directory.
pub fn graph_json(dir: &Path) -> PathBuf {
    dir.join(GRAPH_JSON)
}
