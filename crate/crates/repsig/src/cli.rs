//! Command-line frontend: reliability tables and curves, signature dumps,
//! and the simulation-vs-analytic diagnostic.
//!
//! Exit codes: 0 on success, 2 on usage errors, 1 on runtime/numerical
//! errors. Table output rounds half-even to four decimals; curve output is
//! full-precision CSV or JSON.

use crate::distributions::Rates;
use crate::error::Error;
use crate::montecarlo::{compare_analytic, GapModel, SimConfig};
use crate::reliability::{reliability_curve, ReliabilityCurve, RepairableSpec, Topology};
use crate::signature::Truncation;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::ffi::OsString;

/// Retained-mass threshold below which the truncated mixture is flagged.
const TAIL_MASS_WARNING: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

/// Fully resolved invocation, shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: RepairableSpec,
    pub t_max: f64,
    pub t_step: f64,
    pub truncation: Truncation,
    pub format: OutputFormat,
    pub reps: u64,
    pub seed: u64,
    pub threads: Option<usize>,
    pub gap_model: GapModel,
}

/// What a command wants printed: stdout text plus stderr warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct CmdOutput {
    pub stdout: String,
    pub warnings: Vec<String>,
}

impl CmdOutput {
    fn new(stdout: String) -> Self {
        Self {
            stdout,
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "repsig",
    version,
    about = "Reliability of repairable systems via infinite-dimensional signatures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the reliability table (4-decimal, two side-by-side blocks)
    Table {
        #[command(flatten)]
        model: ModelOpts,
        #[command(flatten)]
        grid: GridOpts,
        #[command(flatten)]
        truncation: TruncationOpts,
    },
    /// Stream the reliability curve as CSV or JSON at full precision
    Curve {
        #[command(flatten)]
        model: ModelOpts,
        #[command(flatten)]
        grid: GridOpts,
        #[command(flatten)]
        truncation: TruncationOpts,
        /// Output format
        #[arg(long, value_enum, default_value_t = CurveFormat::Csv)]
        format: CurveFormat,
    },
    /// Print the retained signature terms and the geometric tail descriptor
    Signature {
        #[command(flatten)]
        model: ModelOpts,
        #[command(flatten)]
        truncation: TruncationOpts,
        /// Output format
        #[arg(long, value_enum, default_value_t = TextFormat::Table)]
        format: TextFormat,
    },
    /// Simulate the repairable process and compare it with the analytic curve
    Simulate {
        #[command(flatten)]
        model: ModelOpts,
        #[command(flatten)]
        grid: GridOpts,
        #[command(flatten)]
        truncation: TruncationOpts,
        /// Output format
        #[arg(long, value_enum, default_value_t = TextFormat::Table)]
        format: TextFormat,
        /// Number of replications
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        reps: u64,
        /// Master seed of the replication streams (echoed in the report)
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; the result is identical for any thread count
        #[arg(long, value_parser = clap::value_parser!(usize))]
        threads: Option<usize>,
        /// Draw the first inter-failure gap as Exp(2*lambda) instead of Exp(lambda)
        #[arg(long)]
        racing_first_gap: bool,
    },
}

#[derive(Args, Debug)]
struct ModelOpts {
    /// Component failure rate per unit time
    #[arg(long, value_parser = parse_positive)]
    lambda: f64,
    /// Repair rate per unit time
    #[arg(long, value_parser = parse_positive)]
    mu: f64,
    /// System topology
    #[arg(long, value_enum, default_value_t = TopologyOpt::Parallel2)]
    topology: TopologyOpt,
    /// Component count (paralleln topology only)
    #[arg(long)]
    n: Option<usize>,
    /// Failure probability of the series component (remark5 topology only)
    #[arg(long)]
    q: Option<f64>,
}

#[derive(Args, Debug)]
struct GridOpts {
    /// Largest grid time; the grid is t-step, 2*t-step, ... up to t-max
    #[arg(long = "t-max", value_parser = parse_nonnegative)]
    t_max: f64,
    /// Grid spacing
    #[arg(long = "t-step", default_value_t = 1.0, value_parser = parse_positive)]
    t_step: f64,
}

#[derive(Args, Debug)]
struct TruncationOpts {
    /// Retain exactly this many signature terms
    #[arg(long, conflicts_with = "eps")]
    terms: Option<usize>,
    /// Retain terms until the discarded signature mass is at most this
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TopologyOpt {
    Parallel2,
    Paralleln,
    Serial2spare,
    Remark5,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum CurveFormat {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TextFormat {
    Table,
    Json,
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() || v <= 0.0 {
        return Err(format!("`{s}` must be positive and finite"));
    }
    Ok(v)
}

fn parse_nonnegative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!("`{s}` must be nonnegative and finite"));
    }
    Ok(v)
}

fn build_spec(model: &ModelOpts) -> Result<RepairableSpec, CliError> {
    let rates = Rates::new(model.lambda, model.mu)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let topology = match model.topology {
        TopologyOpt::Parallel2 => Topology::Parallel2,
        TopologyOpt::Paralleln => {
            let n = model.n.ok_or_else(|| {
                CliError::Usage("--topology paralleln requires --n".into())
            })?;
            Topology::ParallelN(n)
        }
        TopologyOpt::Serial2spare => Topology::Serial2Spare,
        TopologyOpt::Remark5 => {
            let q = model.q.ok_or_else(|| {
                CliError::Usage("--topology remark5 requires --q".into())
            })?;
            Topology::SeriesParallel { q }
        }
    };
    RepairableSpec::new(topology, rates).map_err(|e| CliError::Usage(e.to_string()))
}

fn build_truncation(opts: &TruncationOpts) -> Result<Truncation, CliError> {
    match (opts.terms, opts.eps) {
        (Some(k), _) => Truncation::by_count(k).map_err(|e| CliError::Usage(e.to_string())),
        (None, Some(eps)) => {
            Truncation::by_mass(eps).map_err(|e| CliError::Usage(e.to_string()))
        }
        (None, None) => Ok(Truncation::default()),
    }
}

fn build_config(
    model: &ModelOpts,
    grid: Option<&GridOpts>,
    truncation: &TruncationOpts,
    format: OutputFormat,
) -> Result<RunConfig, CliError> {
    Ok(RunConfig {
        spec: build_spec(model)?,
        t_max: grid.map_or(0.0, |g| g.t_max),
        t_step: grid.map_or(1.0, |g| g.t_step),
        truncation: build_truncation(truncation)?,
        format,
        reps: 0,
        seed: 0,
        threads: None,
        gap_model: GapModel::PaperIid,
    })
}

impl RunConfig {
    /// The evaluation grid t-step, 2·t-step, …, up to t-max.
    pub fn time_grid(&self) -> Vec<f64> {
        let count = (self.t_max / self.t_step + 1e-9).floor() as usize;
        (1..=count).map(|i| i as f64 * self.t_step).collect()
    }
}

/// Round half-even at four decimals, the table-mode rounding rule.
fn round_half_even_4(x: f64) -> f64 {
    (x * 1e4).round_ties_even() / 1e4
}

fn tail_warning(curve: &ReliabilityCurve) -> Option<String> {
    if curve.tail_mass() > TAIL_MASS_WARNING {
        Some(format!(
            "discarded signature mass {:.6} exceeds {TAIL_MASS_WARNING}; R(t) is understated by up to that amount",
            curve.tail_mass()
        ))
    } else {
        None
    }
}

/// Two-column (t, reliability) blocks, side by side like the published
/// tables: the first half of the grid on the left, the rest on the right.
pub fn cmd_table(cfg: &RunConfig) -> Result<CmdOutput, CliError> {
    let grid = cfg.time_grid();
    let curve = reliability_curve(&cfg.spec, &grid, &cfg.truncation)?;
    let rows: Vec<(f64, f64)> = curve.iter().collect();
    let mut text = String::new();
    if rows.is_empty() {
        text.push_str(&format!("{:>8}  {:>11}\n", "t", "reliability"));
    } else {
        let half = rows.len().div_ceil(2);
        if rows.len() > half {
            text.push_str(&format!(
                "{:>8}  {:>11}  {:>8}  {:>11}\n",
                "t", "reliability", "t", "reliability"
            ));
        } else {
            text.push_str(&format!("{:>8}  {:>11}\n", "t", "reliability"));
        }
        for i in 0..half {
            let (t, v) = rows[i];
            text.push_str(&format!(
                "{:>8}  {:>11.4}",
                t,
                round_half_even_4(v)
            ));
            if let Some(&(t2, v2)) = rows.get(half + i) {
                text.push_str(&format!(
                    "  {:>8}  {:>11.4}",
                    t2,
                    round_half_even_4(v2)
                ));
            }
            text.push('\n');
        }
    }
    let mut out = CmdOutput::new(text);
    out.warnings.extend(tail_warning(&curve));
    Ok(out)
}

#[derive(Serialize)]
struct CurveJson<'a> {
    topology: &'a str,
    lambda: f64,
    mu: f64,
    terms: usize,
    tail_mass: f64,
    grid: &'a [f64],
    values: &'a [f64],
}

/// Full-precision curve export: CSV with header `t,reliability`, or a single
/// JSON object with keys topology, lambda, mu, terms, tail_mass, grid, values.
pub fn cmd_curve(cfg: &RunConfig) -> Result<CmdOutput, CliError> {
    let grid = cfg.time_grid();
    let curve = reliability_curve(&cfg.spec, &grid, &cfg.truncation)?;
    let text = match cfg.format {
        OutputFormat::Csv => {
            let mut text = String::from("t,reliability\n");
            for (t, v) in curve.iter() {
                text.push_str(&format!("{t},{v}\n"));
            }
            text
        }
        OutputFormat::Json => {
            let payload = CurveJson {
                topology: cfg.spec.topology().name(),
                lambda: cfg.spec.rates().lambda(),
                mu: cfg.spec.rates().mu(),
                terms: curve.retained_terms(),
                tail_mass: curve.tail_mass(),
                grid: curve.grid(),
                values: curve.values(),
            };
            let mut text = serde_json::to_string(&payload)
                .expect("curve serialization cannot fail");
            text.push('\n');
            text
        }
        OutputFormat::Table => {
            return Err(CliError::Usage(
                "curve output must be csv or json".into(),
            ))
        }
    };
    let mut out = CmdOutput::new(text);
    out.warnings.extend(tail_warning(&curve));
    Ok(out)
}

#[derive(Serialize)]
struct SignatureTermJson {
    index: usize,
    mass: f64,
}

#[derive(Serialize)]
struct TailJson {
    coefficient: f64,
    ratio: f64,
    start: usize,
}

#[derive(Serialize)]
struct SignatureJson<'a> {
    topology: &'a str,
    xi: f64,
    terms: Vec<SignatureTermJson>,
    tail: TailJson,
    tail_mass: f64,
}

/// Retained signature terms plus the descriptor of everything past them:
/// the first discarded index, the mass there, and the geometric ratio.
pub fn cmd_signature(cfg: &RunConfig) -> Result<CmdOutput, CliError> {
    let signature = cfg.spec.signature()?;
    let retained = signature.truncate(&cfg.truncation)?;
    let start = retained.max_index() + 1;
    let coefficient = signature.term(start);
    let ratio = signature.tail_ratio();

    let text = match cfg.format {
        OutputFormat::Json => {
            let payload = SignatureJson {
                topology: cfg.spec.topology().name(),
                xi: cfg.spec.xi(),
                terms: retained
                    .terms
                    .iter()
                    .map(|&(index, mass)| SignatureTermJson { index, mass })
                    .collect(),
                tail: TailJson {
                    coefficient,
                    ratio,
                    start,
                },
                tail_mass: retained.tail_mass,
            };
            let mut text = serde_json::to_string(&payload)
                .expect("signature serialization cannot fail");
            text.push('\n');
            text
        }
        _ => {
            let mut text = format!(
                "topology {}  xi {:.6}\n",
                cfg.spec.topology().name(),
                cfg.spec.xi()
            );
            for &(index, mass) in &retained.terms {
                text.push_str(&format!("s_{index} = {:.4}\n", round_half_even_4(mass)));
            }
            text.push_str(&format!(
                "tail mass {:.4}  (coefficient {:.6}, ratio {:.6}, start {})\n",
                round_half_even_4(retained.tail_mass),
                coefficient,
                ratio,
                start
            ));
            text
        }
    };
    Ok(CmdOutput::new(text))
}

/// Runs the Monte Carlo diagnostic and renders the comparison report.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<CmdOutput, CliError> {
    if cfg.spec.topology() != Topology::Parallel2 {
        return Err(CliError::Usage(
            "simulate supports only the parallel2 topology".into(),
        ));
    }
    let sim_cfg = SimConfig::new(
        cfg.spec.rates(),
        cfg.reps,
        cfg.seed,
        cfg.time_grid(),
    )?
    .with_gap_model(cfg.gap_model);
    let truncation = cfg.truncation;
    let report = with_thread_pool(cfg.threads, || compare_analytic(&sim_cfg, &truncation))??;
    let text = match cfg.format {
        OutputFormat::Json => {
            let mut text =
                serde_json::to_string(&report).expect("report serialization cannot fail");
            text.push('\n');
            text
        }
        _ => report.to_string(),
    };
    Ok(CmdOutput::new(text))
}

#[cfg(feature = "parallel")]
fn with_thread_pool<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn with_thread_pool<T>(threads: Option<usize>, f: impl FnOnce() -> T) -> Result<T, CliError> {
    // Sequential build: the knob is accepted and ignored, results are
    // identical by the determinism contract.
    match threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        _ => Ok(f()),
    }
}

fn execute(cli: Cli) -> Result<CmdOutput, CliError> {
    match &cli.command {
        Command::Table {
            model,
            grid,
            truncation,
        } => {
            let cfg = build_config(model, Some(grid), truncation, OutputFormat::Table)?;
            cmd_table(&cfg)
        }
        Command::Curve {
            model,
            grid,
            truncation,
            format,
        } => {
            let format = match format {
                CurveFormat::Csv => OutputFormat::Csv,
                CurveFormat::Json => OutputFormat::Json,
            };
            let cfg = build_config(model, Some(grid), truncation, format)?;
            cmd_curve(&cfg)
        }
        Command::Signature {
            model,
            truncation,
            format,
        } => {
            let format = match format {
                TextFormat::Table => OutputFormat::Table,
                TextFormat::Json => OutputFormat::Json,
            };
            let cfg = build_config(model, None, truncation, format)?;
            cmd_signature(&cfg)
        }
        Command::Simulate {
            model,
            grid,
            truncation,
            format,
            reps,
            seed,
            threads,
            racing_first_gap,
        } => {
            let format = match format {
                TextFormat::Table => OutputFormat::Table,
                TextFormat::Json => OutputFormat::Json,
            };
            let mut cfg = build_config(model, Some(grid), truncation, format)?;
            cfg.reps = *reps;
            cfg.seed = *seed;
            cfg.threads = *threads;
            cfg.gap_model = if *racing_first_gap {
                GapModel::RacingFirstGap
            } else {
                GapModel::PaperIid
            };
            cmd_simulate(&cfg)
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            for warning in &out.warnings {
                eprintln!("warning: {warning}");
            }
            0
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}
