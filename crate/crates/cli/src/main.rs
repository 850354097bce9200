//! `coreset-forge` command line.
//!
//! Exit status: 0 when every configured criterion passes, 2 when a criterion
//! fails, 1 on operational errors (bad input, I/O, invalid parameters).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "coreset-forge", version, about = "Build and audit coresets for (k,z)-clustering")]
pub struct Cli {
    /// Master seed; overrides the config file. For `lb-gen` it seeds generators
    /// whose spec has no `seed=`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "CORESET_FORGE_THREADS")]
    pub threads: Option<usize>,
    /// Write the full JSON result here.
    #[arg(long, global = true, value_name = "FILE")]
    pub json_out: Option<PathBuf>,
    /// Run configuration (JSON); command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct SourceArgs {
    /// Point file (.csv, or .bin/.csps for the binary format).
    #[arg(long, conflicts_with = "generate")]
    pub input: Option<PathBuf>,
    /// Generator spec, e.g. "mixture n=2000 d=2 k=5" or "basis k=2 eps=1/12".
    #[arg(long)]
    pub generate: Option<String>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ProblemArgs {
    #[arg(short, long)]
    pub k: Option<usize>,
    #[arg(short, long)]
    pub z: Option<u32>,
    /// Accuracy parameter; fractions such as 1/12 are accepted.
    #[arg(long, value_parser = parse_fraction)]
    pub eps: Option<f64>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct AuditArgs {
    /// Audit suites as `name=count` pairs, e.g. "random_box=50,dz_seeded=20".
    #[arg(long)]
    pub suites: Option<String>,
    /// Distortion threshold for the pass criterion (defaults to eps).
    #[arg(long)]
    pub max_distortion: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a coreset, audit it and write the artifacts.
    Build {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        audit: AuditArgs,
        /// Draws per group; defaults to the size formula.
        #[arg(long)]
        delta: Option<usize>,
        #[arg(long)]
        c_delta: Option<f64>,
        /// Include the min(eps^-z, k) factor in the default draw count.
        #[arg(long)]
        min_factor: bool,
        /// Random projection target dimension, or "auto".
        #[arg(long)]
        project: Option<String>,
        /// Reduce to this many draws first when the input has more distinct points.
        #[arg(long)]
        precoreset: Option<usize>,
        /// Do not require the total coreset weight to match the input mass.
        #[arg(long)]
        no_weight_check: bool,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Audit an existing coreset against its input.
    Eval {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        coreset: PathBuf,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        audit: AuditArgs,
        /// Extra solutions to audit (CSV: solution,x1..xd).
        #[arg(long)]
        solutions: Option<PathBuf>,
        /// Per-solution rows as CSV.
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Emit a lower-bound or synthetic instance.
    LbGen {
        /// Generator spec: basis, mixture, subinstance or star.
        spec: String,
        #[arg(long)]
        out: PathBuf,
        /// Also write the associated solutions (Hadamard family or planted centers).
        #[arg(long)]
        solutions: Option<PathBuf>,
    },
    /// Seeding and local search only.
    Approx {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Number of local-search sweeps after seeding.
        #[arg(long, default_value_t = 0)]
        sweeps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo experiments.
    Mc {
        #[command(subcommand)]
        experiment: McCommand,
    },
    /// Dump the ring and group catalog of an instance.
    Inspect {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Draws per group used for the reported sample size.
        #[arg(long)]
        delta: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum McCommand {
    /// Tail probability of a sampled weighted sum exceeding its mean.
    Tail {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.25, value_parser = parse_fraction)]
        p: f64,
        #[arg(long, value_parser = parse_fraction)]
        eps: f64,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        /// One weight per line; unit weights when absent.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Pass when the fitted rate is at most this.
        #[arg(long)]
        max_rate: Option<f64>,
    },
    /// Mean of the per-group estimator against the exact group cost.
    Unbiased {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 20)]
        delta: usize,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        /// Number of seeded test solutions.
        #[arg(long, default_value_t = 5)]
        solutions: usize,
        /// Skip groups with more points than this.
        #[arg(long, default_value_t = 100)]
        max_group_points: usize,
        #[arg(long, default_value_t = 0.01)]
        tolerance: f64,
    },
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    coreset_forge::experiment::parse_number(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    // usage errors are operational errors, not criterion failures
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
