mod bench;
mod commands;
mod continuous_cmd;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use input::CliError;

/// Exact-arithmetic toolkit for perpetual bamboo trimming schedules.
#[derive(Debug, Parser)]
#[command(name = "bamboo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write an instance JSON document.
    Gen(GenArgs),
    /// Run an online strategy and report heights.
    #[command(visible_alias = "run")]
    Simulate(SimulateArgs),
    /// Build an approximate cyclic schedule.
    Approx(ApproxArgs),
    /// Exact optimum and Pinwheel feasibility for small instances.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
    /// Walks on a metric.
    Continuous {
        #[command(subcommand)]
        command: ContinuousCommand,
    },
    /// Evaluate a schedule file against an instance.
    Verify(VerifyArgs),
    /// Deterministic CSV experiment sweeps.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct OracleOpts {
    /// Configuration budget; overrides BAMBOO_ORACLE_BUDGET.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(subcommand)]
    family: GenFamily,
    /// Output path (stdout when absent).
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum GenFamily {
    /// Random integer weights, normalized to sum 1.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_weight: u64,
        /// Plant this largest rate.
        #[arg(long)]
        head: Option<String>,
    },
    /// `n` equal rates `1/n`.
    Uniform {
        #[arg(long)]
        n: usize,
    },
    /// Reduce-Max lower-bound family with parameter `k`.
    Rm127 {
        #[arg(long)]
        k: u64,
    },
    /// Reduce-Fastest lower-bound instance for threshold `x`.
    Rf {
        #[arg(long)]
        x: String,
        #[arg(long, default_value = "1/16")]
        eps: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Strategy {
    ReduceMax,
    ReduceFastest,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Rm127,
    Rf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Instance file; omit when using --family.
    instance: Option<PathBuf>,
    #[arg(long, value_enum)]
    strategy: Strategy,
    /// Reduce-Fastest threshold.
    #[arg(long)]
    x: Option<String>,
    /// Compare heights against `x * H` instead of `x`.
    #[arg(long)]
    scale_by_h: bool,
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long, default_value = "1/16")]
    eps: String,
    /// Rounds to simulate.
    #[arg(long)]
    horizon: Option<u64>,
    /// Write per-round CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    oracle_compare: bool,
    #[arg(long, default_value_t = 8)]
    oracle_limit: usize,
    #[command(flatten)]
    oracle: OracleOpts,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ApproxAlgo {
    Main,
    Two,
    D34,
    Eightfifths,
}

#[derive(Debug, Args)]
struct ApproxArgs {
    #[arg(value_enum)]
    algorithm: ApproxAlgo,
    instance: PathBuf,
    /// Exit 1 unless the realized heights meet the proved bound.
    #[arg(long)]
    verify: bool,
    /// Split threshold for eightfifths.
    #[arg(long)]
    m: Option<String>,
    /// Rounds of the eightfifths stream to print.
    #[arg(long, default_value_t = 64)]
    prefix: usize,
    /// Write the schedule file here.
    #[arg(long)]
    schedule_out: Option<PathBuf>,
    #[arg(long)]
    oracle_compare: bool,
    #[arg(long, default_value_t = 8)]
    oracle_limit: usize,
    #[command(flatten)]
    oracle: OracleOpts,
}

#[derive(Debug, Subcommand)]
enum OracleCommand {
    /// Print the optimal height.
    Opt {
        instance: PathBuf,
        #[arg(long)]
        schedule_out: Option<PathBuf>,
        #[command(flatten)]
        oracle: OracleOpts,
    },
    /// Decide whether the frequencies admit a Pinwheel schedule.
    Pinwheel {
        #[arg(required = true)]
        freqs: Vec<u64>,
        #[arg(long)]
        schedule_out: Option<PathBuf>,
        #[command(flatten)]
        oracle: OracleOpts,
    },
}

#[derive(Debug, Subcommand)]
enum ContinuousCommand {
    /// Run Algorithm 1, 2 or 3.
    Run {
        instance: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        algo: u8,
        /// Time horizon; without it the walk runs until its state repeats and
        /// the report covers the infinite periodic walk.
        #[arg(long)]
        horizon: Option<String>,
        #[arg(long, default_value_t = 1_000_000)]
        max_iterations: usize,
        /// Write the walk as CSV (step, point, time).
        #[arg(long)]
        walk_out: Option<PathBuf>,
        #[arg(long)]
        verify: bool,
    },
    /// Lower bounds on the optimal height.
    Lb {
        instance: PathBuf,
        /// Also search all subsets (n <= 20).
        #[arg(long)]
        exhaustive: bool,
    },
    /// Write a metric instance.
    Gen {
        #[command(subcommand)]
        family: MetricFamily,
        #[arg(long, short, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum MetricFamily {
    /// Points on an Archimedean spiral; `n` a power of 8.
    Spiral {
        #[arg(long)]
        n: usize,
    },
    /// Two clusters on a line, far ends `d` apart; `n` a power of two.
    Clusters {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "1")]
        d: String,
    },
    /// Random points on a grid with Manhattan distances.
    Grid {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        side: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Random points on a line.
    Line {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct VerifyArgs {
    instance: PathBuf,
    schedule: PathBuf,
    /// Exit 1 if the global maximum exceeds this.
    #[arg(long)]
    bound: Option<String>,
    /// Exit 1 unless the global maximum equals this.
    #[arg(long)]
    expect_max: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BenchSuite {
    Main,
    Two,
    Eightfifths,
    ReduceMax,
    ReduceFastest,
    Spiral,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(value_enum)]
    suite: BenchSuite,
    #[arg(long)]
    seed: Option<u64>,
    /// Planted `h_1/H` values.
    #[arg(long, value_delimiter = ',', default_value = "1/4,1/16,1/64")]
    heads: Vec<String>,
    /// Instances per head.
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Instance size; raised where a head needs more bamboos.
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Reduce-Fastest thresholds.
    #[arg(long, value_delimiter = ',', default_value = "1/2,1,3/2,2,3")]
    xs: Vec<String>,
    #[arg(long, default_value = "1/16")]
    eps: String,
    /// Reduce-Max family parameters.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20")]
    ks: Vec<u64>,
    /// Spiral sizes.
    #[arg(long, value_delimiter = ',', default_value = "512")]
    ns: Vec<usize>,
    #[arg(long)]
    oracle_compare: bool,
    #[arg(long, default_value_t = 8)]
    oracle_limit: usize,
    #[command(flatten)]
    oracle: OracleOpts,
    /// CSV path (stdout when absent).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Approx(a) => commands::approx(a),
        Command::Oracle { command } => commands::oracle(command),
        Command::Continuous { command } => continuous_cmd::run(command),
        Command::Verify(a) => commands::verify(a),
        Command::Bench(a) => bench::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
