//! `tn`: command-line front end for the tensor-network toolkit.
//!
//! Subcommands: generate, contract (exact | barvinok | positive-mc),
//! statmech (kaufman | moment), roots (analyze | ensemble), bench.
//! Machine-readable JSON or CSV goes to stdout (or `-o FILE`), a human
//! summary to stderr. Exit codes: 0 success, 2 usage, 3 budget refusal,
//! 1 other runtime failure. Every output document records the resolved
//! configuration and seed, and identical (config, seed) pairs produce
//! byte-identical outputs regardless of thread count.

mod commands;
mod emit;
mod errors;
mod opts;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use errors::CliResult;
use opts::Resolver;

#[derive(Parser)]
#[command(name = "tn", version, about = "Tensor-network contraction toolkit")]
struct Cli {
    /// JSON config file whose keys mirror this subcommand's long flags
    /// (explicit flags take precedence).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a network from a built-in ensemble and write its document.
    Generate(GenerateArgs),
    /// Contract a network document.
    #[command(subcommand)]
    Contract(ContractCmd),
    /// 2D Ising reference values.
    #[command(subcommand)]
    Statmech(StatmechCmd),
    /// Interpolation-polynomial root structure.
    #[command(subcommand)]
    Roots(RootsCmd),
    /// Time a few built-in workloads.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum ContractCmd {
    /// Exact contraction by swallowing.
    Exact(ExactArgs),
    /// Quasi-polynomial Taylor-interpolation estimate.
    Barvinok(BarvinokArgs),
    /// Additive 1-norm Monte Carlo for nonnegative networks.
    PositiveMc(PositiveMcArgs),
}

#[derive(Subcommand)]
enum StatmechCmd {
    /// Closed-form log partition function (periodic square lattice).
    Kaufman(KaufmanArgs),
    /// Second moment of the shifted-Gaussian contraction value.
    Moment(MomentArgs),
}

#[derive(Subcommand)]
enum RootsCmd {
    /// Roots, disk counts, Jensen self-check, root-free sectors.
    Analyze(AnalyzeArgs),
    /// Disk-count statistics over the random torus ensemble.
    Ensemble(EnsembleArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Graph family: torus | grid | regular.
    #[arg(long)]
    graph: Option<String>,
    /// Lattice height (torus/grid).
    #[arg(long = "L1")]
    l1: Option<usize>,
    /// Lattice width (torus/grid).
    #[arg(long = "L2")]
    l2: Option<usize>,
    /// Vertex count (regular).
    #[arg(long)]
    vertices: Option<usize>,
    /// Vertex degree (regular).
    #[arg(long)]
    degree: Option<usize>,
    /// Bond dimension.
    #[arg(long)]
    d: Option<usize>,
    /// Entry ensemble: gaussian | shifted-ones | ones.
    #[arg(long)]
    fill: Option<String>,
    /// Gaussian mean, real part.
    #[arg(long)]
    mu: Option<f64>,
    /// Gaussian mean, imaginary part.
    #[arg(long = "mu-im")]
    mu_im: Option<f64>,
    /// Shifted-ones weight (real).
    #[arg(long)]
    weight: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the document here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExactArgs {
    /// Network document to contract.
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// "greedy" or an explicit comma-separated vertex order.
    #[arg(long)]
    order: Option<String>,
    /// State/enumeration budget (entries); also via TN_BUDGET.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BarvinokArgs {
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Mean normalizer for every vertex (default: per-vertex entry average).
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long = "mu-im")]
    mu_im: Option<f64>,
    /// Strip parameter in (0, 1).
    #[arg(long)]
    rho: Option<f64>,
    /// Family endpoint scale (default: bond dimension).
    #[arg(long = "z-end")]
    z_end: Option<f64>,
    #[arg(long = "z-end-im")]
    z_end_im: Option<f64>,
    /// Taylor truncation order (default: chosen from n, eps, rho).
    #[arg(long)]
    m: Option<usize>,
    /// Target precision used when choosing m automatically.
    #[arg(long)]
    eps: Option<f64>,
    /// Also contract exactly and report per-order relative errors.
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    budget: Option<u64>,
    /// json | csv (csv: one row per order).
    #[arg(long)]
    format: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PositiveMcArgs {
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Additive precision: K = ceil(10 / eps^2) trials.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// "greedy" or an explicit comma-separated vertex order.
    #[arg(long)]
    order: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct KaufmanArgs {
    #[arg(long = "L1")]
    l1: Option<usize>,
    #[arg(long = "L2")]
    l2: Option<usize>,
    /// Coupling beta * J (default: the self-dual critical value).
    #[arg(long = "beta-j")]
    beta_j: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MomentArgs {
    #[arg(long = "L1")]
    l1: Option<usize>,
    #[arg(long = "L2")]
    l2: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Field point, real part.
    #[arg(long)]
    z: Option<f64>,
    #[arg(long = "z-im")]
    z_im: Option<f64>,
    /// Comma-separated real z sweep (one output row per point).
    #[arg(long = "sweep-z")]
    sweep_z: Option<String>,
    /// Monte Carlo sample count (omit to skip sampling).
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// json | csv.
    #[arg(long)]
    format: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Mean normalizer for every vertex (default: per-vertex entry average).
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long = "mu-im")]
    mu_im: Option<f64>,
    /// Family endpoint scale (default: bond dimension).
    #[arg(long = "z-end")]
    z_end: Option<f64>,
    #[arg(long = "z-end-im")]
    z_end_im: Option<f64>,
    /// Strip half-width parameter for the root-free sector search.
    #[arg(long)]
    lambda: Option<f64>,
    /// Comma-separated disk radii for root counts.
    #[arg(long)]
    radii: Option<String>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EnsembleArgs {
    #[arg(long = "L1")]
    l1: Option<usize>,
    #[arg(long = "L2")]
    l2: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Perturbation amplitude (1 = unit Gaussian ensemble).
    #[arg(long)]
    amplitude: Option<f64>,
    /// Small-disk radius; the large disk is 1 - lambda.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// json (aggregate) | csv (one row per sample).
    #[arg(long)]
    format: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// all | swallow | series | kaufman.
    #[arg(long)]
    suite: Option<String>,
    /// Timing repetitions per workload.
    #[arg(long)]
    repeat: Option<usize>,
    /// json | csv.
    #[arg(long)]
    format: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let resolver = Resolver::new(cli.config.as_deref())?;
    match cli.command {
        Command::Generate(args) => commands::generate(args, resolver),
        Command::Contract(ContractCmd::Exact(args)) => commands::contract_exact(args, resolver),
        Command::Contract(ContractCmd::Barvinok(args)) => {
            commands::contract_barvinok(args, resolver)
        }
        Command::Contract(ContractCmd::PositiveMc(args)) => {
            commands::contract_positive_mc(args, resolver)
        }
        Command::Statmech(StatmechCmd::Kaufman(args)) => commands::statmech_kaufman(args, resolver),
        Command::Statmech(StatmechCmd::Moment(args)) => commands::statmech_moment(args, resolver),
        Command::Roots(RootsCmd::Analyze(args)) => commands::roots_analyze(args, resolver),
        Command::Roots(RootsCmd::Ensemble(args)) => commands::roots_ensemble(args, resolver),
        Command::Bench(args) => commands::bench(args, resolver),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version print to stdout and exit 0; real parse
            // errors print usage to stderr and exit 2.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
