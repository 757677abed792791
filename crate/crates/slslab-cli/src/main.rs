//! Command-line surface over the controller analytics, the simulation
//! engine, and the frontier search. Every run that writes data files also
//! writes a manifest from which `replay` reproduces them bit-identically.

mod commands;
mod config;
mod manifest;
mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use slslab_core::SlsError;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, parameters, or files: exit 2.
    Usage(String),
    /// No candidate meets the optimization target: exit 3.
    Infeasible(String),
    /// Internal consistency violation: exit 4.
    Internal(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Infeasible(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<SlsError> for CliError {
    fn from(e: SlsError) -> Self {
        match e {
            SlsError::InternalConsistency(_) => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "slslab",
    version,
    about = "Coupled long-short trading controllers: exact gain analytics, seeded simulation, and risk-return frontier search"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Expected terminal gain of one design, by closed form or matrix accumulation
    Expect(ExpectArgs),
    /// Random-search risk-return frontier for both controller families
    Frontier(FrontierArgs),
    /// Multi-path simulation under lognormal prices, optionally leverage-capped
    Simulate(SimulateArgs),
    /// One trend-following path driven by the saturated-linear rule
    TrendDemo(TrendArgs),
    /// Re-run a recorded manifest, reproducing its data files
    Replay(ReplayArgs),
}

#[derive(Args)]
struct ExpectArgs {
    /// Initial investment on stock 1
    #[arg(long)]
    i01: Option<String>,
    /// Initial investment on stock 2
    #[arg(long)]
    i02: Option<String>,
    /// Feedback gain on stock 1
    #[arg(long)]
    k1: Option<String>,
    /// Feedback gain on stock 2
    #[arg(long)]
    k2: Option<String>,
    /// Cross-coupling, inside (-1, 1)
    #[arg(long)]
    delta: Option<String>,
    /// Expected per-stage return of stock 1
    #[arg(long)]
    mu1: Option<String>,
    /// Expected per-stage return of stock 2
    #[arg(long)]
    mu2: Option<String>,
    /// Number of stages
    #[arg(long)]
    n: Option<String>,
    /// Evaluation method: closed | matrix
    #[arg(long)]
    method: Option<String>,
    /// Optional result file; written with a manifest beside it
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value parameter file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct FrontierArgs {
    /// Expected per-stage return of stock 1
    #[arg(long)]
    mu1: Option<String>,
    /// Expected per-stage return of stock 2
    #[arg(long)]
    mu2: Option<String>,
    /// Per-stage return variance of stock 1
    #[arg(long)]
    var1: Option<String>,
    /// Per-stage return variance of stock 2
    #[arg(long)]
    var2: Option<String>,
    /// Per-stage return covariance
    #[arg(long)]
    cov12: Option<String>,
    /// Number of stages
    #[arg(long)]
    n: Option<String>,
    /// Number of random candidate designs
    #[arg(long)]
    candidates: Option<String>,
    /// Search seed
    #[arg(long)]
    seed: Option<String>,
    /// Expected-gain floor for the minimum-risk selection
    #[arg(long)]
    g_target: Option<String>,
    /// Directory for the frontier CSVs, selection.json, and manifest.json
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// key=value parameter file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Design vector as I01,I02,K1,K2,DELTA
    #[arg(long)]
    params: Option<String>,
    /// Price model as M1,S1,M2,S2 (per-stage log-drift and log-volatility)
    #[arg(long)]
    gbm: Option<String>,
    /// Number of stages
    #[arg(long)]
    n: Option<String>,
    /// Number of simulated paths
    #[arg(long)]
    paths: Option<String>,
    /// Simulation seed
    #[arg(long)]
    seed: Option<String>,
    /// Initial account value
    #[arg(long)]
    v0: Option<String>,
    /// Maximum allowed leverage; omit to run unsaturated
    #[arg(long)]
    leverage_cap: Option<String>,
    /// Optional report file; written with a manifest beside it
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value parameter file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TrendArgs {
    /// Number of trading stages
    #[arg(long)]
    stages: Option<String>,
    /// Trend window length
    #[arg(long)]
    window: Option<String>,
    /// Slope of the investment rule
    #[arg(long)]
    slope: Option<String>,
    /// Saturation level of the investment rule
    #[arg(long)]
    isat: Option<String>,
    /// Path seed
    #[arg(long)]
    seed: Option<String>,
    /// Per-stage CSV trace file
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value parameter file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Manifest written by a previous run
    #[arg(long)]
    manifest: PathBuf,
    /// Redirect the reproduced files into this directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn path_arg(p: Option<PathBuf>) -> Option<String> {
    p.map(|p| p.display().to_string())
}

fn run(cli: Cli, started: Instant) -> Result<(), CliError> {
    match cli.command {
        Cmd::Expect(a) => {
            let map = config::resolve(
                commands::EXPECT_KEYS,
                a.config.as_deref(),
                &[
                    ("i01", a.i01),
                    ("i02", a.i02),
                    ("k1", a.k1),
                    ("k2", a.k2),
                    ("delta", a.delta),
                    ("mu1", a.mu1),
                    ("mu2", a.mu2),
                    ("n", a.n),
                    ("method", a.method),
                    ("out", path_arg(a.out)),
                ],
            )?;
            commands::execute_expect(&map, None, started)
        }
        Cmd::Frontier(a) => {
            let map = config::resolve(
                commands::FRONTIER_KEYS,
                a.config.as_deref(),
                &[
                    ("mu1", a.mu1),
                    ("mu2", a.mu2),
                    ("var1", a.var1),
                    ("var2", a.var2),
                    ("cov12", a.cov12),
                    ("n", a.n),
                    ("candidates", a.candidates),
                    ("seed", a.seed),
                    ("g-target", a.g_target),
                    ("out-dir", path_arg(a.out_dir)),
                ],
            )?;
            commands::execute_frontier(&map, None, started)
        }
        Cmd::Simulate(a) => {
            let map = config::resolve(
                commands::SIMULATE_KEYS,
                a.config.as_deref(),
                &[
                    ("params", a.params),
                    ("gbm", a.gbm),
                    ("n", a.n),
                    ("paths", a.paths),
                    ("seed", a.seed),
                    ("v0", a.v0),
                    ("leverage-cap", a.leverage_cap),
                    ("out", path_arg(a.out)),
                ],
            )?;
            commands::execute_simulate(&map, None, started)
        }
        Cmd::TrendDemo(a) => {
            let map = config::resolve(
                commands::TREND_KEYS,
                a.config.as_deref(),
                &[
                    ("stages", a.stages),
                    ("window", a.window),
                    ("slope", a.slope),
                    ("isat", a.isat),
                    ("seed", a.seed),
                    ("out", path_arg(a.out)),
                ],
            )?;
            commands::execute_trend_demo(&map, None, started)
        }
        Cmd::Replay(a) => commands::execute_replay(&a.manifest, a.out_dir.as_deref(), started),
    }
}

/// SLSLAB_THREADS caps the worker pool; it can only change wall time, never
/// results.
fn init_worker_pool() -> Result<(), CliError> {
    match std::env::var("SLSLAB_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(e) => Err(CliError::Usage(format!("SLSLAB_THREADS: {e}"))),
        Ok(v) => {
            let n: usize = v.trim().parse().map_err(|_| {
                CliError::Usage(format!("SLSLAB_THREADS must be a positive integer, got `{v}`"))
            })?;
            if n == 0 {
                return Err(CliError::Usage("SLSLAB_THREADS must be at least 1".to_string()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Internal(format!("worker pool setup failed: {e}")))
        }
    }
}

fn main() {
    let started = Instant::now();
    let result = init_worker_pool().and_then(|()| run(Cli::parse(), started));
    if let Err(e) = result {
        eprintln!("error: {}", e.message());
        std::process::exit(e.code());
    }
}
