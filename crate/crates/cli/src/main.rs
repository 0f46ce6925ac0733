mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use harper_core::operator::{BoundaryCondition, OperatorKind};
use harper_core::par::{self, Execution};
use harper_core::spectral::DEFAULT_TOL;

use config::{parse_grid, parse_range, BoxKind, BoxSpec, CommandParams, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

/// Spectral density functions of magnetic Laplacians on periodic graphs.
#[derive(Parser, Debug)]
#[command(name = "harper", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// `zd:<d>` or a JSON graph descriptor.
    #[arg(long, global = true, default_value = "zd:2")]
    graph: String,
    /// Landau flux θ as a fraction p/q (0 for the trivial weight).
    #[arg(long, global = true, default_value = "0")]
    flux: String,
    #[arg(long, global = true, default_value = "neumann")]
    bc: BoundaryCondition,
    /// Cube sides `a..b[..s]`: X_m = [0, s)ᵈ.
    #[arg(long, global = true)]
    boxes: Option<String>,
    /// Centered box radii `a..b[..s]`: X_m = [−r, r]ᵈ.
    #[arg(long, global = true, conflicts_with = "boxes")]
    radii: Option<String>,
    /// λ grid `lo:hi:step` (default 0:K²:0.05).
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Relative eigenvalue tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Use the exact cyclotomic routes where a command has one.
    #[arg(long, global = true)]
    exact: bool,
    /// Output directory; artifacts go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (1 runs everything sequentially).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// F_m(λ) for every box on the λ grid.
    Density,
    /// One density column per flux p/q, q ≤ q_max, at the largest box.
    Butterfly {
        #[arg(long, default_value_t = 5)]
        q_max: i64,
    },
    /// Intervals where the counting functions stop growing.
    Gaps {
        #[arg(long, default_value_t = harper_core::invariants::DEFAULT_ETA_GAP)]
        eta: f64,
    },
    /// Fuglede–Kadison log-determinant of Δ_σ − μ.
    Fkdet {
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        mu: String,
        /// Upper integration limit L > ‖Δ − μ‖.
        #[arg(long)]
        upper: Option<f64>,
    },
    /// Exact von Neumann traces of operator powers, k = 0..K.
    Moments {
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value = "harper")]
        operator: OperatorKind,
    },
    /// Exact check of the lower bound for |q_{m,λ}(0)|.
    VerifyAlgebraic {
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        lambda: String,
    },
    /// Boundary ratios, kernel dimensions and operator bounds.
    Report,
    /// Restricted matrices as column-major complex doubles plus JSON headers.
    ExportMatrix {
        #[arg(long, default_value = "dml")]
        operator: OperatorKind,
    },
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let g = &cli.global;
    let boxes = match (&g.boxes, &g.radii) {
        (Some(s), _) => Some(BoxSpec { kind: BoxKind::Cubes, values: parse_range(s)? }),
        (None, Some(s)) => Some(BoxSpec { kind: BoxKind::Radii, values: parse_range(s)? }),
        (None, None) => None,
    };
    if !(g.tol > 0.0 && g.tol < 1.0) {
        return Err(CliError::Config(format!("--tol must lie in (0, 1), got {}", g.tol)));
    }
    let params = match &cli.command {
        Command::Density => CommandParams::Density,
        Command::Butterfly { q_max } => CommandParams::Butterfly { q_max: *q_max },
        Command::Gaps { eta } => CommandParams::Gaps { eta: *eta },
        Command::Fkdet { mu, upper } => CommandParams::Fkdet { mu: mu.clone(), upper: *upper },
        Command::Moments { k, operator } => CommandParams::Moments { k: *k, operator: *operator },
        Command::VerifyAlgebraic { lambda } => CommandParams::VerifyAlgebraic { lambda: lambda.clone() },
        Command::Report => CommandParams::Report,
        Command::ExportMatrix { operator } => CommandParams::ExportMatrix { operator: *operator },
    };
    Ok(RunConfig {
        graph: g.graph.clone(),
        flux: g.flux.clone(),
        bc: g.bc,
        boxes,
        grid: g.grid.as_deref().map(parse_grid).transpose()?,
        tol: g.tol,
        exact: g.exact,
        params,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = build_config(&cli)?;
    let exec = match cli.global.threads {
        Some(0) => return Err(CliError::Config("--threads must be positive".into())),
        Some(1) => Execution::Sequential,
        Some(n) => {
            par::set_threads(n).map_err(CliError::Config)?;
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    let sink = output::Sink::new(cli.global.out.clone())?;
    commands::dispatch(&config, exec, &sink)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("harper: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
