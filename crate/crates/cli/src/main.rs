mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or configuration (exit 2).
    Usage(String),
    /// A check ran and failed (exit 1).
    Verification(String),
}

impl From<torus_hydro::Error> for CliError {
    fn from(e: torus_hydro::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "torus-hydro", version, about = "Hydrodynamic-type analysis of polynomial integrals of geodesic flows on the 2-torus")]
pub struct Cli {
    /// Worker threads for grid scans and exact trials (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed recorded in output headers and used by randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Debug, Args)]
pub struct FieldArgs {
    #[arg(long)]
    metric: PathBuf,
    #[arg(long)]
    integral: PathBuf,
    #[arg(long, value_parser = output::parse_grid)]
    grid: Option<(usize, usize)>,
    #[arg(long, value_parser = output::parse_positive)]
    tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum IdentityKind {
    Cubic,
    Quartic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    Gauss4,
    Midpoint,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Classify the root pattern of Ĝ over the torus; writes PREFIX.pgm and PREFIX.csv.
    Classify {
        #[command(flatten)]
        fields: FieldArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Poisson-bracket residual of a candidate integral on a grid.
    VerifyBracket {
        #[command(flatten)]
        fields: FieldArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simple-wave cubic solution for a constant speed and a profile a2(ξ).
    SimpleWave {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long)]
        profile: String,
        #[arg(long, default_value_t = 256)]
        nodes: usize,
        #[arg(long, value_parser = output::parse_positive)]
        tol: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reducibility certificates: F3 = k1 F1³ + 2 k2 H F1, or F4 in terms of F2 and H.
    VerifyIdentity {
        kind: IdentityKind,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        #[arg(long)]
        profile: Option<String>,
        #[arg(long, default_value_t = 64)]
        nodes: usize,
        #[arg(long)]
        metric: Option<PathBuf>,
        /// Quadratic integral F2.
        #[arg(long)]
        integral: Option<PathBuf>,
        /// Quartic integral F4 (otherwise built from --k).
        #[arg(long)]
        quartic: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        k: Option<Vec<f64>>,
        #[arg(long, value_parser = output::parse_grid)]
        grid: Option<(usize, usize)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the geodesic flow; NDJSON trajectory and conservation report.
    Flow {
        #[arg(long)]
        metric: PathBuf,
        /// Integrals to monitor (repeatable).
        #[arg(long)]
        integral: Vec<PathBuf>,
        /// Initial state u1,u2,p1,p2.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        initial: Vec<f64>,
        #[arg(long, default_value_t = 10.0, value_parser = output::parse_positive)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3, value_parser = output::parse_positive)]
        dt: f64,
        #[arg(long, value_enum, default_value_t = SchemeArg::Gauss4)]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 10)]
        stride: usize,
        #[arg(long, value_parser = output::parse_positive)]
        tol: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact rational checks of the polynomial identities.
    ExactCheck {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Constancy of the pair invariant on elliptic components and transport of real invariants.
    EllipticCheck {
        #[command(flatten)]
        fields: FieldArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli.command, cli.seed) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
