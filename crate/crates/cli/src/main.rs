mod commands;
mod grid;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lasso_spectra::{Error, Problem};

use crate::grid::GridArg;

#[derive(Parser, Debug)]
#[command(name = "lasso-spectra", version, about = "Spectra of Sturm-Liouville operators on lasso graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a characteristic function on a grid.
    Charfn(CharfnArgs),
    /// Compute and catalog eigenvalues up to rho_max.
    Eigs(EigsArgs),
    /// Rebuild a characteristic function from a spectrum catalog.
    Reconstruct(ReconstructArgs),
    /// Run the invariant checks on a graph and report pass/fail.
    Verify(VerifyArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ProblemKind {
    #[value(name = "L")]
    L,
    #[value(name = "Lj")]
    Lj,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct ProblemArgs {
    #[arg(long, value_enum, default_value = "L")]
    problem: ProblemKind,
    /// Pendant index for `--problem Lj`.
    #[arg(long, default_value_t = 1)]
    j: usize,
}

impl ProblemArgs {
    fn problem(&self) -> Problem {
        match self.problem {
            ProblemKind::L => Problem::L,
            ProblemKind::Lj => Problem::Lj(self.j),
        }
    }
}

#[derive(Args, Debug)]
struct CharfnArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    problem: ProblemArgs,
    /// Grid in rho = sqrt(lambda), as start:stop:step.
    #[arg(long, conflicts_with = "lambda", required_unless_present = "lambda")]
    rho: Option<GridArg>,
    /// Grid in lambda, as start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<GridArg>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug)]
struct EigsArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    rho_max: f64,
    /// Catalog destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the asymptotic frame as JSON.
    #[arg(long)]
    frame_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    /// Catalog CSV as written by `eigs`.
    #[arg(long)]
    spectra: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    n_max: i64,
    #[arg(long, allow_hyphen_values = true, default_value = "-5:9:0.07")]
    lambda: GridArg,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the summary JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    config: PathBuf,
    /// Range of the eigenvalue checks; defaults to ten periods.
    #[arg(long)]
    rho_max: Option<f64>,
    #[arg(long, default_value_t = 100)]
    n_max: i64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Process exit status for a library error.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::IrrationalLength { .. }
        | Error::NonPositiveLength { .. }
        | Error::BadBreakpoints { .. }
        | Error::NonFinitePotential { .. }
        | Error::NoPendantEdge
        | Error::BadTopology(_)
        | Error::BadUnit(_)
        | Error::Config(_)
        | Error::BadIndex { .. }
        | Error::Io(_) => 2,
        Error::AssignmentAmbiguity(_) | Error::InsufficientCatalog { .. } => 4,
        _ => 3,
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var("LASSO_SPECTRA_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("LASSO_SPECTRA_THREADS={value:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|()| match cli.command {
        Command::Charfn(args) => commands::charfn(&args).map(|()| true),
        Command::Eigs(args) => commands::eigs(&args).map(|()| true),
        Command::Reconstruct(args) => commands::reconstruct(&args).map(|()| true),
        Command::Verify(args) => verify::run(&args),
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
