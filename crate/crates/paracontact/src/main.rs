use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use paracontact::{
    load_model, render_json, render_text, run_verify, tensor_query, ModelSource, Tolerances,
};
use paracontact_core::verify::SuiteConfig;

/// Curvature engine and claim verifier for almost paracontact metric manifolds.
#[derive(Debug, Parser)]
#[command(name = "paracontact", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the identity and theorem suite on a model.
    Verify(VerifyArgs),
    /// Print the components of one tensor at a point.
    Tensor(TensorArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Built-in model name (example25, flat3).
    #[arg(long)]
    builtin: Option<String>,
    /// Path to a model file.
    #[arg(long)]
    model: Option<PathBuf>,
}

impl SourceArgs {
    fn source(&self) -> ModelSource {
        match (&self.builtin, &self.model) {
            (Some(name), _) => ModelSource::Builtin(name.clone()),
            (None, Some(path)) => ModelSource::Path(path.clone()),
            (None, None) => unreachable!("clap enforces one model source"),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Number of sample points.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    points: u64,
    /// Seed of the sampling generator.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Tolerance of algebraic identities.
    #[arg(long)]
    tol_algebraic: Option<f64>,
    /// Tolerance of first-derivative identities.
    #[arg(long)]
    tol_first_order: Option<f64>,
    /// Tolerance of curvature identities and theorems.
    #[arg(long)]
    tol_curvature: Option<f64>,
    /// Tolerance of the finite-difference Riemann oracle.
    #[arg(long)]
    tol_fd: Option<f64>,
}

#[derive(Debug, Args)]
struct TensorArgs {
    /// One of g, phi, gamma, riemann, ricci, scal, P, C, concircular, Ptilde, Pbar, B, alphabeta.
    name: String,
    #[command(flatten)]
    source: SourceArgs,
    /// Comma-separated coordinates, e.g. 0,0,0.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    at: Vec<f64>,
}

fn verify(args: &VerifyArgs) -> ExitCode {
    let spec = match load_model(&args.source.source()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let defaults = Tolerances::default();
    let config = SuiteConfig {
        points: args.points as usize,
        seed: args.seed,
        tolerances: Tolerances {
            algebraic: args.tol_algebraic.unwrap_or(defaults.algebraic),
            first_order: args.tol_first_order.unwrap_or(defaults.first_order),
            curvature: args.tol_curvature.unwrap_or(defaults.curvature),
            fd: args.tol_fd.unwrap_or(defaults.fd),
        },
    };
    match run_verify(&spec, &config) {
        Ok(report) => {
            let text = match args.format {
                Format::Text => render_text(&report),
                Format::Json => render_json(&report),
            };
            print!("{text}");
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn tensor(args: &TensorArgs) -> ExitCode {
    let result = load_model(&args.source.source())
        .and_then(|spec| tensor_query(&spec, &args.name, &args.at));
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Verify(args) => verify(args),
        Command::Tensor(args) => tensor(args),
    }
}
