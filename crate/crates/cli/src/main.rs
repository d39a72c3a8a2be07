use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod doc;
mod run;

#[derive(Parser, Debug)]
#[command(name = "saddlenode", version, about = "Moduli and normal forms of saddle-node vector fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Orbital and temporal moduli of a field document
    Modulus(Job),
    /// Closed-form period coefficients of x^m y^n on the formal model
    ModelCoeffs(ModelArgs),
    /// Orbital normal form realizing the "orbital" table of a modulus document
    NormalForm(Job),
    /// Full normal form realizing both tables of a modulus document
    TemporalForm(Job),
    /// Integrability-by-quadrature test of the "orbital" table
    Integrability(Job),
    /// Normal form whose holonomy is a given diffeomorphism germ (k = 1)
    Holonomy(Job),
    /// Realize the "orbital" table, recompute the modulus, report residuals
    Roundtrip(Job),
}

#[derive(Args, Debug, Clone)]
pub struct Job {
    #[arg(long)]
    pub input: PathBuf,
    /// Write the result here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Highest order D; defaults to the length of the input tables (4 for `modulus`)
    #[arg(long)]
    pub degree: Option<usize>,
    #[command(flatten)]
    pub numerics: NumericArgs,
    /// Acceptance threshold for `integrability` and `roundtrip`
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct NumericArgs {
    /// Modulus of the base points
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Arc-length step of the integrator
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long, default_value_t = 0.1)]
    pub circle_radius: f64,
    #[arg(long, default_value_t = 1000)]
    pub circle_points: usize,
    /// Inner radius where the node rays stop
    #[arg(long, default_value_t = 1e-3)]
    pub eps_min: f64,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(short, long)]
    pub k: u32,
    /// μ as two numbers: real and imaginary part
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true)]
    pub mu: Vec<f64>,
    #[arg(short, long)]
    pub m: u32,
    #[arg(short, long)]
    pub n: u32,
    /// Single sector; all sectors when omitted
    #[arg(short, long)]
    pub j: Option<i64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Exit 2 for bad input, 3 when the numerics fail.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Numeric(String),
}

impl From<saddlenode::Error> for Failure {
    fn from(e: saddlenode::Error) -> Self {
        if e.is_numeric() {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
