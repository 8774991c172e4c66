//! zinfer: fit, simulate, compare and diagnose zero-inflated count models.

mod commands;
mod csvio;
mod report;

use clap::{Args, Parser, Subcommand};
use commands::Outcome;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "zinfer",
    version,
    about = "Zero-inflated count regression: maximum likelihood for multiplicative, additive, \
             hurdle, mixture and custom inflation types"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model and write a JSON report
    Fit(FitArgs),
    /// Draw synthetic data from a specified model
    Simulate(SimulateArgs),
    /// Fit several ZI types and rank them by AIC
    Compare(CompareArgs),
    /// Emit the per-observation (pi0, pi~0) diagnostics table
    Diagnose(DiagnoseArgs),
}

/// Data ingestion options shared by fit, compare and diagnose.
#[derive(Args)]
pub struct DataArgs {
    /// Input CSV with a header row
    #[arg(long)]
    pub data: String,

    /// Name of the integer response column
    #[arg(long)]
    pub response: String,

    /// Comma-separated covariates for the location (theta) side
    #[arg(long, value_delimiter = ',')]
    pub theta_covariates: Vec<String>,

    /// Comma-separated covariates for the inflation (alpha) side
    #[arg(long, value_delimiter = ',')]
    pub alpha_covariates: Vec<String>,

    /// Base distribution: poisson or binomial:<trials>
    #[arg(long, default_value = "poisson")]
    pub base: String,

    /// Drop rows whose response exceeds this value
    #[arg(long)]
    pub drop_response_above: Option<u64>,

    /// Do not add implicit intercept columns
    #[arg(long)]
    pub no_intercept: bool,
}

#[derive(Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// ZI type: multiplicative | additive | hurdle | mixture |
    /// custom:<tau1>,<tau2> | estimate-tau
    #[arg(long, default_value = "multiplicative")]
    pub zi_type: String,

    /// Write the JSON report here instead of stdout
    #[arg(long)]
    pub output: Option<String>,

    /// Random seed (accepted for interface uniformity; fitting is deterministic)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Override the outer iteration cap (also via ZINFER_MAX_ITER)
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Number of observations to draw
    #[arg(long)]
    pub n: usize,

    /// Base distribution: poisson or binomial:<trials>
    #[arg(long, default_value = "poisson")]
    pub base: String,

    /// ZI type used for the draw (fixed types only)
    #[arg(long, default_value = "multiplicative")]
    pub zi_type: String,

    /// Location coefficients (intercept first unless --no-intercept)
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    pub beta: Vec<f64>,

    /// Inflation intercept gamma; omitted means no inflation (omega = 0)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Option<Vec<f64>>,

    /// Covariate generator, repeatable: name:const:v | name:uniform:a,b |
    /// name:uniformint:a,b | name:bernoulli:p | name:normal:mu,sd
    #[arg(long = "gen")]
    pub gen_specs: Vec<String>,

    /// Do not include an implicit intercept in the linear predictor
    #[arg(long)]
    pub no_intercept: bool,

    /// Random seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Name of the response column in the output CSV
    #[arg(long, default_value = "y")]
    pub response_name: String,

    /// Write the CSV here instead of stdout
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Comma-separated ZI types to fit and rank
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "multiplicative,additive,hurdle"
    )]
    pub types: Vec<String>,

    /// Write the JSON comparison here instead of stdout
    #[arg(long)]
    pub output: Option<String>,

    /// Also write the table as CSV
    #[arg(long)]
    pub output_csv: Option<String>,

    /// Random seed (accepted for interface uniformity)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Override the outer iteration cap (also via ZINFER_MAX_ITER)
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// ZI type to fit before emitting diagnostics
    #[arg(long, default_value = "multiplicative")]
    pub zi_type: String,

    /// Write the diagnostics CSV here instead of stdout
    #[arg(long)]
    pub output: Option<String>,

    /// Random seed (accepted for interface uniformity)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Override the outer iteration cap (also via ZINFER_MAX_ITER)
    #[arg(long)]
    pub max_iter: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Fit(args) => commands::cmd_fit(args),
        Command::Simulate(args) => commands::cmd_simulate(args),
        Command::Compare(args) => commands::cmd_compare(args),
        Command::Diagnose(args) => commands::cmd_diagnose(args),
    };
    match outcome {
        Outcome::Ok => ExitCode::SUCCESS,
        Outcome::InputError => ExitCode::from(1),
        Outcome::NonConvergence => ExitCode::from(2),
    }
}
