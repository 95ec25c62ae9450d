//! `varexp`: build spaces, evaluate norms, indices and criteria, apply operators and run
//! refinement studies from the command line.

mod commands;
mod error;
mod inputs;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::{code, CliError};
use crate::inputs::SpaceKindArg;
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "varexp", version, about = "Variable exponent spaces, weights and operators on discretized spaces")]
pub struct Cli {
    /// TOML config; command-line flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Corpus seed (overrides `corpus.seed` for `experiment`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 1 gives bit-stable output.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build and save a space; `--describe` adds doubling and dimension estimates.
    Space(SpaceCmd),
    /// Luxemburg norm of a function, weighted when weight nodes are given.
    Norm(NormCmd),
    /// Matuszewska–Orlicz indices of a weight, with Φ/Ψ-class verdicts when α and β are given.
    Indices(IndicesCmd),
    /// Evaluate admissibility criteria; exit 0 pass, 1 fail, 2 boundary or unknown.
    Check(CheckCmd),
    /// Apply an operator to a function and write the result.
    Apply(ApplyCmd),
    /// Run a refinement study described by `--config`.
    Experiment(ExperimentCmd),
}

#[derive(Debug, Args, Default)]
pub struct SpaceArgs {
    #[arg(long, value_enum)]
    pub kind: Option<SpaceKindArg>,
    /// Points per axis, or curve vertices.
    #[arg(long)]
    pub n: Option<usize>,
    /// Circle with this many vertices (same as `--kind curve --n N`).
    #[arg(long, value_name = "N")]
    pub circle: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    /// Smallest positive node of a graded interval.
    #[arg(long)]
    pub x_min: Option<f64>,
    /// Grading ratio of a graded interval.
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub include_lo: bool,
    /// Space or curve table for `--kind file` / `--kind curve-file`.
    #[arg(long)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct ExponentArgs {
    /// Constant exponent.
    #[arg(long, conflicts_with = "exponent")]
    pub p: Option<f64>,
    /// Exponent descriptor as inline TOML, e.g. `{ type = "affine", base = 1.5, slope = 1 }`.
    #[arg(long)]
    pub exponent: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct WeightArgs {
    /// Position of a single weight node, as comma-separated coordinates.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, requires = "power")]
    pub node: Vec<f64>,
    /// Exponent of the power factor `d(x, node)^a` at `--node`.
    #[arg(long, allow_negative_numbers = true, requires = "node")]
    pub power: Option<f64>,
    /// Weight spec as inline TOML: `{ nodes = [...], infinity = {...}, scale = 1 }`.
    #[arg(long, conflicts_with = "power")]
    pub weight: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Right end of the Zygmund-class domain `(0, ℓ]`.
    #[arg(long, allow_negative_numbers = true)]
    pub ell: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_inf: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta_inf: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct FunctionArgs {
    /// Function table with `value` or `re,im` columns, one row per point.
    #[arg(long, conflicts_with = "constant")]
    pub function: Option<PathBuf>,
    /// Constant function.
    #[arg(long, allow_negative_numbers = true)]
    pub constant: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SpaceCmd {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long)]
    pub describe: bool,
}

#[derive(Debug, Args)]
pub struct NormCmd {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[command(flatten)]
    pub exponent: ExponentArgs,
    #[command(flatten)]
    pub weight: WeightArgs,
    #[command(flatten)]
    pub function: FunctionArgs,
}

#[derive(Debug, Args)]
pub struct IndicesCmd {
    /// Weight model as inline TOML, e.g. `{ type = "power_log", a = 0.5, b = 1 }`.
    #[arg(long)]
    pub weight_model: Option<String>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct CheckCmd {
    /// Criterion to evaluate; repeatable. `--criterion list` prints the names.
    #[arg(long = "criterion", short = 'c')]
    pub criteria: Vec<String>,
    #[command(flatten)]
    pub space: SpaceArgs,
    #[command(flatten)]
    pub exponent: ExponentArgs,
    #[command(flatten)]
    pub weight: WeightArgs,
    /// Single weight factor for the Φ/Ψ-class criteria, as inline TOML.
    #[arg(long)]
    pub weight_model: Option<String>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct ApplyCmd {
    /// Operator name (`identity`, `maximal`, `cauchy_singular`) or inline TOML with parameters.
    #[arg(long)]
    pub operator: Option<String>,
    #[command(flatten)]
    pub space: SpaceArgs,
    #[command(flatten)]
    pub function: FunctionArgs,
}

#[derive(Debug, Args)]
pub struct ExperimentCmd {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { code::USAGE } else { code::PASS });
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("varexp: {e}");
            if let CliError::Usage(_) = e {
                eprintln!("run `varexp --help` for usage");
            }
            ExitCode::from(e.code())
        }
    }
}
