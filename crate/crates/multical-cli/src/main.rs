//! `multical` command line: measure calibration and multi-calibration of
//! probabilistic predictions from CSV files.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use multical::{Mode, WeightingScheme};

use multical_cli::cli_error::CliError;
use multical_cli::commands::{self, AugmentOptions, MetricsOptions, SynthOptions};
use multical_cli::schema::InputSchema;

#[derive(Parser)]
#[command(
    name = "multical",
    about = "Calibration and multi-calibration metrics via the cumulative-differences Kuiper statistic",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute per-subpopulation and population-level calibration metrics.
    Metrics(MetricsArgs),
    /// Emit the synthetic population and its closed-form metric values.
    Synth(SynthArgs),
    /// Refit a reference logistic model on covariates augmented with scores.
    Augment(AugmentArgs),
}

#[derive(Args)]
struct SchemaArgs {
    /// Column holding predicted probabilities.
    #[arg(long = "score-col", default_value = "score")]
    score_col: String,
    /// Column holding observed responses.
    #[arg(long = "response-col", default_value = "response")]
    response_col: String,
    /// Column holding sampling weights; omitted means uniform weights.
    #[arg(long = "weight-col")]
    weight_col: Option<String>,
    /// Covariate columns without a natural ordering (repeatable).
    #[arg(long = "nominal")]
    nominal: Vec<String>,
}

impl SchemaArgs {
    fn to_schema(&self) -> InputSchema {
        InputSchema {
            score_column: self.score_col.clone(),
            response_column: self.response_col.clone(),
            weight_column: self.weight_col.clone(),
            nominal_columns: self.nominal.iter().cloned().collect::<BTreeSet<_>>(),
        }
    }
}

#[derive(Args)]
struct MetricsArgs {
    /// Input CSV file.
    #[arg(long)]
    input: PathBuf,
    /// Where to write the machine-readable report (TOML).
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    schema: SchemaArgs,
    /// Response model: bernoulli (0/1) or regression (any real).
    #[arg(long, value_parser = parse_mode, default_value = "bernoulli")]
    mode: Mode,
    /// Number of subpopulations to generate; 0 disables the generator.
    #[arg(long, default_value_t = 1000)]
    ell: usize,
    /// Minimum subpopulation size.
    #[arg(long = "min-size", default_value_t = 10)]
    min_size: usize,
    /// Generator seed; repeat for a seed sweep (default: a single seed 0).
    #[arg(long = "seed", value_parser = clap::value_parser!(u64).range(..=i64::MAX as u64))]
    seed: Vec<u64>,
    /// Weight replacement: uniform | proportional | proportional-clamped=RHO
    /// | proportional-shifted=RHO | low-prevalence. Default keeps ingested
    /// weights.
    #[arg(long, value_parser = parse_weighting)]
    weighting: Option<WeightingScheme<f64>>,
    /// Write the full population's cumulative-difference curve as CSV.
    #[arg(long = "curve-out")]
    curve_out: Option<PathBuf>,
    /// Use the canonical middle-block subpopulations instead of the
    /// generator (synthetic inputs only).
    #[arg(long = "synthetic-subpops", default_value_t = false)]
    synthetic_subpops: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// The odd positive integer defining the synthetic population.
    #[arg(long)]
    q: u32,
    /// Where to write the population CSV.
    #[arg(long)]
    output: PathBuf,
    /// Where to write the closed-form oracle values (TOML).
    #[arg(long = "oracle-out")]
    oracle_out: PathBuf,
}

#[derive(Args)]
struct AugmentArgs {
    /// Training CSV (must contain responses).
    #[arg(long)]
    train: PathBuf,
    /// Evaluation CSV (responses optional).
    #[arg(long)]
    eval: PathBuf,
    /// Where to write the eval rows with the added final-score column.
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    schema: SchemaArgs,
    /// Number of refit rounds.
    #[arg(long, default_value_t = 3)]
    rounds: usize,
}

fn parse_mode(text: &str) -> Result<Mode, String> {
    match text {
        "bernoulli" => Ok(Mode::Bernoulli),
        "regression" => Ok(Mode::Regression),
        other => Err(format!("unknown mode '{other}' (expected bernoulli or regression)")),
    }
}

fn parse_weighting(text: &str) -> Result<WeightingScheme<f64>, String> {
    let parse_rho = |value: &str, kind: &str| -> Result<f64, String> {
        let rho: f64 = value
            .parse()
            .map_err(|_| format!("{kind}: cannot parse rho '{value}'"))?;
        if rho > 0.0 {
            Ok(rho)
        } else {
            Err(format!("{kind}: rho must be strictly positive, got {rho}"))
        }
    };
    match text {
        "uniform" => Ok(WeightingScheme::Uniform),
        "proportional" => Ok(WeightingScheme::Proportional),
        "low-prevalence" => Ok(WeightingScheme::LowPrevalence),
        _ => {
            if let Some(value) = text.strip_prefix("proportional-clamped=") {
                Ok(WeightingScheme::ProportionalClamped {
                    rho: parse_rho(value, "proportional-clamped")?,
                })
            } else if let Some(value) = text.strip_prefix("proportional-shifted=") {
                Ok(WeightingScheme::ProportionalShifted {
                    rho: parse_rho(value, "proportional-shifted")?,
                })
            } else {
                Err(format!(
                    "unknown weighting '{text}' (expected uniform, proportional, \
                     proportional-clamped=RHO, proportional-shifted=RHO, or low-prevalence)"
                ))
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Metrics(args) => {
            let seeds = if args.seed.is_empty() { vec![0] } else { args.seed.clone() };
            commands::cmd_metrics(&MetricsOptions {
                input: args.input,
                output: args.output,
                schema: args.schema.to_schema(),
                mode: args.mode,
                ell: args.ell,
                min_size: args.min_size,
                seeds,
                weighting: args.weighting,
                curve_out: args.curve_out,
                synthetic_subpops: args.synthetic_subpops,
            })?;
            Ok(())
        }
        Command::Synth(args) => commands::cmd_synth(&SynthOptions {
            q: args.q,
            output: args.output,
            oracle_out: args.oracle_out,
        }),
        Command::Augment(args) => commands::cmd_augment(&AugmentOptions {
            train: args.train,
            eval: args.eval,
            output: args.output,
            schema: args.schema.to_schema(),
            rounds: args.rounds,
        }),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
