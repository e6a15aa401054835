//! The three subcommands: metric reports, synthetic-data emission, and
//! augmentation.

use std::path::{Path, PathBuf};

use multical::{
    aggregate_over_seeds, augment, cumulative_differences, kuiper, multicalibration,
    null_expectation_factor, oracle, reference_logistic_fitter, synth_population,
    synth_subpops, AugmentConfig, GeneratorConfig, MetricsReport, Mode, Population,
    SubpopulationView, SyntheticSpec, WeightingScheme,
};

use crate::cli_error::CliError;
use crate::csv_io::{format_float, read_table, write_table, RawTable};
use crate::report::{
    render_human, write_toml, AggregateBlock, AggregateEntry, OracleDocument, ReportDocument,
    RunReport, RunSummary, SubpopRecord, ORACLE_FORMAT, REPORT_FORMAT,
};
use crate::schema::{augment_input_from_table, population_from_table, InputSchema};

pub struct MetricsOptions {
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub schema: InputSchema,
    pub mode: Mode,
    pub ell: usize,
    pub min_size: usize,
    pub seeds: Vec<u64>,
    pub weighting: Option<WeightingScheme<f64>>,
    pub curve_out: Option<PathBuf>,
    pub synthetic_subpops: bool,
}

pub fn cmd_metrics(options: &MetricsOptions) -> Result<ReportDocument, CliError> {
    let table = read_table(&options.input)?;
    let (population, covariate_names) =
        population_from_table(&table, &options.schema, options.mode)?;
    let population = match &options.weighting {
        Some(scheme) => population.apply_weighting(scheme)?,
        None => population,
    };

    let mut seeds = options.seeds.clone();
    seeds.sort_unstable();

    let synthetic_spec = if options.synthetic_subpops {
        let spec = SyntheticSpec::infer_from_size(population.len()).ok_or_else(|| {
            CliError::Validation(format!(
                "--synthetic-subpops requires a synthetic population with q(q+1) rows \
                 for odd q; got {} rows",
                population.len()
            ))
        })?;
        Some(spec)
    } else {
        None
    };

    let mut runs = Vec::with_capacity(seeds.len());
    let mut multical_values = Vec::with_capacity(seeds.len());
    let mut ablate_values = Vec::with_capacity(seeds.len());
    let mut expectation_values = Vec::with_capacity(seeds.len());

    for &seed in &seeds {
        let mut views = vec![SubpopulationView::full(&population)?];
        let mut paths = vec!["(full population)".to_string()];

        if let Some(spec) = &synthetic_spec {
            for view in synth_subpops(spec, &population)? {
                let first = view.indices()[0] + 1;
                let last = view.indices()[view.len() - 1] + 1;
                paths.push(format!(
                    "synthetic middle block k={} (rows {first}..{last}, 1-based)",
                    view.label()
                ));
                views.push(view);
            }
        } else if options.ell >= 1 {
            let config = GeneratorConfig {
                ell: options.ell,
                min_size: options.min_size,
                seed,
                max_attempts: 100 * options.ell,
            };
            for generated in multical::generate(&population, &config)? {
                paths.push(generated.describe(&covariate_names));
                views.push(SubpopulationView::new(
                    &population,
                    generated.indices,
                    generated.label,
                )?);
            }
        }

        let report = multicalibration(&population, &views)?;
        multical_values.push(report.multical);
        ablate_values.push(report.multi_ablate);
        expectation_values.push(report.expectation_at_argmax);
        runs.push(run_report(seed, &population, &report, &paths));
    }

    let aggregate = if seeds.len() >= 2 {
        let entry = |values: &[f64]| -> Result<AggregateEntry, CliError> {
            let aggregate = aggregate_over_seeds(values)?;
            Ok(AggregateEntry {
                mean: aggregate.mean,
                twice_sem: aggregate.twice_sem,
            })
        };
        Some(AggregateBlock {
            count: seeds.len(),
            multical: entry(&multical_values)?,
            multi_ablate: entry(&ablate_values)?,
            expectation: entry(&expectation_values)?,
        })
    } else {
        None
    };

    let document = ReportDocument {
        format: REPORT_FORMAT.to_string(),
        version: 1,
        mode: mode_name(options.mode).to_string(),
        n0: population.len(),
        ell: if options.synthetic_subpops {
            synthetic_spec.as_ref().map_or(0, |s| s.ell())
        } else {
            options.ell
        },
        min_size: options.min_size,
        weighting: weighting_name(&options.weighting, &options.schema),
        seeds,
        runs,
        aggregate,
    };

    if let Some(curve_path) = &options.curve_out {
        write_curve(curve_path, &population)?;
    }
    print!("{}", render_human(&document));
    if let Some(output) = &options.output {
        write_toml(output, &document)?;
        println!("report written to {}", output.display());
    }
    Ok(document)
}

fn run_report(
    seed: u64,
    population: &Population<f64>,
    report: &MetricsReport<f64>,
    paths: &[String],
) -> RunReport {
    let path_of = |label: usize| -> String {
        report
            .per_subpop
            .iter()
            .position(|m| m.label == label)
            .map_or_else(String::new, |position| paths[position].clone())
    };
    let subpops = report
        .per_subpop
        .iter()
        .zip(paths)
        .map(|(m, path)| SubpopRecord {
            label: m.label,
            size: m.size,
            total_weight: m.total_weight,
            kuiper: m.kuiper,
            sigma: m.sigma,
            normalized: m.normalized,
            path: path.clone(),
        })
        .collect();
    RunReport {
        seed,
        generated: report.per_subpop.len() - 1,
        summary: RunSummary {
            error: classification_error(population),
            kuiper: report.per_subpop[0].kuiper,
            multical: report.multical,
            multi_ablate: report.multi_ablate,
            expectation: report.expectation_at_argmax,
            argmax_multical: report.argmax_multical,
            argmax_ablate: report.argmax_ablate,
            argmax_multical_path: path_of(report.argmax_multical),
            argmax_ablate_path: path_of(report.argmax_ablate),
        },
        subpops,
    }
}

/// Weighted fraction of incorrect classifications at the 0.5 threshold
/// (scores of at least 0.5 predict class 1); Bernoulli responses only.
fn classification_error(population: &Population<f64>) -> Option<f64> {
    if population.mode() != Mode::Bernoulli {
        return None;
    }
    let mut wrong = 0.0;
    let mut total = 0.0;
    for obs in population.observations() {
        let predicted = if obs.score >= 0.5 { 1.0 } else { 0.0 };
        if predicted != obs.response {
            wrong += obs.weight;
        }
        total += obs.weight;
    }
    Some(wrong / total)
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Bernoulli => "bernoulli",
        Mode::Regression => "regression",
    }
}

fn weighting_name(scheme: &Option<WeightingScheme<f64>>, schema: &InputSchema) -> String {
    match scheme {
        None => match &schema.weight_column {
            Some(column) => format!("column:{column}"),
            None => "uniform".to_string(),
        },
        Some(WeightingScheme::Uniform) => "uniform".to_string(),
        Some(WeightingScheme::Proportional) => "proportional".to_string(),
        Some(WeightingScheme::ProportionalClamped { rho }) => {
            format!("proportional-clamped={rho}")
        }
        Some(WeightingScheme::ProportionalShifted { rho }) => {
            format!("proportional-shifted={rho}")
        }
        Some(WeightingScheme::LowPrevalence) => "low-prevalence".to_string(),
    }
}

/// Two-column CSV of the full population's cumulative-difference curve:
/// cumulative weight fraction and cumulative difference, starting at (0, 0).
fn write_curve(path: &Path, population: &Population<f64>) -> Result<(), CliError> {
    let view = SubpopulationView::full(population)?;
    let curve = cumulative_differences(&view);
    let total: f64 = population.observations().iter().map(|o| o.weight).sum();
    let mut rows = Vec::with_capacity(curve.len());
    let mut running = 0.0;
    rows.push(vec![0.0, curve[0]]);
    for (obs, &c) in population.observations().iter().zip(&curve[1..]) {
        running += obs.weight;
        rows.push(vec![running / total, c]);
    }
    write_table(
        path,
        &RawTable {
            headers: vec![
                "cumulative_weight_fraction".to_string(),
                "cumulative_difference".to_string(),
            ],
            rows,
        },
    )
}

pub struct SynthOptions {
    pub q: u32,
    pub output: PathBuf,
    pub oracle_out: PathBuf,
}

pub fn cmd_synth(options: &SynthOptions) -> Result<(), CliError> {
    let spec = SyntheticSpec::new(options.q)?;
    let population = synth_population::<f64>(&spec);

    let rows = population
        .observations()
        .iter()
        .enumerate()
        .map(|(row, obs)| vec![obs.score, obs.response, obs.weight, (row + 1) as f64])
        .collect();
    write_table(
        &options.output,
        &RawTable {
            headers: vec![
                "score".to_string(),
                "response".to_string(),
                "weight".to_string(),
                "index".to_string(),
            ],
            rows,
        },
    )?;

    let exact = oracle(&spec);
    let document = OracleDocument {
        format: ORACLE_FORMAT.to_string(),
        version: 1,
        q: spec.q(),
        n0: spec.n0(),
        ell: spec.ell(),
        d0: exact.d0,
        m: exact.m,
        multi_ablate: exact.multi_ablate,
        expectation: null_expectation_factor::<f64>() * exact.sigma_k[exact.argmax_k],
        argmax: exact.argmax_k,
        dk: exact.dk,
        sigma: exact.sigma_k,
    };
    write_toml(&options.oracle_out, &document)?;
    println!(
        "synthetic population (q = {}, {} rows) written to {}; oracle values to {}",
        spec.q(),
        spec.n0(),
        options.output.display(),
        options.oracle_out.display()
    );
    Ok(())
}

pub struct AugmentOptions {
    pub train: PathBuf,
    pub eval: PathBuf,
    pub output: PathBuf,
    pub schema: InputSchema,
    pub rounds: usize,
}

pub fn cmd_augment(options: &AugmentOptions) -> Result<(), CliError> {
    if options.rounds == 0 {
        return Err(CliError::Validation("rounds must be >= 1".to_string()));
    }
    let train_table = read_table(&options.train)?;
    let eval_table = read_table(&options.eval)?;
    let train = augment_input_from_table(&train_table, &options.schema, true)?;
    let eval = augment_input_from_table(&eval_table, &options.schema, false)?;

    if train.covariate_names != eval.covariate_names {
        return Err(CliError::Validation(format!(
            "train and eval covariate columns differ: {:?} vs {:?}",
            train.covariate_names, eval.covariate_names
        )));
    }

    let fit_rows = multical::augment::fitting_rows(train.scores.len(), 0.5f64);
    let base_fit: Vec<f64> = fit_rows.iter().map(|&i| train.scores[i]).collect();
    let fitter = reference_logistic_fitter();
    let config = AugmentConfig {
        rounds: options.rounds,
        predictor: &fitter,
        holdout_fraction: 0.5,
    };
    let final_scores = augment(
        &train.covariates,
        train.responses.as_deref().expect("responses required above"),
        &base_fit,
        &config,
        &eval.covariates,
        &eval.scores,
    )?;

    let mut out_table = eval_table.clone();
    if out_table.headers.iter().any(|h| h == "final_score") {
        return Err(CliError::Validation(
            "eval file already has a 'final_score' column".to_string(),
        ));
    }
    out_table.headers.push("final_score".to_string());
    for (row, &score) in out_table.rows.iter_mut().zip(&final_scores) {
        row.push(score);
    }
    write_table(&options.output, &out_table)?;
    println!(
        "augmented scores ({} rounds) written to {}",
        options.rounds,
        options.output.display()
    );

    match &eval.responses {
        Some(responses) => {
            let before = eval_kuiper(&eval.scores, responses)?;
            let after = eval_kuiper(&final_scores, responses)?;
            println!("kuiper on eval before augmentation: {}", format_float(before));
            println!("kuiper on eval after  augmentation: {}", format_float(after));
        }
        None => {
            println!(
                "eval file has no '{}' column; Kuiper summary omitted",
                options.schema.response_column
            );
        }
    }
    Ok(())
}

/// Kuiper metric of scores vs responses with uniform weights. Built in
/// regression mode so that it also covers non-binary eval responses.
fn eval_kuiper(scores: &[f64], responses: &[f64]) -> Result<f64, CliError> {
    let raw: Vec<(f64, f64, f64)> = scores
        .iter()
        .zip(responses)
        .map(|(&s, &r)| (s, r, 1.0))
        .collect();
    let covariates = ndarray::Array2::zeros((raw.len(), 0));
    let population = Population::build(&raw, covariates, vec![], Mode::Regression)?;
    let view = SubpopulationView::full(&population)?;
    Ok(kuiper(&view))
}
