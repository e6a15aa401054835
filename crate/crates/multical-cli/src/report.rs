//! The report document: a single machine-parseable TOML document; the
//! human-readable table printed to stdout is a rendering of the same data.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cli_error::CliError;

pub const REPORT_FORMAT: &str = "multical-report";
pub const ORACLE_FORMAT: &str = "multical-oracle";

/// Top-level report for one `metrics` invocation.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReportDocument {
    pub format: String,
    pub version: u32,
    pub mode: String,
    pub n0: usize,
    /// Requested number of generated subpopulations; 0 disables the
    /// generator (only the full population is evaluated).
    pub ell: usize,
    pub min_size: usize,
    pub weighting: String,
    pub seeds: Vec<u64>,
    #[serde(rename = "run")]
    pub runs: Vec<RunReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<AggregateBlock>,
}

/// Results for one seed.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunReport {
    pub seed: u64,
    /// Number of subpopulations actually produced (excluding label 0).
    pub generated: usize,
    pub summary: RunSummary,
    #[serde(rename = "subpop")]
    pub subpops: Vec<SubpopRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunSummary {
    /// Weighted misclassification rate at the 0.5 threshold; present only
    /// for Bernoulli responses.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
    /// Kuiper metric of the full population.
    pub kuiper: f64,
    pub multical: f64,
    pub multi_ablate: f64,
    /// Expected null Kuiper metric of the multi-ablate argmax subpopulation.
    pub expectation: f64,
    pub argmax_multical: usize,
    pub argmax_ablate: usize,
    pub argmax_multical_path: String,
    pub argmax_ablate_path: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SubpopRecord {
    pub label: usize,
    pub size: usize,
    pub total_weight: f64,
    pub kuiper: f64,
    pub sigma: f64,
    pub normalized: f64,
    pub path: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AggregateBlock {
    pub count: usize,
    pub multical: AggregateEntry,
    pub multi_ablate: AggregateEntry,
    pub expectation: AggregateEntry,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AggregateEntry {
    pub mean: f64,
    pub twice_sem: f64,
}

/// Closed-form values emitted next to a synthetic population.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OracleDocument {
    pub format: String,
    pub version: u32,
    pub q: u32,
    pub n0: usize,
    pub ell: usize,
    pub d0: f64,
    pub m: f64,
    pub multi_ablate: f64,
    /// Expected null Kuiper metric of the argmax subpopulation.
    pub expectation: f64,
    pub argmax: usize,
    pub dk: Vec<f64>,
    pub sigma: Vec<f64>,
}

pub fn write_toml<T: Serialize>(path: &Path, document: &T) -> Result<(), CliError> {
    let text = toml::to_string_pretty(document)
        .map_err(|e| CliError::Validation(format!("cannot serialize report: {e}")))?;
    std::fs::write(path, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// The human rendering of a report document.
pub fn render_human(document: &ReportDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "population: n0 = {}, mode = {}, weighting = {}, ell = {}, min_size = {}",
        document.n0, document.mode, document.weighting, document.ell, document.min_size
    );
    for run in &document.runs {
        let s = &run.summary;
        let _ = writeln!(
            out,
            "seed {} ({} generated subpopulation{}):",
            run.seed,
            run.generated,
            if run.generated == 1 { "" } else { "s" }
        );
        if let Some(error) = s.error {
            let _ = writeln!(out, "  error         {error:.6}");
        }
        let _ = writeln!(out, "  kuiper        {:.6}", s.kuiper);
        let _ = writeln!(
            out,
            "  multical      {:.6}  (argmax k = {}: {})",
            s.multical, s.argmax_multical, s.argmax_multical_path
        );
        let _ = writeln!(
            out,
            "  multi-ablate  {:.6}  (argmax k = {}: {})",
            s.multi_ablate, s.argmax_ablate, s.argmax_ablate_path
        );
        let _ = writeln!(out, "  expectation   {:.6}", s.expectation);
    }
    if let Some(aggregate) = &document.aggregate {
        let _ = writeln!(
            out,
            "aggregate over {} seeds (mean \u{b1} twice the standard error):",
            aggregate.count
        );
        for (name, entry) in [
            ("multical", &aggregate.multical),
            ("multi-ablate", &aggregate.multi_ablate),
            ("expectation", &aggregate.expectation),
        ] {
            let _ = writeln!(
                out,
                "  {name:<13} {:.6} \u{b1} {:.6}",
                entry.mean, entry.twice_sem
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ReportDocument {
        ReportDocument {
            format: REPORT_FORMAT.to_string(),
            version: 1,
            mode: "bernoulli".to_string(),
            n0: 12,
            ell: 1,
            min_size: 10,
            weighting: "uniform".to_string(),
            seeds: vec![1, 2],
            runs: vec![RunReport {
                seed: 1,
                generated: 1,
                summary: RunSummary {
                    error: Some(0.25),
                    kuiper: 0.09375,
                    multical: 0.1479361882260476,
                    multi_ablate: 0.28125,
                    expectation: 0.3950224407330933,
                    argmax_multical: 1,
                    argmax_ablate: 1,
                    argmax_multical_path: "index >= 4.5".to_string(),
                    argmax_ablate_path: "index >= 4.5".to_string(),
                },
                subpops: vec![SubpopRecord {
                    label: 0,
                    size: 12,
                    total_weight: 12.0,
                    kuiper: 0.09375,
                    sigma: 25.0 / 192.0,
                    normalized: 0.72,
                    path: "(full population)".to_string(),
                }],
            }],
            aggregate: Some(AggregateBlock {
                count: 2,
                multical: AggregateEntry { mean: 0.1, twice_sem: 0.0 },
                multi_ablate: AggregateEntry { mean: 0.2, twice_sem: 0.0 },
                expectation: AggregateEntry { mean: 0.3, twice_sem: 0.0 },
            }),
        }
    }

    #[test]
    fn toml_round_trip_preserves_floats_bit_for_bit() {
        let document = sample();
        let text = toml::to_string_pretty(&document).unwrap();
        let back: ReportDocument = toml::from_str(&text).unwrap();
        assert_eq!(back, document);
        assert_eq!(
            back.runs[0].summary.multical.to_bits(),
            document.runs[0].summary.multical.to_bits()
        );
        assert_eq!(
            back.runs[0].subpops[0].sigma.to_bits(),
            document.runs[0].subpops[0].sigma.to_bits()
        );
    }

    #[test]
    fn human_rendering_mentions_every_summary_metric() {
        let text = render_human(&sample());
        for needle in ["error", "kuiper", "multical", "multi-ablate", "expectation", "aggregate"] {
            assert!(text.contains(needle), "missing {needle} in:\n{text}");
        }
    }
}
