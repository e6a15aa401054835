//! Mapping CSV columns onto the population data model.

use std::collections::BTreeSet;

use multical::{CovariateKind, Mode, Population};
use ndarray::Array2;

use crate::cli_error::CliError;
use crate::csv_io::RawTable;

/// Which columns carry scores, responses, and weights; every remaining
/// column is a covariate, ordinal unless listed as nominal.
#[derive(Clone, Debug)]
pub struct InputSchema {
    pub score_column: String,
    pub response_column: String,
    pub weight_column: Option<String>,
    pub nominal_columns: BTreeSet<String>,
}

impl Default for InputSchema {
    fn default() -> Self {
        Self {
            score_column: "score".to_string(),
            response_column: "response".to_string(),
            weight_column: None,
            nominal_columns: BTreeSet::new(),
        }
    }
}

/// Everything augmentation needs from a CSV file.
pub struct AugmentInput {
    pub covariates: Array2<f64>,
    pub covariate_names: Vec<String>,
    pub scores: Vec<f64>,
    pub responses: Option<Vec<f64>>,
}

fn required_column(table: &RawTable, name: &str, role: &str) -> Result<usize, CliError> {
    table.column_index(name).ok_or_else(|| {
        CliError::Validation(format!("{role} column '{name}' not found in the input header"))
    })
}

struct CovariateLayout {
    indices: Vec<usize>,
    names: Vec<String>,
    kinds: Vec<CovariateKind>,
}

/// Covariate columns in header order, with their kinds; validates that the
/// nominal set only names actual covariate columns.
fn covariate_layout(
    table: &RawTable,
    schema: &InputSchema,
    special: &[usize],
) -> Result<CovariateLayout, CliError> {
    let mut indices = Vec::new();
    let mut names = Vec::new();
    let mut kinds = Vec::new();
    for (index, name) in table.headers.iter().enumerate() {
        if special.contains(&index) {
            continue;
        }
        indices.push(index);
        names.push(name.clone());
        kinds.push(if schema.nominal_columns.contains(name) {
            CovariateKind::Nominal
        } else {
            CovariateKind::Ordinal
        });
    }
    for nominal in &schema.nominal_columns {
        if !names.iter().any(|n| n == nominal) {
            return Err(CliError::Validation(format!(
                "nominal column '{nominal}' is not a covariate column \
                 (it is missing or plays a score/response/weight role)"
            )));
        }
    }
    Ok(CovariateLayout { indices, names, kinds })
}

/// Builds the population from a parsed table; returns it with the covariate
/// column names (needed to render split paths).
pub fn population_from_table(
    table: &RawTable,
    schema: &InputSchema,
    mode: Mode,
) -> Result<(Population<f64>, Vec<String>), CliError> {
    let score = required_column(table, &schema.score_column, "score")?;
    let response = required_column(table, &schema.response_column, "response")?;
    let weight = schema
        .weight_column
        .as_deref()
        .map(|name| required_column(table, name, "weight"))
        .transpose()?;

    let mut special = vec![score, response];
    special.extend(weight);
    let layout = covariate_layout(table, schema, &special)?;

    let raw: Vec<(f64, f64, f64)> = table
        .rows
        .iter()
        .map(|row| {
            (
                row[score],
                row[response],
                weight.map_or(1.0, |w| row[w]),
            )
        })
        .collect();
    let covariates = Array2::from_shape_fn((table.rows.len(), layout.indices.len()), |(r, c)| {
        table.rows[r][layout.indices[c]]
    });
    let population = Population::build(&raw, covariates, layout.kinds, mode)?;
    Ok((population, layout.names))
}

/// Extracts augmentation inputs: base scores, optional responses, and the
/// covariate matrix in header order (weight column, if named, is ignored).
pub fn augment_input_from_table(
    table: &RawTable,
    schema: &InputSchema,
    require_response: bool,
) -> Result<AugmentInput, CliError> {
    let score = required_column(table, &schema.score_column, "score")?;
    let response = if require_response {
        Some(required_column(table, &schema.response_column, "response")?)
    } else {
        table.column_index(&schema.response_column)
    };
    let weight = schema
        .weight_column
        .as_deref()
        .and_then(|name| table.column_index(name));

    let mut special = vec![score];
    special.extend(response);
    special.extend(weight);
    let layout = covariate_layout(table, schema, &special)?;

    let covariates = Array2::from_shape_fn((table.rows.len(), layout.indices.len()), |(r, c)| {
        table.rows[r][layout.indices[c]]
    });
    Ok(AugmentInput {
        covariates,
        covariate_names: layout.names,
        scores: table.column(score),
        responses: response.map(|r| table.column(r)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> RawTable {
        RawTable {
            headers: vec![
                "score".into(),
                "response".into(),
                "w".into(),
                "age".into(),
                "region".into(),
            ],
            rows: vec![
                vec![0.9, 1.0, 2.0, 30.0, 1.0],
                vec![0.1, 0.0, 1.0, 40.0, 2.0],
            ],
        }
    }

    #[test]
    fn population_assembly_with_weights_and_kinds() {
        let schema = InputSchema {
            weight_column: Some("w".into()),
            nominal_columns: ["region".to_string()].into(),
            ..InputSchema::default()
        };
        let (population, names) =
            population_from_table(&table(), &schema, Mode::Bernoulli).unwrap();
        assert_eq!(names, vec!["age", "region"]);
        assert_eq!(
            population.covariate_kinds(),
            &[CovariateKind::Ordinal, CovariateKind::Nominal]
        );
        // Sorted ascending by score.
        assert_eq!(population.observations()[0].score, 0.1);
        assert_eq!(population.observations()[0].weight, 1.0);
        assert_eq!(population.covariates()[[0, 0]], 40.0);
    }

    #[test]
    fn uniform_weights_when_no_weight_column_is_named() {
        let schema = InputSchema::default();
        let (population, names) =
            population_from_table(&table(), &schema, Mode::Bernoulli).unwrap();
        assert_eq!(names, vec!["w", "age", "region"]);
        assert!(population.observations().iter().all(|o| o.weight == 1.0));
    }

    #[test]
    fn schema_violations_are_validation_errors() {
        let schema = InputSchema {
            score_column: "missing".into(),
            ..InputSchema::default()
        };
        let err = population_from_table(&table(), &schema, Mode::Bernoulli).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("'missing'"));

        let schema = InputSchema {
            nominal_columns: ["score".to_string()].into(),
            ..InputSchema::default()
        };
        let err = population_from_table(&table(), &schema, Mode::Bernoulli).unwrap_err();
        assert!(err.to_string().contains("nominal"));
    }

    #[test]
    fn augment_input_allows_missing_responses() {
        let mut t = table();
        t.headers[1] = "other".into();
        let schema = InputSchema::default();
        let input = augment_input_from_table(&t, &schema, false).unwrap();
        assert!(input.responses.is_none());
        assert_eq!(input.covariate_names, vec!["other", "w", "age", "region"]);
        assert_eq!(input.scores, vec![0.9, 0.1]);
        assert!(matches!(
            augment_input_from_table(&t, &schema, true),
            Err(CliError::Validation(_))
        ));
    }
}
