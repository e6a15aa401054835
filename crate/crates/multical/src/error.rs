//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong while building populations, evaluating
/// metrics, generating subpopulations, or running the augmentation driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("weight at ingestion index {index} must be strictly positive, got {value}")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("score at ingestion index {index} must lie in [0, 1], got {value}")]
    ScoreOutOfRange { index: usize, value: f64 },

    #[error("response at ingestion index {index} must be exactly 0 or 1 in Bernoulli mode, got {value}")]
    NonBinaryResponse { index: usize, value: f64 },

    #[error("response at ingestion index {index} must be finite, got {value}")]
    NonFiniteResponse { index: usize, value: f64 },

    #[error("covariate matrix has {rows} rows but there are {observations} observations")]
    CovariateRowMismatch { rows: usize, observations: usize },

    #[error("got {kinds} covariate kinds for {columns} covariate columns")]
    CovariateKindMismatch { kinds: usize, columns: usize },

    #[error("proportional weighting divides by the score, but the score at ingestion index {index} is 0")]
    ZeroScoreForProportional { index: usize },

    #[error("regularization parameter rho must be strictly positive, got {value}")]
    InvalidRho { value: f64 },

    #[error("low-prevalence weighting requires Bernoulli mode")]
    LowPrevalenceRequiresBernoulli,

    #[error("low-prevalence weighting requires at least one response equal to 1")]
    NoPositiveResponses,

    #[error("subpopulation {label} is empty")]
    EmptySubpopulation { label: usize },

    #[error("subpopulation {label}: indices must be strictly increasing (violated at position {position})")]
    IndicesNotIncreasing { label: usize, position: usize },

    #[error("subpopulation {label}: index {index} is out of bounds for a population of {len}")]
    IndexOutOfBounds { label: usize, index: usize, len: usize },

    #[error("label 0 is reserved for the full population")]
    ReservedFullLabel,

    #[error("the first subpopulation must be the full population (label 0) over the same population")]
    FirstViewNotFullPopulation,

    #[error("subpopulation {label} refers to a different population")]
    ViewPopulationMismatch { label: usize },

    #[error("no subpopulations given; the list must start with the full population")]
    NoSubpopulations,

    #[error("this noise level is defined for Bernoulli responses; use the regression estimator instead")]
    RequiresBernoulliMode,

    #[error("the regression noise estimator needs at least 2 members, got {size}")]
    TooFewForRegression { size: usize },

    #[error("sigma must be nonnegative, got {value}")]
    NegativeSigma { value: f64 },

    #[error(
        "subpopulation {label} has zero noise level but Kuiper metric {kuiper}; \
         the normalized ratio would be infinite (inconsistent Bernoulli data)"
    )]
    SigmaZeroWithSignal { label: usize, kuiper: f64 },

    #[error("aggregation over seeds needs at least 2 values, got {count}")]
    TooFewSeedValues { count: usize },

    #[error("invalid generator configuration: {0}")]
    InvalidGeneratorConfig(&'static str),

    #[error("the population has no covariates to split on")]
    NoCovariates,

    #[error("minimum subpopulation size {min_size} exceeds the population size {population}")]
    MinSizeExceedsPopulation { min_size: usize, population: usize },

    #[error("no subpopulation could be generated within {attempts} path attempts")]
    GeneratorExhausted { attempts: usize },

    #[error("q must be an odd positive integer, got {q}")]
    QNotOddPositive { q: u32 },

    #[error("population has {got} observations but the synthetic layout needs {expected}")]
    PopulationSizeMismatch { expected: usize, got: usize },

    #[error("augmentation needs at least 1 round")]
    ZeroRounds,

    #[error("holdout fraction must lie strictly between 0 and 1, got {value}")]
    InvalidHoldoutFraction { value: f64 },

    #[error("dimension mismatch for {what}: {left} vs {right}")]
    DimensionMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("feature at row {row}, column {col} is not finite")]
    NonFiniteFeature { row: usize, col: usize },

    #[error("predictor emitted {value} at position {index}; predicted probabilities must lie in [0, 1]")]
    PredictorContractViolation { index: usize, value: f64 },
}
