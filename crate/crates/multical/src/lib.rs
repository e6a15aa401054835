//! Calibration and multi-calibration metrics for probabilistic predictions.
//!
//! The central quantity is the Kuiper metric of a (sub)population: the range
//! of the cumulative weighted differences between responses and predicted
//! probabilities, taken over the score-sorted observations. Dividing each
//! subpopulation's Kuiper metric by its noise level under the null
//! hypothesis of perfect calibration, scaling by the full population's noise
//! level, and maximizing over subpopulations yields a multi-calibration
//! metric on the same 0-to-1 scale as the Kuiper metric itself.
//!
//! The crate also provides a seeded generator that derives subpopulations
//! from covariates by recursive random median splits, a synthetic population
//! family with closed-form metric values for verification, and a small
//! augmentation driver that refits a pluggable predictor on covariates
//! extended with the current scores.
//!
//! Computations are generic over the scalar type (`f32` or `f64`);
//! `*64` aliases are provided for the common case.
//!
//! ```
//! use multical::{
//!     generate, multicalibration, CovariateKind, GeneratorConfig, Mode, Population,
//!     SubpopulationView,
//! };
//! use ndarray::Array2;
//!
//! // (score, response, weight) triples plus one covariate column.
//! let raw: Vec<(f64, f64, f64)> = (0..40)
//!     .map(|i| ((i as f64 + 0.5) / 40.0, f64::from(i % 3 == 0), 1.0))
//!     .collect();
//! let covariates = Array2::from_shape_fn((40, 1), |(row, _)| (row % 7) as f64);
//! let population =
//!     Population::build(&raw, covariates, vec![CovariateKind::Ordinal], Mode::Bernoulli)?;
//!
//! let mut views = vec![SubpopulationView::full(&population)?];
//! let mut config = GeneratorConfig::new(20, 7);
//! config.min_size = 5;
//! for subpop in generate(&population, &config)? {
//!     views.push(SubpopulationView::new(&population, subpop.indices, subpop.label)?);
//! }
//! let report = multicalibration(&population, &views)?;
//! assert!(report.multical >= report.per_subpop[0].kuiper);
//! # Ok::<(), multical::Error>(())
//! ```

pub mod augment;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod scalar;
pub mod subpops;
pub mod synthetic;

pub use error::{Error, Result};
pub use scalar::Real;

pub use augment::{
    augment, fitting_rows, reference_logistic_fitter, AugmentConfig, ConstantPredictor,
    FittedPredictor, IdentityPredictor, LogisticRegression, TrainablePredictor,
};
pub use dataset::{CovariateKind, Mode, Observation, Population, WeightingScheme};
pub use metrics::{
    aggregate_over_seeds, cumulative_differences, expected_kuiper_null, kuiper,
    multicalibration, null_expectation_factor, sigma_bernoulli, sigma_regression,
    MetricsReport, SeedAggregate, SubpopMetrics, SubpopulationView, ZERO_GUARD,
};
pub use subpops::{
    describe_path, generate, materialize_path, GeneratedSubpop, GeneratorConfig,
    SplitDirection, SplitStep,
};
pub use synthetic::{oracle, synth_population, synth_subpops, SyntheticOracle, SyntheticSpec};

/// Double-precision aliases for the main types.
pub type Population64 = Population<f64>;
pub type SubpopulationView64<'a> = SubpopulationView<'a, f64>;
pub type MetricsReport64 = MetricsReport<f64>;
pub type SubpopMetrics64 = SubpopMetrics<f64>;
pub type SeedAggregate64 = SeedAggregate<f64>;
pub type GeneratedSubpop64 = GeneratedSubpop<f64>;
pub type WeightingScheme64 = WeightingScheme<f64>;
