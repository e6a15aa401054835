//! Augmentation driver: repeatedly refit a pluggable predictor on the
//! original covariates extended with the current predicted probabilities.
//!
//! Each round fits the predictor on a fixed half of the training rows using
//! `p + 1` feature columns (the covariates plus one score column), then
//! replaces the score column on both the fitting half and the evaluation
//! rows with the new predictions. Evaluation scores chain through every
//! round's predictor.

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A model that can be fit to features and responses.
pub trait TrainablePredictor<F: Real> {
    fn fit(&self, features: &Array2<F>, responses: &[F]) -> Result<Box<dyn FittedPredictor<F>>>;
}

/// A fitted model emitting predicted probabilities in [0, 1]; deterministic
/// for a fixed fitted state.
pub trait FittedPredictor<F: Real> {
    fn predict_proba(&self, features: &Array2<F>) -> Result<Vec<F>>;
}

/// Configuration for [`augment`].
pub struct AugmentConfig<'a, F: Real> {
    /// Number of refit rounds, at least 1.
    pub rounds: usize,
    pub predictor: &'a dyn TrainablePredictor<F>,
    /// Fraction of training rows withheld from fitting; the remaining rows
    /// form the fitting half. Defaults to 0.5.
    pub holdout_fraction: F,
}

impl<'a, F: Real> AugmentConfig<'a, F> {
    pub fn new(rounds: usize, predictor: &'a dyn TrainablePredictor<F>) -> Self {
        Self {
            rounds,
            predictor,
            holdout_fraction: F::of(0.5),
        }
    }
}

/// The training rows used for fitting, spread deterministically over the
/// provided order. With the default holdout fraction of 0.5 these are the
/// even positions 0, 2, 4, ...
pub fn fitting_rows<F: Real>(n: usize, holdout_fraction: F) -> Vec<usize> {
    let keep = F::one() - holdout_fraction;
    (0..n)
        .filter(|&i| {
            let here = (F::of_count(i + 1) * keep).ceil();
            let before = (F::of_count(i) * keep).ceil();
            here > before
        })
        .collect()
}

/// Runs `rounds` of augmentation and returns the final scores on the
/// evaluation rows.
///
/// `base_scores_on_fit_half` must contain one score per fitting row (see
/// [`fitting_rows`]); `base_scores_on_eval` one score per evaluation row.
/// A predictor emitting values outside [0, 1] is a contract violation, not
/// something to clamp.
pub fn augment<F: Real>(
    train_covariates: &Array2<F>,
    train_responses: &[F],
    base_scores_on_fit_half: &[F],
    config: &AugmentConfig<'_, F>,
    eval_covariates: &Array2<F>,
    base_scores_on_eval: &[F],
) -> Result<Vec<F>> {
    if config.rounds == 0 {
        return Err(Error::ZeroRounds);
    }
    let holdout = config.holdout_fraction;
    if holdout <= F::zero() || holdout >= F::one() || holdout.is_nan() {
        return Err(Error::InvalidHoldoutFraction {
            value: config.holdout_fraction.to_f64().unwrap_or(f64::NAN),
        });
    }
    if train_covariates.nrows() != train_responses.len() {
        return Err(Error::DimensionMismatch {
            what: "training rows vs responses",
            left: train_covariates.nrows(),
            right: train_responses.len(),
        });
    }
    if train_covariates.ncols() != eval_covariates.ncols() {
        return Err(Error::DimensionMismatch {
            what: "covariate columns (train vs eval)",
            left: train_covariates.ncols(),
            right: eval_covariates.ncols(),
        });
    }
    if eval_covariates.nrows() != base_scores_on_eval.len() {
        return Err(Error::DimensionMismatch {
            what: "evaluation rows vs base scores",
            left: eval_covariates.nrows(),
            right: base_scores_on_eval.len(),
        });
    }
    let fit_rows = fitting_rows(train_covariates.nrows(), config.holdout_fraction);
    if fit_rows.len() != base_scores_on_fit_half.len() {
        return Err(Error::DimensionMismatch {
            what: "fitting-half rows vs base scores",
            left: fit_rows.len(),
            right: base_scores_on_fit_half.len(),
        });
    }
    check_scores(base_scores_on_fit_half)?;
    check_scores(base_scores_on_eval)?;

    let fit_covariates = train_covariates.select(Axis(0), &fit_rows);
    let fit_responses: Vec<F> = fit_rows.iter().map(|&i| train_responses[i]).collect();
    let mut fit_scores = base_scores_on_fit_half.to_vec();
    let mut eval_scores = base_scores_on_eval.to_vec();

    for _ in 0..config.rounds {
        let fit_features = with_score_column(&fit_covariates, &fit_scores);
        let fitted = config.predictor.fit(&fit_features, &fit_responses)?;
        let new_fit = checked_predictions(
            fitted.predict_proba(&fit_features)?,
            fit_covariates.nrows(),
        )?;
        let eval_features = with_score_column(eval_covariates, &eval_scores);
        let new_eval = checked_predictions(
            fitted.predict_proba(&eval_features)?,
            eval_covariates.nrows(),
        )?;
        fit_scores = new_fit;
        eval_scores = new_eval;
    }
    Ok(eval_scores)
}

fn check_scores<F: Real>(scores: &[F]) -> Result<()> {
    for (index, &s) in scores.iter().enumerate() {
        if s < F::zero() || s > F::one() || s.is_nan() {
            return Err(Error::ScoreOutOfRange {
                index,
                value: s.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(())
}

fn checked_predictions<F: Real>(predictions: Vec<F>, expected: usize) -> Result<Vec<F>> {
    if predictions.len() != expected {
        return Err(Error::DimensionMismatch {
            what: "predictor output length",
            left: predictions.len(),
            right: expected,
        });
    }
    for (index, &value) in predictions.iter().enumerate() {
        if value < F::zero() || value > F::one() || value.is_nan() {
            return Err(Error::PredictorContractViolation {
                index,
                value: value.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(predictions)
}

fn with_score_column<F: Real>(covariates: &Array2<F>, scores: &[F]) -> Array2<F> {
    let column =
        Array2::from_shape_vec((scores.len(), 1), scores.to_vec()).expect("column shape");
    ndarray::concatenate(Axis(1), &[covariates.view(), column.view()])
        .expect("matching row counts")
}

/// Maximum-likelihood logistic regression fit by plain gradient ascent with
/// a fixed schedule: step size `4 / (columns + 1)` on internally standardized
/// features, at most `max_iterations` steps, stopping once the largest
/// absolute gradient component drops below `gradient_tolerance`.
///
/// A desk-scale reference fitter, not a performance-tuned solver.
#[derive(Clone, Copy, Debug)]
pub struct LogisticRegression {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
}

impl Default for LogisticRegression {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            gradient_tolerance: 1e-8,
        }
    }
}

/// The reference predictor used by the command-line augmentation driver.
pub fn reference_logistic_fitter() -> LogisticRegression {
    LogisticRegression::default()
}

impl<F: Real> TrainablePredictor<F> for LogisticRegression {
    fn fit(&self, features: &Array2<F>, responses: &[F]) -> Result<Box<dyn FittedPredictor<F>>> {
        let n = features.nrows();
        let p = features.ncols();
        if n == 0 || n != responses.len() {
            return Err(Error::DimensionMismatch {
                what: "feature rows vs responses",
                left: n,
                right: responses.len(),
            });
        }
        check_finite(features)?;

        // Standardize each column; constant columns are zeroed out.
        let nf = F::of_count(n);
        let mut means = Vec::with_capacity(p);
        let mut inverse_sds = Vec::with_capacity(p);
        for column in features.columns() {
            let mut sum = F::zero();
            for &v in column.iter() {
                sum += v;
            }
            let mean = sum / nf;
            let mut squares = F::zero();
            for &v in column.iter() {
                squares += (v - mean) * (v - mean);
            }
            let sd = (squares / nf).sqrt();
            means.push(mean);
            inverse_sds.push(if sd > F::of(1e-12) {
                F::one() / sd
            } else {
                F::zero()
            });
        }

        let standardized = Array2::from_shape_fn((n, p), |(i, j)| {
            (features[[i, j]] - means[j]) * inverse_sds[j]
        });

        let step = F::of(4.0) / F::of_count(p + 1);
        let tolerance = F::of(self.gradient_tolerance);
        let mut weights = vec![F::zero(); p];
        let mut intercept = F::zero();
        for _ in 0..self.max_iterations {
            let mut gradient = vec![F::zero(); p];
            let mut gradient_intercept = F::zero();
            for i in 0..n {
                let mut z = intercept;
                for j in 0..p {
                    z += weights[j] * standardized[[i, j]];
                }
                let residual = responses[i] - sigmoid(z);
                for j in 0..p {
                    gradient[j] += residual * standardized[[i, j]];
                }
                gradient_intercept += residual;
            }
            let mut largest = (gradient_intercept / nf).abs();
            for g in gradient.iter_mut() {
                *g = *g / nf;
                largest = largest.max(g.abs());
            }
            gradient_intercept = gradient_intercept / nf;
            if largest < tolerance {
                break;
            }
            for j in 0..p {
                weights[j] += step * gradient[j];
            }
            intercept += step * gradient_intercept;
        }

        Ok(Box::new(LogisticModel {
            means,
            inverse_sds,
            weights,
            intercept,
        }))
    }
}

struct LogisticModel<F> {
    means: Vec<F>,
    inverse_sds: Vec<F>,
    weights: Vec<F>,
    intercept: F,
}

impl<F: Real> FittedPredictor<F> for LogisticModel<F> {
    fn predict_proba(&self, features: &Array2<F>) -> Result<Vec<F>> {
        if features.ncols() != self.means.len() {
            return Err(Error::DimensionMismatch {
                what: "feature columns at prediction",
                left: features.ncols(),
                right: self.means.len(),
            });
        }
        check_finite(features)?;
        let mut out = Vec::with_capacity(features.nrows());
        for row in features.rows() {
            let mut z = self.intercept;
            for (j, &v) in row.iter().enumerate() {
                z += self.weights[j] * (v - self.means[j]) * self.inverse_sds[j];
            }
            out.push(sigmoid(z));
        }
        Ok(out)
    }
}

fn check_finite<F: Real>(features: &Array2<F>) -> Result<()> {
    for ((row, col), &v) in features.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFiniteFeature { row, col });
        }
    }
    Ok(())
}

fn sigmoid<F: Real>(z: F) -> F {
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}

/// Returns the score column it was given; a fixed point of the augmentation
/// loop, useful for exercising the driver.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityPredictor;

impl<F: Real> TrainablePredictor<F> for IdentityPredictor {
    fn fit(&self, features: &Array2<F>, _responses: &[F]) -> Result<Box<dyn FittedPredictor<F>>> {
        if features.ncols() == 0 {
            return Err(Error::DimensionMismatch {
                what: "identity predictor needs at least the score column",
                left: 0,
                right: 1,
            });
        }
        Ok(Box::new(IdentityModel))
    }
}

struct IdentityModel;

impl<F: Real> FittedPredictor<F> for IdentityModel {
    fn predict_proba(&self, features: &Array2<F>) -> Result<Vec<F>> {
        Ok(features.column(features.ncols() - 1).to_vec())
    }
}

/// Always predicts the same value.
#[derive(Clone, Copy, Debug)]
pub struct ConstantPredictor<F> {
    pub value: F,
}

impl<F: Real> TrainablePredictor<F> for ConstantPredictor<F> {
    fn fit(&self, _features: &Array2<F>, _responses: &[F]) -> Result<Box<dyn FittedPredictor<F>>> {
        Ok(Box::new(ConstantModel { value: self.value }))
    }
}

struct ConstantModel<F> {
    value: F,
}

impl<F: Real> FittedPredictor<F> for ConstantModel<F> {
    fn predict_proba(&self, features: &Array2<F>) -> Result<Vec<F>> {
        Ok(vec![self.value; features.nrows()])
    }
}
