//! Population data model: validated, score-sorted observations with weights,
//! plus the alternative weighting schemes.

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Whether responses are Bernoulli outcomes (exactly 0 or 1) or general reals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Bernoulli,
    Regression,
}

/// Whether a covariate column carries a natural total ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovariateKind {
    Ordinal,
    Nominal,
}

/// One observation: predicted probability, observed response, sampling weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation<F> {
    /// Predicted probability in [0, 1].
    pub score: F,
    /// Observed response; 0 or 1 in Bernoulli mode, any finite real otherwise.
    pub response: F,
    /// Strictly positive sampling weight.
    pub weight: F,
    /// Position in ingestion order; ties in score keep this order.
    pub original_index: usize,
}

/// Replacement rules for the observation weights.
///
/// Every scheme replaces the existing weights outright rather than scaling
/// them; in particular `LowPrevalence` assumes the data was ingested
/// unweighted and overwrites whatever weights are present.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightingScheme<F> {
    /// Unit weight for every observation.
    Uniform,
    /// `W = 1/S`; rejects populations containing a zero score.
    Proportional,
    /// `W = 1/rho` where `S <= rho`, else `1/S`.
    ProportionalClamped { rho: F },
    /// `W = 1/(S + rho)`.
    ProportionalShifted { rho: F },
    /// `W = 1/A` for responses equal to 1 and `W = 1` otherwise, where `A` is
    /// the unweighted mean response. Bernoulli mode only.
    LowPrevalence,
}

/// Score-sorted observations and the per-observation covariate matrix.
///
/// Immutable after construction; it may be shared and read concurrently
/// without synchronization.
#[derive(Clone, Debug)]
pub struct Population<F: Real> {
    observations: Vec<Observation<F>>,
    covariates: Array2<F>,
    covariate_kinds: Vec<CovariateKind>,
    mode: Mode,
}

impl<F: Real> Population<F> {
    /// Validates and sorts raw `(score, response, weight)` triples ascending
    /// by score, stable on ingestion order, permuting covariate rows to
    /// match. Weights are kept exactly as given; no normalization happens
    /// here or anywhere else (every formula divides by the total weight).
    pub fn build(
        raw: &[(F, F, F)],
        covariates: Array2<F>,
        covariate_kinds: Vec<CovariateKind>,
        mode: Mode,
    ) -> Result<Self> {
        if covariates.nrows() != raw.len() {
            return Err(Error::CovariateRowMismatch {
                rows: covariates.nrows(),
                observations: raw.len(),
            });
        }
        if covariate_kinds.len() != covariates.ncols() {
            return Err(Error::CovariateKindMismatch {
                kinds: covariate_kinds.len(),
                columns: covariates.ncols(),
            });
        }
        let zero = F::zero();
        let one = F::one();
        for (index, &(score, response, weight)) in raw.iter().enumerate() {
            if weight <= zero || weight.is_nan() {
                return Err(Error::NonPositiveWeight {
                    index,
                    value: weight.to_f64().unwrap_or(f64::NAN),
                });
            }
            if score < zero || score > one || score.is_nan() {
                return Err(Error::ScoreOutOfRange {
                    index,
                    value: score.to_f64().unwrap_or(f64::NAN),
                });
            }
            match mode {
                Mode::Bernoulli => {
                    if response != zero && response != one {
                        return Err(Error::NonBinaryResponse {
                            index,
                            value: response.to_f64().unwrap_or(f64::NAN),
                        });
                    }
                }
                Mode::Regression => {
                    if !response.is_finite() {
                        return Err(Error::NonFiniteResponse {
                            index,
                            value: response.to_f64().unwrap_or(f64::NAN),
                        });
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..raw.len()).collect();
        // Stable: equal scores keep ascending ingestion order.
        order.sort_by(|&a, &b| raw[a].0.partial_cmp(&raw[b].0).expect("scores are finite"));

        let observations = order
            .iter()
            .map(|&i| {
                let (score, response, weight) = raw[i];
                Observation {
                    score,
                    response,
                    weight,
                    original_index: i,
                }
            })
            .collect();
        let covariates = covariates.select(Axis(0), &order);

        Ok(Self {
            observations,
            covariates,
            covariate_kinds,
            mode,
        })
    }

    /// Returns a new population with weights replaced per `scheme`; scores,
    /// responses, order, and covariates are untouched.
    pub fn apply_weighting(&self, scheme: &WeightingScheme<F>) -> Result<Self> {
        let zero = F::zero();
        let one = F::one();
        let weights: Vec<F> = match *scheme {
            WeightingScheme::Uniform => vec![one; self.len()],
            WeightingScheme::Proportional => {
                let mut out = Vec::with_capacity(self.len());
                for obs in &self.observations {
                    if obs.score == zero {
                        return Err(Error::ZeroScoreForProportional {
                            index: obs.original_index,
                        });
                    }
                    out.push(one / obs.score);
                }
                out
            }
            WeightingScheme::ProportionalClamped { rho } => {
                if rho <= zero || rho.is_nan() {
                    return Err(Error::InvalidRho {
                        value: rho.to_f64().unwrap_or(f64::NAN),
                    });
                }
                self.observations
                    .iter()
                    .map(|obs| {
                        if obs.score <= rho {
                            one / rho
                        } else {
                            one / obs.score
                        }
                    })
                    .collect()
            }
            WeightingScheme::ProportionalShifted { rho } => {
                if rho <= zero || rho.is_nan() {
                    return Err(Error::InvalidRho {
                        value: rho.to_f64().unwrap_or(f64::NAN),
                    });
                }
                self.observations
                    .iter()
                    .map(|obs| one / (obs.score + rho))
                    .collect()
            }
            WeightingScheme::LowPrevalence => {
                if self.mode != Mode::Bernoulli {
                    return Err(Error::LowPrevalenceRequiresBernoulli);
                }
                let positives = self
                    .observations
                    .iter()
                    .filter(|obs| obs.response == one)
                    .count();
                if positives == 0 {
                    return Err(Error::NoPositiveResponses);
                }
                // Unweighted prevalence: the scheme assumes the data came in
                // unweighted and replaces whatever weights are present.
                let prevalence = F::of_count(positives) / F::of_count(self.len());
                self.observations
                    .iter()
                    .map(|obs| {
                        if obs.response == one {
                            one / prevalence
                        } else {
                            one
                        }
                    })
                    .collect()
            }
        };

        let mut observations = self.observations.clone();
        for (obs, w) in observations.iter_mut().zip(weights) {
            obs.weight = w;
        }
        Ok(Self {
            observations,
            covariates: self.covariates.clone(),
            covariate_kinds: self.covariate_kinds.clone(),
            mode: self.mode,
        })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Observations in ascending score order.
    pub fn observations(&self) -> &[Observation<F>] {
        &self.observations
    }

    /// Covariate rows, permuted consistently with the score sort.
    pub fn covariates(&self) -> &Array2<F> {
        &self.covariates
    }

    pub fn covariate_kinds(&self) -> &[CovariateKind] {
        &self.covariate_kinds
    }

    pub fn num_covariates(&self) -> usize {
        self.covariates.ncols()
    }
}
