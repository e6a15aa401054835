//! Cumulative differences, Kuiper metrics, null-hypothesis noise levels, the
//! SNR-weighted multi-calibration metric, and aggregation over seeds.

use crate::dataset::{Mode, Observation, Population};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Absolute threshold below which a Kuiper value and its noise level are both
/// treated as zero when forming normalized ratios. Well below any
/// statistically meaningful value, well above double-precision rounding noise.
pub const ZERO_GUARD: f64 = 1e-12;

/// An ordered index subset of a score-sorted population.
///
/// Indices are strictly increasing positions into the population, so members
/// are always visited in ascending score order. Label 0 is reserved for the
/// full population.
#[derive(Clone, Debug)]
pub struct SubpopulationView<'a, F: Real> {
    population: &'a Population<F>,
    indices: Vec<usize>,
    label: usize,
}

impl<'a, F: Real> SubpopulationView<'a, F> {
    /// The full population as subpopulation 0.
    pub fn full(population: &'a Population<F>) -> Result<Self> {
        if population.is_empty() {
            return Err(Error::EmptySubpopulation { label: 0 });
        }
        Ok(Self {
            population,
            indices: (0..population.len()).collect(),
            label: 0,
        })
    }

    /// A proper subpopulation with label `>= 1`, or the full population when
    /// `label == 0` and `indices` covers every position.
    pub fn new(population: &'a Population<F>, indices: Vec<usize>, label: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptySubpopulation { label });
        }
        for (position, window) in indices.windows(2).enumerate() {
            if window[0] >= window[1] {
                return Err(Error::IndicesNotIncreasing {
                    label,
                    position: position + 1,
                });
            }
        }
        let last = *indices.last().expect("nonempty");
        if last >= population.len() {
            return Err(Error::IndexOutOfBounds {
                label,
                index: last,
                len: population.len(),
            });
        }
        if label == 0 && indices.len() != population.len() {
            return Err(Error::ReservedFullLabel);
        }
        Ok(Self {
            population,
            indices,
            label,
        })
    }

    pub fn population(&self) -> &'a Population<F> {
        self.population
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty index sets
    }

    pub fn is_full_population(&self) -> bool {
        self.indices.len() == self.population.len()
    }

    fn members(&self) -> impl Iterator<Item = &Observation<F>> + '_ {
        let observations = self.population.observations();
        self.indices.iter().map(move |&i| &observations[i])
    }

    /// Total weight over members, summed sequentially in index order.
    pub fn total_weight(&self) -> F {
        let mut total = F::zero();
        for obs in self.members() {
            total += obs.weight;
        }
        total
    }
}

/// The `n_k + 1` cumulative weighted prediction-response differences,
/// starting from 0: entry `j` is the weighted sum of `response - score` over
/// the first `j` members, divided by the total member weight.
pub fn cumulative_differences<F: Real>(view: &SubpopulationView<'_, F>) -> Vec<F> {
    let total = view.total_weight();
    let mut out = Vec::with_capacity(view.len() + 1);
    out.push(F::zero());
    let mut running = F::zero();
    for obs in view.members() {
        running += (obs.response - obs.score) * obs.weight;
        out.push(running / total);
    }
    out
}

/// The Kuiper metric: max minus min of the cumulative differences (the
/// leading 0 included). Equivalently, the largest absolute total
/// miscalibration over any interval of consecutive members.
pub fn kuiper<F: Real>(view: &SubpopulationView<'_, F>) -> F {
    let total = view.total_weight();
    let mut running = F::zero();
    let mut max = F::zero();
    let mut min = F::zero();
    for obs in view.members() {
        running += (obs.response - obs.score) * obs.weight;
        let c = running / total;
        max = max.max(c);
        min = min.min(c);
    }
    max - min
}

/// Standard deviation of the final cumulative difference under the null
/// hypothesis that each response is an independent Bernoulli draw with mean
/// equal to its score: `sqrt(sum S(1-S) W^2) / sum W` over members.
pub fn sigma_bernoulli<F: Real>(view: &SubpopulationView<'_, F>) -> Result<F> {
    if view.population().mode() != Mode::Bernoulli {
        return Err(Error::RequiresBernoulliMode);
    }
    let one = F::one();
    let mut sum = F::zero();
    let mut total = F::zero();
    for obs in view.members() {
        sum += obs.score * (one - obs.score) * obs.weight * obs.weight;
        total += obs.weight;
    }
    Ok(sum.sqrt() / total)
}

/// Noise-level estimate for real-valued responses, built from differences of
/// adjacent residuals so that any linear trend in the miscalibration cancels.
pub fn sigma_regression<F: Real>(view: &SubpopulationView<'_, F>) -> Result<F> {
    let n = view.len();
    if n < 2 {
        return Err(Error::TooFewForRegression { size: n });
    }
    let members: Vec<&Observation<F>> = view.members().collect();
    let mut numerator = F::zero();
    for pair in members.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let dd = (a.response - a.score) - (b.response - b.score);
        let ws = a.weight + b.weight;
        numerator += dd * dd * ws * ws;
    }
    let mut total = F::zero();
    for obs in &members {
        total += obs.weight;
    }
    let mut middle = F::zero();
    for obs in &members[1..n - 1] {
        middle += obs.weight;
    }
    let two = F::of(2.0);
    let four = F::of(4.0);
    let denominator = four * total * (members[0].weight + members[n - 1].weight + two * middle);
    Ok((numerator / denominator).sqrt())
}

/// The exact factor `2 sqrt(2/pi)`, about 1.5957691: the expected Kuiper
/// metric under the null hypothesis is this multiple of the noise level, in
/// the limit of many observations.
pub fn null_expectation_factor<F: Real>() -> F {
    let two = F::of(2.0);
    two * (two / F::PI()).sqrt()
}

/// Expected Kuiper metric under the null hypothesis of perfect calibration:
/// `2 sqrt(2/pi) * sigma`.
pub fn expected_kuiper_null<F: Real>(sigma: F) -> Result<F> {
    if sigma < F::zero() || sigma.is_nan() {
        return Err(Error::NegativeSigma {
            value: sigma.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(null_expectation_factor::<F>() * sigma)
}

/// Per-subpopulation metrics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubpopMetrics<F> {
    pub label: usize,
    /// Kuiper metric `D_k`.
    pub kuiper: F,
    /// Noise level `sigma_k` under the null hypothesis.
    pub sigma: F,
    /// `2 sqrt(2/pi) * sigma_k`, exactly by construction.
    pub expected_kuiper_null: F,
    /// `D_k / sigma_k`, 0 when both are below [`ZERO_GUARD`].
    pub normalized: F,
    pub size: usize,
    pub total_weight: F,
}

/// Population-level multi-calibration report.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport<F> {
    /// Metrics per subpopulation, in the order the views were given
    /// (position 0 is the full population).
    pub per_subpop: Vec<SubpopMetrics<F>>,
    /// `max_k D_k * sigma_0 / sigma_k`; the k = 0 term is `D_0` itself.
    pub multical: F,
    /// `max_k D_k`, with no noise normalization.
    pub multi_ablate: F,
    /// Label attaining `multical` (ties broken by smallest label).
    pub argmax_multical: usize,
    /// Label attaining `multi_ablate` (ties broken by smallest label).
    pub argmax_ablate: usize,
    /// Expected null Kuiper metric for the `multi_ablate` argmax
    /// subpopulation.
    pub expectation_at_argmax: F,
}

/// Mean and twice the standard error of a metric over repeated seeds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeedAggregate<F> {
    pub mean: F,
    /// `2 sqrt(unbiased variance / count)`.
    pub twice_sem: F,
    pub count: usize,
}

/// Evaluates every subpopulation and combines them into the multi-calibration
/// metric, weighting each Kuiper metric by its signal-to-noise ratio.
///
/// `views[0]` must be the full population (label 0). The population's mode
/// selects the noise estimator. A subpopulation whose noise level is zero
/// while its Kuiper metric is not is rejected rather than silently yielding
/// an infinite ratio.
pub fn multicalibration<F: Real>(
    population: &Population<F>,
    views: &[SubpopulationView<'_, F>],
) -> Result<MetricsReport<F>> {
    let first = views.first().ok_or(Error::NoSubpopulations)?;
    if !core::ptr::eq(first.population(), population)
        || first.label() != 0
        || !first.is_full_population()
    {
        return Err(Error::FirstViewNotFullPopulation);
    }

    let guard = F::of(ZERO_GUARD);
    let factor = null_expectation_factor::<F>();
    let mut per_subpop = Vec::with_capacity(views.len());
    for view in views {
        if !core::ptr::eq(view.population(), population) {
            return Err(Error::ViewPopulationMismatch {
                label: view.label(),
            });
        }
        let d = kuiper(view);
        let sigma = match population.mode() {
            Mode::Bernoulli => sigma_bernoulli(view)?,
            Mode::Regression => sigma_regression(view)?,
        };
        let normalized = if sigma <= guard {
            if d <= guard {
                F::zero()
            } else {
                return Err(Error::SigmaZeroWithSignal {
                    label: view.label(),
                    kuiper: d.to_f64().unwrap_or(f64::NAN),
                });
            }
        } else {
            d / sigma
        };
        per_subpop.push(SubpopMetrics {
            label: view.label(),
            kuiper: d,
            sigma,
            expected_kuiper_null: factor * sigma,
            normalized,
            size: view.len(),
            total_weight: view.total_weight(),
        });
    }

    let sigma0 = per_subpop[0].sigma;
    // The k = 0 argument of the max is D_0 itself; sigma_0/sigma_0 is never
    // computed by division.
    let mut multical = per_subpop[0].kuiper;
    let mut argmax_multical = per_subpop[0].label;
    for m in &per_subpop[1..] {
        let term = if m.sigma <= guard {
            F::zero() // the signal was verified to be below the guard too
        } else {
            m.kuiper * sigma0 / m.sigma
        };
        if term > multical || (term == multical && m.label < argmax_multical) {
            multical = term;
            argmax_multical = m.label;
        }
    }

    let mut multi_ablate = per_subpop[0].kuiper;
    let mut argmax_ablate = per_subpop[0].label;
    let mut ablate_position = 0;
    for (position, m) in per_subpop.iter().enumerate().skip(1) {
        if m.kuiper > multi_ablate || (m.kuiper == multi_ablate && m.label < argmax_ablate) {
            multi_ablate = m.kuiper;
            argmax_ablate = m.label;
            ablate_position = position;
        }
    }
    let expectation_at_argmax = per_subpop[ablate_position].expected_kuiper_null;

    Ok(MetricsReport {
        per_subpop,
        multical,
        multi_ablate,
        argmax_multical,
        argmax_ablate,
        expectation_at_argmax,
    })
}

/// Mean and twice the standard error of the mean, with Bessel's correction in
/// the variance estimate.
pub fn aggregate_over_seeds<F: Real>(values: &[F]) -> Result<SeedAggregate<F>> {
    let count = values.len();
    if count < 2 {
        return Err(Error::TooFewSeedValues { count });
    }
    let n = F::of_count(count);
    let mut sum = F::zero();
    for &v in values {
        sum += v;
    }
    let mean = sum / n;
    let mut squares = F::zero();
    for &v in values {
        squares += (v - mean) * (v - mean);
    }
    let variance = squares / F::of_count(count - 1);
    Ok(SeedAggregate {
        mean,
        twice_sem: F::of(2.0) * (variance / n).sqrt(),
        count,
    })
}
