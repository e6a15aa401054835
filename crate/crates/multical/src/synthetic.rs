//! Synthetic population with closed-form metric values, used as an exact
//! analytic oracle for the metric computations.
//!
//! For an odd positive integer `q` the population has `q(q+1)` observations
//! with linearly increasing scores, unit weights, and responses laid out in
//! `q` blocks of `q+1` entries (block `j` starts with `j` ones). Every metric
//! of interest then has a closed-form expression, evaluated here in double
//! precision.

use crate::dataset::{CovariateKind, Mode, Population};
use crate::error::{Error, Result};
use crate::metrics::SubpopulationView;
use crate::scalar::Real;

/// The odd integer defining the synthetic family, with its derived sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SyntheticSpec {
    q: u32,
}

impl SyntheticSpec {
    pub fn new(q: u32) -> Result<Self> {
        if q == 0 || q.is_multiple_of(2) {
            return Err(Error::QNotOddPositive { q });
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of observations, `q(q+1)`.
    pub fn n0(&self) -> usize {
        let q = self.q as usize;
        q * (q + 1)
    }

    /// Number of proper subpopulations, `(q-1)/2`.
    pub fn ell(&self) -> usize {
        (self.q as usize - 1) / 2
    }

    /// Recovers `q` from a population size of the form `q(q+1)` with `q`
    /// odd; `None` for any other size.
    pub fn infer_from_size(n0: usize) -> Option<Self> {
        if n0 == 0 {
            return None;
        }
        let q = ((((4 * n0 + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
        if q == 0 || q.is_multiple_of(2) || q * (q + 1) != n0 {
            return None;
        }
        Some(Self { q: q as u32 })
    }
}

/// Builds the synthetic population: scores `(2j + q) / (2(q+1)^2)` for
/// 1-based `j`, unit weights, block-structured Bernoulli responses, and one
/// ordinal covariate equal to the 1-based index (so the subpopulation
/// generator has something to split on).
pub fn synth_population<F: Real>(spec: &SyntheticSpec) -> Population<F> {
    let q = spec.q() as usize;
    let n0 = spec.n0();
    let denominator = F::of_count(2 * (q + 1) * (q + 1));
    let mut raw = Vec::with_capacity(n0);
    for j in 1..=n0 {
        let score = F::of_count(2 * j + q) / denominator;
        // Block b (1-based) covers positions (b-1)(q+1)+1 ..= b(q+1) and
        // starts with b ones.
        let block = (j - 1) / (q + 1) + 1;
        let offset = (j - 1) % (q + 1) + 1;
        let response = if offset <= block { F::one() } else { F::zero() };
        raw.push((score, response, F::one()));
    }
    let covariates = ndarray::Array2::from_shape_fn((n0, 1), |(row, _)| F::of_count(row + 1));
    Population::build(&raw, covariates, vec![CovariateKind::Ordinal], Mode::Bernoulli)
        .expect("synthetic construction is valid")
}

/// The canonical middlemost-block subpopulations: for `k = 1..=ell`, the
/// members at 1-based positions `k(q+1)+1 ..= n0 - k(q+1)`. Empty for `q = 1`.
pub fn synth_subpops<'a, F: Real>(
    spec: &SyntheticSpec,
    population: &'a Population<F>,
) -> Result<Vec<SubpopulationView<'a, F>>> {
    if population.len() != spec.n0() {
        return Err(Error::PopulationSizeMismatch {
            expected: spec.n0(),
            got: population.len(),
        });
    }
    let q = spec.q() as usize;
    let n0 = spec.n0();
    let mut views = Vec::with_capacity(spec.ell());
    for k in 1..=spec.ell() {
        let start = k * (q + 1); // 0-based
        let end = n0 - k * (q + 1);
        views.push(SubpopulationView::new(
            population,
            (start..end).collect(),
            k,
        )?);
    }
    Ok(views)
}

/// The closed-form metric values for the synthetic family. Evaluated in
/// double precision; for `q <= 99` every intermediate value is an exactly
/// representable integer, so these are the analytic values to full accuracy.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticOracle {
    /// Kuiper metric of the full population.
    pub d0: f64,
    /// Kuiper metrics of subpopulations `k = 1..=ell`.
    pub dk: Vec<f64>,
    /// Noise levels for `k = 0..=ell`.
    pub sigma_k: Vec<f64>,
    /// The multi-calibration metric.
    pub m: f64,
    /// `max_k D_k`, attained at `k = ell`.
    pub multi_ablate: f64,
    /// Subpopulation attaining both maxima.
    pub argmax_k: usize,
}

/// Evaluates every closed form for the given `q`.
pub fn oracle(spec: &SyntheticSpec) -> SyntheticOracle {
    let q = spec.q() as f64;
    let ell = spec.ell();

    let d0 = (2.0 * q + 3.0) / (8.0 * q * (q + 1.0));
    let dk: Vec<f64> = (1..=ell)
        .map(|k| (2.0 * q + 3.0) / (8.0 * (q - 2.0 * k as f64) * (q + 1.0)))
        .collect();

    let sigma_k: Vec<f64> = (0..=ell)
        .map(|k| {
            let kf = k as f64;
            let prefactor = (q - 2.0 * kf) * (q + 1.0).powi(3) * 12f64.sqrt();
            sigma_polynomial(q, kf).sqrt() / prefactor
        })
        .collect();

    let m_numerator = ((((2.0 * q + 12.0) * q + 27.0) * q + 29.0) * q + 16.0) * q + 4.0;
    let m_denominator =
        (((((3.0 * q + 15.0) * q + 29.0) * q + 27.0) * q + 13.0) * q + 3.0) * q;
    let multi_ablate = (2.0 * q + 3.0) / (8.0 * (q + 1.0));
    let m = multi_ablate * (m_numerator / m_denominator).sqrt();

    SyntheticOracle {
        d0,
        dk,
        sigma_k,
        m,
        multi_ablate,
        argmax_k: ell,
    }
}

/// The polynomial under the square root of the noise-level closed form,
/// grouped by powers of `q` and evaluated in Horner form.
fn sigma_polynomial(q: f64, k: f64) -> f64 {
    let k2 = k * k;
    let k3 = k2 * k;
    let c6 = 2.0;
    let c5 = 12.0;
    let c4 = 27.0 - 12.0 * k2 - 12.0 * k;
    let c3 = 29.0 + 8.0 * k3 - 36.0 * k2 - 42.0 * k;
    let c2 = 16.0 + 24.0 * k3 - 36.0 * k2 - 54.0 * k;
    let c1 = 4.0 + 24.0 * k3 - 12.0 * k2 - 32.0 * k;
    let c0 = 8.0 * k3 - 8.0 * k;
    (((((c6 * q + c5) * q + c4) * q + c3) * q + c2) * q + c1) * q + c0
}
