//! Seeded randomized generation of subpopulations by recursive median splits
//! along covariates.
//!
//! Each generated subpopulation corresponds to a path from the root (the
//! full population) down a binary tree: at every level one covariate is
//! chosen uniformly at random, the node is split at the median of the
//! distinct covariate values within it, and one side is kept with
//! probability 1/2. Every intermediate node of at least `min_size` members
//! along the path is emitted. Nominal covariates get a fresh random category
//! ordering at the start of each path, held fixed until the leaf.
//!
//! Deduplication records split paths, never index sets; index sets can be
//! rematerialized from a path on demand via [`materialize_path`].

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{CovariateKind, Population};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which side of the median a split keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SplitDirection {
    /// Strictly below the median.
    Below,
    /// Greater than or equal to the median.
    AtOrAbove,
}

/// One level of a split path.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitStep<F> {
    pub covariate_index: usize,
    /// Median of the distinct (rank-mapped, for nominal columns) covariate
    /// values within the node at the time of the split.
    pub threshold: F,
    pub direction: SplitDirection,
    /// For nominal covariates: the category values in the random order used
    /// on this path; members compare by their category's position here.
    pub nominal_order: Option<Vec<F>>,
}

impl<F: Real> SplitStep<F> {
    /// The categories this step keeps, in ascending value order. `None` for
    /// ordinal steps.
    fn kept_categories(&self) -> Option<Vec<F>> {
        self.nominal_order.as_ref().map(|order| {
            let mut kept: Vec<F> = order
                .iter()
                .enumerate()
                .filter(|(rank, _)| {
                    let rank = F::of_count(*rank);
                    match self.direction {
                        SplitDirection::Below => rank < self.threshold,
                        SplitDirection::AtOrAbove => rank >= self.threshold,
                    }
                })
                .map(|(_, value)| *value)
                .collect();
            sort_values(&mut kept);
            kept
        })
    }

    /// Canonical identity of the split. Two nominal steps that keep the same
    /// category set are the same split, however the path's random category
    /// ordering happened to express it.
    fn key(&self) -> StepKey {
        match self.kept_categories() {
            None => StepKey::Ordinal {
                covariate_index: self.covariate_index,
                threshold_bits: self.threshold.key_bits(),
                direction: self.direction,
            },
            Some(kept) => StepKey::Nominal {
                covariate_index: self.covariate_index,
                kept_bits: kept.iter().map(|v| v.key_bits()).collect(),
            },
        }
    }

    /// Renders the step as `name < t`, `name >= t`, or `name in {..}` for
    /// nominal columns. Missing names fall back to `x{index}`.
    pub fn describe(&self, names: &[String]) -> String {
        let name = names
            .get(self.covariate_index)
            .cloned()
            .unwrap_or_else(|| format!("x{}", self.covariate_index));
        match self.kept_categories() {
            None => match self.direction {
                SplitDirection::Below => format!("{name} < {}", self.threshold),
                SplitDirection::AtOrAbove => format!("{name} >= {}", self.threshold),
            },
            Some(kept) => {
                let rendered: Vec<String> =
                    kept.iter().map(|value| format!("{value}")).collect();
                format!("{name} in {{{}}}", rendered.join(", "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum StepKey {
    Ordinal {
        covariate_index: usize,
        threshold_bits: u64,
        direction: SplitDirection,
    },
    Nominal {
        covariate_index: usize,
        kept_bits: Vec<u64>,
    },
}

/// A generated subpopulation: its member positions in the score-sorted
/// population and the split path that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedSubpop<F> {
    /// Strictly increasing positions into the score-sorted population.
    pub indices: Vec<usize>,
    /// Splits from the root; never empty (the full population is label 0 and
    /// is not produced by the generator).
    pub path: Vec<SplitStep<F>>,
    /// Label `k >= 1`.
    pub label: usize,
}

impl<F: Real> GeneratedSubpop<F> {
    /// Human-readable split path, levels joined by " & ".
    pub fn describe(&self, names: &[String]) -> String {
        describe_path(&self.path, names)
    }
}

/// Renders a split path; the empty path is the full population.
pub fn describe_path<F: Real>(path: &[SplitStep<F>], names: &[String]) -> String {
    if path.is_empty() {
        return "(full population)".to_string();
    }
    path.iter()
        .map(|step| step.describe(names))
        .collect::<Vec<_>>()
        .join(" & ")
}

/// Configuration for [`generate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorConfig {
    /// Number of distinct subpopulations to generate.
    pub ell: usize,
    /// Minimum subpopulation size.
    pub min_size: usize,
    /// Seed of the ChaCha8 stream driving every random choice.
    pub seed: u64,
    /// Cap on root-to-leaf path restarts.
    pub max_attempts: usize,
}

impl GeneratorConfig {
    /// `min_size` defaults to 10 and `max_attempts` to `100 * ell`.
    pub fn new(ell: usize, seed: u64) -> Self {
        Self {
            ell,
            min_size: 10,
            seed,
            max_attempts: 100 * ell,
        }
    }
}

/// A nominal covariate's category ordering for one path: the shuffled
/// category values and each category's rank within them.
struct PathOrder<F> {
    order: Vec<F>,
    ranks: HashMap<u64, usize>,
}

/// Generates up to `ell` distinct subpopulations of at least `min_size`
/// members each. The full population is not included; callers treat it as
/// label 0. Output is fully determined by the population and the seed.
///
/// Paths restart at the root until `ell` distinct subpopulations exist or
/// `max_attempts` restarts are exhausted; exhaustion with partial results
/// returns them, exhaustion with none is an error. Deduplication compares
/// split paths level by level, with nominal levels identified by the set of
/// categories they keep (the path's random category ordering is incidental).
pub fn generate<F: Real>(
    population: &Population<F>,
    config: &GeneratorConfig,
) -> Result<Vec<GeneratedSubpop<F>>> {
    if config.ell < 1 {
        return Err(Error::InvalidGeneratorConfig("ell must be at least 1"));
    }
    if config.min_size < 1 {
        return Err(Error::InvalidGeneratorConfig("min_size must be at least 1"));
    }
    let p = population.num_covariates();
    if p == 0 {
        return Err(Error::NoCovariates);
    }
    if config.min_size > population.len() {
        return Err(Error::MinSizeExceedsPopulation {
            min_size: config.min_size,
            population: population.len(),
        });
    }

    let covariates = population.covariates();
    // Distinct categories per nominal column over the full population, in
    // value order; each path shuffles a copy.
    let base_categories: Vec<Option<Vec<F>>> = (0..p)
        .map(|column| match population.covariate_kinds()[column] {
            CovariateKind::Ordinal => None,
            CovariateKind::Nominal => {
                let mut values: Vec<F> = covariates.column(column).to_vec();
                sort_values(&mut values);
                values.dedup_by(|a, b| a == b);
                Some(values)
            }
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut emitted: Vec<GeneratedSubpop<F>> = Vec::new();
    let mut seen: HashSet<Vec<StepKey>> = HashSet::new();
    let mut attempts = 0usize;

    while emitted.len() < config.ell && attempts < config.max_attempts {
        attempts += 1;

        // Fresh category orderings for every nominal covariate, fixed for
        // the whole path.
        let path_orders: Vec<Option<PathOrder<F>>> = base_categories
            .iter()
            .map(|categories| {
                categories.as_ref().map(|values| {
                    let mut order = values.clone();
                    order.shuffle(&mut rng);
                    let ranks = order
                        .iter()
                        .enumerate()
                        .map(|(rank, v)| (v.key_bits(), rank))
                        .collect();
                    PathOrder { order, ranks }
                })
            })
            .collect();

        let mut node: Vec<usize> = (0..population.len()).collect();
        let mut path: Vec<SplitStep<F>> = Vec::new();
        let mut keys: Vec<StepKey> = Vec::new();

        loop {
            let covariate_index = rng.random_range(0..p);
            let below = rng.random_bool(0.5);

            let mapped = |row: usize| -> F {
                let value = covariates[[row, covariate_index]];
                match &path_orders[covariate_index] {
                    None => value,
                    Some(path_order) => F::of_count(path_order.ranks[&value.key_bits()]),
                }
            };

            let mut distinct: Vec<F> = node.iter().map(|&row| mapped(row)).collect();
            sort_values(&mut distinct);
            distinct.dedup_by(|a, b| a == b);
            let threshold = median_of_distinct(&distinct);

            let child: Vec<usize> = node
                .iter()
                .copied()
                .filter(|&row| {
                    let v = mapped(row);
                    if below {
                        v < threshold
                    } else {
                        v >= threshold
                    }
                })
                .collect();

            // A split that leaves the node unchanged (constant covariate)
            // would loop forever; end the path. A too-small child is
            // discarded and ends the path too.
            if child.len() == node.len() || child.len() < config.min_size {
                break;
            }

            let step = SplitStep {
                covariate_index,
                threshold,
                direction: if below {
                    SplitDirection::Below
                } else {
                    SplitDirection::AtOrAbove
                },
                nominal_order: path_orders[covariate_index]
                    .as_ref()
                    .map(|path_order| path_order.order.clone()),
            };
            keys.push(step.key());
            path.push(step);

            if seen.insert(keys.clone()) {
                emitted.push(GeneratedSubpop {
                    indices: child.clone(),
                    path: path.clone(),
                    label: emitted.len() + 1,
                });
                if emitted.len() >= config.ell {
                    break;
                }
            }

            node = child;
        }
    }

    if emitted.is_empty() {
        return Err(Error::GeneratorExhausted {
            attempts: config.max_attempts,
        });
    }
    Ok(emitted)
}

/// Rebuilds the index set a split path selects, starting from the full
/// population. Inverse of the walk in [`generate`].
pub fn materialize_path<F: Real>(population: &Population<F>, path: &[SplitStep<F>]) -> Vec<usize> {
    let covariates = population.covariates();
    let mut node: Vec<usize> = (0..population.len()).collect();
    for step in path {
        let ranks: Option<HashMap<u64, usize>> = step.nominal_order.as_ref().map(|order| {
            order
                .iter()
                .enumerate()
                .map(|(rank, v)| (v.key_bits(), rank))
                .collect()
        });
        node.retain(|&row| {
            let raw = covariates[[row, step.covariate_index]];
            let v = match &ranks {
                None => raw,
                Some(map) => match map.get(&raw.key_bits()) {
                    Some(&rank) => F::of_count(rank),
                    None => return false,
                },
            };
            match step.direction {
                SplitDirection::Below => v < step.threshold,
                SplitDirection::AtOrAbove => v >= step.threshold,
            }
        });
    }
    node
}

/// Total order with NaN sorted last, so degenerate covariates cannot panic.
fn sort_values<F: Real>(values: &mut [F]) {
    values.sort_unstable_by(|a, b| match a.partial_cmp(b) {
        Some(ordering) => ordering,
        None => a.is_nan().cmp(&b.is_nan()),
    });
}

/// Median of sorted distinct values: the middle one for an odd count, the
/// arithmetic mean of the two middle ones for an even count.
fn median_of_distinct<F: Real>(sorted_distinct: &[F]) -> F {
    let n = sorted_distinct.len();
    if n % 2 == 1 {
        sorted_distinct[n / 2]
    } else {
        (sorted_distinct[n / 2 - 1] + sorted_distinct[n / 2]) / F::of(2.0)
    }
}
