//! Ranked request distributions.
//!
//! Files are identified by popularity rank. Internally rank 0 is the most
//! requested file; anything written for people uses 1-based ranks.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A request pmf sorted so that `probs[0] >= probs[1] >= ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityDistribution {
    probs: Vec<f64>,
    alpha: Option<f64>,
    /// `permutation[i]` is the caller's original index of sorted rank `i`.
    permutation: Vec<usize>,
    cumulative: Vec<f64>,
}

impl PopularityDistribution {
    /// Zipf-like law: `p_r ∝ r^(-alpha)` for 1-based rank `r`.
    ///
    /// Any `alpha >= 0` is accepted; `alpha = 0` is the uniform distribution.
    pub fn zipf(n_files: usize, alpha: f64) -> Result<Self> {
        if n_files == 0 {
            return Err(invalid("zipf distribution needs at least one file"));
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(invalid(format!("zipf exponent must be finite and >= 0, got {alpha}")));
        }
        let weights: Vec<f64> = (1..=n_files).map(|r| (r as f64).powf(-alpha)).collect();
        let probs = normalize(&weights);
        Ok(Self::from_sorted(probs, Some(alpha), (0..n_files).collect()))
    }

    /// Arbitrary positive weights. They are normalized and sorted into
    /// nonincreasing order; ties keep their original relative order.
    pub fn from_raw(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("distribution needs at least one entry"));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w > 0.0) || !w.is_finite())
        {
            return Err(invalid(format!("entry {i} must be positive and finite, got {w}")));
        }
        let mut order: Vec<usize> = (0..weights.len()).collect();
        // sort_by is stable, so equal weights stay in index order.
        order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
        let sorted: Vec<f64> = order.iter().map(|&i| weights[i]).collect();
        Ok(Self::from_sorted(normalize(&sorted), None, order))
    }

    /// Uniform over `n_files`.
    pub fn uniform(n_files: usize) -> Result<Self> {
        Self::zipf(n_files, 0.0)
    }

    fn from_sorted(probs: Vec<f64>, alpha: Option<f64>, permutation: Vec<usize>) -> Self {
        let cumulative = cumulative_table(&probs);
        Self {
            probs,
            alpha,
            permutation,
            cumulative,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability of the 0-based rank `rank`.
    pub fn prob(&self, rank: usize) -> f64 {
        self.probs[rank]
    }

    /// Skew exponent, when built by [`PopularityDistribution::zipf`].
    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    /// Maps sorted rank to the index the caller originally supplied.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Draws a 0-based rank by inverse CDF.
    pub fn sample_rank<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        inverse_cdf(&self.cumulative, rng.random::<f64>())
    }
}

fn normalize(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

/// Running sums of `weights`, rescaled so the last entry is exactly 1.
pub(crate) fn cumulative_table(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut table: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    if acc > 0.0 {
        for c in &mut table {
            *c /= acc;
        }
    }
    if let Some(last) = table.last_mut() {
        *last = 1.0;
    }
    table
}

/// Smallest index whose cumulative weight exceeds `u` in `[0, 1)`.
pub(crate) fn inverse_cdf(table: &[f64], u: f64) -> usize {
    table.partition_point(|&c| c <= u).min(table.len() - 1)
}

/// Serialized form used in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DistributionSpec {
    Zipf { n: usize, alpha: f64 },
    Raw { probs: Vec<f64> },
}

impl DistributionSpec {
    pub fn build(&self) -> Result<PopularityDistribution> {
        match self {
            DistributionSpec::Zipf { n, alpha } => PopularityDistribution::zipf(*n, *alpha),
            DistributionSpec::Raw { probs } => PopularityDistribution::from_raw(probs),
        }
    }

    pub fn n_files(&self) -> usize {
        match self {
            DistributionSpec::Zipf { n, .. } => *n,
            DistributionSpec::Raw { probs } => probs.len(),
        }
    }
}
