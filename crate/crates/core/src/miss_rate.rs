//! Closed-form miss rates of the first (duration-free) model.

use crate::error::{invalid, Result};
use crate::model::{AllocationVector, NetworkParams};
use crate::popularity::PopularityDistribution;

/// Miss probability of a single file cached with probability `q`:
/// `(1 - q) exp(-T (λ_ap + λ q))`.
pub fn file_miss_rate(q: f64, params: &NetworkParams) -> f64 {
    (1.0 - q) * (-params.patience * (params.lambda_ap + params.lambda_user * q)).exp()
}

/// Miss rate when every user caches `K` files chosen uniformly at random.
pub fn analytic_miss_rate_random(params: &NetworkParams) -> Result<f64> {
    params.validate()?;
    let share = params.cache_capacity as f64 / params.n_files as f64;
    Ok((1.0 - share) * (-params.patience * (params.lambda_ap + params.lambda_user * share)).exp())
}

/// Request-weighted miss rate of an arbitrary allocation,
/// `e^{-λ_ap T} Σ p_n (1 - q_n) e^{-λT q_n}`.
pub fn analytic_miss_rate_selective(
    dist: &PopularityDistribution,
    alloc: &AllocationVector,
    params: &NetworkParams,
) -> Result<f64> {
    if dist.len() != alloc.len() {
        return Err(invalid(format!(
            "distribution has {} files but allocation has {}",
            dist.len(),
            alloc.len()
        )));
    }
    Ok(params.ap_factor() * peer_objective(dist.probs(), alloc.q(), params.lambda_t()))
}

/// The quantity the optimizer minimizes: `Σ p_n (1 - q_n) e^{-λT q_n}`.
pub fn peer_objective(probs: &[f64], q: &[f64], lambda_t: f64) -> f64 {
    probs
        .iter()
        .zip(q)
        .map(|(&p, &q)| p * (1.0 - q) * (-lambda_t * q).exp())
        .sum()
}
