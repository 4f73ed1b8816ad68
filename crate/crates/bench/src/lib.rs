//! Fixtures shared by the criterion benches.

use coopcache_core::{NetworkParams, PopularityDistribution};

/// Desk-scale network at the given `λT`.
pub fn desk_params(lambda_t: f64) -> NetworkParams {
    NetworkParams {
        lambda_user: lambda_t,
        lambda_ap: 0.0,
        patience: 1.0,
        n_files: 1000,
        cache_capacity: 10,
        n_users: 10_000,
    }
}

pub fn paper_params(lambda_t: f64) -> NetworkParams {
    NetworkParams {
        n_files: 10_000,
        cache_capacity: 100,
        ..desk_params(lambda_t)
    }
}

pub fn zipf(params: &NetworkParams) -> PopularityDistribution {
    PopularityDistribution::zipf(params.n_files, 1.0).expect("valid zipf parameters")
}
