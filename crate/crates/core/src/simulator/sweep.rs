//! Miss rate against `λT` for the four placement schemes.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{empirical_allocation, fill_caches_selective, fill_caches_systematic, simulate_misses, SimConfig};
use crate::error::{invalid, Error, Result};
use crate::miss_rate::{analytic_miss_rate_random, analytic_miss_rate_selective};
use crate::model::{k_most_popular_allocation, random_allocation, AllocationVector, NetworkParams};
use crate::optimizer::optimal_allocation;
use crate::popularity::PopularityDistribution;
use crate::seeding::{derive_seed, rng_for};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Every user stores `K` files chosen uniformly.
    Random,
    /// Every user stores the `K` most popular files.
    KMostPopular,
    /// Caches realize the optimal allocation exactly.
    Optimal,
    /// Caches filled by selective pushing toward the optimal allocation.
    PushingAlgorithm,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Random,
        Scheme::KMostPopular,
        Scheme::Optimal,
        Scheme::PushingAlgorithm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Random => "random",
            Scheme::KMostPopular => "k_most_popular",
            Scheme::Optimal => "optimal",
            Scheme::PushingAlgorithm => "pushing_algorithm",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| invalid(format!("unknown scheme {s:?}")))
    }
}

/// Inputs shared by every cell of a sweep.
#[derive(Debug, Clone)]
pub struct SweepSetup {
    /// The peer rate is overridden per grid point; everything else is kept.
    pub params: NetworkParams,
    pub dist: PopularityDistribution,
    pub seed: u64,
    pub n_requests: u64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub lambda_t: f64,
    /// Closed-form miss rate of the allocation the scheme realizes. For the
    /// pushing algorithm that is the empirical allocation after filling.
    pub analytic_miss: f64,
    pub empirical_miss: f64,
    pub requests: u64,
    /// Seed of this cell's random stream.
    pub seed: u64,
}

fn cell_label(scheme: Scheme, grid_index: usize) -> String {
    format!("{}/{grid_index}", scheme.name())
}

/// One (scheme, `λT`) cell: place caches, simulate, and pair the estimate
/// with the closed-form value.
pub fn evaluate_scheme<R: Rng + ?Sized>(
    scheme: Scheme,
    lambda_t: f64,
    setup: &SweepSetup,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let params = setup.params.with_lambda_t(lambda_t)?;
    params.validate_for_simulation()?;
    let dist = &setup.dist;
    let (target, users) = match scheme {
        Scheme::Random => {
            let a = random_allocation(&params)?;
            let users = fill_caches_selective(&a, &params, rng)?;
            (a, users)
        }
        Scheme::KMostPopular => {
            let a = k_most_popular_allocation(dist, params.cache_capacity)?;
            let users = fill_caches_systematic(&a, &params, rng)?;
            (a, users)
        }
        Scheme::Optimal => {
            let (a, _) = optimal_allocation(dist, &params, setup.tol)?;
            let users = fill_caches_systematic(&a, &params, rng)?;
            (a, users)
        }
        Scheme::PushingAlgorithm => {
            let (a, _) = optimal_allocation(dist, &params, setup.tol)?;
            let users = fill_caches_selective(&a, &params, rng)?;
            (a, users)
        }
    };
    let analytic = match scheme {
        Scheme::Random => analytic_miss_rate_random(&params)?,
        Scheme::PushingAlgorithm => {
            let realized = AllocationVector::from_vec_unchecked(empirical_allocation(&users, params.n_files));
            analytic_miss_rate_selective(dist, &realized, &params)?
        }
        _ => analytic_miss_rate_selective(dist, &target, &params)?,
    };
    let cfg = SimConfig {
        params,
        dist: dist.clone(),
        target_alloc: target,
        seed: setup.seed,
        n_requests: setup.n_requests,
    };
    let stats = simulate_misses(&cfg, &users, rng)?;
    Ok((analytic, stats.miss_rate()))
}

/// Evaluates every scheme at every grid point. Cells run in parallel, each
/// on a stream derived from the master seed and its (scheme, grid index)
/// label; rows come back in scheme-major, grid order.
pub fn sweep_lambda_t(schemes: &[Scheme], grid: &[f64], setup: &SweepSetup) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(invalid("lambda_t grid is empty"));
    }
    if let Some(x) = grid.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(invalid(format!("lambda_t grid values must be finite and >= 0, got {x}")));
    }
    if schemes.is_empty() {
        return Err(invalid("no schemes requested"));
    }
    let cells: Vec<(Scheme, usize, f64)> = schemes
        .iter()
        .flat_map(|&s| grid.iter().enumerate().map(move |(i, &lt)| (s, i, lt)))
        .collect();
    cells
        .into_par_iter()
        .map(|(scheme, i, lambda_t)| {
            let label = cell_label(scheme, i);
            let mut rng = rng_for(setup.seed, &label);
            let (analytic_miss, empirical_miss) = evaluate_scheme(scheme, lambda_t, setup, &mut rng)?;
            Ok(SweepRow {
                scheme,
                lambda_t,
                analytic_miss,
                empirical_miss,
                requests: setup.n_requests,
                seed: derive_seed(setup.seed, &label),
            })
        })
        .collect()
}
