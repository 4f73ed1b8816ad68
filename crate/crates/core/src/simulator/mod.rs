//! Monte Carlo of the contact model.
//!
//! Caches are filled once and stay fixed. Each request comes from a uniformly
//! chosen user for a file drawn from the popularity distribution. It hits if
//! the file is in the requester's own cache, if the requester meets at least
//! one access point within the patience time, or if any peer met within the
//! patience time caches the file.

mod placement;
mod sweep;

pub use placement::{empirical_allocation, fill_caches_selective, fill_caches_systematic};
pub use sweep::{evaluate_scheme, sweep_lambda_t, Scheme, SweepRow, SweepSetup};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{invalid, Result};
use crate::model::{AllocationVector, NetworkParams};
use crate::popularity::PopularityDistribution;

/// Files held by one user, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UserState {
    cache: Vec<usize>,
}

impl UserState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(k: usize) -> Self {
        Self {
            cache: Vec::with_capacity(k),
        }
    }

    pub fn contains(&self, rank: usize) -> bool {
        self.cache.binary_search(&rank).is_ok()
    }

    /// Adds `rank`; returns false if it was already cached.
    pub fn insert(&mut self, rank: usize) -> bool {
        match self.cache.binary_search(&rank) {
            Ok(_) => false,
            Err(pos) => {
                self.cache.insert(pos, rank);
                true
            }
        }
    }

    pub fn len(&self) -> usize {
        self.cache.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cache.is_empty()
    }

    pub fn files(&self) -> &[usize] {
        &self.cache
    }
}

/// Request and miss counts, in total and per file rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissStats {
    pub requests: u64,
    pub misses: u64,
    pub per_file_requests: Vec<u64>,
    pub per_file_misses: Vec<u64>,
}

impl MissStats {
    pub fn new(n_files: usize) -> Self {
        Self {
            requests: 0,
            misses: 0,
            per_file_requests: vec![0; n_files],
            per_file_misses: vec![0; n_files],
        }
    }

    pub fn record(&mut self, rank: usize, miss: bool) {
        self.requests += 1;
        self.per_file_requests[rank] += 1;
        if miss {
            self.misses += 1;
            self.per_file_misses[rank] += 1;
        }
    }

    pub fn miss_rate(&self) -> f64 {
        if self.requests == 0 {
            return 0.0;
        }
        self.misses as f64 / self.requests as f64
    }

    pub fn file_miss_rate(&self, rank: usize) -> Option<f64> {
        let r = self.per_file_requests[rank];
        (r > 0).then(|| self.per_file_misses[rank] as f64 / r as f64)
    }

    /// Component-wise sum, for pooling independent replications.
    pub fn merge(&mut self, other: &MissStats) {
        assert_eq!(self.per_file_requests.len(), other.per_file_requests.len());
        self.requests += other.requests;
        self.misses += other.misses;
        for (a, b) in self.per_file_requests.iter_mut().zip(&other.per_file_requests) {
            *a += b;
        }
        for (a, b) in self.per_file_misses.iter_mut().zip(&other.per_file_misses) {
            *a += b;
        }
    }
}

/// Everything one replication needs.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub params: NetworkParams,
    pub dist: PopularityDistribution,
    pub target_alloc: AllocationVector,
    pub seed: u64,
    pub n_requests: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate_for_simulation()?;
        if self.n_requests == 0 {
            return Err(invalid("n_requests must be >= 1"));
        }
        if self.dist.len() != self.params.n_files || self.target_alloc.len() != self.params.n_files {
            return Err(invalid("distribution, allocation and n_files disagree"));
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Fills caches with the selective pushing process, then simulates requests.
    pub fn run(&self) -> Result<MissStats> {
        self.validate()?;
        let mut rng = self.rng();
        let users = fill_caches_selective(&self.target_alloc, &self.params, &mut rng)?;
        simulate_misses(self, &users, &mut rng)
    }
}

fn poisson(mean: f64) -> Result<Option<Poisson<f64>>> {
    if mean <= 0.0 {
        return Ok(None);
    }
    Poisson::new(mean)
        .map(Some)
        .map_err(|e| invalid(format!("poisson mean {mean}: {e}")))
}

fn draw(p: &Option<Poisson<f64>>, rng: &mut impl Rng) -> u64 {
    p.as_ref().map_or(0, |p| p.sample(rng) as u64)
}

/// Runs `cfg.n_requests` requests against fixed `users`.
pub fn simulate_misses<R: Rng + ?Sized>(
    cfg: &SimConfig,
    users: &[UserState],
    rng: &mut R,
) -> Result<MissStats> {
    cfg.validate()?;
    if users.len() != cfg.params.n_users {
        return Err(invalid(format!(
            "{} user states for n_users = {}",
            users.len(),
            cfg.params.n_users
        )));
    }
    let n_users = users.len();
    let ap = poisson(cfg.params.lambda_ap * cfg.params.patience)?;
    let peers = poisson(cfg.params.lambda_t())?;
    let mut stats = MissStats::new(cfg.params.n_files);
    let mut rng = rng;

    for _ in 0..cfg.n_requests {
        let requester = rng.random_range(0..n_users);
        let rank = cfg.dist.sample_rank(&mut rng);
        if users[requester].contains(rank) {
            stats.record(rank, false);
            continue;
        }
        if draw(&ap, &mut rng) >= 1 {
            stats.record(rank, false);
            continue;
        }
        // Each peer is met at most once: sample without replacement.
        let met = (draw(&peers, &mut rng) as usize).min(n_users - 1);
        let hit = met > 0
            && index::sample(&mut rng, n_users - 1, met).iter().any(|i| {
                let peer = if i >= requester { i + 1 } else { i };
                users[peer].contains(rank)
            });
        stats.record(rank, !hit);
    }
    Ok(stats)
}
