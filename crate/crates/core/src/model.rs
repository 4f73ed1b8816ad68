//! Network constants and cache allocations.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::popularity::PopularityDistribution;

/// Global constants of the contact model.
///
/// Rates and the patience time share one time unit. `lambda_user` is the
/// aggregate rate at which one user meets other users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub lambda_user: f64,
    pub lambda_ap: f64,
    pub patience: f64,
    pub n_files: usize,
    pub cache_capacity: usize,
    pub n_users: usize,
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda_user", self.lambda_user),
            ("lambda_ap", self.lambda_ap),
            ("patience", self.patience),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.n_files == 0 {
            return Err(invalid("n_files must be >= 1"));
        }
        if self.cache_capacity == 0 || self.cache_capacity > self.n_files {
            return Err(invalid(format!(
                "cache_capacity must be in [1, n_files={}], got {}",
                self.n_files, self.cache_capacity
            )));
        }
        Ok(())
    }

    /// Checks made before running the simulator, on top of [`validate`](Self::validate).
    pub fn validate_for_simulation(&self) -> Result<()> {
        self.validate()?;
        if self.n_users < 2 {
            return Err(invalid(format!("simulation needs n_users >= 2, got {}", self.n_users)));
        }
        Ok(())
    }

    /// Expected number of peer encounters within the patience time.
    pub fn lambda_t(&self) -> f64 {
        self.lambda_user * self.patience
    }

    /// Probability of meeting no access point within the patience time.
    pub fn ap_factor(&self) -> f64 {
        (-self.lambda_ap * self.patience).exp()
    }

    /// Same network with the peer rate rescaled so that `λT = lambda_t`.
    pub fn with_lambda_t(&self, lambda_t: f64) -> Result<Self> {
        if !(lambda_t >= 0.0) {
            return Err(invalid(format!("lambda_t must be >= 0, got {lambda_t}")));
        }
        let mut out = *self;
        if self.patience > 0.0 {
            out.lambda_user = lambda_t / self.patience;
        } else if lambda_t == 0.0 {
            out.lambda_user = 0.0;
        } else {
            return Err(invalid("cannot reach lambda_t > 0 with zero patience"));
        }
        Ok(out)
    }
}

/// Per-file probabilities `q_n` that an arbitrary user caches file `n`.
///
/// Equivalently the expected number of copies of each file per cache, so a
/// feasible vector has entries in `[0, 1]` summing to the cache capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AllocationVector(Vec<f64>);

impl AllocationVector {
    /// Wraps `q`, checking bounds and that the entries sum to `capacity` within `tol`.
    pub fn new(q: Vec<f64>, capacity: usize, tol: f64) -> Result<Self> {
        let a = Self(q);
        a.check_feasible(capacity, tol)?;
        Ok(a)
    }

    /// Wraps `q` without checks, e.g. for empirical estimates.
    pub fn from_vec_unchecked(q: Vec<f64>) -> Self {
        Self(q)
    }

    pub fn check_feasible(&self, capacity: usize, tol: f64) -> Result<()> {
        if let Some((i, q)) = self.0.iter().enumerate().find(|(_, q)| !(0.0..=1.0).contains(*q)) {
            return Err(invalid(format!("q[{i}] = {q} is outside [0, 1]")));
        }
        let sum = self.sum();
        if (sum - capacity as f64).abs() > tol {
            return Err(invalid(format!("allocation sums to {sum}, expected {capacity}")));
        }
        Ok(())
    }

    pub fn q(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }

    /// Number of files with nonzero cache probability.
    pub fn support(&self) -> usize {
        self.0.iter().filter(|&&q| q > 0.0).count()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Every user caches the `k` most requested files.
pub fn k_most_popular_allocation(dist: &PopularityDistribution, k: usize) -> Result<AllocationVector> {
    let n = dist.len();
    if k > n {
        return Err(invalid(format!("cannot cache {k} of {n} files")));
    }
    Ok(AllocationVector((0..n).map(|i| if i < k { 1.0 } else { 0.0 }).collect()))
}

/// Uniform `K/N`: what pushing files chosen uniformly at random converges to.
pub fn random_allocation(params: &NetworkParams) -> Result<AllocationVector> {
    params.validate()?;
    let q = params.cache_capacity as f64 / params.n_files as f64;
    Ok(AllocationVector(vec![q; params.n_files]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, k: usize) -> NetworkParams {
        NetworkParams {
            lambda_user: 1.0,
            lambda_ap: 0.0,
            patience: 1.0,
            n_files: n,
            cache_capacity: k,
            n_users: 10,
        }
    }

    #[test]
    fn k_most_popular_examples() {
        let d3 = PopularityDistribution::zipf(3, 1.0).unwrap();
        assert_eq!(k_most_popular_allocation(&d3, 1).unwrap().q(), &[1.0, 0.0, 0.0]);
        assert_eq!(k_most_popular_allocation(&d3, 3).unwrap().q(), &[1.0, 1.0, 1.0]);
        let d5 = PopularityDistribution::zipf(5, 1.0).unwrap();
        assert_eq!(k_most_popular_allocation(&d5, 2).unwrap().q(), &[1.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(k_most_popular_allocation(&d5, 6).is_err());
    }

    #[test]
    fn random_examples() {
        assert_eq!(random_allocation(&params(4, 2)).unwrap().q(), &[0.5; 4]);
        assert_eq!(random_allocation(&params(3, 3)).unwrap().q(), &[1.0; 3]);
        let q = random_allocation(&params(1000, 100)).unwrap();
        assert!(q.q().iter().all(|&x| x == 0.1));
    }

    #[test]
    fn param_validation() {
        assert!(params(10, 0).validate().is_err());
        assert!(params(10, 11).validate().is_err());
        let mut p = params(10, 2);
        p.lambda_ap = -1.0;
        assert!(p.validate().is_err());
        let mut p = params(10, 2);
        p.n_users = 1;
        assert!(p.validate().is_ok());
        assert!(p.validate_for_simulation().is_err());
    }

    #[test]
    fn rescale_lambda_t() {
        let mut p = params(10, 2);
        p.patience = 2.0;
        let q = p.with_lambda_t(5.0).unwrap();
        assert_eq!(q.lambda_user, 2.5);
        assert_eq!(q.lambda_t(), 5.0);
        p.patience = 0.0;
        assert!(p.with_lambda_t(0.0).is_ok());
        assert!(p.with_lambda_t(1.0).is_err());
    }

    #[test]
    fn feasibility_checks() {
        assert!(AllocationVector::new(vec![0.5, 0.5], 1, 1e-12).is_ok());
        assert!(AllocationVector::new(vec![1.5, -0.5], 1, 1e-12).is_err());
        assert!(AllocationVector::new(vec![0.5, 0.4], 1, 1e-12).is_err());
    }
}
