//! Optimal cache allocation.
//!
//! Minimizes `Σ p_n (1 - q_n) e^{-λT q_n}` subject to `0 <= q_n <= 1` and
//! `Σ q_n = K`. Stationarity gives every fractional entry in closed form as a
//! function of the equality multiplier `η`,
//!
//! ```text
//! q_n(η) = 1 + 1/λT - W(η e^{1+λT} / p_n) / λT,   clamped to [0, 1]
//! ```
//!
//! and `Σ q_n(η)` is nonincreasing in `η`, so `η` is found by bisection.

use crate::error::{invalid, Error, Result};
use crate::lambert::lambert_w0_exp;
use crate::model::{k_most_popular_allocation, AllocationVector, NetworkParams};
use crate::popularity::PopularityDistribution;

/// Below this `λT` the objective is treated as linear.
pub const DEGENERATE_LAMBDA_T: f64 = 1e-12;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITERATIONS: usize = 200;
const MAX_WIDENINGS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Allowed `|Σ q - K|` at return.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

/// Dual variables certifying that an allocation solves the convex program.
///
/// Ranks `1..n1-1` (1-based) are cached with probability one, `n1..=n2` are
/// fractional and `n2+1..=N` are never cached. An empty fractional block has
/// `n2 = n1 - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct KktCertificate {
    pub eta: f64,
    /// Multipliers of `q_n <= 1`.
    pub mu_upper: Vec<f64>,
    /// Multipliers of `q_n >= 0`.
    pub mu_lower: Vec<f64>,
    pub n1: usize,
    pub n2: usize,
}

/// Worst violations of each optimality condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub complementary_slackness: f64,
    /// Most negative multiplier (0 when all are nonnegative).
    pub dual_infeasibility: f64,
    /// Largest bound violation or `|Σ q - K|`.
    pub primal_infeasibility: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.complementary_slackness)
            .max(self.dual_infeasibility)
            .max(self.primal_infeasibility)
    }
}

/// `-∂f/∂q_n`: `p e^{-λT q} (1 + λT - λT q)`.
pub fn marginal_gain(p: f64, q: f64, lambda_t: f64) -> f64 {
    p * (-lambda_t * q).exp() * (1.0 + lambda_t - lambda_t * q)
}

impl KktCertificate {
    pub fn residuals(
        &self,
        dist: &PopularityDistribution,
        alloc: &AllocationVector,
        capacity: usize,
        lambda_t: f64,
    ) -> KktResiduals {
        let mut r = KktResiduals {
            stationarity: 0.0,
            complementary_slackness: 0.0,
            dual_infeasibility: (-self.eta).max(0.0),
            primal_infeasibility: (alloc.sum() - capacity as f64).abs(),
        };
        for (n, (&p, &q)) in dist.probs().iter().zip(alloc.q()).enumerate() {
            let (up, lo) = (self.mu_upper[n], self.mu_lower[n]);
            let st = (up - lo + self.eta - marginal_gain(p, q, lambda_t)).abs();
            r.stationarity = r.stationarity.max(st);
            r.complementary_slackness = r
                .complementary_slackness
                .max((up * (q - 1.0)).abs())
                .max((lo * q).abs());
            r.dual_infeasibility = r.dual_infeasibility.max(-up).max(-lo);
            r.primal_infeasibility = r.primal_infeasibility.max(q - 1.0).max(-q);
        }
        r
    }

    /// Builds the multipliers for `alloc` at `eta` from the closed-form table.
    fn from_solution(dist: &PopularityDistribution, q: &[f64], eta: f64, lambda_t: f64) -> Self {
        let probs = dist.probs();
        let mut mu_upper = vec![0.0; q.len()];
        let mut mu_lower = vec![0.0; q.len()];
        for (n, (&p, &qn)) in probs.iter().zip(q).enumerate() {
            if qn >= 1.0 {
                mu_upper[n] = (marginal_gain(p, 1.0, lambda_t) - eta).max(0.0);
            } else if qn <= 0.0 {
                mu_lower[n] = (eta - marginal_gain(p, 0.0, lambda_t)).max(0.0);
            }
        }
        let saturated = q.iter().take_while(|&&x| x >= 1.0).count();
        let positive = q.iter().filter(|&&x| x > 0.0).count();
        Self {
            eta,
            mu_upper,
            mu_lower,
            n1: saturated + 1,
            n2: positive,
        }
    }
}

/// Closed-form optimal `q` for one file at multiplier `eta`.
pub fn q_of_eta(eta: f64, p: f64, lambda_t: f64) -> f64 {
    debug_assert!(eta > 0.0 && p > 0.0 && lambda_t > 0.0);
    q_of_log_eta(eta.ln(), p, lambda_t)
}

// W(η e^{1+λT} / p) evaluated from its logarithm; η itself can underflow at
// large λT.
fn q_of_log_eta(log_eta: f64, p: f64, lambda_t: f64) -> f64 {
    let z = log_eta + 1.0 + lambda_t - p.ln();
    let w = lambert_w0_exp(z).expect("finite log argument");
    (1.0 + (1.0 - w) / lambda_t).clamp(0.0, 1.0)
}

fn allocation_at(probs: &[f64], log_eta: f64, lambda_t: f64) -> (Vec<f64>, f64) {
    let q: Vec<f64> = probs.iter().map(|&p| q_of_log_eta(log_eta, p, lambda_t)).collect();
    let sum = q.iter().sum();
    (q, sum)
}

/// Solves for the optimal allocation with default options and the given tolerance.
pub fn optimal_allocation(
    dist: &PopularityDistribution,
    params: &NetworkParams,
    tol: f64,
) -> Result<(AllocationVector, KktCertificate)> {
    optimal_allocation_with(
        dist,
        params,
        SolverOptions {
            tol,
            ..SolverOptions::default()
        },
    )
}

/// Bisection on `ln η` over `[ln p_K - λT, ln p_K + ln(1 + λT)]`.
///
/// The access-point rate only scales the objective and is ignored here.
pub fn optimal_allocation_with(
    dist: &PopularityDistribution,
    params: &NetworkParams,
    opts: SolverOptions,
) -> Result<(AllocationVector, KktCertificate)> {
    params.validate()?;
    if dist.len() != params.n_files {
        return Err(invalid(format!(
            "distribution has {} files, params say {}",
            dist.len(),
            params.n_files
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(invalid(format!("tolerance must be > 0, got {}", opts.tol)));
    }
    let probs = dist.probs();
    let k = params.cache_capacity;
    let lambda_t = params.lambda_t();
    let p_k = probs[k - 1];

    if lambda_t < DEGENERATE_LAMBDA_T {
        return Ok(linear_optimum(dist, k));
    }
    if k == probs.len() {
        let q = vec![1.0; k];
        let eta = probs[k - 1] * (-lambda_t).exp();
        let cert = KktCertificate::from_solution(dist, &q, eta, lambda_t);
        return Ok((AllocationVector::from_vec_unchecked(q), cert));
    }

    // Bisection runs on ln η so the bracket ends stay finite for any λT.
    let target = k as f64;
    let ln2 = std::f64::consts::LN_2;
    let mut lower = p_k.ln() - lambda_t;
    let mut upper = p_k.ln() + lambda_t.ln_1p();

    // The bracket is exact for strictly decreasing p; widen if ties push the
    // root onto or past an end.
    for _ in 0..MAX_WIDENINGS {
        let (_, s) = allocation_at(probs, lower, lambda_t);
        if s >= target - opts.tol {
            break;
        }
        lower -= ln2;
    }
    for _ in 0..MAX_WIDENINGS {
        let (_, s) = allocation_at(probs, upper, lambda_t);
        if s <= target + opts.tol {
            break;
        }
        upper += ln2;
    }
    let (q_lo, s_lo) = allocation_at(probs, lower, lambda_t);
    let (q_hi, s_hi) = allocation_at(probs, upper, lambda_t);
    if (s_lo - target).abs() <= opts.tol {
        return Ok(finish(dist, q_lo, lower.exp(), lambda_t));
    }
    if (s_hi - target).abs() <= opts.tol {
        return Ok(finish(dist, q_hi, upper.exp(), lambda_t));
    }
    if s_lo < target || s_hi > target {
        return Err(Error::NoConvergence {
            lower: lower.exp(),
            upper: upper.exp(),
            residual: (s_lo - target).abs().min((s_hi - target).abs()),
            iterations: 0,
        });
    }

    let mut residual = f64::INFINITY;
    for iteration in 1..=opts.max_iterations {
        let mid = 0.5 * (lower + upper);
        if !(mid > lower && mid < upper) {
            // bracket collapsed to adjacent floats
            break;
        }
        let (q, sum) = allocation_at(probs, mid, lambda_t);
        residual = (sum - target).abs();
        if residual <= opts.tol {
            log::debug!("ln eta = {mid} after {iteration} bisection steps");
            return Ok(finish(dist, q, mid.exp(), lambda_t));
        }
        if sum > target {
            lower = mid;
        } else {
            upper = mid;
        }
    }
    Err(Error::NoConvergence {
        lower: lower.exp(),
        upper: upper.exp(),
        residual,
        iterations: opts.max_iterations,
    })
}

fn finish(
    dist: &PopularityDistribution,
    q: Vec<f64>,
    eta: f64,
    lambda_t: f64,
) -> (AllocationVector, KktCertificate) {
    let cert = KktCertificate::from_solution(dist, &q, eta, lambda_t);
    (AllocationVector::from_vec_unchecked(q), cert)
}

/// With no peer contacts the objective is `Σ p_n (1 - q_n)`; caching the top
/// `K` files is optimal and `η = p_K` certifies it.
fn linear_optimum(dist: &PopularityDistribution, k: usize) -> (AllocationVector, KktCertificate) {
    let alloc = k_most_popular_allocation(dist, k).expect("k <= n checked by params");
    let eta = dist.prob(k - 1);
    let mu_upper = dist
        .probs()
        .iter()
        .enumerate()
        .map(|(n, &p)| if n < k { p - eta } else { 0.0 })
        .collect();
    let mu_lower = dist
        .probs()
        .iter()
        .enumerate()
        .map(|(n, &p)| if n >= k { eta - p } else { 0.0 })
        .collect();
    let cert = KktCertificate {
        eta,
        mu_upper,
        mu_lower,
        n1: k + 1,
        n2: k,
    };
    (alloc, cert)
}
