//! Contact-duration-limited transfers.
//!
//! A file needs `t0` units of contact time with users that hold it. Contacts
//! with holders of file `n` arrive as a Poisson process with mean `λT q_n`
//! over the patience time, and each lasts a shifted-Pareto time with
//! `P[T <= t] = 1 - (1 + t)^{-α}`. A request misses when the accumulated
//! contact time falls short of `t0`. Own-cache hits and access points are
//! not part of this model.

mod cf;

pub use cf::{cf_total_contact_time, pareto_cf, prob_total_below, prob_total_below_many};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{AllocationVector, NetworkParams};
use crate::popularity::PopularityDistribution;
use crate::seeding::derive_seed;

/// Above this mean the Poisson count is drawn with a rejection sampler
/// instead of by sequential inversion.
const INVERSION_MAX_MEAN: f64 = 500.0;

#[derive(Debug, Clone)]
pub struct DurationParams {
    /// Shape of the contact-duration law (distinct from the Zipf exponent).
    pub pareto_alpha: f64,
    /// Contact time needed to transfer one file.
    pub t0: f64,
    pub base: NetworkParams,
    pub alloc: AllocationVector,
}

impl DurationParams {
    pub fn validate(&self, dist: &PopularityDistribution) -> Result<()> {
        self.base.validate()?;
        if !(self.pareto_alpha > 0.0) || !self.pareto_alpha.is_finite() {
            return Err(invalid(format!("pareto_alpha must be > 0, got {}", self.pareto_alpha)));
        }
        if !(self.t0 >= 0.0) || !self.t0.is_finite() {
            return Err(invalid(format!("t0 must be finite and >= 0, got {}", self.t0)));
        }
        if self.alloc.len() != dist.len() || dist.len() != self.base.n_files {
            return Err(invalid("distribution, allocation and n_files disagree"));
        }
        Ok(())
    }

    /// Mean number of contacts with holders of each file, `λT q_n`.
    pub fn rates(&self) -> Vec<f64> {
        let lt = self.base.lambda_t();
        self.alloc.q().iter().map(|&q| lt * q).collect()
    }
}

pub fn pareto_cdf(t: f64, alpha: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("pareto_cdf needs t >= 0, got {t}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("pareto shape must be > 0, got {alpha}")));
    }
    Ok(1.0 - (1.0 + t).powf(-alpha))
}

/// Inverse CDF: `(1 - u)^{-1/α} - 1`.
pub fn pareto_quantile(u: f64, alpha: f64) -> f64 {
    (1.0 - u).powf(-1.0 / alpha) - 1.0
}

pub fn sample_pareto<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    pareto_quantile(rng.random::<f64>(), alpha)
}

/// Poisson quantile by sequential search; monotone in both `u` and `mean`.
fn poisson_quantile(mean: f64, u: f64) -> u64 {
    let mut k = 0u64;
    let mut term = (-mean).exp();
    let mut cdf = term;
    while u >= cdf && term > 0.0 {
        k += 1;
        term *= mean / k as f64;
        cdf += term;
    }
    k
}

fn sample_contact_count<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> u64 {
    if rate <= 0.0 {
        return 0;
    }
    if rate > INVERSION_MAX_MEAN {
        let p = Poisson::new(rate).expect("finite positive mean");
        return p.sample(rng) as u64;
    }
    poisson_quantile(rate, rng.random::<f64>())
}

/// Draws `T_1 + ... + T_N` with `N ~ Poisson(rate)`; zero when `N = 0`.
pub fn sample_total_contact_time<R: Rng + ?Sized>(rate: f64, alpha: f64, rng: &mut R) -> f64 {
    let n = sample_contact_count(rate, rng);
    (0..n).map(|_| sample_pareto(alpha, rng)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum MissMethod {
    /// Per-file sampling. Sample `i` of file `n` always uses the same random
    /// stream, so estimates at different `λT` or `t0` share random numbers.
    MonteCarlo { samples_per_file: u64, seed: u64 },
    /// Characteristic-function inversion to the given absolute accuracy.
    CfInversion { tolerance: f64 },
}

impl MissMethod {
    pub fn name(&self) -> &'static str {
        match self {
            MissMethod::MonteCarlo { .. } => "monte_carlo",
            MissMethod::CfInversion { .. } => "cf_inversion",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FileDurationMiss {
    pub rate: f64,
    pub prob_miss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DurationMissEstimate {
    pub miss_rate: f64,
    /// Monte Carlo standard error of `miss_rate`; zero for inversion.
    pub std_error: f64,
    pub per_file: Vec<FileDurationMiss>,
}

fn monte_carlo_file(rate: f64, alpha: f64, t0: f64, samples: u64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut short = 0u64;
    for i in 0..samples {
        rng.set_stream(i);
        rng.set_word_pos(0);
        let n = sample_contact_count(rate, &mut rng);
        let mut total = 0.0;
        for _ in 0..n {
            total += sample_pareto(alpha, &mut rng);
            if total >= t0 {
                break;
            }
        }
        if total < t0 {
            short += 1;
        }
    }
    short as f64 / samples as f64
}

/// Request-weighted probability that accumulated holder contact time is
/// below `t0`: `Σ p_n P[T_total,n < t0]`.
pub fn duration_aware_miss_rate(
    dp: &DurationParams,
    dist: &PopularityDistribution,
    method: MissMethod,
) -> Result<DurationMissEstimate> {
    dp.validate(dist)?;
    let rates = dp.rates();
    let (alpha, t0) = (dp.pareto_alpha, dp.t0);
    let probs: Vec<f64> = match method {
        MissMethod::MonteCarlo { samples_per_file, seed } => {
            if samples_per_file == 0 {
                return Err(invalid("samples_per_file must be >= 1"));
            }
            rates
                .par_iter()
                .enumerate()
                .map(|(n, &rate)| {
                    if t0 <= 0.0 {
                        0.0
                    } else if rate == 0.0 {
                        1.0
                    } else {
                        let s = derive_seed(seed, &format!("duration/{n}"));
                        monte_carlo_file(rate, alpha, t0, samples_per_file, s)
                    }
                })
                .collect()
        }
        MissMethod::CfInversion { tolerance } => prob_total_below_many(t0, &rates, alpha, tolerance)?,
    };
    let miss_rate = dist.probs().iter().zip(&probs).map(|(p, m)| p * m).sum();
    let std_error = match method {
        MissMethod::MonteCarlo { samples_per_file, .. } => dist
            .probs()
            .iter()
            .zip(&probs)
            .map(|(p, m)| p * p * m * (1.0 - m) / samples_per_file as f64)
            .sum::<f64>()
            .sqrt(),
        MissMethod::CfInversion { .. } => 0.0,
    };
    let per_file = rates
        .into_iter()
        .zip(probs)
        .map(|(rate, prob_miss)| FileDurationMiss { rate, prob_miss })
        .collect();
    Ok(DurationMissEstimate {
        miss_rate,
        std_error,
        per_file,
    })
}

/// Peer-only no-contact probability `Σ p_n e^{-λT q_n}`, the limit of the
/// duration-aware miss rate as `t0 → 0⁺`.
pub fn no_contact_miss_rate(dist: &PopularityDistribution, alloc: &AllocationVector, lambda_t: f64) -> f64 {
    dist.probs()
        .iter()
        .zip(alloc.q())
        .map(|(p, q)| p * (-lambda_t * q).exp())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::optimal_allocation;

    fn base(n: usize, k: usize, lambda_t: f64) -> NetworkParams {
        NetworkParams {
            lambda_user: lambda_t,
            lambda_ap: 0.0,
            patience: 1.0,
            n_files: n,
            cache_capacity: k,
            n_users: 2,
        }
    }

    fn setup(n: usize, k: usize, lambda_t: f64, alpha: f64, t0: f64) -> (DurationParams, PopularityDistribution) {
        let dist = PopularityDistribution::zipf(n, 1.0).unwrap();
        let b = base(n, k, lambda_t);
        let (alloc, _) = optimal_allocation(&dist, &b, 1e-9).unwrap();
        (
            DurationParams {
                pareto_alpha: alpha,
                t0,
                base: b,
                alloc,
            },
            dist,
        )
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(pareto_cdf(0.0, 1.7).unwrap(), 0.0);
        assert_eq!(pareto_cdf(1.0, 1.0).unwrap(), 0.5);
        assert_eq!(pareto_cdf(3.0, 2.0).unwrap(), 0.9375);
        assert!(pareto_cdf(-1.0, 2.0).is_err());
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(pareto_quantile(0.0, 3.0), 0.0);
        assert_eq!(pareto_quantile(0.75, 2.0), 1.0);
    }

    #[test]
    fn pareto_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = 1_000_000;
        let xs: Vec<f64> = (0..m).map(|_| sample_pareto(3.0, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / m as f64;
        // Var = α/((α-1)^2 (α-2)) = 0.75 for α = 3
        assert!((mean - 0.5).abs() <= 3.0 * (0.75f64 / m as f64).sqrt(), "{mean}");
    }

    #[test]
    fn compound_total_mean_wald() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = 1_000_000;
        assert_eq!(sample_total_contact_time(0.0, 3.0, &mut rng), 0.0);
        let xs: Vec<f64> = (0..m).map(|_| sample_total_contact_time(2.0, 3.0, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / m as f64;
        // Var of compound Poisson = rate E[T^2] = 2 * 1 = 2
        assert!((mean - 1.0).abs() <= 3.0 * (2.0f64 / m as f64).sqrt(), "{mean}");
    }

    #[test]
    fn heavy_tail_median_against_independent_run() {
        // α = 2 has infinite variance; compare medians of two independent runs
        let median = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut xs: Vec<f64> = (0..200_001).map(|_| sample_total_contact_time(2.0, 2.0, &mut rng)).collect();
            assert!(xs.iter().all(|x| x.is_finite()));
            xs.sort_by(f64::total_cmp);
            xs[100_000]
        };
        let (a, b) = (median(1), median(2));
        assert!((a - b).abs() < 0.02, "{a} vs {b}");
    }

    #[test]
    fn poisson_quantile_is_monotone_in_mean() {
        for &u in &[0.01, 0.3, 0.5, 0.9, 0.999] {
            let mut prev = 0;
            for i in 1..200 {
                let k = poisson_quantile(0.1 * i as f64, u);
                assert!(k >= prev);
                prev = k;
            }
        }
        assert_eq!(poisson_quantile(1.0, 0.0), 0);
    }

    #[test]
    fn t0_zero_and_empty_allocation() {
        let (mut dp, dist) = setup(50, 5, 5.0, 2.0, 0.0);
        for m in [
            MissMethod::MonteCarlo { samples_per_file: 100, seed: 1 },
            MissMethod::CfInversion { tolerance: 1e-4 },
        ] {
            assert_eq!(duration_aware_miss_rate(&dp, &dist, m).unwrap().miss_rate, 0.0);
        }
        dp.t0 = 0.5;
        dp.alloc = AllocationVector::from_vec_unchecked(vec![0.0; 50]);
        for m in [
            MissMethod::MonteCarlo { samples_per_file: 100, seed: 1 },
            MissMethod::CfInversion { tolerance: 1e-4 },
        ] {
            let est = duration_aware_miss_rate(&dp, &dist, m).unwrap();
            assert!((est.miss_rate - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn validation() {
        let (mut dp, dist) = setup(10, 2, 1.0, 2.0, 1.0);
        dp.pareto_alpha = 0.0;
        assert!(duration_aware_miss_rate(&dp, &dist, MissMethod::CfInversion { tolerance: 1e-4 }).is_err());
        dp.pareto_alpha = 2.0;
        dp.t0 = -1.0;
        assert!(duration_aware_miss_rate(&dp, &dist, MissMethod::CfInversion { tolerance: 1e-4 }).is_err());
        dp.t0 = 1.0;
        assert!(duration_aware_miss_rate(&dp, &dist, MissMethod::MonteCarlo { samples_per_file: 0, seed: 0 }).is_err());
    }

    #[test]
    fn monotone_in_lambda_t_and_t0_with_common_numbers() {
        let dist = PopularityDistribution::zipf(30, 1.0).unwrap();
        let alloc = AllocationVector::from_vec_unchecked(
            (0..30).map(|i| if i < 10 { 0.4 } else { 0.1 }).collect(),
        );
        let method = MissMethod::MonteCarlo { samples_per_file: 4000, seed: 11 };
        let run = |lt: f64, t0: f64| {
            let dp = DurationParams {
                pareto_alpha: 2.0,
                t0,
                base: base(30, 6, lt),
                alloc: alloc.clone(),
            };
            duration_aware_miss_rate(&dp, &dist, method).unwrap().miss_rate
        };
        for &t0 in &[0.2, 1.0, 3.0] {
            let mut prev = f64::INFINITY;
            for lt in [0.5, 1.0, 2.0, 4.0, 8.0] {
                let m = run(lt, t0);
                assert!(m <= prev, "lt={lt} t0={t0}");
                prev = m;
            }
        }
        for lt in [1.0, 5.0] {
            let mut prev = 0.0;
            for t0 in [0.05, 0.2, 0.5, 1.0, 2.0, 5.0] {
                let m = run(lt, t0);
                assert!(m >= prev, "lt={lt} t0={t0}");
                prev = m;
            }
        }
    }

    #[test]
    fn two_independent_runs_agree() {
        let (dp, dist) = setup(40, 4, 3.0, 2.0, 0.5);
        let m = 20_000;
        let a = duration_aware_miss_rate(&dp, &dist, MissMethod::MonteCarlo { samples_per_file: m, seed: 1 }).unwrap();
        let b = duration_aware_miss_rate(&dp, &dist, MissMethod::MonteCarlo { samples_per_file: m, seed: 2 }).unwrap();
        assert!((a.miss_rate - b.miss_rate).abs() <= 1.5 / (m as f64).sqrt());
        assert!(a.std_error > 0.0);
    }

    #[test]
    fn small_case_methods_agree() {
        let (dp, dist) = setup(30, 3, 5.0, 2.0, 0.5);
        let mc = duration_aware_miss_rate(&dp, &dist, MissMethod::MonteCarlo { samples_per_file: 100_000, seed: 3 }).unwrap();
        let cf = duration_aware_miss_rate(&dp, &dist, MissMethod::CfInversion { tolerance: 1e-5 }).unwrap();
        assert!((mc.miss_rate - cf.miss_rate).abs() <= 3.0 * mc.std_error + 1e-5, "{} vs {}", mc.miss_rate, cf.miss_rate);
    }
}
