//! Filling user caches toward a target allocation.

use rand::Rng;

use super::UserState;
use crate::error::{invalid, Error, Result};
use crate::model::{AllocationVector, NetworkParams};
use crate::popularity::{cumulative_table, inverse_cdf};

fn check_target(alloc: &AllocationVector, params: &NetworkParams) -> Result<()> {
    params.validate()?;
    if params.n_users == 0 {
        return Err(invalid("need at least one user"));
    }
    if alloc.len() != params.n_files {
        return Err(invalid(format!(
            "allocation has {} files, params say {}",
            alloc.len(),
            params.n_files
        )));
    }
    Ok(())
}

/// Selective pushing: an access point meeting a user picks file `n` with
/// probability `q_n / K` and pushes it unless the user already has it,
/// until the cache holds `K` files. Users are filled independently.
pub fn fill_caches_selective<R: Rng + ?Sized>(
    alloc: &AllocationVector,
    params: &NetworkParams,
    rng: &mut R,
) -> Result<Vec<UserState>> {
    check_target(alloc, params)?;
    let k = params.cache_capacity;
    let support = alloc.support();
    if support < k {
        return Err(Error::Config(format!(
            "only {support} files have positive push probability, caches need {k}"
        )));
    }
    let table = cumulative_table(alloc.q());
    let users = (0..params.n_users)
        .map(|_| {
            let mut user = UserState::with_capacity(k);
            while user.len() < k {
                user.insert(inverse_cdf(&table, rng.random::<f64>()));
            }
            user
        })
        .collect();
    Ok(users)
}

/// Places exactly `K` distinct files per user so that file `n` is cached
/// with probability exactly `q_n` (systematic sampling: one uniform offset,
/// then the files whose cumulative-`q` interval contains `u`, `u+1`, ...).
pub fn fill_caches_systematic<R: Rng + ?Sized>(
    alloc: &AllocationVector,
    params: &NetworkParams,
    rng: &mut R,
) -> Result<Vec<UserState>> {
    check_target(alloc, params)?;
    let k = params.cache_capacity;
    let q = alloc.q();
    let total = alloc.sum();
    if !(total > 0.0) {
        return Err(Error::Config("allocation has no mass to place".into()));
    }
    // Rescale so the intervals tile [0, K) exactly.
    let scale = k as f64 / total;
    let mut edges = Vec::with_capacity(q.len());
    let mut acc = 0.0;
    for &x in q {
        acc += x * scale;
        edges.push(acc);
    }
    *edges.last_mut().unwrap() = k as f64;

    let users = (0..params.n_users)
        .map(|_| {
            let u: f64 = rng.random();
            let mut user = UserState::with_capacity(k);
            let mut file = 0;
            for j in 0..k {
                let point = u + j as f64;
                while file + 1 < edges.len() && edges[file] <= point {
                    file += 1;
                }
                user.insert(file);
            }
            // rounding can merge two points into one saturated file
            let mut extra = (0..q.len()).filter(|&n| q[n] > 0.0);
            while user.len() < k {
                match extra.next() {
                    Some(n) => {
                        user.insert(n);
                    }
                    None => break,
                }
            }
            user
        })
        .collect();
    Ok(users)
}

/// Fraction of users caching each file.
pub fn empirical_allocation(users: &[UserState], n_files: usize) -> Vec<f64> {
    let mut counts = vec![0u64; n_files];
    for u in users {
        for &f in u.files() {
            counts[f] += 1;
        }
    }
    let n = users.len().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{k_most_popular_allocation, random_allocation};
    use crate::optimizer::optimal_allocation;
    use crate::popularity::PopularityDistribution;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(n: usize, k: usize, users: usize) -> NetworkParams {
        NetworkParams {
            lambda_user: 5.0,
            lambda_ap: 0.0,
            patience: 1.0,
            n_files: n,
            cache_capacity: k,
            n_users: users,
        }
    }

    #[test]
    fn top_k_target_fills_exactly_top_k() {
        let d = PopularityDistribution::zipf(30, 1.0).unwrap();
        let a = k_most_popular_allocation(&d, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for users in [
            fill_caches_selective(&a, &params(30, 4, 50), &mut rng).unwrap(),
            fill_caches_systematic(&a, &params(30, 4, 50), &mut rng).unwrap(),
        ] {
            assert!(users.iter().all(|u| u.files() == [0, 1, 2, 3]));
            assert_eq!(empirical_allocation(&users, 30), a.q());
        }
    }

    #[test]
    fn selective_rejects_thin_support() {
        let a = AllocationVector::from_vec_unchecked(vec![1.0, 1.0, 0.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            fill_caches_selective(&a, &params(4, 3, 5), &mut rng),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn empirical_single_user() {
        let mut u = UserState::new();
        u.insert(0);
        assert_eq!(empirical_allocation(&[u], 2), vec![1.0, 0.0]);
    }

    #[test]
    fn uniform_target_per_file_frequency() {
        let p = params(1000, 10, 10_000);
        let a = random_allocation(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let users = fill_caches_selective(&a, &p, &mut rng).unwrap();
        let emp = empirical_allocation(&users, 1000);
        let sigma = (0.01f64 * 0.99 / 10_000.0).sqrt();
        let outside = emp.iter().filter(|&&f| (f - 0.01).abs() > 3.0 * sigma).count();
        // 1000 files at 3 sigma: ~2.7 expected
        assert!(outside <= 10, "{outside}");
        assert!((emp.iter().sum::<f64>() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn systematic_hits_marginals() {
        let d = PopularityDistribution::zipf(200, 1.0).unwrap();
        let p = params(200, 10, 20_000);
        let (a, _) = optimal_allocation(&d, &p, 1e-9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let users = fill_caches_systematic(&a, &p, &mut rng).unwrap();
        let emp = empirical_allocation(&users, 200);
        for (e, q) in emp.iter().zip(a.q()) {
            let sigma = (q * (1.0 - q) / 20_000.0).sqrt();
            assert!((e - q).abs() <= 4.0 * sigma + 1e-12, "{e} vs {q}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn caches_full_and_distinct(
            n in 2usize..60, kfrac in 0.0f64..1.0, lt in 0.0f64..10.0, seed in any::<u64>(),
        ) {
            let k = ((kfrac * n as f64) as usize).clamp(1, n);
            let mut p = params(n, k, 40);
            p.lambda_user = lt;
            let d = PopularityDistribution::zipf(n, 1.0).unwrap();
            let (a, _) = optimal_allocation(&d, &p, 1e-9).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut all = fill_caches_systematic(&a, &p, &mut rng).unwrap();
            if a.support() >= k {
                all.extend(fill_caches_selective(&a, &p, &mut rng).unwrap());
            }
            for u in &all {
                prop_assert_eq!(u.len(), k);
                prop_assert!(u.files().windows(2).all(|w| w[0] < w[1]));
                prop_assert!(u.files().iter().all(|&f| f < n));
            }
        }
    }
}
