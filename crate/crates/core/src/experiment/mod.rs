//! Config-driven experiments that write CSV tables.
//!
//! Every command takes a validated [`ExperimentConfig`] and a writer, and
//! returns a summary for the caller to report. Output depends only on the
//! config (including its seed), never on thread scheduling.

mod config;
pub mod format;

pub use config::{DurationConfig, DurationMethodName, ExperimentConfig, NetworkConfig};

use std::fmt;
use std::io::Write;

use crate::duration::{duration_aware_miss_rate, DurationParams};
use crate::error::Result;
use crate::miss_rate::analytic_miss_rate_selective;
use crate::optimizer::optimal_allocation;
use crate::seeding::rng_for;
use crate::simulator::{empirical_allocation, fill_caches_selective, sweep_lambda_t, SweepRow, SweepSetup};
use format::num;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeSummary {
    pub eta: f64,
    /// First fractional rank (1-based).
    pub n1: usize,
    /// Last fractional rank (1-based).
    pub n2: usize,
    pub lambda_t: f64,
    pub miss_rate: f64,
    pub allocation_sum: f64,
}

impl fmt::Display for OptimizeSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "lambda_t={} eta={} N1={} N2={} sum_q={} analytic_miss={}",
            num(self.lambda_t),
            num(self.eta),
            self.n1,
            self.n2,
            num(self.allocation_sum),
            num(self.miss_rate)
        )
    }
}

/// Optimal allocation at the config's `λT`, as `rank,p,q,scheme`.
pub fn cmd_optimize(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<OptimizeSummary> {
    cfg.validate()?;
    let dist = cfg.distribution.build()?;
    let params = cfg.network_params();
    let (alloc, cert) = optimal_allocation(&dist, &params, cfg.tol)?;
    writeln!(out, "rank,p,q,scheme")?;
    for (i, (p, q)) in dist.probs().iter().zip(alloc.q()).enumerate() {
        writeln!(out, "{},{},{},optimal", i + 1, num(*p), num(*q))?;
    }
    Ok(OptimizeSummary {
        eta: cert.eta,
        n1: cert.n1,
        n2: cert.n2,
        lambda_t: params.lambda_t(),
        miss_rate: analytic_miss_rate_selective(&dist, &alloc, &params)?,
        allocation_sum: alloc.sum(),
    })
}

/// Miss rate of every scheme over the `λT` grid, as
/// `scheme,lambda_t,analytic_miss,empirical_miss,requests,seed`.
pub fn cmd_sweep(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let setup = SweepSetup {
        params: cfg.network_params(),
        dist: cfg.distribution.build()?,
        seed: cfg.seed,
        n_requests: cfg.n_requests,
        tol: cfg.tol,
    };
    let rows = sweep_lambda_t(&cfg.parsed_schemes()?, &cfg.lambda_t_grid, &setup)?;
    writeln!(out, "scheme,lambda_t,analytic_miss,empirical_miss,requests,seed")?;
    for r in &rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.scheme,
            num(r.lambda_t),
            num(r.analytic_miss),
            num(r.empirical_miss),
            r.requests,
            r.seed
        )?;
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Summary {
    /// `½ Σ |q̂_n - q_n| / K`.
    pub tv_distance: f64,
    pub n_users: usize,
}

impl fmt::Display for Fig1Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "users={} tv_distance={}", self.n_users, num(self.tv_distance))
    }
}

/// Total-variation distance between two allocations normalized by `K`.
pub fn allocation_tv_distance(a: &[f64], b: &[f64], capacity: usize) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / capacity as f64
}

/// Optimal allocation next to what selective pushing realizes, as
/// `rank,q_optimal,q_empirical`.
pub fn cmd_fig1(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Fig1Summary> {
    cfg.validate()?;
    let dist = cfg.distribution.build()?;
    let params = cfg.network_params();
    let (alloc, _) = optimal_allocation(&dist, &params, cfg.tol)?;
    let mut rng = rng_for(cfg.seed, "fig1");
    let users = fill_caches_selective(&alloc, &params, &mut rng)?;
    let emp = empirical_allocation(&users, params.n_files);
    writeln!(out, "rank,q_optimal,q_empirical")?;
    for (i, (q, e)) in alloc.q().iter().zip(&emp).enumerate() {
        writeln!(out, "{},{},{}", i + 1, num(*q), num(*e))?;
    }
    Ok(Fig1Summary {
        tv_distance: allocation_tv_distance(&emp, alloc.q(), params.cache_capacity),
        n_users: params.n_users,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DurationSummary {
    pub method: &'static str,
    pub miss_rate: f64,
    pub std_error: f64,
}

impl fmt::Display for DurationSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "method={} miss_rate={} std_error={}",
            self.method,
            num(self.miss_rate),
            num(self.std_error)
        )
    }
}

/// Duration-limited miss probability per file under the optimal allocation
/// of the duration-free model, as `rank,p,q,rate,prob_miss,method,t0,alpha`.
pub fn cmd_duration(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<DurationSummary> {
    cfg.validate()?;
    let (method, block) = cfg.duration_method()?;
    let dist = cfg.distribution.build()?;
    let params = cfg.network_params();
    let (alloc, _) = optimal_allocation(&dist, &params, cfg.tol)?;
    let dp = DurationParams {
        pareto_alpha: block.pareto_alpha,
        t0: block.t0,
        base: params,
        alloc,
    };
    let est = duration_aware_miss_rate(&dp, &dist, method)?;
    writeln!(out, "rank,p,q,rate,prob_miss,method,t0,alpha")?;
    for (i, ((p, q), f)) in dist.probs().iter().zip(dp.alloc.q()).zip(&est.per_file).enumerate() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            i + 1,
            num(*p),
            num(*q),
            num(f.rate),
            num(f.prob_miss),
            method.name(),
            num(block.t0),
            num(block.pareto_alpha)
        )?;
    }
    Ok(DurationSummary {
        method: method.name(),
        miss_rate: est.miss_rate,
        std_error: est.std_error,
    })
}
