//! Popularity-aware cooperative caching in delay tolerant networks.
//!
//! Users meet each other and access points as Poisson processes and wait a
//! fixed patience time for a requested file before falling back to the
//! cellular network. This crate computes the cache allocation that minimizes
//! the miss rate, evaluates analytic miss rates for several placement schemes,
//! checks them with a Monte Carlo contact simulator, and estimates miss rates
//! when contact durations limit how much of a file can be transferred.

pub mod duration;
pub mod error;
pub mod experiment;
pub mod lambert;
pub mod miss_rate;
pub mod model;
pub mod optimizer;
pub mod popularity;
pub mod quadrature;
pub mod seeding;
pub mod simulator;

pub use error::{Error, Result};
pub use miss_rate::{analytic_miss_rate_random, analytic_miss_rate_selective};
pub use model::{k_most_popular_allocation, random_allocation, AllocationVector, NetworkParams};
pub use optimizer::{optimal_allocation, KktCertificate};
pub use popularity::{DistributionSpec, PopularityDistribution};
