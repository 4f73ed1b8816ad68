use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::duration::MissMethod;
use crate::error::{invalid, Error, Result};
use crate::model::NetworkParams;
use crate::optimizer::DEFAULT_TOL;
use crate::popularity::DistributionSpec;
use crate::seeding::derive_seed;
use crate::simulator::Scheme;

/// Network constants as written in a config file. The file count comes
/// from the distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub lambda_user: f64,
    pub lambda_ap: f64,
    pub patience: f64,
    pub cache_capacity: usize,
    pub n_users: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            lambda_user: 5.0,
            lambda_ap: 0.0,
            patience: 1.0,
            cache_capacity: 10,
            n_users: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DurationMethodName {
    MonteCarlo,
    CfInversion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DurationConfig {
    pub pareto_alpha: f64,
    pub t0: f64,
    #[serde(default = "default_method")]
    pub method: DurationMethodName,
    #[serde(default = "default_samples")]
    pub samples_per_file: u64,
    #[serde(default = "default_duration_tol")]
    pub tolerance: f64,
}

fn default_method() -> DurationMethodName {
    DurationMethodName::CfInversion
}

fn default_samples() -> u64 {
    100_000
}

fn default_duration_tol() -> f64 {
    1e-4
}

/// One reproducible experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub distribution: DistributionSpec,
    pub network: NetworkConfig,
    pub schemes: Vec<String>,
    pub lambda_t_grid: Vec<f64>,
    pub seed: u64,
    pub n_requests: u64,
    /// Allowed `|Σ q - K|` for the optimizer.
    pub tol: f64,
    pub duration: Option<DurationConfig>,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    /// Desk-scale profile: 1000 files, 10 cache slots, 10⁴ users and 10⁵
    /// requests per grid point over `λT = 0, 1, ..., 10`.
    fn default() -> Self {
        Self {
            distribution: DistributionSpec::Zipf { n: 1000, alpha: 1.0 },
            network: NetworkConfig::default(),
            schemes: Scheme::ALL.iter().map(|s| s.name().to_string()).collect(),
            lambda_t_grid: (0..=10).map(f64::from).collect(),
            seed: 1,
            n_requests: 100_000,
            tol: DEFAULT_TOL,
            duration: None,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// 10⁴ files with `p_n ∝ 1/n`, 100 cache slots and 10⁴ users.
    pub fn apply_paper_scale(&mut self) {
        self.distribution = DistributionSpec::Zipf { n: 10_000, alpha: 1.0 };
        self.network.cache_capacity = 100;
        self.network.n_users = 10_000;
    }

    pub fn network_params(&self) -> NetworkParams {
        NetworkParams {
            lambda_user: self.network.lambda_user,
            lambda_ap: self.network.lambda_ap,
            patience: self.network.patience,
            n_files: self.distribution.n_files(),
            cache_capacity: self.network.cache_capacity,
            n_users: self.network.n_users,
        }
    }

    pub fn parsed_schemes(&self) -> Result<Vec<Scheme>> {
        self.schemes.iter().map(|s| s.parse()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.distribution.build()?;
        self.network_params().validate()?;
        self.parsed_schemes()?;
        if self.lambda_t_grid.is_empty() {
            return Err(invalid("lambda_t_grid is empty"));
        }
        if self.lambda_t_grid.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(invalid("lambda_t_grid values must be finite and >= 0"));
        }
        if self.lambda_t_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("lambda_t_grid must be strictly increasing"));
        }
        if self.n_requests == 0 {
            return Err(invalid("n_requests must be >= 1"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("tol must be > 0"));
        }
        if let Some(d) = &self.duration {
            if !(d.pareto_alpha > 0.0) || !(d.t0 >= 0.0) {
                return Err(invalid("duration block needs pareto_alpha > 0 and t0 >= 0"));
            }
            if d.samples_per_file == 0 || !(d.tolerance > 0.0) {
                return Err(invalid("duration block needs samples_per_file >= 1 and tolerance > 0"));
            }
        }
        Ok(())
    }

    pub fn duration_method(&self) -> Result<(MissMethod, &DurationConfig)> {
        let d = self
            .duration
            .as_ref()
            .ok_or_else(|| Error::Config("config has no duration block".into()))?;
        let method = match d.method {
            DurationMethodName::MonteCarlo => MissMethod::MonteCarlo {
                samples_per_file: d.samples_per_file,
                seed: derive_seed(self.seed, "duration"),
            },
            DurationMethodName::CfInversion => MissMethod::CfInversion { tolerance: d.tolerance },
        };
        Ok((method, d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_desk_scale() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        let p = c.network_params();
        assert_eq!((p.n_files, p.cache_capacity, p.n_users), (1000, 10, 10_000));
        assert_eq!(c.n_requests, 100_000);
        assert_eq!(c.lambda_t_grid.len(), 11);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c = ExperimentConfig::from_json(r#"{"seed": 9, "network": {"cache_capacity": 3}}"#).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.network.cache_capacity, 3);
        assert_eq!(c.network.n_users, 10_000);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(ExperimentConfig::from_json("{"), Err(Error::Config(_))));
        assert!(ExperimentConfig::from_json(r#"{"bogus": 1}"#).is_err());
        let c = ExperimentConfig::from_json(r#"{"schemes": ["lru"]}"#).unwrap();
        assert!(matches!(c.validate(), Err(Error::InvalidParameter(_))));
        let c = ExperimentConfig::from_json(r#"{"lambda_t_grid": [1, 1]}"#).unwrap();
        assert!(c.validate().is_err());
        let c = ExperimentConfig::from_json(r#"{"lambda_t_grid": []}"#).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn paper_scale_override() {
        let mut c = ExperimentConfig::default();
        c.apply_paper_scale();
        let p = c.network_params();
        assert_eq!((p.n_files, p.cache_capacity, p.n_users), (10_000, 100, 10_000));
    }

    #[test]
    fn duration_block() {
        let c = ExperimentConfig::default();
        assert!(matches!(c.duration_method(), Err(Error::Config(_))));
        let c = ExperimentConfig::from_json(
            r#"{"duration": {"pareto_alpha": 2, "t0": 0.5, "method": "monte_carlo", "samples_per_file": 10}}"#,
        )
        .unwrap();
        let (m, d) = c.duration_method().unwrap();
        assert_eq!(m.name(), "monte_carlo");
        assert_eq!(d.t0, 0.5);
    }
}
