//! Experiment configuration files.
//!
//! ```json
//! {
//!   "name": "instance1",
//!   "horizon": 10000,
//!   "trials": 100,
//!   "value_mean": 0.5,
//!   "maxbid_dist": "beta:1,6",
//!   "reveal_m": true,
//!   "strategies": ["ucbid1:gamma=1", "greedy", "balanced"],
//!   "checkpoints": "log:100"
//! }
//! ```
//!
//! `value_dist` defaults to Bernoulli values with mean `value_mean`; when both
//! are given they must agree. `@path` arguments in distribution specs resolve
//! against the directory holding the config file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fpa_core::distributions::parse_dist_spec;
use fpa_core::simulator::{AuctionEnv, Checkpoints};
use fpa_core::{DistModel, StrategySpec};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CheckpointField {
    Spec(String),
    List(Vec<usize>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    pub horizon: usize,
    pub trials: usize,
    #[serde(default)]
    pub value_dist: Option<String>,
    #[serde(default)]
    pub value_mean: Option<f64>,
    pub maxbid_dist: String,
    #[serde(default)]
    pub reveal_m: bool,
    pub strategies: Vec<String>,
    #[serde(default)]
    pub checkpoints: Option<CheckpointField>,
}

/// A validated config with distributions and strategies parsed.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub name: String,
    pub horizon: usize,
    pub trials: usize,
    pub value_dist: DistModel,
    pub maxbid_dist: DistModel,
    pub reveal_m: bool,
    pub strategies: Vec<StrategySpec>,
    pub checkpoints: Checkpoints,
    pub base_dir: PathBuf,
}

const MEAN_TOL: f64 = 1e-9;

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("malformed config {}", path.display()))
    }

    pub fn resolve(&self, base_dir: &Path) -> Result<Experiment> {
        if self.horizon == 0 {
            bail!("horizon must be at least 1");
        }
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        let value_dist = match (&self.value_dist, self.value_mean) {
            (Some(spec), mean) => {
                let d = parse_dist_spec(spec, base_dir).with_context(|| "bad value_dist")?;
                if let Some(m) = mean {
                    if (d.mean() - m).abs() > MEAN_TOL {
                        bail!("value_mean {m} disagrees with the mean {} of value_dist", d.mean());
                    }
                }
                d
            }
            (None, Some(m)) => DistModel::bernoulli(m).with_context(|| "bad value_mean")?,
            (None, None) => bail!("config needs value_dist or value_mean"),
        };
        let maxbid_dist = parse_dist_spec(&self.maxbid_dist, base_dir).with_context(|| "bad maxbid_dist")?;
        if self.strategies.is_empty() {
            bail!("config lists no strategies");
        }
        let mut strategies = Vec::new();
        for s in &self.strategies {
            let spec: StrategySpec = s.parse()?;
            if spec.needs_rival_bids() && !self.reveal_m {
                bail!("strategy `{s}` needs the rival maximum; set \"reveal_m\": true");
            }
            strategies.push(spec);
        }
        let checkpoints = match &self.checkpoints {
            None => Checkpoints::default(),
            Some(CheckpointField::Spec(s)) => s.parse()?,
            Some(CheckpointField::List(l)) => Checkpoints::Explicit(l.clone()),
        };
        checkpoints.resolve(self.horizon)?;
        Ok(Experiment {
            name: self.name.clone().unwrap_or_else(|| "experiment".into()),
            horizon: self.horizon,
            trials: self.trials,
            value_dist,
            maxbid_dist,
            reveal_m: self.reveal_m,
            strategies,
            checkpoints,
            base_dir: base_dir.to_path_buf(),
        })
    }
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg = ExperimentConfig::from_path(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.resolve(&base)
    }

    pub fn env(&self) -> Result<AuctionEnv, fpa_core::simulator::SimError> {
        AuctionEnv::new(self.value_dist.clone(), self.maxbid_dist.clone(), self.reveal_m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(json: &str) -> Result<Experiment> {
        let cfg: ExperimentConfig = serde_json::from_str(json)?;
        cfg.resolve(Path::new("."))
    }

    #[test]
    fn minimal_config() {
        let e = parse(r#"{"horizon": 100, "trials": 3, "value_mean": 0.5, "maxbid_dist": "uniform", "strategies": ["balanced"], "reveal_m": true}"#).unwrap();
        assert_eq!(e.checkpoints, Checkpoints::Log(100));
        assert_eq!(e.value_dist.mean(), 0.5);
        let e = parse(r#"{"horizon": 100, "trials": 3, "value_mean": 0.5, "maxbid_dist": "uniform", "strategies": ["ucbid1"], "checkpoints": [10, 100]}"#).unwrap();
        assert_eq!(e.checkpoints, Checkpoints::Explicit(vec![10, 100]));
    }

    #[test]
    fn rejects_invalid_configs() {
        for bad in [
            r#"{"horizon": 100, "trials": 3, "value_mean": 0.5, "maxbid_dist": "uniform", "strategies": ["ucbid1plus"]}"#,
            r#"{"horizon": 0, "trials": 3, "value_mean": 0.5, "maxbid_dist": "uniform", "strategies": ["ucbid1"]}"#,
            r#"{"horizon": 10, "trials": 3, "maxbid_dist": "uniform", "strategies": ["ucbid1"]}"#,
            r#"{"horizon": 10, "trials": 3, "value_mean": 0.5, "value_dist": "uniform", "maxbid_dist": "uniform", "strategies": ["ucbid1"], "reveal_m": false, "x": 1}"#,
            r#"{"horizon": 10, "trials": 3, "value_mean": 0.4, "value_dist": "uniform", "maxbid_dist": "uniform", "strategies": ["ucbid1"]}"#,
            r#"{"horizon": 10, "trials": 3, "value_mean": 0.5, "maxbid_dist": "uniform", "strategies": ["ucbid1"], "checkpoints": [20]}"#,
            r#"{"horizon": 10, "trials": 3, "value_mean": 0.5, "maxbid_dist": "gauss", "strategies": ["ucbid1"]}"#,
        ] {
            assert!(parse(bad).is_err(), "{bad}");
        }
    }
}
