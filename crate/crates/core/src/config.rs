//! Run configuration, read from a TOML file with one table per concern.
//!
//! ```toml
//! [world]
//! exposures = 20000
//!
//! [train]
//! epochs = 3
//! lambda3 = 0.5
//!
//! [paths]
//! out_dir = "runs/small"
//! ```
//!
//! Every key is optional and unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datagen::WorldConfig;
use crate::model::ModelConfig;
use crate::training::{default_lambda_grid, ExperimentConfig, ExposureConfig, LossWeights, TrainConfig, Variant};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    pub out_dir: PathBuf,
    /// Where logs, ground truth and the GCI map live; `<out_dir>/data` if unset.
    pub data_dir: Option<PathBuf>,
    /// Results ledger; `<out_dir>/results.tsv` if unset.
    pub ledger: Option<PathBuf>,
}

impl Default for PathsConfig {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("exit-run"),
            data_dir: None,
            ledger: None,
        }
    }
}

impl PathsConfig {
    pub fn data_dir(&self) -> PathBuf {
        self.data_dir.clone().unwrap_or_else(|| self.out_dir.join("data"))
    }

    pub fn ledger(&self) -> PathBuf {
        self.ledger.clone().unwrap_or_else(|| self.out_dir.join("results.tsv"))
    }

    pub fn train_log(&self) -> PathBuf {
        self.data_dir().join("train.csv")
    }

    pub fn test_log(&self) -> PathBuf {
        self.data_dir().join("test.csv")
    }

    pub fn truth(&self) -> PathBuf {
        self.data_dir().join("truth.txt")
    }

    pub fn gci(&self) -> PathBuf {
        self.data_dir().join("gci.txt")
    }

    pub fn checkpoint(&self) -> PathBuf {
        self.out_dir.join("model.ckpt")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AblateConfig {
    pub variants: Vec<Variant>,
}

impl Default for AblateConfig {
    fn default() -> Self {
        Self {
            variants: Variant::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// `[λ1, λ2, λ3]` triples.
    pub grid: Vec<[f64; 3]>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            grid: default_lambda_grid()
                .into_iter()
                .map(|w| [w.lambda1, w.lambda2, w.lambda3])
                .collect(),
        }
    }
}

impl SweepConfig {
    pub fn weights(&self) -> Vec<LossWeights> {
        self.grid.iter().map(|l| LossWeights::new(l[0], l[1], l[2])).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub world: WorldConfig,
    pub train: TrainConfig,
    pub model: ModelConfig,
    pub sim: ExposureConfig,
    pub ablate: AblateConfig,
    pub sweep: SweepConfig,
    pub paths: PathsConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        self.train.validate()?;
        self.model.validate()?;
        self.sim.validate()?;
        if self.sweep.grid.iter().flatten().any(|&l| !(l >= 0.0) || !l.is_finite()) {
            return Err(Error::Config("sweep.grid entries must be finite and >= 0".into()));
        }
        Ok(())
    }

    /// Sets the world, training and simulation seeds together.
    pub fn set_seed(&mut self, seed: u64) {
        self.world.seed = seed;
        self.train.seed = seed;
        self.sim.seed = seed;
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            train: self.train.clone(),
            model: self.model.clone(),
            sim: self.sim.clone(),
        }
    }

    /// Writes the fully resolved config next to the run's outputs.
    pub fn echo(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("config.resolved.toml");
        std::fs::write(&path, self.to_toml()?).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_all_defaults() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(RunConfig::from_toml("[train]\nlamda1 = 2\n"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_toml("[nope]\n"), Err(Error::Config(_))));
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = RunConfig::default();
        cfg.train.lambda3 = 0.25;
        cfg.train.variant = Variant::NoSsn;
        cfg.set_seed(7);
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn negative_lambda_rejected() {
        assert!(matches!(RunConfig::from_toml("[train]\nlambda1 = -1\n"), Err(Error::Config(_))));
    }
}
