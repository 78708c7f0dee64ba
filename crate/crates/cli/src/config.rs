//! Experiment configuration: a single JSON document, with command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tandem_core::fusion::QuantizerMode;
use tandem_core::ConditionalModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub node1: ConditionalModel,
    pub node2: ConditionalModel,
    pub prior1: f64,
    pub k_list: Vec<usize>,
    pub quantizer_mode: QuantizerMode,
    /// Monte Carlo samples per k; 0 disables simulation in `sweep`.
    pub mc_samples: u64,
    pub seed: u64,
    /// Output file; standard output when absent.
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let unit_shift =
            ConditionalModel::gaussian_equal_variance(0.0, 1.0, 1.0).expect("valid default model");
        Self {
            node1: unit_shift.clone(),
            node2: unit_shift,
            prior1: 0.5,
            k_list: vec![2, 4, 8, 16],
            quantizer_mode: QuantizerMode::UniformNested,
            mc_samples: 100_000,
            seed: 2024,
            output_path: None,
            output_format: OutputFormat::Csv,
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub format: Option<OutputFormat>,
    pub output: Option<PathBuf>,
    pub mc_samples: Option<u64>,
}

impl ExperimentConfig {
    /// Parses a config document. Errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            if path == "." {
                anyhow::anyhow!("config: {}", e.inner())
            } else {
                anyhow::anyhow!("config field `{path}`: {}", e.inner())
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text)
    }

    /// Loads `path` (or the defaults) and applies the overrides.
    pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut config = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Some(seed) = overrides.seed {
            config.seed = seed;
        }
        if let Some(format) = overrides.format {
            config.output_format = format;
        }
        if let Some(output) = &overrides.output {
            config.output_path = Some(output.clone());
        }
        if let Some(n) = overrides.mc_samples {
            config.mc_samples = n;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.prior1 > 0.0 && self.prior1 < 1.0) {
            bail!(
                "config field `prior1`: must lie in (0, 1), got {}",
                self.prior1
            );
        }
        if self.k_list.is_empty() {
            bail!("config field `k_list`: must not be empty");
        }
        if self.k_list[0] < 1 || self.k_list.windows(2).any(|w| w[0] >= w[1]) {
            bail!(
                "config field `k_list`: must be strictly ascending positive integers, got {:?}",
                self.k_list
            );
        }
        if self.quantizer_mode == QuantizerMode::UniformNested {
            if let Some(w) = self.k_list.windows(2).find(|w| w[1] % w[0] != 0) {
                bail!(
                    "config field `k_list`: uniform_nested mode needs each k to divide the next, got {} then {}",
                    w[0],
                    w[1]
                );
            }
        }
        Ok(())
    }
}
