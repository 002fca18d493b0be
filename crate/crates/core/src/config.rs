//! JSON run configuration: a coupling family, an optional box region, and
//! optional run parameters shared by the command-line tools.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::disorder::DisorderDistribution;
use crate::model::{CouplingFamily, Orbit, Region};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitConfig {
    /// Sites of one representative subset, each a d-vector containing the origin.
    pub sites: Vec<Vec<i64>>,
    pub distribution: DisorderDistribution,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub dimension: usize,
    pub orbits: Vec<OrbitConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub box_side: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub beta: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub n_list: Option<Vec<usize>>,
    pub r_grid: Option<Vec<f64>>,
    pub out: Option<String>,
    pub checks: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelConfig,
    #[serde(default)]
    pub region: Option<RegionConfig>,
    #[serde(default)]
    pub run: Option<RunConfig>,
}

impl Config {
    pub fn from_str(text: &str) -> Result<Config> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Config> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Config::from_str(&text)
    }

    pub fn family(&self) -> Result<CouplingFamily> {
        let orbits = self
            .model
            .orbits
            .iter()
            .map(|o| Orbit { sites: o.sites.clone(), distribution: o.distribution.clone() })
            .collect();
        CouplingFamily::new(self.model.dimension, orbits)
    }

    /// The configured box region; errors if the config has no region block.
    pub fn region(&self) -> Result<Region> {
        let r = self
            .region
            .as_ref()
            .ok_or_else(|| Error::Config("config has no region block".into()))?;
        Region::cube(self.model.dimension, r.box_side)
    }

    pub fn run(&self) -> RunConfig {
        self.run.clone().unwrap_or_default()
    }
}

/// FNV-1a fingerprint of the raw config text, reported alongside results so
/// runs can be matched to the exact input that produced them.
pub fn content_hash(text: &str) -> String {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in text.as_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    format!("{h:016x}")
}
