use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chebmod::tables::TableName;
use chebmod::SimParams;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub sim: SimParams,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub table: Option<TableName>,
    pub parallel: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sim: SimParams::default(),
            seed: 1,
            output_dir: PathBuf::from("tables"),
            table: None,
            parallel: true,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.sim.validate()?;
        Ok(cfg)
    }
}
