//! Engine configuration from an optional TOML file plus command-line and
//! environment overrides.

use std::path::{Path, PathBuf};

use anyhow::Context;
use pqa_core::config::EngineConfig;

pub const DATA_DIR_ENV: &str = "PQA_DATA_DIR";
pub const PORT_ENV: &str = "PQA_PORT";
pub const DEFAULT_DATA_DIR: &str = "pqa-data";
pub const DEFAULT_PORT: u16 = 8080;

/// Reads `file` if given, then sets the data directory. The directory passed
/// here wins over one named in the file.
pub fn load(file: Option<&Path>, data_dir: Option<PathBuf>) -> anyhow::Result<EngineConfig> {
    let mut config = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str::<EngineConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => EngineConfig::default(),
    };
    if let Some(dir) = data_dir {
        config.data_dir = Some(dir);
    }
    if config.data_dir.is_none() {
        config.data_dir = Some(PathBuf::from(DEFAULT_DATA_DIR));
    }
    config.validate()?;
    Ok(config)
}
