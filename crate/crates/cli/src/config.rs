//! Config resolution: built-in presets, TOML files, command-line overrides.

use std::path::Path;

use anyhow::{bail, Context, Result};
use vascr_core::nested::{EngineMode, PipelineConfig};

/// Loads a config from a TOML file. Unknown keys are errors, so typos fail
/// fast instead of silently falling back to defaults.
pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let cfg: PipelineConfig = toml::from_str(text).context("invalid config file")?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn serialize_config(cfg: &PipelineConfig) -> Result<String> {
    toml::to_string_pretty(cfg).context("config serialization failed")
}

pub fn preset(name: &str) -> Result<PipelineConfig> {
    match name {
        "desk" => Ok(PipelineConfig::desk()),
        "paper" => Ok(PipelineConfig::paper()),
        other => bail!("unknown preset `{other}`, expected desk or paper"),
    }
}

/// Resolves the effective config from `--config`/`--preset` plus overrides.
/// With neither given, the desk preset applies.
pub fn resolve(
    config_path: Option<&Path>,
    preset_name: Option<&str>,
    seed: Option<u64>,
    mode: Option<EngineMode>,
) -> Result<PipelineConfig> {
    let mut cfg = match (config_path, preset_name) {
        (Some(_), Some(_)) => bail!("choose either --config or --preset, not both"),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            parse_config(&text)?
        }
        (None, Some(name)) => preset(name)?,
        (None, None) => PipelineConfig::desk(),
    };
    if let Some(seed) = seed {
        cfg.run.master_seed = seed;
    }
    if let Some(mode) = mode {
        cfg.run.mode = mode;
    }
    cfg.validate()?;
    Ok(cfg)
}
