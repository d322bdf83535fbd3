//! Scenario file: any subset of `ScenarioConfig` keys, layered over the
//! defaults of the file's `regime` (free-flow when absent).

use std::path::Path;

use super::{read_text, toml_error, write_text, IoError};
use crate::sim::{Regime, ScenarioConfig};

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

pub fn parse_scenario(path: &Path, text: &str) -> Result<ScenarioConfig, IoError> {
    parse_scenario_as(path, text, None)
}

/// Like `parse_scenario`, with `regime` replacing the file's regime and
/// selecting the defaults underneath it.
pub fn parse_scenario_as(path: &Path, text: &str, regime: Option<Regime>) -> Result<ScenarioConfig, IoError> {
    // Standalone parse first so unknown keys and type errors carry a
    // position in the user's file.
    let _: ScenarioConfig = toml::from_str(text).map_err(|e| toml_error(path, text, e))?;
    let mut over: toml::Table = toml::from_str(text).map_err(|e| toml_error(path, text, e))?;
    let regime = match (regime, over.get("regime")) {
        (Some(r), _) => r,
        (None, None) => Regime::FreeFlow,
        (None, Some(toml::Value::String(s))) => s.parse().map_err(|m: String| IoError::invalid(path, m))?,
        (None, Some(_)) => return Err(IoError::invalid(path, "regime must be a string")),
    };
    over.insert("regime".into(), toml::Value::String(regime.as_str().into()));
    let mut base = toml::Table::try_from(ScenarioConfig::for_regime(regime, 0)).expect("defaults serialize");
    merge(&mut base, over);
    let merged = toml::to_string(&base).expect("table serializes");
    let cfg: ScenarioConfig =
        toml::from_str(&merged).map_err(|e| IoError::parse(path, 1, 1, e.message().to_string()))?;
    cfg.validate().map_err(|e| IoError::invalid(path, e.to_string()))?;
    Ok(cfg)
}

pub fn read_scenario(path: &Path) -> Result<ScenarioConfig, IoError> {
    read_scenario_as(path, None)
}

pub fn read_scenario_as(path: &Path, regime: Option<Regime>) -> Result<ScenarioConfig, IoError> {
    let text = read_text(path)?;
    parse_scenario_as(path, &text, regime)
}

pub fn write_scenario(path: &Path, cfg: &ScenarioConfig) -> Result<(), IoError> {
    write_text(path, &toml::to_string(cfg).expect("scenario serializes"))
}
