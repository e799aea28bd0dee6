//! Study and table settings from TOML or JSON files, layered over defaults.

use std::path::Path;

use netgof::rmt::TableSpec;
use netgof::studies::{Experiment, ExperimentConfig};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::{CliError, CliResult};

/// Reads a TOML (`.toml`) or JSON (anything else) file into a JSON object.
pub fn read_table(path: &Path) -> CliResult<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |msg: String| CliError::Config {
        path: path.to_path_buf(),
        msg,
    };
    let value: Value = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml")) {
        let t: toml::Table = toml::from_str(&text).map_err(|e| bad(e.to_string()))?;
        serde_json::to_value(t).map_err(|e| bad(e.to_string()))?
    } else {
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?
    };
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(bad("top level must be a table".into())),
    }
}

/// `base` with every key of `overlay` replaced; unknown keys are left for
/// the target type to reject.
fn layered<T: Serialize + DeserializeOwned>(base: &T, overlay: Map<String, Value>, path: &Path) -> CliResult<T> {
    let mut merged = match serde_json::to_value(base).expect("defaults serialize") {
        Value::Object(m) => m,
        _ => unreachable!("config types are structs"),
    };
    merged.extend(overlay);
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

/// Defaults for the study, then the file, then `tweak` (command-line flags).
pub fn experiment_config(
    experiment: Option<Experiment>,
    file: Option<&Path>,
    tweak: impl FnOnce(&mut ExperimentConfig),
) -> CliResult<ExperimentConfig> {
    let mut table = match file {
        Some(p) => read_table(p)?,
        None => Map::new(),
    };
    // `B` is accepted as a synonym, matching the command-line flag.
    if let Some(b) = table.remove("B") {
        table.insert("bootstrap".into(), b);
    }
    let from_file = match table.get("experiment") {
        Some(v) => Some(
            v.as_str()
                .ok_or_else(|| CliError::Usage("experiment must be a string".into()))?
                .parse::<Experiment>()?,
        ),
        None => None,
    };
    let experiment = match (experiment, from_file) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Usage(format!(
                "experiment {a} on the command line but {b} in the config file"
            )))
        }
        (Some(e), _) | (None, Some(e)) => e,
        (None, None) => return Err(CliError::Usage("no experiment given".into())),
    };
    let defaults = ExperimentConfig::defaults(experiment);
    let mut config = match file {
        Some(p) => layered(&defaults, table, p)?,
        None => defaults,
    };
    tweak(&mut config);
    config.validate()?;
    Ok(config)
}

pub fn table_spec(file: Option<&Path>, tweak: impl FnOnce(&mut TableSpec)) -> CliResult<TableSpec> {
    let mut spec = match file {
        Some(p) => layered(&TableSpec::default(), read_table(p)?, p)?,
        None => TableSpec::default(),
    };
    tweak(&mut spec);
    Ok(spec)
}
