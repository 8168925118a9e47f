//! Reading and writing files.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::domain::{validate_scenario, ValidatedScenario};
use crate::error::{Error, Result};
use crate::scenario::{quantize_times, FixedCountsSpec, Rounding, Scenario};

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, to_json_string(value)).map_err(|e| Error::io(path, e))
}

pub fn read_scenario(path: &Path) -> Result<Scenario> {
    read_json(path)
}

/// Quantizes leg times conservatively and validates.
pub fn prepare(scenario: &Scenario) -> Result<ValidatedScenario> {
    validate_scenario(&quantize_times(scenario, Rounding::Conservative)).map_err(Error::Invalid)
}

pub fn load_scenario(path: &Path) -> Result<ValidatedScenario> {
    prepare(&read_scenario(path)?)
}

/// Explicit design file: location id → charger type id → count.
pub fn read_fixed_counts(path: &Path) -> Result<FixedCountsSpec> {
    read_json(path)
}
