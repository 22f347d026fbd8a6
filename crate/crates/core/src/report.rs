//! Versioned JSON reports.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::config::{ExperimentConfig, IndependenceDeclarations};
use crate::constructions::{Construction, ConstructionInfo, PredictedExceptionalSet};
use crate::error::Result;
use crate::systems::SystemDescriptor;

pub const SCHEMA_VERSION: u32 = 1;

/// The one field allowed to differ between deterministic runs.
pub const TIMESTAMP_FIELD: &str = "timestamp";

#[derive(Debug, Clone, Serialize)]
pub struct SystemInfo {
    pub kind: &'static str,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_exceptional_set: Option<PredictedExceptionalSet>,
}

impl SystemInfo {
    pub fn new(sys: &SystemDescriptor, construction: Option<&Construction>) -> Self {
        Self {
            kind: sys.kind_name(),
            dim: sys.dim(),
            construction: construction.map(|c| c.info.clone()),
            predicted_exceptional_set: construction.map(|c| c.predicted_exceptional_set.clone()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub config: ExperimentConfig,
    pub independence: IndependenceDeclarations,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemInfo>,
    /// Files written next to the report, relative to the output directory.
    pub files: Vec<String>,
    pub results: Value,
}

impl Report {
    pub fn new(
        command: &str,
        config: &ExperimentConfig,
        independence: IndependenceDeclarations,
        system: Option<SystemInfo>,
    ) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            timestamp,
            config: config.clone(),
            independence,
            system,
            files: Vec::new(),
            results: Value::Null,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| crate::Error::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// Parses a report and drops the timestamp, for comparing runs.
pub fn without_timestamp(json: &str) -> Result<Value> {
    let mut v: Value = serde_json::from_str(json).map_err(|e| crate::Error::Parse(e.to_string()))?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove(TIMESTAMP_FIELD);
    }
    Ok(v)
}

/// `dir/prefix+name`.
pub fn output_path(dir: &Path, prefix: &str, name: &str) -> PathBuf {
    dir.join(format!("{prefix}{name}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::SymbolBasis;

    #[test]
    fn schema_and_timestamp() {
        let cfg = ExperimentConfig::from_toml("[analysis]\nsteps = 5").unwrap();
        let ind = IndependenceDeclarations::from_basis(&SymbolBasis::empty());
        let mut a = Report::new("build", &cfg, ind.clone(), None);
        let mut b = Report::new("build", &cfg, ind, None);
        a.timestamp = 1;
        b.timestamp = 2;
        let (ja, jb) = (a.to_json().unwrap(), b.to_json().unwrap());
        assert_ne!(ja, jb);
        assert_eq!(without_timestamp(&ja).unwrap(), without_timestamp(&jb).unwrap());
        let v: Value = serde_json::from_str(&ja).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["config"]["analysis"]["steps"], 5);
    }
}
