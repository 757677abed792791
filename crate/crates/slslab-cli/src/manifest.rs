//! Run manifests: the resolved configuration and output inventory of one
//! invocation, sufficient to replay it and reproduce the data files
//! bit-identically.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::output::write_file;
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    pub tool_version: String,
    pub outputs: Vec<String>,
    pub wall_time: f64,
}

impl RunManifest {
    pub fn new(command: &str, config: &BTreeMap<String, String>, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            config: config.clone(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
            wall_time: 0.0,
        }
    }

    pub fn record(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Stamps the wall time and writes the manifest itself (not listed in
    /// `outputs`; only data files are).
    pub fn write(mut self, path: &Path, started: Instant) -> Result<(), CliError> {
        self.wall_time = started.elapsed().as_secs_f64();
        let body = serde_json::to_string_pretty(&self)
            .map_err(|e| CliError::Internal(format!("manifest serialization failed: {e}")))?;
        write_file(path, &(body + "\n"))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("malformed manifest {}: {e}", path.display())))
    }
}
