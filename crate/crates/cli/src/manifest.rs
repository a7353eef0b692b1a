use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::args::{Command, GlobalArgs};
use crate::error::{CliError, CliResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Record of one command run; `invocation` alone re-runs it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    /// Input CSV, or `None` for generated data.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<serde_json::Value>,
    /// Resolved algorithm configuration.
    pub config: serde_json::Value,
    pub seed: u64,
    pub outputs: Vec<PathBuf>,
    pub duration_secs: f64,
    pub global: GlobalArgs,
    pub invocation: Command,
}

impl RunManifest {
    pub fn new(global: &GlobalArgs, invocation: &Command, seed: u64) -> Self {
        Self {
            tool: "lsdr".into(),
            tool_version: TOOL_VERSION.into(),
            command: invocation.name().into(),
            input: None,
            dataset: None,
            config: serde_json::Value::Null,
            seed,
            outputs: Vec::new(),
            duration_secs: 0.0,
            global: global.clone(),
            invocation: invocation.clone(),
        }
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| CliError::at(path, e.into()))
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::at(path, e.into()))?;
        serde_json::from_str(&text).map_err(|e| CliError::at(path, e.into()))
    }
}
