//! Shared output formatting and run manifests.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Locale-independent scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Provenance attached to every file the command-line tool writes.
/// Re-running a command with an identical manifest reproduces its outputs
/// byte for byte.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub parameters: BTreeMap<String, String>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, timestamp: String) -> Self {
        RunManifest {
            command: command.to_string(),
            seed,
            parameters: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    /// `# key: value` lines placed ahead of a CSV header.
    pub fn csv_preamble(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# command: {}\n", self.command));
        out.push_str(&format!("# seed: {}\n", self.seed));
        for (k, v) in &self.parameters {
            out.push_str(&format!("# param.{k}: {v}\n"));
        }
        out.push_str(&format!("# tool_version: {}\n", self.tool_version));
        out.push_str(&format!("# timestamp: {}\n", self.timestamp));
        out
    }
}
