//! Self-describing output headers.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL_NAME: &str = "htmia";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Identifies the tool build and the exact configuration behind an output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// SHA-256 of the canonical JSON encoding of the run configuration.
    pub config_sha256: String,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn for_config<T: Serialize>(config: &T, seed: Option<u64>) -> Self {
        let canonical = serde_json::to_vec(config).expect("config serializes to JSON");
        let digest = Sha256::digest(&canonical);
        let config_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        Self {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            config_sha256,
            seed,
        }
    }

    /// One-line form used as a `#` comment in CSV outputs.
    pub fn header_line(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "{} {} config_sha256={} seed={}",
            self.tool, self.version, self.config_sha256, seed
        )
    }
}
