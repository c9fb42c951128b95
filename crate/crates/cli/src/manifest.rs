//! Run manifests: the resolved inputs of a run and a digest of every file
//! it wrote.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::args::{Format, Grid};
use crate::error::{config, CliError};

pub const TOOLKIT: &str = "atomcav";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const FILE_NAME: &str = "manifest.json";

/// Arguments that change the output, as recorded for replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArgs {
    pub seed: Option<u64>,
    pub grids: Vec<Grid>,
    pub format: Format,
    pub nu_bar: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub toolkit: String,
    pub version: String,
    pub subcommand: String,
    pub args: RunArgs,
    /// Full configuration with the scenario section resolved.
    pub config: Value,
    /// SHA-256 over subcommand, args and config.
    pub config_hash: String,
    pub derived: Option<Value>,
    pub wall_clock_s: f64,
    pub warnings: Vec<String>,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn config_hash(subcommand: &str, args: &RunArgs, config: &Value) -> String {
    let canonical = json!({ "subcommand": subcommand, "args": args, "config": config });
    sha256_hex(&serde_json::to_vec(&canonical).unwrap_or_default())
}

pub fn entry(path: &str, bytes: &[u8]) -> FileEntry {
    FileEntry {
        path: path.to_string(),
        sha256: sha256_hex(bytes),
        bytes: bytes.len() as u64,
    }
}

impl Manifest {
    /// True when the JSON object looks like a manifest rather than a config.
    pub fn is_manifest(v: &Value) -> bool {
        v.get("toolkit").is_some() && v.get("config").is_some() && v.get("subcommand").is_some()
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| config(format!("{}: not a manifest: {e}", path.display())))
    }

    /// Warnings about the provenance of a loaded manifest.
    pub fn audit(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.toolkit != TOOLKIT {
            out.push(format!("manifest written by `{}`, not `{TOOLKIT}`", self.toolkit));
        }
        if self.version != VERSION {
            out.push(format!(
                "VersionMismatch: manifest written by {TOOLKIT} {}, running {VERSION}; proceeding",
                self.version
            ));
        }
        let computed = config_hash(&self.subcommand, &self.args, &self.config);
        if computed != self.config_hash {
            out.push(format!(
                "manifest edited: config hash {} does not match recorded {}",
                &computed[..12],
                self.config_hash.get(..12).unwrap_or(&self.config_hash)
            ));
        }
        out
    }
}
