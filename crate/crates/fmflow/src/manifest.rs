//! Run manifests. The hash covers the command name and the resolved config;
//! the worker count is deliberately not part of it.

use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Config;

/// Manifest file name for a command, e.g. `manifest-evolve.json`.
pub fn file_name(command: &str) -> String {
    format!("manifest-{command}.json")
}

pub fn is_manifest_name(name: &str) -> bool {
    name.starts_with("manifest-") && name.ends_with(".json")
}

pub fn config_hash(command: &str, cfg: &Config) -> String {
    let canonical =
        serde_json::to_vec(&serde_json::json!({ "command": command, "config": cfg })).expect("config serializes");
    let digest = Sha256::digest(&canonical);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub wall_seconds: f64,
    pub steps: usize,
    pub seconds_per_step: f64,
}

impl Timings {
    pub fn new(wall: Duration, steps: usize) -> Self {
        let w = wall.as_secs_f64();
        Timings { wall_seconds: w, steps, seconds_per_step: if steps > 0 { w / steps as f64 } else { 0.0 } }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config_hash: String,
    pub config: Config,
    pub threads: usize,
    pub timings: Timings,
    pub outcome: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, cfg: &Config, threads: usize) -> Self {
        RunManifest {
            command: command.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config_hash(command, cfg),
            config: cfg.clone(),
            threads,
            timings: Timings::new(Duration::ZERO, 0),
            outcome: String::new(),
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(dir.join(file_name(&self.command)), text + "\n")
    }
}

/// Hash recorded in a manifest file, if it exists and parses.
pub fn read_hash(path: &Path) -> Option<String> {
    let text = std::fs::read_to_string(path).ok()?;
    let v: serde_json::Value = serde_json::from_str(&text).ok()?;
    v.get("config_hash")?.as_str().map(str::to_string)
}
