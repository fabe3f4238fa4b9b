use std::path::Path;

use anyhow::{Context, Result};
use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub master_seed: u64,
    pub workers: usize,
    pub started: String,
    pub finished: String,
    pub config: RunConfig,
    pub results: Vec<Value>,
}

impl RunManifest {
    pub fn new(command: &str, config: RunConfig, master_seed: u64, workers: usize, started: DateTime<Utc>) -> Self {
        RunManifest {
            command: command.to_owned(),
            version: VERSION,
            master_seed,
            workers,
            started: stamp(started),
            finished: String::new(),
            config,
            results: Vec::new(),
        }
    }

    pub fn write(mut self, dir: &Path) -> Result<()> {
        self.finished = stamp(Utc::now());
        let path = dir.join("run.json");
        let text = serde_json::to_string_pretty(&self)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
    }
}

fn stamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}
