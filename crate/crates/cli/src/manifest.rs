use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use oac_core::experiments::{ExperimentConfig, SweepResult};
use serde::Serialize;

/// Record written next to every sweep. `config` alone determines the CSV.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub seed: u64,
    pub threads: usize,
    pub config: ExperimentConfig,
    pub outputs: Vec<String>,
    pub timings: Vec<PointTiming>,
}

#[derive(Debug, Serialize)]
pub struct PointTiming {
    pub d: usize,
    pub n_s: usize,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(result: &SweepResult, threads: usize, outputs: Vec<String>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |t| t.as_secs()),
            seed: result.config.base_seed,
            threads,
            config: result.config.clone(),
            outputs,
            timings: result
                .rows
                .iter()
                .map(|r| PointTiming {
                    d: r.d,
                    n_s: r.n_s,
                    wall_time_s: r.wall_time,
                })
                .collect(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n")
            .with_context(|| format!("writing manifest {}", path.display()))
    }
}
