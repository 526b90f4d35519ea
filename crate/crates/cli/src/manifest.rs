use std::path::PathBuf;

use serde::Serialize;

/// Reproducibility record written next to each results file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub overrides: Vec<String>,
    /// SHA-256 of the effective config, seed and replication count included.
    pub config_digest: String,
    pub master_seed: u64,
    pub replications: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepRecord>,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Outputs,
}

#[derive(Debug, Serialize)]
pub struct SweepRecord {
    pub param: String,
    pub values: Vec<u32>,
}

#[derive(Debug, Serialize)]
pub struct Outputs {
    pub results_csv: PathBuf,
    pub manifest: PathBuf,
}

/// `runs/base.csv` → `runs/base.manifest.json`.
pub fn manifest_path(out: &std::path::Path) -> PathBuf {
    out.with_extension("manifest.json")
}
