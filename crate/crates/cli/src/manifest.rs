//! `manifest.json`: written with status `running` before any result file,
//! then rewritten with checksums and stage timings when the run ends.

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::experiments::{Harness, Stage};

pub const MANIFEST_JSON: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub status: RunStatus,
    pub started_unix_s: u64,
    pub error: Option<String>,
    pub config: ExperimentConfig,
    pub files: Vec<FileRecord>,
    pub stages: Vec<StageTiming>,
}

impl RunManifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            status: RunStatus::Running,
            started_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            error: None,
            config: config.clone(),
            files: Vec::new(),
            stages: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_JSON);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| HarnessError::io(path, e))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_JSON);
        let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::io(path, std::io::Error::other(e)))
    }
}

pub fn file_record(path: &Path) -> Result<FileRecord> {
    let data = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(FileRecord {
        name: path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        bytes: data.len() as u64,
        sha256: hex::encode(Sha256::digest(&data)),
    })
}

/// Runs `stages` in order under a manifest. On failure the manifest is left
/// with status `failed` and the error text.
pub fn execute(harness: &Harness, command: &str, stages: &[Stage]) -> Result<RunManifest> {
    harness.ensure_out_dir()?;
    let dir = harness.out_dir();
    let mut manifest = RunManifest::new(command, harness.config());
    manifest.write(dir)?;
    for &stage in stages {
        let t = Instant::now();
        if let Err(e) = harness.run_stage(stage) {
            manifest.status = RunStatus::Failed;
            manifest.error = Some(e.to_string());
            manifest.write(dir)?;
            return Err(e);
        }
        manifest.stages.push(StageTiming {
            stage: stage.name().to_string(),
            seconds: t.elapsed().as_secs_f64(),
        });
        manifest
            .files
            .push(file_record(&dir.join(stage.file_name()))?);
    }
    manifest.status = RunStatus::Complete;
    manifest.write(dir)?;
    Ok(manifest)
}
