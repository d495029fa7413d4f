//! Scenario runner for the rmwalk simulator: configuration, seeding, worker
//! pool, result files and the run manifest.

pub mod config;
mod output;
mod scenarios;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use thiserror::Error;

pub use config::{OutputFormat, Overrides, RunConfig, Scenario, SEED_ENV};
pub use output::{FileEntry, Manifest};

use output::Artifacts;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const LOG_FILE: &str = "run.log";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration at `{key}`: {reason}")]
    Validation { key: String, reason: String },

    #[error("result invalidated (`{key}`): {reason}")]
    Invalidated { key: String, reason: String },

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Invalidated { .. } => 3,
            CliError::Io { .. } => 1,
        }
    }

    pub(crate) fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Validation {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

/// Whether the scenario's statistics stand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Invalidated { key: String, reason: String },
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub output_dir: PathBuf,
    pub manifest: Manifest,
}

impl RunOutcome {
    pub fn exit_code(&self) -> u8 {
        match self.status {
            RunStatus::Ok => 0,
            RunStatus::Invalidated { .. } => 3,
        }
    }
}

/// Runs the configured scenario on a pool of `n_workers` threads and writes
/// its result files, `run.log` and `manifest.json` into `output_dir`.
///
/// Validation problems return `Err` before a manifest exists. A statistical
/// invalidation still writes every file and reports itself through
/// [`RunOutcome::status`].
pub fn run_scenario(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.n_workers)
        .build()
        .map_err(|e| CliError::invalid("n_workers", e.to_string()))?;
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let mut art = Artifacts::new(&dir, cfg.format);
    art.log(format!("scenario {} master_seed {}", cfg.scenario.name(), cfg.master_seed));
    let status = pool.install(|| scenarios::run(cfg, &mut art))?;
    match &status {
        RunStatus::Ok => art.log("status ok"),
        RunStatus::Invalidated { key, reason } => art.log(format!("status invalidated at {key}: {reason}")),
    }
    let files = art.finish()?;
    let manifest = Manifest {
        tool: "rmwalk".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        scenario: cfg.scenario.name().into(),
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        exit_code: match status {
            RunStatus::Ok => 0,
            RunStatus::Invalidated { .. } => 3,
        },
        status: status.clone(),
        config: cfg.clone(),
        files,
    };
    write_manifest(&dir, &manifest)?;
    Ok(RunOutcome {
        status,
        output_dir: dir,
        manifest,
    })
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<(), CliError> {
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })
}
