//! Result files, the run log and the manifest that indexes them.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{OutputFormat, RunConfig};
use crate::{CliError, RunStatus, LOG_FILE};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    /// Seconds since the Unix epoch; the only wall-clock value a run records.
    pub created_unix: u64,
    pub exit_code: u8,
    #[serde(flatten)]
    pub status: RunStatus,
    pub config: RunConfig,
    pub files: Vec<FileEntry>,
}

/// Collects the files of one run. Every write is hashed as it lands.
pub(crate) struct Artifacts {
    dir: PathBuf,
    pub format: OutputFormat,
    files: Vec<FileEntry>,
    log: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path, format: OutputFormat) -> Self {
        Self {
            dir: dir.to_path_buf(),
            format,
            files: Vec::new(),
            log: Vec::new(),
        }
    }

    pub fn log(&mut self, line: impl Into<String>) {
        self.log.push(line.into());
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|source| CliError::Io { path, source })?;
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        self.log.push(format!("wrote {name} ({} bytes)", bytes.len()));
        Ok(())
    }

    /// Pretty JSON, written only when the format includes JSON.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        if !self.format.json() {
            return Ok(());
        }
        let mut text = serde_json::to_vec_pretty(value).expect("report serializes");
        text.push(b'\n');
        self.write(name, &text)
    }

    /// Text produced by `fill`, written only when the format includes CSV.
    pub fn csv(&mut self, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<(), CliError> {
        if !self.format.csv() {
            return Ok(());
        }
        let mut buf = Vec::new();
        fill(&mut buf).expect("writing to memory");
        self.write(name, &buf)
    }

    /// Writes the log and returns the manifest entries, log included.
    pub fn finish(mut self) -> Result<Vec<FileEntry>, CliError> {
        let mut text = Vec::new();
        for line in &self.log {
            writeln!(text, "{line}").expect("writing to memory");
        }
        self.write(LOG_FILE, &text)?;
        Ok(self.files)
    }
}
