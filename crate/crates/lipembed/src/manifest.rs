//! Output directory handling and per-run manifests.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::format::FIELD_FORMAT_VERSION;
use crate::report::SCHEMA_VERSION;

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Artifact {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Versions {
    pub lipembed: &'static str,
    pub lipembed_core: &'static str,
    pub field_format: u32,
    pub report_schema: u32,
}

pub fn versions() -> Versions {
    Versions {
        lipembed: env!("CARGO_PKG_VERSION"),
        lipembed_core: lipembed_core::VERSION,
        field_format: FIELD_FORMAT_VERSION,
        report_schema: SCHEMA_VERSION,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub schema: &'static str,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub workers: usize,
    pub versions: Versions,
    /// Resolved key-value settings.
    pub config: std::collections::BTreeMap<String, String>,
    /// Resolved parameter profile in canonical form.
    pub profile: String,
    pub outputs: Vec<Artifact>,
}

/// Writes new files into one directory and never replaces an existing one.
pub struct Outputs {
    pub dir: PathBuf,
    pub written: Vec<Artifact>,
}

impl Outputs {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Outputs { dir, written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, data: &[u8]) -> Result<PathBuf> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        write_new(&path, data)?;
        self.written.push(Artifact { path: name.to_string(), bytes: data.len() as u64, sha256: sha256_hex(data) });
        Ok(path)
    }

    /// Writes `<command>.manifest.json`.
    pub fn finish(self, command: &str, cfg: &RunConfig) -> Result<PathBuf> {
        let canonical = cfg.canonical(command);
        let m = Manifest {
            schema: "lipembed-manifest/1",
            command: command.to_string(),
            config_hash: sha256_hex(canonical.as_bytes()),
            seed: cfg.seed()?,
            workers: cfg.workers()?,
            versions: versions(),
            config: cfg.values.clone(),
            profile: crate::config::profile_text(&cfg.params),
            outputs: self.written,
        };
        let mut text = serde_json::to_string_pretty(&m).expect("manifest serializes");
        text.push('\n');
        let path = self.dir.join(format!("{command}.manifest.json"));
        write_new(&path, text.as_bytes())?;
        Ok(path)
    }
}

/// Creates `path`. An existing file is left alone: identical content counts as written,
/// anything else is an error.
fn write_new(path: &Path, data: &[u8]) -> Result<()> {
    let mut f = match OpenOptions::new().write(true).create_new(true).open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
            return match std::fs::read(path) {
                Ok(old) if old == data => Ok(()),
                _ => Err(Error::Precondition(format!("{} exists with different content; artifacts are never overwritten", path.display()))),
            };
        }
        Err(e) => return Err(Error::io(path, e)),
    };
    f.write_all(data).map_err(|e| Error::io(path, e))
}
