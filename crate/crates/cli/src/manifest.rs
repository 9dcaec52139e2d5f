//! Per-stage manifest: config hash plus content digests of inputs and outputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Relative to the work directory, `/`-separated.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub stage: String,
    pub config_hash: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(CliError::io(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn relative(work: &Path, p: &Path) -> String {
    let rel = p.strip_prefix(work).unwrap_or(p);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Every file below `dir`, sorted, skipping manifests.
pub fn files_under(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(CliError::io(&d))? {
            let p = entry.map_err(CliError::io(&d))?.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().is_some_and(|n| n != MANIFEST_FILE) {
                out.push(p);
            }
        }
    }
    out.sort();
    Ok(out)
}

fn digests(work: &Path, files: &[PathBuf]) -> Result<Vec<FileDigest>, CliError> {
    files
        .iter()
        .map(|p| {
            Ok(FileDigest {
                path: relative(work, p),
                sha256: sha256_file(p)?,
            })
        })
        .collect()
}

/// Write `<dir>/manifest.json` covering every file currently in `dir`.
pub fn write_manifest(
    work: &Path,
    dir: &Path,
    stage: &str,
    config_hash: &str,
    inputs: &[PathBuf],
) -> Result<Manifest, CliError> {
    let m = Manifest {
        tool: "lonesense".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        stage: stage.into(),
        config_hash: config_hash.into(),
        inputs: digests(work, inputs)?,
        outputs: digests(work, &files_under(dir)?)?,
    };
    let path = dir.join(MANIFEST_FILE);
    let body = serde_json::to_string_pretty(&m).expect("plain data") + "\n";
    std::fs::write(&path, body).map_err(CliError::io(&path))?;
    Ok(m)
}

pub fn read_manifest(dir: &Path) -> Result<Option<Manifest>, CliError> {
    let path = dir.join(MANIFEST_FILE);
    if !path.is_file() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).map_err(CliError::io(&path))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}
