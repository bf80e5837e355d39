//! Persistence: directory-based storage with JSON manifests and CSV
//! payloads.
//!
//! CSV payloads are RFC-4180 with no header, '.' decimal separators, and
//! LF line endings; numbers carry 17 significant digits so that
//! `load(save(x))` is bitwise identical. Every manifest records a SHA-256
//! hash over its referenced files, verified on load.

mod csv;
mod density;
mod factor;
mod model;
mod snapshots;
mod spd;
mod tensor;
mod tt;

pub use csv::{format_float, read_matrix_csv, read_vector_csv, write_matrix_csv, write_vector_csv};
pub use density::{load_density, save_density};
pub use factor::{load_factor, save_factor};
pub use model::{load_model, save_model};
pub use snapshots::{load_snapshots, save_snapshots, save_snapshots_with, ValuesFormat};
pub use spd::{load_spd_field, load_spd_model, save_spd_field, save_spd_model};
pub use tensor::{load_tensor, save_tensor};
pub use tt::{load_tt, save_tt};

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: &str = "1";

/// The kinds of artifacts that persist on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiskKind {
    Snapshots,
    Model,
    Factor,
    Tt,
    Density,
    SpdField,
}

impl DiskKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiskKind::Snapshots => "snapshots",
            DiskKind::Model => "model",
            DiskKind::Factor => "factor",
            DiskKind::Tt => "tt",
            DiskKind::Density => "density",
            DiskKind::SpdField => "spd_field",
        }
    }
}

pub(crate) fn check_schema(found: &str) -> Result<()> {
    if found != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: found.to_string(),
            supported: SCHEMA_VERSION.to_string(),
        });
    }
    Ok(())
}

pub(crate) fn check_kind(expected: DiskKind, found: DiskKind) -> Result<()> {
    if expected != found {
        return Err(Error::KindMismatch {
            expected: expected.as_str().to_string(),
            actual: found.as_str().to_string(),
        });
    }
    Ok(())
}

/// SHA-256 over the bytes of the listed files, in order, as lowercase hex.
pub fn hash_files(dir: &Path, files: &[&str]) -> Result<String> {
    let mut hasher = Sha256::new();
    for file in files {
        let path = dir.join(file);
        let bytes = std::fs::read(&path).map_err(|_| Error::MissingFile {
            path: path.display().to_string(),
        })?;
        hasher.update(&bytes);
    }
    Ok(crate::model::hex_string(&hasher.finalize()))
}

pub(crate) fn verify_hash(dir: &Path, files: &[&str], expected: &str) -> Result<()> {
    let actual = hash_files(dir, files)?;
    if actual != expected {
        return Err(Error::HashMismatch {
            path: dir.display().to_string(),
            expected: expected.to_string(),
            actual,
        });
    }
    Ok(())
}

pub(crate) fn read_manifest<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|_| Error::MissingFile {
        path: path.display().to_string(),
    })?;
    Ok(serde_json::from_str(&text)?)
}

pub(crate) fn write_manifest<T: Serialize>(path: &Path, manifest: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}
