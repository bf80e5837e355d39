//! Snapshot-set directories: manifest.json + points/weights/values files.
//!
//! Values are CSV by default; a raw little-endian f64 payload (extension
//! `.f64`, snapshot after snapshot) is supported for large inputs. A
//! manifest without a weights file gets the Monte-Carlo default `1/M`.

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::csv::{read_matrix_csv, read_vector_csv, write_matrix_csv, write_vector_csv};
use super::{check_kind, check_schema, DiskKind};
use crate::error::{Error, Result};
use crate::model::{ParameterGrid, SnapshotSet};

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotManifest {
    schema_version: String,
    kind: DiskKind,
    name: String,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    d_p: usize,
    layout: String,
    points_file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights_file: Option<String>,
    values_file: String,
    sha256: String,
}

/// Payload format for the snapshot values file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValuesFormat {
    #[default]
    Csv,
    /// Raw little-endian f64, one snapshot column after another.
    RawF64,
}

pub fn save_snapshots(dir: &Path, name: &str, snapshots: &SnapshotSet) -> Result<()> {
    save_snapshots_with(dir, name, snapshots, ValuesFormat::Csv)
}

pub fn save_snapshots_with(
    dir: &Path,
    name: &str,
    snapshots: &SnapshotSet,
    format: ValuesFormat,
) -> Result<()> {
    super::ensure_dir(dir)?;
    write_matrix_csv(&dir.join("points.csv"), snapshots.grid().points())?;
    write_vector_csv(&dir.join("weights.csv"), snapshots.grid().weights())?;
    let (values_file, layout) = match format {
        ValuesFormat::Csv => ("values.csv", "column-major-csv"),
        ValuesFormat::RawF64 => ("values.f64", "column-major-f64"),
    };
    match format {
        ValuesFormat::Csv => {
            write_matrix_csv(&dir.join(values_file), snapshots.values())?;
        }
        ValuesFormat::RawF64 => {
            let mut bytes =
                Vec::with_capacity(8 * snapshots.state_dim() * snapshots.sample_count());
            for col in snapshots.values().columns() {
                for &x in col.iter() {
                    bytes.extend_from_slice(&x.to_le_bytes());
                }
            }
            std::fs::write(dir.join(values_file), bytes)?;
        }
    }
    let files = ["points.csv", "weights.csv", values_file];
    let manifest = SnapshotManifest {
        schema_version: super::SCHEMA_VERSION.to_string(),
        kind: DiskKind::Snapshots,
        name: name.to_string(),
        n: snapshots.state_dim(),
        m: snapshots.sample_count(),
        d_p: snapshots.grid().dim(),
        layout: layout.to_string(),
        points_file: files[0].to_string(),
        weights_file: Some(files[1].to_string()),
        values_file: values_file.to_string(),
        sha256: super::hash_files(dir, &files)?,
    };
    super::write_manifest(&dir.join("manifest.json"), &manifest)
}

pub fn load_snapshots(dir: &Path) -> Result<(SnapshotSet, String)> {
    let manifest: SnapshotManifest = super::read_manifest(&dir.join("manifest.json"))?;
    check_schema(&manifest.schema_version)?;
    check_kind(DiskKind::Snapshots, manifest.kind)?;
    let mut files = vec![manifest.points_file.as_str()];
    if let Some(ref w) = manifest.weights_file {
        files.push(w.as_str());
    }
    files.push(manifest.values_file.as_str());
    super::verify_hash(dir, &files, &manifest.sha256)?;
    let points = read_matrix_csv(&dir.join(&manifest.points_file), Some((manifest.m, manifest.d_p)))?;
    let weights = match manifest.weights_file {
        Some(ref w) => read_vector_csv(&dir.join(w), Some(manifest.m))?,
        // Monte-Carlo default when the manifest omits weights.
        None => Array1::from_elem(manifest.m, 1.0 / manifest.m as f64),
    };
    let values = read_values(dir, &manifest)?;
    let grid = ParameterGrid::new(points, weights)?;
    Ok((SnapshotSet::new(values, grid, None)?, manifest.name))
}

fn read_values(dir: &Path, manifest: &SnapshotManifest) -> Result<Array2<f64>> {
    let path = dir.join(&manifest.values_file);
    if manifest.values_file.ends_with(".f64") {
        let bytes = std::fs::read(&path).map_err(|_| Error::MissingFile {
            path: path.display().to_string(),
        })?;
        let expected = 8 * manifest.n * manifest.m;
        if bytes.len() != expected {
            return Err(Error::Csv {
                path: path.display().to_string(),
                message: format!("{} bytes, manifest implies {expected}", bytes.len()),
            });
        }
        let mut values = Array2::<f64>::zeros((manifest.n, manifest.m));
        for j in 0..manifest.m {
            for i in 0..manifest.n {
                let offset = 8 * (j * manifest.n + i);
                let mut word = [0u8; 8];
                word.copy_from_slice(&bytes[offset..offset + 8]);
                values[[i, j]] = f64::from_le_bytes(word);
            }
        }
        Ok(values)
    } else {
        read_matrix_csv(&path, Some((manifest.n, manifest.m)))
    }
}
