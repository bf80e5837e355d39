//! SPD field sets and reduced SPD models on disk.
//!
//! A field directory stores the samples as an M×n² CSV (one matrix per
//! row, row-major) next to the grid; a reduced model reuses the model
//! layout plus the packed mean and packing metadata.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::csv::{read_matrix_csv, read_vector_csv, write_matrix_csv, write_vector_csv};
use super::model::{build_manifest, read_model_payload, read_manifest_file, write_model_payload, SpdExtras};
use super::{check_kind, check_schema, DiskKind};
use crate::error::{Error, Result};
use crate::fields::{ReducedSpdField, SpdFieldSet};
use crate::model::ParameterGrid;

#[derive(Debug, Serialize, Deserialize)]
struct SpdFieldManifest {
    schema_version: String,
    kind: DiskKind,
    name: String,
    #[serde(rename = "M")]
    m: usize,
    matrix_dim: usize,
    d_p: usize,
    layout: String,
    values_file: String,
    points_file: String,
    weights_file: String,
    sha256: String,
}

const FILES: [&str; 3] = ["values.csv", "points.csv", "weights.csv"];

pub fn save_spd_field(
    dir: &Path,
    name: &str,
    field: &SpdFieldSet,
    grid: &ParameterGrid,
) -> Result<()> {
    if grid.len() != field.sample_count() {
        return Err(Error::DimensionMismatch {
            what: "grid points vs SPD samples",
            expected: field.sample_count(),
            actual: grid.len(),
        });
    }
    super::ensure_dir(dir)?;
    let n = field.matrix_dim();
    let flat = Array2::from_shape_fn((field.sample_count(), n * n), |(j, c)| {
        field.matrices()[j][[c / n, c % n]]
    });
    write_matrix_csv(&dir.join("values.csv"), flat.view())?;
    write_matrix_csv(&dir.join("points.csv"), grid.points())?;
    write_vector_csv(&dir.join("weights.csv"), grid.weights())?;
    let manifest = SpdFieldManifest {
        schema_version: super::SCHEMA_VERSION.to_string(),
        kind: DiskKind::SpdField,
        name: name.to_string(),
        m: field.sample_count(),
        matrix_dim: n,
        d_p: grid.dim(),
        layout: "rows-are-matrices-row-major".to_string(),
        values_file: FILES[0].to_string(),
        points_file: FILES[1].to_string(),
        weights_file: FILES[2].to_string(),
        sha256: super::hash_files(dir, &FILES)?,
    };
    super::write_manifest(&dir.join("manifest.json"), &manifest)
}

pub fn load_spd_field(dir: &Path) -> Result<(SpdFieldSet, ParameterGrid, String)> {
    let manifest: SpdFieldManifest = super::read_manifest(&dir.join("manifest.json"))?;
    check_schema(&manifest.schema_version)?;
    check_kind(DiskKind::SpdField, manifest.kind)?;
    let files = [
        manifest.values_file.as_str(),
        manifest.points_file.as_str(),
        manifest.weights_file.as_str(),
    ];
    super::verify_hash(dir, &files, &manifest.sha256)?;
    let n = manifest.matrix_dim;
    let flat = read_matrix_csv(&dir.join(&manifest.values_file), Some((manifest.m, n * n)))?;
    let matrices: Vec<Array2<f64>> = (0..manifest.m)
        .map(|j| Array2::from_shape_fn((n, n), |(a, b)| flat[[j, a * n + b]]))
        .collect();
    let points = read_matrix_csv(&dir.join(&manifest.points_file), Some((manifest.m, manifest.d_p)))?;
    let weights = read_vector_csv(&dir.join(&manifest.weights_file), Some(manifest.m))?;
    let grid = ParameterGrid::new(points, weights)?;
    Ok((SpdFieldSet::new(matrices)?, grid, manifest.name))
}

pub fn save_spd_model(dir: &Path, name: &str, reduced: &ReducedSpdField) -> Result<()> {
    write_model_payload(dir, reduced.model())?;
    write_vector_csv(&dir.join("mean.csv"), reduced.mean_packed())?;
    let extras = SpdExtras {
        matrix_dim: reduced.matrix_dim(),
        centered: reduced.centered(),
        mean_file: "mean.csv".to_string(),
    };
    let manifest = build_manifest(dir, name, reduced.model(), Some(extras), &["mean.csv"])?;
    super::write_manifest(&dir.join("model.json"), &manifest)
}

pub fn load_spd_model(dir: &Path) -> Result<(ReducedSpdField, String)> {
    let manifest = read_manifest_file(dir)?;
    let extras = manifest.spd.as_ref().ok_or_else(|| {
        Error::InvalidInput("model directory carries no SPD packing metadata".into())
    })?;
    let matrix_dim = extras.matrix_dim;
    let centered = extras.centered;
    let mean = read_vector_csv(
        &dir.join(&extras.mean_file),
        Some(matrix_dim * (matrix_dim + 1) / 2),
    )?;
    let model = read_model_payload(dir, &manifest)?;
    let reduced = ReducedSpdField::from_parts(mean, model, matrix_dim, centered)?;
    Ok((reduced, manifest.name))
}
