//! Reduced-model directories: model.json + eigenvalue/mode CSVs + grid.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::csv::{read_matrix_csv, read_vector_csv, write_matrix_csv, write_vector_csv};
use super::{check_kind, check_schema, DiskKind};
use crate::error::Result;
use crate::model::ParameterGrid;
use crate::spectral::{Provenance, ReducedModel, SpectralData};

#[derive(Debug, Serialize, Deserialize)]
pub(super) struct ModelManifest {
    pub schema_version: String,
    pub kind: DiskKind,
    pub name: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub d_p: usize,
    #[serde(rename = "n")]
    pub rank: usize,
    pub tail_energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_hash: Option<String>,
    pub files: Vec<String>,
    pub sha256: String,
    /// Packing metadata for reduced SPD fields.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spd: Option<SpdExtras>,
}

#[derive(Debug, Serialize, Deserialize)]
pub(super) struct SpdExtras {
    pub matrix_dim: usize,
    pub centered: bool,
    pub mean_file: String,
}

pub(super) const MODEL_FILES: [&str; 5] = [
    "eigenvalues.csv",
    "spatial_modes.csv",
    "parameter_modes.csv",
    "points.csv",
    "weights.csv",
];

pub(super) fn write_model_payload(dir: &Path, model: &ReducedModel) -> Result<()> {
    super::ensure_dir(dir)?;
    let data = model.spectral();
    let eigen = ndarray::Array1::from(data.eigenvalues().to_vec());
    write_vector_csv(&dir.join("eigenvalues.csv"), eigen.view())?;
    write_matrix_csv(&dir.join("spatial_modes.csv"), data.spatial_modes())?;
    write_matrix_csv(&dir.join("parameter_modes.csv"), data.parameter_modes())?;
    write_matrix_csv(&dir.join("points.csv"), data.grid().points())?;
    write_vector_csv(&dir.join("weights.csv"), data.grid().weights())?;
    Ok(())
}

pub(super) fn build_manifest(
    dir: &Path,
    name: &str,
    model: &ReducedModel,
    spd: Option<SpdExtras>,
    extra_files: &[&str],
) -> Result<ModelManifest> {
    let mut files: Vec<String> = MODEL_FILES.iter().map(|s| s.to_string()).collect();
    files.extend(extra_files.iter().map(|s| s.to_string()));
    let sha256 = {
        let refs: Vec<&str> = files.iter().map(|s| s.as_str()).collect();
        super::hash_files(dir, &refs)?
    };
    Ok(ModelManifest {
        schema_version: super::SCHEMA_VERSION.to_string(),
        kind: DiskKind::Model,
        name: name.to_string(),
        n: model.spectral().state_dim(),
        m: model.spectral().grid().len(),
        d_p: model.spectral().grid().dim(),
        rank: model.truncation_rank(),
        tail_energy: model.tail_energy(),
        source_hash: model.provenance().source_hash.clone(),
        files,
        sha256,
        spd,
    })
}

pub fn save_model(dir: &Path, name: &str, model: &ReducedModel) -> Result<()> {
    write_model_payload(dir, model)?;
    let manifest = build_manifest(dir, name, model, None, &[])?;
    super::write_manifest(&dir.join("model.json"), &manifest)
}

pub(super) fn read_model_payload(
    dir: &Path,
    manifest: &ModelManifest,
) -> Result<ReducedModel> {
    check_schema(&manifest.schema_version)?;
    check_kind(DiskKind::Model, manifest.kind)?;
    let refs: Vec<&str> = manifest.files.iter().map(|s| s.as_str()).collect();
    super::verify_hash(dir, &refs, &manifest.sha256)?;
    let eigenvalues = if manifest.rank == 0 {
        Vec::new()
    } else {
        read_vector_csv(&dir.join("eigenvalues.csv"), Some(manifest.rank))?.to_vec()
    };
    let spatial = if manifest.rank == 0 {
        Array2::zeros((manifest.n, 0))
    } else {
        read_matrix_csv(&dir.join("spatial_modes.csv"), Some((manifest.n, manifest.rank)))?
    };
    let parameter = if manifest.rank == 0 {
        Array2::zeros((manifest.m, 0))
    } else {
        read_matrix_csv(
            &dir.join("parameter_modes.csv"),
            Some((manifest.m, manifest.rank)),
        )?
    };
    let points = read_matrix_csv(&dir.join("points.csv"), Some((manifest.m, manifest.d_p)))?;
    let weights = read_vector_csv(&dir.join("weights.csv"), Some(manifest.m))?;
    let grid = ParameterGrid::new(points, weights)?;
    let data = SpectralData::from_parts(
        eigenvalues,
        spatial,
        parameter,
        grid,
        manifest.source_hash.clone(),
    )?;
    Ok(ReducedModel::from_parts(
        data,
        manifest.tail_energy,
        Provenance {
            source_name: Some(manifest.name.clone()),
            source_hash: manifest.source_hash.clone(),
        },
    ))
}

pub fn load_model(dir: &Path) -> Result<(ReducedModel, String)> {
    let manifest: ModelManifest = super::read_manifest(&dir.join("model.json"))?;
    let model = read_model_payload(dir, &manifest)?;
    Ok((model, manifest.name))
}

pub(super) fn read_manifest_file(dir: &Path) -> Result<ModelManifest> {
    super::read_manifest(&dir.join("model.json"))
}
