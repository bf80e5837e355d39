//! Full tensors on disk: tensor.json (dims) + a flat values CSV.
//!
//! This is an ingestion format for the compressor, not one of the
//! manifest-tracked model kinds.

use std::path::Path;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use super::csv::{read_vector_csv, write_vector_csv};
use crate::error::Result;
use crate::tensor::FullTensor;

#[derive(Debug, Serialize, Deserialize)]
struct TensorManifest {
    schema_version: String,
    name: String,
    dims: Vec<usize>,
    values_file: String,
    sha256: String,
}

pub fn save_tensor(dir: &Path, name: &str, tensor: &FullTensor) -> Result<()> {
    super::ensure_dir(dir)?;
    let flat = Array1::from(tensor.data().to_vec());
    write_vector_csv(&dir.join("values.csv"), flat.view())?;
    let manifest = TensorManifest {
        schema_version: super::SCHEMA_VERSION.to_string(),
        name: name.to_string(),
        dims: tensor.dims().to_vec(),
        values_file: "values.csv".to_string(),
        sha256: super::hash_files(dir, &["values.csv"])?,
    };
    super::write_manifest(&dir.join("tensor.json"), &manifest)
}

pub fn load_tensor(dir: &Path) -> Result<(FullTensor, String)> {
    let manifest: TensorManifest = super::read_manifest(&dir.join("tensor.json"))?;
    super::check_schema(&manifest.schema_version)?;
    super::verify_hash(dir, &[manifest.values_file.as_str()], &manifest.sha256)?;
    let len: usize = manifest.dims.iter().product();
    let flat = read_vector_csv(&dir.join(&manifest.values_file), Some(len))?;
    Ok((FullTensor::new(manifest.dims, flat.to_vec())?, manifest.name))
}
