//! Tensor-train directories: tt.json + one flattened core CSV per mode.

use std::path::Path;

use ndarray::{Array1, Array3};
use serde::{Deserialize, Serialize};

use super::csv::{read_vector_csv, write_vector_csv};
use super::{check_kind, check_schema, DiskKind};
use crate::error::{Error, Result};
use crate::tensor::TTRepresentation;

#[derive(Debug, Serialize, Deserialize)]
struct TtManifest {
    schema_version: String,
    kind: DiskKind,
    name: String,
    dims: Vec<usize>,
    ranks: Vec<usize>,
    cores: Vec<CoreEntry>,
    sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct CoreEntry {
    file: String,
    /// (left rank, mode size, right rank); payload is flattened row-major.
    shape: [usize; 3],
}

pub fn save_tt(dir: &Path, name: &str, tt: &TTRepresentation) -> Result<()> {
    super::ensure_dir(dir)?;
    let mut cores = Vec::new();
    for (k, core) in tt.cores().iter().enumerate() {
        let file = format!("core_{k}.csv");
        let flat = Array1::from_iter(core.iter().cloned());
        write_vector_csv(&dir.join(&file), flat.view())?;
        cores.push(CoreEntry {
            file,
            shape: [core.shape()[0], core.shape()[1], core.shape()[2]],
        });
    }
    let sha256 = {
        let files: Vec<&str> = cores.iter().map(|c| c.file.as_str()).collect();
        super::hash_files(dir, &files)?
    };
    let manifest = TtManifest {
        schema_version: super::SCHEMA_VERSION.to_string(),
        kind: DiskKind::Tt,
        name: name.to_string(),
        dims: tt.mode_dims(),
        ranks: tt.ranks(),
        cores,
        sha256,
    };
    super::write_manifest(&dir.join("tt.json"), &manifest)
}

pub fn load_tt(dir: &Path) -> Result<(TTRepresentation, String)> {
    let manifest: TtManifest = super::read_manifest(&dir.join("tt.json"))?;
    check_schema(&manifest.schema_version)?;
    check_kind(DiskKind::Tt, manifest.kind)?;
    let files: Vec<&str> = manifest.cores.iter().map(|c| c.file.as_str()).collect();
    super::verify_hash(dir, &files, &manifest.sha256)?;
    let mut cores = Vec::new();
    for entry in &manifest.cores {
        let [rl, n, rr] = entry.shape;
        let flat = read_vector_csv(&dir.join(&entry.file), Some(rl * n * rr))?;
        let core = Array3::from_shape_vec((rl, n, rr), flat.to_vec()).map_err(|_| {
            Error::Csv {
                path: dir.join(&entry.file).display().to_string(),
                message: "length does not match recorded core shape".to_string(),
            }
        })?;
        cores.push(core);
    }
    Ok((TTRepresentation::new(cores)?, manifest.name))
}
