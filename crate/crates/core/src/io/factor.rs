//! Factor directories: factor.json + matrix.csv.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::csv::{read_matrix_csv, write_matrix_csv};
use super::{check_kind, check_schema, DiskKind};
use crate::error::Result;
use crate::factorization::{Factor, FactorKind};

#[derive(Debug, Serialize, Deserialize)]
struct FactorManifest {
    schema_version: String,
    kind: DiskKind,
    name: String,
    factor_kind: String,
    codomain_dim: usize,
    state_dim: usize,
    correlation_sha256: String,
    matrix_file: String,
    sha256: String,
}

/// SHA-256 of the correlation `BᵀB` this factor reproduces.
pub(super) fn correlation_hash(factor: &Factor) -> String {
    let c = factor.correlation();
    let mut hasher = Sha256::new();
    hasher.update((c.nrows() as u64).to_le_bytes());
    for &x in c.iter() {
        hasher.update(x.to_le_bytes());
    }
    crate::model::hex_string(&hasher.finalize())
}

pub fn save_factor(dir: &Path, name: &str, factor: &Factor) -> Result<()> {
    super::ensure_dir(dir)?;
    write_matrix_csv(&dir.join("matrix.csv"), factor.matrix())?;
    let manifest = FactorManifest {
        schema_version: super::SCHEMA_VERSION.to_string(),
        kind: DiskKind::Factor,
        name: name.to_string(),
        factor_kind: factor.kind().as_str().to_string(),
        codomain_dim: factor.codomain_dim(),
        state_dim: factor.state_dim(),
        correlation_sha256: correlation_hash(factor),
        matrix_file: "matrix.csv".to_string(),
        sha256: super::hash_files(dir, &["matrix.csv"])?,
    };
    super::write_manifest(&dir.join("factor.json"), &manifest)
}

pub fn load_factor(dir: &Path) -> Result<(Factor, String)> {
    let manifest: FactorManifest = super::read_manifest(&dir.join("factor.json"))?;
    check_schema(&manifest.schema_version)?;
    check_kind(DiskKind::Factor, manifest.kind)?;
    super::verify_hash(dir, &[manifest.matrix_file.as_str()], &manifest.sha256)?;
    let matrix = read_matrix_csv(
        &dir.join(&manifest.matrix_file),
        Some((manifest.codomain_dim, manifest.state_dim)),
    )?;
    let kind = FactorKind::parse(&manifest.factor_kind)?;
    Ok((Factor::from_parts(matrix, kind), manifest.name))
}
