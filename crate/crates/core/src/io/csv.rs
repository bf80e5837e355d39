//! Headerless numeric CSV with lossless float round-tripping.

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// 17 significant digits: enough for bitwise f64 round trips.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Csv {
        path: path.display().to_string(),
        message: message.into(),
    }
}

pub fn write_matrix_csv(path: &Path, matrix: ArrayView2<'_, f64>) -> Result<()> {
    let mut out = String::new();
    for row in matrix.rows() {
        let mut first = true;
        for &x in row.iter() {
            if !first {
                out.push(',');
            }
            out.push_str(&format_float(x));
            first = false;
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_vector_csv(path: &Path, vector: ArrayView1<'_, f64>) -> Result<()> {
    let mut out = String::new();
    for &x in vector.iter() {
        out.push_str(&format_float(x));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Read a matrix, enforcing the expected shape when given.
pub fn read_matrix_csv(path: &Path, expected: Option<(usize, usize)>) -> Result<Array2<f64>> {
    let text = std::fs::read_to_string(path).map_err(|_| Error::MissingFile {
        path: path.display().to_string(),
    })?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for cell in line.split(',') {
            let value: f64 = cell.trim().parse().map_err(|_| {
                csv_error(path, format!("line {}: cannot parse '{cell}'", lineno + 1))
            })?;
            row.push(value);
        }
        if let Some(prev) = rows.first() {
            if row.len() != prev.len() {
                return Err(csv_error(
                    path,
                    format!(
                        "line {}: {} columns, expected {}",
                        lineno + 1,
                        row.len(),
                        prev.len()
                    ),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(csv_error(path, "no rows"));
    }
    let (nrows, ncols) = (rows.len(), rows[0].len());
    if let Some((er, ec)) = expected {
        if (nrows, ncols) != (er, ec) {
            return Err(csv_error(
                path,
                format!("shape {nrows}×{ncols}, manifest says {er}×{ec}"),
            ));
        }
    }
    let mut out = Array2::<f64>::zeros((nrows, ncols));
    for (i, row) in rows.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            out[[i, j]] = x;
        }
    }
    Ok(out)
}

pub fn read_vector_csv(path: &Path, expected_len: Option<usize>) -> Result<Array1<f64>> {
    let matrix = read_matrix_csv(path, expected_len.map(|n| (n, 1)))?;
    if matrix.ncols() != 1 {
        return Err(csv_error(path, format!("{} columns, expected 1", matrix.ncols())));
    }
    Ok(matrix.column(0).to_owned())
}
