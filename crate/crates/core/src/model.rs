//! Discretized parametric models and their associated linear map.
//!
//! A [`SnapshotSet`] holds samples `r(p_j)` of a map from a parameter set
//! into R^N, column by column, together with the quadrature weights that
//! realize the measure on the parameter set. The associated linear map
//! sends a vector `u` to the scalar function `p ↦ ⟨r(p), u⟩` sampled on the
//! grid; its adjoint (with respect to the weighted inner product on the
//! parameter side) recombines grid functions into vectors. Their
//! composition is the correlation `C`, the central object of the
//! downstream spectral analysis; the Gram matrix of the snapshots is the
//! reproducing kernel restricted to the grid.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg;

/// Absolute per-coordinate tolerance for declaring two grid points equal.
const POINT_DISTINCT_TOL: f64 = 1e-14;
/// Relative symmetry tolerance for correlation/Gram matrices.
const SYMMETRY_TOL: f64 = 1e-12;
/// Relative lower bound for eigenvalues of a positive semi-definite matrix.
const PSD_TOL: f64 = 1e-12;
/// Relative residual above which a function is declared outside the range of the map.
const RANGE_TOL: f64 = 1e-8;

/// Parameter grid: sample points and the quadrature weights realizing the
/// measure on the parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterGrid {
    /// M×d_p coordinates, one row per grid point.
    points: Array2<f64>,
    /// Strictly positive quadrature weights, one per point.
    weights: Array1<f64>,
}

impl ParameterGrid {
    pub fn new(points: Array2<f64>, weights: Array1<f64>) -> Result<Self> {
        if points.nrows() == 0 || points.ncols() == 0 {
            return Err(Error::InvalidGrid(
                "grid needs at least one point of dimension at least one".into(),
            ));
        }
        if points.nrows() != weights.len() {
            return Err(Error::InvalidGrid(format!(
                "{} points but {} weights",
                points.nrows(),
                weights.len()
            )));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "grid points" });
        }
        for (j, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidGrid(format!("weight {j} is {w}, must be > 0")));
            }
        }
        for a in 0..points.nrows() {
            for b in (a + 1)..points.nrows() {
                let coincide = (0..points.ncols())
                    .all(|k| (points[[a, k]] - points[[b, k]]).abs() <= POINT_DISTINCT_TOL);
                if coincide {
                    return Err(Error::InvalidGrid(format!(
                        "grid points {a} and {b} coincide"
                    )));
                }
            }
        }
        Ok(Self { points, weights })
    }

    /// Grid with the default Monte-Carlo weights `w_j = 1/M`.
    pub fn with_uniform_weights(points: Array2<f64>) -> Result<Self> {
        let m = points.nrows();
        Self::new(points, Array1::from_elem(m, 1.0 / m as f64))
    }

    /// Midpoint rule on [0, 1]: points `(j + 1/2)/m`, weights `1/m`.
    pub fn midpoint_unit_interval(m: usize) -> Result<Self> {
        let points = Array2::from_shape_fn((m, 1), |(j, _)| (j as f64 + 0.5) / m as f64);
        Self::new(points, Array1::from_elem(m, 1.0 / m as f64))
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    pub fn point(&self, j: usize) -> ArrayView1<'_, f64> {
        self.points.row(j)
    }

    pub fn weights(&self) -> ArrayView1<'_, f64> {
        self.weights.view()
    }

    /// Weighted inner product `Σ_j w_j φ_j ψ_j` on grid functions.
    pub fn inner(&self, phi: ArrayView1<'_, f64>, psi: ArrayView1<'_, f64>) -> f64 {
        self.weights
            .iter()
            .zip(phi.iter().zip(psi.iter()))
            .map(|(&w, (&a, &b))| w * a * b)
            .sum()
    }
}

/// Column-wise samples of a parametric map `r : P → R^N`.
#[derive(Debug, Clone)]
pub struct SnapshotSet {
    /// N×M matrix; column j is r(p_j).
    values: Array2<f64>,
    grid: ParameterGrid,
    labels: Option<Vec<String>>,
}

impl SnapshotSet {
    pub fn new(values: Array2<f64>, grid: ParameterGrid, labels: Option<Vec<String>>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::InvalidInput(
                "snapshot matrix needs at least one row and one column".into(),
            ));
        }
        if values.ncols() != grid.len() {
            return Err(Error::DimensionMismatch {
                what: "snapshot columns vs grid points",
                expected: grid.len(),
                actual: values.ncols(),
            });
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "snapshot values" });
        }
        if let Some(ref l) = labels {
            if l.len() != values.nrows() {
                return Err(Error::DimensionMismatch {
                    what: "row labels",
                    expected: values.nrows(),
                    actual: l.len(),
                });
            }
        }
        Ok(Self { values, grid, labels })
    }

    /// Ingestion under a non-Euclidean state inner product `⟨u, v⟩ = uᵀ G ᵀG v`:
    /// snapshots are pre-multiplied by the mass-matrix Cholesky factor `G`,
    /// after which all downstream algebra stays Euclidean.
    pub fn with_mass_cholesky(
        values: Array2<f64>,
        mass_cholesky: ArrayView2<'_, f64>,
        grid: ParameterGrid,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if mass_cholesky.nrows() != values.nrows() || mass_cholesky.ncols() != values.nrows() {
            return Err(Error::DimensionMismatch {
                what: "mass Cholesky factor",
                expected: values.nrows(),
                actual: mass_cholesky.nrows(),
            });
        }
        Self::new(mass_cholesky.dot(&values), grid, labels)
    }

    pub fn state_dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn sample_count(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn snapshot(&self, j: usize) -> ArrayView1<'_, f64> {
        self.values.column(j)
    }

    /// SHA-256 over dimensions, values, grid points, and weights; used as
    /// provenance for models derived from this set.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for dim in [self.state_dim(), self.sample_count(), self.grid.dim()] {
            hasher.update((dim as u64).to_le_bytes());
        }
        for &x in self.values.iter() {
            hasher.update(x.to_le_bytes());
        }
        for &x in self.grid.points().iter() {
            hasher.update(x.to_le_bytes());
        }
        for &x in self.grid.weights().iter() {
            hasher.update(x.to_le_bytes());
        }
        hex_string(&hasher.finalize())
    }

    /// The associated map: `u ↦ (⟨r(p_j), u⟩)_j`, sampled on the grid.
    /// Quadrature weights do not enter here; they belong to the adjoint.
    pub fn apply_map(&self, u: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if u.len() != self.state_dim() {
            return Err(Error::DimensionMismatch {
                what: "state vector",
                expected: self.state_dim(),
                actual: u.len(),
            });
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "state vector" });
        }
        Ok(self.values.t().dot(&u))
    }

    /// Adjoint of the map with respect to the weighted inner product:
    /// `φ ↦ Σ_j w_j φ_j r(p_j)`.
    pub fn apply_adjoint(&self, phi: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if phi.len() != self.sample_count() {
            return Err(Error::DimensionMismatch {
                what: "grid function",
                expected: self.sample_count(),
                actual: phi.len(),
            });
        }
        if phi.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "grid function" });
        }
        let weighted = Array1::from_iter(
            phi.iter()
                .zip(self.grid.weights().iter())
                .map(|(&p, &w)| p * w),
        );
        Ok(self.values.dot(&weighted))
    }

    /// Correlation `C = Σ_j w_j r(p_j) r(p_j)ᵀ`.
    pub fn correlation(&self) -> CorrelationMatrix {
        let n = self.state_dim();
        let mut c = Array2::<f64>::zeros((n, n));
        for (j, col) in self.values.columns().into_iter().enumerate() {
            let w = self.grid.weights()[j];
            for a in 0..n {
                let wa = w * col[a];
                for b in 0..n {
                    c[[a, b]] += wa * col[b];
                }
            }
        }
        linalg::symmetrize(&mut c);
        CorrelationMatrix { entries: c }
    }

    /// Gram matrix of the snapshots, `K_{ij} = ⟨r(p_i), r(p_j)⟩`.
    /// This is the reproducing kernel restricted to the grid; weights enter
    /// the eigenproblem, not the kernel.
    pub fn kernel_gram(&self) -> KernelGram {
        let mut k = self.values.t().dot(&self.values);
        linalg::symmetrize(&mut k);
        KernelGram { entries: k }
    }

    /// Reproduction check: evaluates `⟨κ(p_i, ·), φ⟩` in the inner product
    /// induced by the map, by pulling both arguments back to minimum-norm
    /// preimages. For `φ` in the range of the map the result is `φ_i`.
    pub fn rkhs_reproduce(&self, phi: ArrayView1<'_, f64>, i: usize) -> Result<f64> {
        if phi.len() != self.sample_count() {
            return Err(Error::DimensionMismatch {
                what: "grid function",
                expected: self.sample_count(),
                actual: phi.len(),
            });
        }
        if i >= self.sample_count() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.sample_count(),
            });
        }
        let phi_norm = phi.iter().map(|&x| x * x).sum::<f64>().sqrt();
        if phi_norm == 0.0 {
            return Ok(0.0);
        }
        // Preimages under the unweighted map: solve valuesᵀ u = φ.
        let map_matrix = self.values.t();
        let (u_phi, residual) = linalg::min_norm_lsq(map_matrix.view(), phi, linalg::RANK_CUTOFF);
        if residual > RANGE_TOL * phi_norm {
            return Err(Error::NotInRange {
                residual: residual / phi_norm,
                tolerance: RANGE_TOL,
            });
        }
        let kernel_row = self.values.t().dot(&self.values.column(i));
        let (u_kappa, _) = linalg::min_norm_lsq(map_matrix.view(), kernel_row.view(), linalg::RANK_CUTOFF);
        Ok(u_kappa.dot(&u_phi))
    }
}

/// Symmetric positive semi-definite correlation matrix `C = R*R`.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    entries: Array2<f64>,
}

impl CorrelationMatrix {
    /// Validating constructor: checks symmetry and positive semi-definiteness,
    /// then stores the symmetrized entries.
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        validate_symmetric_psd(&entries, "correlation matrix")?;
        Ok(Self::new_unchecked(entries))
    }

    /// Wraps entries without the eigenvalue check. The matrix is still
    /// symmetrized to suppress roundoff asymmetry.
    pub fn new_unchecked(mut entries: Array2<f64>) -> Self {
        linalg::symmetrize(&mut entries);
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> ArrayView2<'_, f64> {
        self.entries.view()
    }

    pub fn into_entries(self) -> Array2<f64> {
        self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[[i, i]]).sum()
    }
}

/// Gram matrix of the snapshots: the reproducing kernel on the grid.
#[derive(Debug, Clone)]
pub struct KernelGram {
    entries: Array2<f64>,
}

impl KernelGram {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        validate_symmetric_psd(&entries, "kernel Gram matrix")?;
        Ok(Self::new_unchecked(entries))
    }

    pub fn new_unchecked(mut entries: Array2<f64>) -> Self {
        linalg::symmetrize(&mut entries);
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> ArrayView2<'_, f64> {
        self.entries.view()
    }

    pub fn into_entries(self) -> Array2<f64> {
        self.entries
    }
}

fn validate_symmetric_psd(entries: &Array2<f64>, what: &'static str) -> Result<()> {
    if entries.nrows() != entries.ncols() {
        return Err(Error::DimensionMismatch {
            what,
            expected: entries.nrows(),
            actual: entries.ncols(),
        });
    }
    if entries.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { what });
    }
    let scale = linalg::max_abs(entries.view()).max(f64::MIN_POSITIVE);
    let asym = linalg::asymmetry(entries.view());
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric {
            what,
            residual: asym / scale,
            tolerance: SYMMETRY_TOL,
        });
    }
    let mut sym = entries.clone();
    linalg::symmetrize(&mut sym);
    let eig = linalg::eigh_descending(sym.view());
    let largest = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    if let Some(&smallest) = eig.values.last() {
        if smallest < -PSD_TOL * largest.max(f64::MIN_POSITIVE) {
            return Err(Error::Indefinite { eigenvalue: smallest });
        }
    }
    Ok(())
}

pub(crate) fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}
