//! Vector- and SPD-matrix-valued parametric fields.
//!
//! Vector fields stack their components into one snapshot matrix and reuse
//! the scalar machinery; the matrix-valued kernel is exposed block-wise for
//! inspection. SPD fields are reduced in log space: the matrix logarithm
//! maps the cone onto the free linear space of symmetric matrices, linear
//! reduction happens there, and exponentiation brings every truncated
//! evaluation back inside the cone.
//!
//! Note on the component basis: [`vector_kl`] decomposes the stacked
//! coefficient matrix as-is, which treats the component basis vectors as
//! orthonormal. When the recorded basis is merely full-rank, the spectrum
//! of this stacked-space correlation can differ from the one weighted by
//! the basis Gram matrix; under an orthogonal change of basis the two
//! agree, and the spectrum is invariant (see the tests). Callers with a
//! non-orthonormal basis should rescale their coefficients first.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{ParameterGrid, SnapshotSet};
use crate::spectral::{decompose, truncate, ReducedModel, SpectralData, TruncationRule};

/// Relative asymmetry tolerance for symmetric/skew inputs.
const SHAPE_TOL: f64 = 1e-12;
/// Eigenvalues below this fraction of the largest mean the matrix is not SPD.
const SPD_TOL: f64 = 1e-14;

fn check_square(a: ArrayView2<'_, f64>, what: &'static str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            what,
            expected: a.nrows(),
            actual: a.ncols(),
        });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { what });
    }
    Ok(())
}

/// Matrix exponential of a symmetric matrix through its eigendecomposition;
/// the result is symmetric positive definite.
pub fn matrix_exp_sym(h: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_square(h, "symmetric matrix")?;
    let scale = linalg::max_abs(h).max(1.0);
    let asym = linalg::asymmetry(h);
    if asym > SHAPE_TOL * scale {
        return Err(Error::NotSymmetric {
            what: "matrix exponential input",
            residual: asym / scale,
            tolerance: SHAPE_TOL,
        });
    }
    let mut sym = h.to_owned();
    linalg::symmetrize(&mut sym);
    let eig = linalg::eigh_descending(sym.view());
    Ok(apply_spectral(&eig, f64::exp))
}

/// Matrix logarithm of a symmetric positive definite matrix.
pub fn matrix_log_spd(a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_square(a, "SPD matrix")?;
    let scale = linalg::max_abs(a).max(f64::MIN_POSITIVE);
    let asym = linalg::asymmetry(a);
    if asym > SHAPE_TOL * scale {
        return Err(Error::NotSymmetric {
            what: "matrix logarithm input",
            residual: asym / scale,
            tolerance: SHAPE_TOL,
        });
    }
    let mut sym = a.to_owned();
    linalg::symmetrize(&mut sym);
    let eig = linalg::eigh_descending(sym.view());
    let largest = eig.values.first().copied().unwrap_or(0.0);
    if let Some(&smallest) = eig.values.last() {
        if smallest <= SPD_TOL * largest.max(f64::MIN_POSITIVE) {
            return Err(Error::NotSpd { eigenvalue: smallest });
        }
    }
    Ok(apply_spectral(&eig, f64::ln))
}

fn apply_spectral(eig: &linalg::Eigh, f: impl Fn(f64) -> f64) -> Array2<f64> {
    let n = eig.vectors.nrows();
    let mut out = Array2::<f64>::zeros((n, n));
    for m in 0..eig.values.len() {
        let fv = f(eig.values[m]);
        let col = eig.vectors.column(m);
        for i in 0..n {
            let vi = fv * col[i];
            for j in 0..n {
                out[[i, j]] += vi * col[j];
            }
        }
    }
    linalg::symmetrize(&mut out);
    out
}

/// Matrix exponential of a skew-symmetric matrix via the real Schur form;
/// the result is a rotation (orthogonal with determinant +1).
pub fn matrix_exp_skew(s: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_square(s, "skew-symmetric matrix")?;
    let n = s.nrows();
    let scale = linalg::max_abs(s).max(1.0);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((s[[i, j]] + s[[j, i]]).abs());
        }
    }
    if worst > SHAPE_TOL * scale {
        return Err(Error::NotSkew { residual: worst / scale });
    }

    let schur = linalg::to_na(s)
        .try_schur(1e-14, 100_000)
        .ok_or_else(|| Error::InvalidInput("Schur iteration failed to converge".into()))?;
    let (q_na, t_na) = schur.unpack();
    let q = linalg::to_nd(&q_na);

    // For a skew matrix the Schur form is block diagonal: 2×2 rotation
    // generators with zero diagonal, and zero 1×1 blocks.
    let mut exp_t = Array2::<f64>::zeros((n, n));
    let block_tol = 1e-12 * scale;
    let mut i = 0;
    while i < n {
        if i + 1 < n && t_na[(i + 1, i)].abs() > block_tol {
            let theta = 0.5 * (t_na[(i, i + 1)] - t_na[(i + 1, i)]);
            let (sin, cos) = theta.sin_cos();
            exp_t[[i, i]] = cos;
            exp_t[[i, i + 1]] = sin;
            exp_t[[i + 1, i]] = -sin;
            exp_t[[i + 1, i + 1]] = cos;
            i += 2;
        } else {
            exp_t[[i, i]] = 1.0;
            i += 1;
        }
    }
    Ok(q.dot(&exp_t).dot(&q.t()))
}

/// Pack a symmetric matrix into its upper triangle, scaling off-diagonal
/// entries by √2 so the packed Euclidean norm equals the Frobenius norm.
pub fn pack_symmetric(h: ArrayView2<'_, f64>) -> Array1<f64> {
    let n = h.nrows();
    let mut out = Array1::<f64>::zeros(n * (n + 1) / 2);
    let mut idx = 0;
    for i in 0..n {
        for j in i..n {
            out[idx] = if i == j {
                h[[i, j]]
            } else {
                std::f64::consts::SQRT_2 * h[[i, j]]
            };
            idx += 1;
        }
    }
    out
}

/// Inverse of [`pack_symmetric`].
pub fn unpack_symmetric(v: ArrayView1<'_, f64>, n: usize) -> Result<Array2<f64>> {
    if v.len() != n * (n + 1) / 2 {
        return Err(Error::DimensionMismatch {
            what: "packed symmetric length",
            expected: n * (n + 1) / 2,
            actual: v.len(),
        });
    }
    let mut out = Array2::<f64>::zeros((n, n));
    let mut idx = 0;
    for i in 0..n {
        for j in i..n {
            let x = if i == j {
                v[idx]
            } else {
                v[idx] / std::f64::consts::SQRT_2
            };
            out[[i, j]] = x;
            out[[j, i]] = x;
            idx += 1;
        }
    }
    Ok(out)
}

/// Vector-valued snapshot set: components stacked into the rows of one
/// scalar snapshot matrix, component index fastest.
#[derive(Debug, Clone)]
pub struct VectorFieldSet {
    base: SnapshotSet,
    components: usize,
    component_basis: Array2<f64>,
}

impl VectorFieldSet {
    pub fn new(base: SnapshotSet, components: usize, basis: Option<Array2<f64>>) -> Result<Self> {
        if components == 0 || !base.state_dim().is_multiple_of(components) {
            return Err(Error::InvalidInput(format!(
                "stacked row count {} is not divisible by component count {components}",
                base.state_dim()
            )));
        }
        let component_basis = basis.unwrap_or_else(|| Array2::eye(components));
        if component_basis.nrows() != components || component_basis.ncols() != components {
            return Err(Error::DimensionMismatch {
                what: "component basis",
                expected: components,
                actual: component_basis.nrows(),
            });
        }
        let svd = linalg::svd_thin(component_basis.view());
        if linalg::rank_from_singular(&svd.singular, linalg::RANK_CUTOFF) < components {
            return Err(Error::InvalidInput("component basis is rank deficient".into()));
        }
        Ok(Self {
            base,
            components,
            component_basis,
        })
    }

    pub fn base(&self) -> &SnapshotSet {
        &self.base
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn component_basis(&self) -> ArrayView2<'_, f64> {
        self.component_basis.view()
    }

    pub fn spatial_dim(&self) -> usize {
        self.base.state_dim() / self.components
    }

    /// Component k of snapshot j as a spatial field.
    pub fn component_snapshot(&self, k: usize, j: usize) -> Result<Array1<f64>> {
        if k >= self.components {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.components,
            });
        }
        let nx = self.spatial_dim();
        let col = self.base.snapshot(j);
        Ok(Array1::from_shape_fn(nx, |x| col[x * self.components + k]))
    }

    /// Unstack a stacked vector into a (spatial × component) table.
    pub fn unpack_stacked(&self, v: ArrayView1<'_, f64>) -> Result<Array2<f64>> {
        if v.len() != self.base.state_dim() {
            return Err(Error::DimensionMismatch {
                what: "stacked vector",
                expected: self.base.state_dim(),
                actual: v.len(),
            });
        }
        let nx = self.spatial_dim();
        Ok(Array2::from_shape_fn((nx, self.components), |(x, k)| {
            v[x * self.components + k]
        }))
    }

    /// Matrix-valued kernel block `κ_E(p_i, p_j)`: the n_E×n_E Gram of the
    /// component fields at the two grid points.
    pub fn kernel_block(&self, i: usize, j: usize) -> Result<Array2<f64>> {
        let m = self.base.sample_count();
        if i >= m || j >= m {
            return Err(Error::IndexOutOfRange {
                index: i.max(j),
                len: m,
            });
        }
        let ne = self.components;
        let nx = self.spatial_dim();
        let ci = self.base.snapshot(i);
        let cj = self.base.snapshot(j);
        let mut out = Array2::<f64>::zeros((ne, ne));
        for k in 0..ne {
            for l in 0..ne {
                let mut acc = 0.0;
                for x in 0..nx {
                    acc += ci[x * ne + k] * cj[x * ne + l];
                }
                out[[k, l]] = acc;
            }
        }
        Ok(out)
    }
}

/// Karhunen-Loève decomposition of a vector field on the stacked space.
pub fn vector_kl(field: &VectorFieldSet) -> SpectralData {
    decompose(field.base())
}

/// SPD-matrix-valued snapshot set with its log-space coefficients.
#[derive(Debug, Clone)]
pub struct SpdFieldSet {
    matrices: Vec<Array2<f64>>,
    /// M × n(n+1)/2 packed logarithms.
    log_coefficients: Array2<f64>,
    dim: usize,
}

impl SpdFieldSet {
    pub fn new(matrices: Vec<Array2<f64>>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidInput("SPD field needs at least one sample".into()));
        }
        let dim = matrices[0].nrows();
        let packed_len = dim * (dim + 1) / 2;
        let mut log_coefficients = Array2::<f64>::zeros((matrices.len(), packed_len));
        for (j, a) in matrices.iter().enumerate() {
            if a.nrows() != dim || a.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    what: "SPD sample size",
                    expected: dim,
                    actual: a.nrows(),
                });
            }
            let log = matrix_log_spd(a.view())?;
            let packed = pack_symmetric(log.view());
            // Round-trip guard: exponentiating the packed log must give the
            // sample back.
            let back = matrix_exp_sym(unpack_symmetric(packed.view(), dim)?.view())?;
            let scale = linalg::frobenius(a.view()).max(f64::MIN_POSITIVE);
            let diff = linalg::frobenius((&back - a).view());
            if diff > 1e-10 * scale {
                return Err(Error::InvalidInput(format!(
                    "sample {j}: log/exp round trip off by {:.3e} (relative)",
                    diff / scale
                )));
            }
            log_coefficients.row_mut(j).assign(&packed);
        }
        Ok(Self {
            matrices,
            log_coefficients,
            dim,
        })
    }

    pub fn sample_count(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrix_dim(&self) -> usize {
        self.dim
    }

    pub fn packed_dim(&self) -> usize {
        self.dim * (self.dim + 1) / 2
    }

    pub fn matrices(&self) -> &[Array2<f64>] {
        &self.matrices
    }

    pub fn log_coefficients(&self) -> ArrayView2<'_, f64> {
        self.log_coefficients.view()
    }

    /// Matrix-valued kernel block of the log-space field at two grid
    /// points: with the canonical basis of sym(n) this contracts to
    /// `H(p_i) H(p_j)`. Exposed for inspection; the reduction itself works
    /// on the packed coefficients, whose spectrum coincides.
    pub fn kernel_block(&self, i: usize, j: usize) -> Result<Array2<f64>> {
        let m = self.sample_count();
        if i >= m || j >= m {
            return Err(Error::IndexOutOfRange {
                index: i.max(j),
                len: m,
            });
        }
        let hi = unpack_symmetric(self.log_coefficients.row(i), self.dim)?;
        let hj = unpack_symmetric(self.log_coefficients.row(j), self.dim)?;
        Ok(hi.dot(&hj))
    }
}

/// Reduced SPD field: truncated KL of the centered log-coefficients plus
/// the log-Euclidean mean. Every evaluation is exponentiated back onto the
/// cone, so it is SPD at any truncation rank.
#[derive(Debug, Clone)]
pub struct ReducedSpdField {
    mean_packed: Array1<f64>,
    model: ReducedModel,
    dim: usize,
    centered: bool,
}

impl ReducedSpdField {
    pub fn rank(&self) -> usize {
        self.model.truncation_rank()
    }

    pub fn matrix_dim(&self) -> usize {
        self.dim
    }

    pub fn centered(&self) -> bool {
        self.centered
    }

    pub fn model(&self) -> &ReducedModel {
        &self.model
    }

    pub fn mean_packed(&self) -> ArrayView1<'_, f64> {
        self.mean_packed.view()
    }

    pub fn from_parts(
        mean_packed: Array1<f64>,
        model: ReducedModel,
        dim: usize,
        centered: bool,
    ) -> Result<Self> {
        if mean_packed.len() != dim * (dim + 1) / 2 {
            return Err(Error::DimensionMismatch {
                what: "packed mean length",
                expected: dim * (dim + 1) / 2,
                actual: mean_packed.len(),
            });
        }
        Ok(Self {
            mean_packed,
            model,
            dim,
            centered,
        })
    }

    /// Evaluate at grid index j: `exp(H̄ + Σ_{m≤n} √λ_m s_m(p_j) φ_m)`.
    pub fn evaluate(&self, j: usize) -> Result<Array2<f64>> {
        let packed = &self.mean_packed + &self.model.evaluate(j)?;
        let h = unpack_symmetric(packed.view(), self.dim)?;
        matrix_exp_sym(h.view())
    }
}

/// Reduce an SPD field by KL on its (centered) log-coefficients.
pub fn spd_field_reduce(
    field: &SpdFieldSet,
    grid: &ParameterGrid,
    rank: usize,
) -> Result<ReducedSpdField> {
    spd_field_reduce_with(field, grid, rank, true)
}

pub fn spd_field_reduce_with(
    field: &SpdFieldSet,
    grid: &ParameterGrid,
    rank: usize,
    center: bool,
) -> Result<ReducedSpdField> {
    if grid.len() != field.sample_count() {
        return Err(Error::DimensionMismatch {
            what: "grid points vs SPD samples",
            expected: field.sample_count(),
            actual: grid.len(),
        });
    }
    let packed_dim = field.packed_dim();
    let m = field.sample_count();
    let total_weight: f64 = grid.weights().iter().sum();
    let mut mean = Array1::<f64>::zeros(packed_dim);
    if center {
        for j in 0..m {
            mean.scaled_add(grid.weights()[j] / total_weight, &field.log_coefficients.row(j));
        }
    }
    // Columns are centered packed logs; an all-zero matrix (constant field)
    // decomposes to rank 0.
    let values = Array2::from_shape_fn((packed_dim, m), |(i, j)| {
        field.log_coefficients[[j, i]] - mean[i]
    });
    let snapshots = SnapshotSet::new(values, grid.clone(), None)?;
    let data = decompose(&snapshots);
    let model = truncate(&data, TruncationRule::Rank(rank));
    ReducedSpdField::from_parts(mean, model, field.dim, center)
}
