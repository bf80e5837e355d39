//! High-dimensional response tensors and tensor-train compression.
//!
//! A full tensor assembled from per-mode factor tables is compressed by a
//! sequential-SVD sweep: unfold, truncate, carry the remainder to the next
//! split. Distributing the squared tolerance uniformly over the d−1 splits
//! gives the global bound `‖t − TT‖_F ≤ τ‖t‖_F`, and the discarded
//! singular values certify the actual error.

use ndarray::{Array2, Array3, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg;

/// Entry limit above which full tensors are refused.
const MATERIALIZE_LIMIT: usize = 100_000_000;
/// Singular values below this (relative) are numerical zeros.
const SV_CUTOFF: f64 = linalg::RANK_CUTOFF;

/// Dense tensor in row-major (last index fastest) order.
#[derive(Debug, Clone, PartialEq)]
pub struct FullTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl FullTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidInput(
                "tensor order must be at least 2".into(),
            ));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidInput("tensor dimensions must be ≥ 1".into()));
        }
        let len: usize = dims.iter().product();
        if data.len() != len {
            return Err(Error::DimensionMismatch {
                what: "tensor data length",
                expected: len,
                actual: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "tensor data" });
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let len: usize = dims.iter().product();
        Self::new(dims, vec![0.0; len])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|&x| x * x).sum::<f64>().sqrt()
    }

    fn offset(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                what: "tensor index length",
                expected: self.dims.len(),
                actual: index.len(),
            });
        }
        let mut off = 0;
        for (k, (&i, &n)) in index.iter().zip(self.dims.iter()).enumerate() {
            if i >= n {
                let _ = k;
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            off = off * n + i;
        }
        Ok(off)
    }

    pub fn at(&self, index: &[usize]) -> Result<f64> {
        Ok(self.data[self.offset(index)?])
    }

    /// Contract `matrix` (a×n_mode) against the given mode.
    pub fn mode_product(&self, matrix: ArrayView2<'_, f64>, mode: usize) -> Result<FullTensor> {
        if mode >= self.dims.len() {
            return Err(Error::IndexOutOfRange {
                index: mode,
                len: self.dims.len(),
            });
        }
        if matrix.ncols() != self.dims[mode] {
            return Err(Error::DimensionMismatch {
                what: "mode-product matrix columns",
                expected: self.dims[mode],
                actual: matrix.ncols(),
            });
        }
        let left: usize = self.dims[..mode].iter().product();
        let mid = self.dims[mode];
        let right: usize = self.dims[mode + 1..].iter().product();
        let rows = matrix.nrows();
        let mut out = vec![0.0; left * rows * right];
        for l in 0..left {
            for a in 0..rows {
                for i in 0..mid {
                    let coeff = matrix[[a, i]];
                    if coeff == 0.0 {
                        continue;
                    }
                    let src = (l * mid + i) * right;
                    let dst = (l * rows + a) * right;
                    for r in 0..right {
                        out[dst + r] += coeff * self.data[src + r];
                    }
                }
            }
        }
        let mut dims = self.dims.clone();
        dims[mode] = rows;
        FullTensor::new(dims, out)
    }
}

/// Contract a coefficient tensor against one factor matrix per mode:
/// `out = coeff ×₁ F₁ ×₂ F₂ ⋯`, realizing the separable-basis expansion.
pub fn assemble_tensor(factors: &[Array2<f64>], coefficients: &FullTensor) -> Result<FullTensor> {
    if factors.len() != coefficients.order() {
        return Err(Error::DimensionMismatch {
            what: "factor count vs tensor order",
            expected: coefficients.order(),
            actual: factors.len(),
        });
    }
    let mut current = coefficients.clone();
    for (mode, factor) in factors.iter().enumerate() {
        current = current.mode_product(factor.view(), mode)?;
    }
    Ok(current)
}

/// Tensor-train representation: a chain of 3-way cores with
/// `r_0 = r_d = 1` and matching neighbor ranks.
#[derive(Debug, Clone)]
pub struct TTRepresentation {
    cores: Vec<Array3<f64>>,
}

impl TTRepresentation {
    pub fn new(cores: Vec<Array3<f64>>) -> Result<Self> {
        if cores.len() < 2 {
            return Err(Error::InvalidInput("tensor train needs at least two cores".into()));
        }
        if cores[0].shape()[0] != 1 {
            return Err(Error::InvalidInput("first core must have left rank 1".into()));
        }
        if cores[cores.len() - 1].shape()[2] != 1 {
            return Err(Error::InvalidInput("last core must have right rank 1".into()));
        }
        for k in 0..cores.len() - 1 {
            if cores[k].shape()[2] != cores[k + 1].shape()[0] {
                return Err(Error::DimensionMismatch {
                    what: "neighboring core ranks",
                    expected: cores[k].shape()[2],
                    actual: cores[k + 1].shape()[0],
                });
            }
        }
        Ok(Self { cores })
    }

    pub fn cores(&self) -> &[Array3<f64>] {
        &self.cores
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    pub fn mode_dims(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.shape()[1]).collect()
    }

    /// Internal ranks `r_1, …, r_{d-1}`.
    pub fn ranks(&self) -> Vec<usize> {
        self.cores[..self.cores.len() - 1]
            .iter()
            .map(|c| c.shape()[2])
            .collect()
    }

    /// Worst deviation of the left unfoldings of cores 1..d−1 from having
    /// orthonormal columns; the TT-SVD sweep keeps this at machine level.
    pub fn left_orthogonality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for core in &self.cores[..self.cores.len() - 1] {
            let (rl, n, rr) = (core.shape()[0], core.shape()[1], core.shape()[2]);
            let unfolded = Array2::from_shape_fn((rl * n, rr), |(row, col)| {
                core[[row / n, row % n, col]]
            });
            let gram = unfolded.t().dot(&unfolded);
            for i in 0..rr {
                for j in 0..rr {
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((gram[[i, j]] - target).abs());
                }
            }
        }
        worst
    }
}

/// Per-split singular values retained and discarded by a TT-SVD sweep.
#[derive(Debug, Clone, Default)]
pub struct TtTruncationLog {
    pub retained: Vec<Vec<f64>>,
    pub discarded: Vec<Vec<f64>>,
}

/// A-posteriori error bound from the discarded singular values:
/// `‖t − TT‖_F ≤ √(Σ_splits Σ_discarded σ²)`.
pub fn tt_error_bound(log: &TtTruncationLog) -> f64 {
    log.discarded
        .iter()
        .flat_map(|split| split.iter())
        .map(|&s| s * s)
        .sum::<f64>()
        .sqrt()
}

/// Sequential-SVD tensor-train decomposition.
///
/// `tol` is the relative Frobenius target; each of the d−1 splits may
/// discard at most `tol²‖t‖²/(d−1)` of squared energy. Singular values
/// below the shared numerical-zero cutoff are always dropped, so the TT
/// rank of a matrix (d = 2) equals its numerical rank. `max_rank` caps
/// every internal rank.
pub fn tt_decompose(
    tensor: &FullTensor,
    tol: f64,
    max_rank: Option<usize>,
) -> Result<(TTRepresentation, TtTruncationLog)> {
    if tol < 0.0 || !tol.is_finite() {
        return Err(Error::InvalidInput(format!("tolerance {tol} must be ≥ 0")));
    }
    let d = tensor.order();
    let norm2 = tensor.data().iter().map(|&x| x * x).sum::<f64>();
    let budget = tol * tol * norm2 / (d as f64 - 1.0);
    let cap = max_rank.unwrap_or(usize::MAX).max(1);

    let mut log = TtTruncationLog::default();
    let mut cores: Vec<Array3<f64>> = Vec::with_capacity(d);
    let mut r_prev = 1usize;
    // remaining: (r_prev · n_k) × (n_{k+1} ⋯ n_d) in row-major layout.
    let mut remaining: Vec<f64> = tensor.data().to_vec();
    let mut tail: usize = tensor.len();

    for k in 0..d - 1 {
        let n_k = tensor.dims()[k];
        let rows = r_prev * n_k;
        tail /= n_k;
        let a = Array2::from_shape_fn((rows, tail), |(i, j)| remaining[i * tail + j]);
        let svd = linalg::svd_thin(a.view());
        let sigma_max = svd.singular.first().copied().unwrap_or(0.0);

        // Discard from the bottom: numerical zeros always, more while the
        // energy budget allows.
        let mut keep = svd.singular.len();
        let mut spent = 0.0;
        while keep > 0 {
            let s = svd.singular[keep - 1];
            let is_noise = s <= SV_CUTOFF * sigma_max;
            if is_noise || spent + s * s <= budget {
                spent += s * s;
                keep -= 1;
            } else {
                break;
            }
        }
        let keep = keep.min(cap).max(1);
        log.retained.push(svd.singular[..keep].to_vec());
        log.discarded.push(svd.singular[keep..].to_vec());

        let core = Array3::from_shape_fn((r_prev, n_k, keep), |(rl, i, rr)| {
            svd.u[[rl * n_k + i, rr]]
        });
        cores.push(core);

        // Carry Σ Vᵀ to the next split.
        let mut next = vec![0.0; keep * tail];
        for r in 0..keep {
            let s = svd.singular[r];
            for j in 0..tail {
                next[r * tail + j] = s * svd.vt[[r, j]];
            }
        }
        remaining = next;
        r_prev = keep;
    }

    let n_last = tensor.dims()[d - 1];
    let last = Array3::from_shape_fn((r_prev, n_last, 1), |(rl, i, _)| {
        remaining[rl * n_last + i]
    });
    cores.push(last);

    Ok((TTRepresentation::new(cores)?, log))
}

/// Contract all cores back into a full tensor. Refuses to materialize more
/// than 10⁸ entries.
pub fn tt_reconstruct(tt: &TTRepresentation) -> Result<FullTensor> {
    let dims = tt.mode_dims();
    let total: usize = dims.iter().try_fold(1usize, |acc, &n| {
        acc.checked_mul(n).filter(|&t| t <= MATERIALIZE_LIMIT)
    })
    .ok_or(Error::TensorTooLarge {
        entries: usize::MAX,
        limit: MATERIALIZE_LIMIT,
    })?;
    let _ = total;

    // state: (prefix size) × r_k, grown core by core.
    let mut state = Array2::<f64>::ones((1, 1));
    for core in tt.cores() {
        let (rl, n, rr) = (core.shape()[0], core.shape()[1], core.shape()[2]);
        let core_mat = Array2::from_shape_fn((rl, n * rr), |(a, col)| {
            core[[a, col / rr, col % rr]]
        });
        let grown = state.dot(&core_mat); // (prefix) × (n·rr)
        let prefix = grown.nrows();
        state = Array2::from_shape_fn((prefix * n, rr), |(row, b)| {
            grown[[row / n, (row % n) * rr + b]]
        });
    }
    let data: Vec<f64> = state.column(0).to_vec();
    FullTensor::new(dims, data)
}

/// Evaluate a single entry by chaining core slices; never materializes the
/// full tensor.
pub fn tt_eval(tt: &TTRepresentation, index: &[usize]) -> Result<f64> {
    let dims = tt.mode_dims();
    if index.len() != dims.len() {
        return Err(Error::DimensionMismatch {
            what: "tensor index length",
            expected: dims.len(),
            actual: index.len(),
        });
    }
    for (&i, &n) in index.iter().zip(dims.iter()) {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
    }
    // Row vector carried through the train.
    let mut vec = vec![1.0];
    for (core, &i) in tt.cores().iter().zip(index.iter()) {
        let (rl, rr) = (core.shape()[0], core.shape()[2]);
        let mut next = vec![0.0; rr];
        for b in 0..rr {
            let mut acc = 0.0;
            for a in 0..rl {
                acc += vec[a] * core[[a, i, b]];
            }
            next[b] = acc;
        }
        vec = next;
    }
    Ok(vec[0])
}
