//! Internal dense linear algebra helpers.
//!
//! Data lives in `ndarray` containers throughout the crate; this module
//! bridges to `nalgebra` for eigenvalue, singular value, and Cholesky
//! work and adds the rank-revealing pieces the rest of the crate shares:
//! pivoted Cholesky, minimum-norm least squares, and principal angles.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Shared relative rank cutoff for pseudo-inverses and rank decisions.
pub const RANK_CUTOFF: f64 = 1e-12;

pub fn to_na(a: ArrayView2<'_, f64>) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn to_nd(a: &nalgebra::DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((a.nrows(), a.ncols()), |(i, j)| a[(i, j)])
}

/// Replace `a` with its symmetric part `(a + aᵀ)/2`.
pub fn symmetrize(a: &mut Array2<f64>) {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a[[i, j]] + a[[j, i]]);
            a[[i, j]] = avg;
            a[[j, i]] = avg;
        }
    }
}

pub fn max_abs(a: ArrayView2<'_, f64>) -> f64 {
    a.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

pub fn asymmetry(a: ArrayView2<'_, f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[[i, j]] - a[[j, i]]).abs());
        }
    }
    worst
}

pub fn frobenius(a: ArrayView2<'_, f64>) -> f64 {
    a.iter().map(|&x| x * x).sum::<f64>().sqrt()
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
pub struct Eigh {
    pub values: Vec<f64>,
    /// Column `m` is the eigenvector of `values[m]`.
    pub vectors: Array2<f64>,
}

pub fn eigh_descending(a: ArrayView2<'_, f64>) -> Eigh {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    if n == 0 {
        return Eigh {
            values: Vec::new(),
            vectors: Array2::zeros((0, 0)),
        };
    }
    let se = to_na(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        se.eigenvalues[j]
            .partial_cmp(&se.eigenvalues[i])
            .expect("symmetric eigenvalues are finite")
    });
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(i, m)| se.eigenvectors[(i, order[m])]);
    Eigh { values, vectors }
}

/// Thin SVD with singular values descending.
pub struct Svd {
    /// m×k, orthonormal columns.
    pub u: Array2<f64>,
    pub singular: Vec<f64>,
    /// k×n, orthonormal rows.
    pub vt: Array2<f64>,
}

/// One-sided Jacobi (Hestenes) SVD.
///
/// Rotations orthogonalize the columns of the tall orientation of `a`;
/// the method delivers small residuals and high relative accuracy even on
/// rank-deficient input, which the analysis tolerances here depend on.
pub fn svd_thin(a: ArrayView2<'_, f64>) -> Svd {
    let (m, n) = (a.nrows(), a.ncols());
    let k = m.min(n);
    if k == 0 {
        return Svd {
            u: Array2::zeros((m, 0)),
            singular: Vec::new(),
            vt: Array2::zeros((0, n)),
        };
    }
    let transposed = m < n;
    let mut work = if transposed {
        a.t().to_owned()
    } else {
        a.to_owned()
    };
    let cols = work.ncols();
    let mut right = Array2::<f64>::eye(cols);

    const MAX_SWEEPS: usize = 60;
    const ORTHO_TOL: f64 = 1e-15;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..work.nrows() {
                    let x = work[[i, p]];
                    let y = work[[i, q]];
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma.abs() <= ORTHO_TOL * (alpha * beta).sqrt() || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..work.nrows() {
                    let x = work[[i, p]];
                    let y = work[[i, q]];
                    work[[i, p]] = c * x - s * y;
                    work[[i, q]] = s * x + c * y;
                }
                for i in 0..cols {
                    let x = right[[i, p]];
                    let y = right[[i, q]];
                    right[[i, p]] = c * x - s * y;
                    right[[i, q]] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    // Column norms are the singular values; sort descending.
    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols)
        .map(|j| work.column(j).iter().map(|&x| x * x).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).expect("finite norms"));

    let rows = work.nrows();
    let mut left = Array2::<f64>::zeros((rows, cols));
    let mut singular = Vec::with_capacity(cols);
    let mut right_sorted = Array2::<f64>::zeros((cols, cols));
    for (slot, &j) in order.iter().enumerate() {
        let sigma = norms[j];
        singular.push(sigma);
        if sigma > 0.0 {
            for i in 0..rows {
                left[[i, slot]] = work[[i, j]] / sigma;
            }
        }
        for i in 0..cols {
            right_sorted[[i, slot]] = right[[i, j]];
        }
    }

    if transposed {
        // a = (work-orientation)ᵀ = right Σ leftᵀ.
        Svd {
            u: right_sorted,
            singular,
            vt: left.t().to_owned(),
        }
    } else {
        Svd {
            u: left,
            singular,
            vt: right_sorted.t().to_owned(),
        }
    }
}

/// Number of singular values above `cutoff_rel * max`.
pub fn rank_from_singular(singular: &[f64], cutoff_rel: f64) -> usize {
    let largest = singular.first().copied().unwrap_or(0.0);
    if largest <= 0.0 {
        return 0;
    }
    singular.iter().take_while(|&&s| s > cutoff_rel * largest).count()
}

/// Plain (unpivoted) Cholesky: returns the upper-triangular factor `B = Lᵀ`
/// with `BᵀB = C`, or `None` when the matrix is not positive definite.
pub fn cholesky_upper(c: ArrayView2<'_, f64>) -> Option<Array2<f64>> {
    let chol = to_na(c).cholesky()?;
    let l = chol.l();
    Some(to_nd(&l.transpose()))
}

/// Pivoted Cholesky for positive semi-definite matrices.
///
/// Returns a factor `B` of shape r×n with `BᵀB = C`, where r is the numerical
/// rank at the shared cutoff. A residual pivot below `-neg_tol * max_diag`
/// signals an indefinite input and is reported as an error.
pub fn pivoted_cholesky(c: ArrayView2<'_, f64>, cutoff_rel: f64, neg_tol: f64) -> Result<Array2<f64>> {
    let n = c.nrows();
    debug_assert_eq!(n, c.ncols());
    let mut a = c.to_owned();
    let mut perm: Vec<usize> = (0..n).collect();
    // Columns of `l` are built in pivot order; row i of `a` is permuted in place.
    let mut l = Array2::<f64>::zeros((n, n));
    let max_diag0 = (0..n).fold(0.0f64, |m, i| m.max(c[[i, i]]));
    let stop = cutoff_rel * max_diag0;
    let negative = -neg_tol * max_diag0.max(f64::MIN_POSITIVE);

    let mut rank = n;
    for k in 0..n {
        // Largest residual diagonal becomes the next pivot.
        let (piv, dmax) = (k..n)
            .map(|i| (i, a[[i, i]]))
            .fold((k, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        if dmax < negative {
            return Err(Error::Indefinite { eigenvalue: dmax });
        }
        if dmax <= stop || dmax <= 0.0 {
            // Remaining block is numerically zero; check it is not negative.
            if let Some(worst) = (k..n).map(|i| a[[i, i]]).fold(None::<f64>, |m, d| {
                Some(m.map_or(d, |v| v.min(d)))
            }) {
                if worst < negative {
                    return Err(Error::Indefinite { eigenvalue: worst });
                }
            }
            rank = k;
            break;
        }
        if piv != k {
            perm.swap(k, piv);
            for j in 0..n {
                a.swap([k, j], [piv, j]);
                a.swap([j, k], [j, piv]);
            }
            for j in 0..k {
                l.swap([k, j], [piv, j]);
            }
        }
        let lkk = dmax.sqrt();
        l[[k, k]] = lkk;
        for i in (k + 1)..n {
            let mut s = a[[i, k]];
            for j in 0..k {
                s -= l[[i, j]] * l[[k, j]];
            }
            let lik = s / lkk;
            l[[i, k]] = lik;
            a[[i, i]] -= lik * lik;
        }
    }

    // Undo the permutation: C = P L Lᵀ Pᵀ, so B[m, perm[i]] = L[i, m].
    let mut b = Array2::<f64>::zeros((rank, n));
    for i in 0..n {
        for m in 0..rank {
            b[[m, perm[i]]] = l[[i, m]];
        }
    }
    Ok(b)
}

/// Minimum-norm least-squares solution of `a x = b` with relative rank cutoff.
///
/// Returns the solution together with the residual norm `‖a x − b‖`.
pub fn min_norm_lsq(
    a: ArrayView2<'_, f64>,
    b: ArrayView1<'_, f64>,
    cutoff_rel: f64,
) -> (Array1<f64>, f64) {
    let svd = svd_thin(a);
    let rank = rank_from_singular(&svd.singular, cutoff_rel);
    let utb = svd.u.t().dot(&b);
    let mut coeff = Array1::<f64>::zeros(svd.singular.len());
    for m in 0..rank {
        coeff[m] = utb[m] / svd.singular[m];
    }
    let x = svd.vt.t().dot(&coeff);
    let residual = (&a.dot(&x) - &b).mapv(|t| t * t).sum().sqrt();
    (x, residual)
}

/// Orthonormal basis for the column space of `a` at the shared rank cutoff.
#[cfg(test)]
pub fn column_space_basis(a: ArrayView2<'_, f64>, cutoff_rel: f64) -> Array2<f64> {
    let svd = svd_thin(a);
    let rank = rank_from_singular(&svd.singular, cutoff_rel);
    svd.u.slice(ndarray::s![.., ..rank]).to_owned()
}

/// Principal angles (radians, ascending) between the column spaces of `a`
/// and `b`, through the sines `σ((I − Q_a Q_aᵀ) Q_b)`; accurate for the
/// small angles the subspace-equality checks care about.
#[cfg(test)]
pub fn principal_angles(
    a: ArrayView2<'_, f64>,
    b: ArrayView2<'_, f64>,
    cutoff_rel: f64,
) -> (usize, usize, Vec<f64>) {
    let qa = column_space_basis(a, cutoff_rel);
    let qb = column_space_basis(b, cutoff_rel);
    let (ra, rb) = (qa.ncols(), qb.ncols());
    if ra == 0 || rb == 0 {
        return (ra, rb, Vec::new());
    }
    let residual = &qb - &qa.dot(&qa.t().dot(&qb));
    let mut sines = svd_thin(residual.view()).singular;
    sines.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let angles = sines.iter().map(|&s| s.clamp(-1.0, 1.0).asin()).collect();
    (ra, rb, angles)
}
