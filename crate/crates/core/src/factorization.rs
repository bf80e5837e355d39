//! Factorizations `C = BᵀB` of a correlation matrix, their unitary
//! equivalence, and the representation each factorization induces.
//!
//! Every factor of the same correlation is unitarily equivalent to every
//! other; transporting the spectral basis into a factor's codomain yields
//! an orthonormal system that diagonalizes `BBᵀ` with the spectrum of `C`,
//! and pairing it with the spatial modes re-parametrizes the model over
//! the factor's index set.
//!
//! In this finite setting the abstract multiplier space is `R^r` with the
//! diagonal eigenvalue matrix: the multiplier-side basis `ξ_m = Vᵀv_m` is
//! the canonical basis and needs no operation of its own.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{CorrelationMatrix, SnapshotSet};
use crate::spectral::SpectralData;

/// Relative Frobenius tolerance for two factors to share a correlation.
const SAME_CORRELATION_TOL: f64 = 1e-8;
/// Relative eigen-residual tolerance for a factor to match spectral data.
const FACTOR_SPECTRUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    /// The associated map itself, `B = W^{1/2} Uᵀ`.
    CanonicalR,
    Cholesky,
    SquareRoot,
    User,
}

impl FactorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FactorKind::CanonicalR => "canonical-R",
            FactorKind::Cholesky => "cholesky",
            FactorKind::SquareRoot => "square-root",
            FactorKind::User => "user",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "canonical-R" => Ok(FactorKind::CanonicalR),
            "cholesky" => Ok(FactorKind::Cholesky),
            "square-root" => Ok(FactorKind::SquareRoot),
            "user" => Ok(FactorKind::User),
            other => Err(Error::InvalidInput(format!("unknown factor kind '{other}'"))),
        }
    }
}

/// A matrix `B` with `BᵀB = C`, mapping the state space into a codomain of
/// dimension `codomain_dim`.
#[derive(Debug, Clone)]
pub struct Factor {
    matrix: Array2<f64>,
    kind: FactorKind,
}

impl Factor {
    /// Wrap a user-supplied factor after verifying `BᵀB = C`.
    pub fn user(matrix: Array2<f64>, correlation: &CorrelationMatrix) -> Result<Self> {
        let product = matrix.t().dot(&matrix);
        let scale = linalg::frobenius(correlation.entries()).max(f64::MIN_POSITIVE);
        let diff = linalg::frobenius((&product - &correlation.entries()).view());
        if diff > 1e-10 * scale {
            return Err(Error::CorrelationMismatch {
                discrepancy: diff / scale,
                tolerance: 1e-10,
            });
        }
        Ok(Self {
            matrix,
            kind: FactorKind::User,
        })
    }

    /// Used by persistence; no correlation to check against.
    pub fn from_parts(matrix: Array2<f64>, kind: FactorKind) -> Self {
        Self { matrix, kind }
    }

    pub fn matrix(&self) -> ArrayView2<'_, f64> {
        self.matrix.view()
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn codomain_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn state_dim(&self) -> usize {
        self.matrix.ncols()
    }

    /// The correlation this factor reproduces, `BᵀB`.
    pub fn correlation(&self) -> Array2<f64> {
        let mut c = self.matrix.t().dot(&self.matrix);
        linalg::symmetrize(&mut c);
        c
    }
}

/// Cholesky factor of a correlation: upper-triangular `B` with `BᵀB = C` in
/// the positive definite case, the pivoted rank-revealing factor (r×N)
/// otherwise. Indefinite input is an error.
pub fn cholesky_factor(correlation: &CorrelationMatrix) -> Result<Factor> {
    let matrix = match linalg::cholesky_upper(correlation.entries()) {
        Some(b) => b,
        None => linalg::pivoted_cholesky(correlation.entries(), linalg::RANK_CUTOFF, 1e-12)?,
    };
    Ok(Factor {
        matrix,
        kind: FactorKind::Cholesky,
    })
}

/// The unique symmetric square root `B = C^{1/2}` with `B·B = C`, computed
/// through the spectral decomposition of `C`. Eigenvalues below the shared
/// rank cutoff are treated as zero, so the factor's rank matches the
/// numerical rank of `C` (and agrees with the pivoted Cholesky factor on
/// rank-deficient input).
pub fn square_root_factor(correlation: &CorrelationMatrix) -> Result<Factor> {
    let eig = linalg::eigh_descending(correlation.entries());
    let lambda_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    if let Some(&smallest) = eig.values.last() {
        if smallest < -1e-12 * lambda_max.max(f64::MIN_POSITIVE) {
            return Err(Error::Indefinite { eigenvalue: smallest });
        }
    }
    let n = correlation.dim();
    let mut b = Array2::<f64>::zeros((n, n));
    for m in 0..n {
        if eig.values[m] <= linalg::RANK_CUTOFF * lambda_max {
            continue;
        }
        let sigma = eig.values[m].sqrt();
        let col = eig.vectors.column(m);
        for i in 0..n {
            let vi = sigma * col[i];
            for j in 0..n {
                b[[i, j]] += vi * col[j];
            }
        }
    }
    linalg::symmetrize(&mut b);
    Ok(Factor {
        matrix: b,
        kind: FactorKind::SquareRoot,
    })
}

/// The associated map as a factor: `B = W^{1/2} Uᵀ` (M×N), so that
/// `BᵀB = U W Uᵀ` is the correlation of the snapshot set.
pub fn canonical_factor(snapshots: &SnapshotSet) -> Factor {
    let n = snapshots.state_dim();
    let m = snapshots.sample_count();
    let mut b = Array2::<f64>::zeros((m, n));
    for j in 0..m {
        let sw = snapshots.grid().weights()[j].sqrt();
        for i in 0..n {
            b[[j, i]] = sw * snapshots.values()[[i, j]];
        }
    }
    Factor {
        matrix: b,
        kind: FactorKind::CanonicalR,
    }
}

/// Unitary map between factor codomains.
#[derive(Debug, Clone)]
pub struct UnitaryMap {
    matrix: Array2<f64>,
    domain_rank: usize,
    residual: f64,
}

impl UnitaryMap {
    pub fn matrix(&self) -> ArrayView2<'_, f64> {
        self.matrix.view()
    }

    pub fn domain_rank(&self) -> usize {
        self.domain_rank
    }

    /// Relative Frobenius residual `‖B₂ − X B₁‖ / ‖B₂‖` observed at construction.
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

/// The unitary `X` with `B₂ = X B₁` on the range of `B₁`.
///
/// Both factors must factor the same correlation; the map is assembled from
/// the singular value decomposition of `B₁`, which shares its right singular
/// vectors with `B₂`.
pub fn unitary_equivalence(b1: &Factor, b2: &Factor) -> Result<UnitaryMap> {
    if b1.state_dim() != b2.state_dim() {
        return Err(Error::DimensionMismatch {
            what: "factor state dimensions",
            expected: b1.state_dim(),
            actual: b2.state_dim(),
        });
    }
    let c1 = b1.correlation();
    let c2 = b2.correlation();
    let scale = linalg::frobenius(c2.view()).max(f64::MIN_POSITIVE);
    let discrepancy = linalg::frobenius((&c1 - &c2).view()) / scale;
    if discrepancy > SAME_CORRELATION_TOL {
        return Err(Error::CorrelationMismatch {
            discrepancy,
            tolerance: SAME_CORRELATION_TOL,
        });
    }

    let svd = linalg::svd_thin(b1.matrix());
    let rank = linalg::rank_from_singular(&svd.singular, linalg::RANK_CUTOFF);
    // X = B₂ V₁ Σ₁⁻¹ W₁ᵀ maps range(B₁) isometrically onto range(B₂).
    let mut scaled_v = Array2::<f64>::zeros((b1.state_dim(), rank));
    for m in 0..rank {
        let inv = 1.0 / svd.singular[m];
        for i in 0..b1.state_dim() {
            scaled_v[[i, m]] = svd.vt[[m, i]] * inv;
        }
    }
    let w1 = svd.u.slice(ndarray::s![.., ..rank]);
    let x = b2.matrix().dot(&scaled_v).dot(&w1.t());

    let reconstructed = x.dot(&b1.matrix());
    let b2_norm = linalg::frobenius(b2.matrix()).max(f64::MIN_POSITIVE);
    let residual = linalg::frobenius((&reconstructed - &b2.matrix()).view()) / b2_norm;
    Ok(UnitaryMap {
        matrix: x,
        domain_rank: rank,
        residual,
    })
}

/// Transport the spatial eigenbasis into the factor's codomain:
/// `h_m = B C^{-1/2} v_m = B v_m / √λ_m`.
///
/// The returned columns are orthonormal and diagonalize `BBᵀ` with the
/// eigenvalues of the correlation.
pub fn cons_transport(factor: &Factor, data: &SpectralData) -> Result<Array2<f64>> {
    if factor.state_dim() != data.state_dim() {
        return Err(Error::DimensionMismatch {
            what: "factor columns vs spatial dimension",
            expected: data.state_dim(),
            actual: factor.state_dim(),
        });
    }
    let lambda_1 = data.eigenvalues().first().copied().unwrap_or(0.0);
    let c = factor.correlation();
    // The factor must reproduce the correlation the spectral data came from.
    let mut worst = 0.0f64;
    for m in 0..data.rank() {
        let v = data.spatial_modes().column(m).to_owned();
        let cv = c.dot(&v);
        let resid: f64 = cv
            .iter()
            .zip(v.iter())
            .map(|(&a, &b)| {
                let d = a - data.eigenvalues()[m] * b;
                d * d
            })
            .sum::<f64>()
            .sqrt();
        worst = worst.max(resid / lambda_1.max(f64::MIN_POSITIVE));
    }
    if worst > FACTOR_SPECTRUM_TOL {
        return Err(Error::FactorMismatch { residual: worst });
    }

    let r = data.rank();
    let mut modes = Array2::<f64>::zeros((factor.codomain_dim(), r));
    for m in 0..r {
        let h = factor.matrix().dot(&data.spatial_modes().column(m));
        let inv_sigma = 1.0 / data.eigenvalues()[m].sqrt();
        for i in 0..factor.codomain_dim() {
            modes[[i, m]] = h[i] * inv_sigma;
        }
    }
    Ok(modes)
}

/// A re-parametrized Karhunen-Loève table `{√λ_m, h_m, v_m}` induced by a
/// factorization.
#[derive(Debug, Clone)]
pub struct FactorRepresentation {
    sqrt_eigenvalues: Vec<f64>,
    /// Codomain modes, H_dim×r.
    factor_modes: Array2<f64>,
    /// Spatial modes, N×r.
    spatial_modes: Array2<f64>,
}

impl FactorRepresentation {
    pub fn sqrt_eigenvalues(&self) -> &[f64] {
        &self.sqrt_eigenvalues
    }

    pub fn factor_modes(&self) -> ArrayView2<'_, f64> {
        self.factor_modes.view()
    }

    pub fn spatial_modes(&self) -> ArrayView2<'_, f64> {
        self.spatial_modes.view()
    }

    /// Matrix whose column `a` is `Σ_m √λ_m h_m(a) v_m`; its column space
    /// equals the span of the original snapshots.
    pub fn reconstruction(&self) -> Array2<f64> {
        let r = self.sqrt_eigenvalues.len();
        let mut scaled = self.spatial_modes.clone();
        for m in 0..r {
            let s = self.sqrt_eigenvalues[m];
            scaled.column_mut(m).mapv_inplace(|x| x * s);
        }
        scaled.dot(&self.factor_modes.t())
    }

    /// Evaluate the representation at codomain index `a`.
    pub fn evaluate(&self, a: usize) -> Result<Array1<f64>> {
        if a >= self.factor_modes.nrows() {
            return Err(Error::IndexOutOfRange {
                index: a,
                len: self.factor_modes.nrows(),
            });
        }
        let mut out = Array1::<f64>::zeros(self.spatial_modes.nrows());
        for m in 0..self.sqrt_eigenvalues.len() {
            let coeff = self.sqrt_eigenvalues[m] * self.factor_modes[[a, m]];
            out.scaled_add(coeff, &self.spatial_modes.column(m));
        }
        Ok(out)
    }
}

/// Representation induced by a factorization: the KL table re-indexed over
/// the factor codomain.
pub fn represent_from_factor(factor: &Factor, data: &SpectralData) -> Result<FactorRepresentation> {
    let factor_modes = cons_transport(factor, data)?;
    Ok(FactorRepresentation {
        sqrt_eigenvalues: data.singular_values(),
        factor_modes,
        spatial_modes: data.spatial_modes().to_owned(),
    })
}
