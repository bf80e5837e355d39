//! Kernel-side analysis: Fredholm eigenproblems by Nyström quadrature,
//! Mercer reconstruction, and feature-map factorizations.
//!
//! The kernel operator acts on grid functions by quadrature,
//! `(C_Q s)(p_i) = Σ_j w_j κ(p_i, p_j) s(p_j)`; its eigenpairs come from
//! the symmetric discretization `W^{1/2} K W^{1/2} q = λ q`. A feature map
//! `κ(p₁,p₂) = Σ_ℓ ν_ℓ g(p₁,x_ℓ) g(p₂,x_ℓ)` factors the same operator
//! through an auxiliary measure space and re-indexes the expansion over it.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{ParameterGrid, SnapshotSet};
use crate::rng::Xoshiro256PlusPlus;

/// Relative eigenvalue cutoff shared with the spectral module.
const RANK_CUTOFF: f64 = 1e-12;
/// Eigenvalues below `-1e-12·λ₁` mean the kernel is not PSD on the grid.
const NEGATIVE_TOL: f64 = 1e-12;

type Evaluator = Box<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// A symmetric scalar kernel on the parameter set.
///
/// Evaluators must be pure and re-entrant; symmetry is declared by the
/// constructor and spot-checked against the grid where the kernel is used.
pub struct KernelFunction {
    name: String,
    evaluator: Evaluator,
}

impl std::fmt::Debug for KernelFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelFunction").field("name", &self.name).finish()
    }
}

impl KernelFunction {
    pub fn new(
        name: impl Into<String>,
        evaluator: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            evaluator: Box::new(evaluator),
        }
    }

    /// Brownian-motion kernel `min(s, t)` on the first coordinate.
    pub fn brownian() -> Self {
        Self::new("brownian", |p1: &[f64], p2: &[f64]| p1[0].min(p2[0]))
    }

    /// Exponential kernel `exp(-a‖p₁ - p₂‖)`.
    pub fn exponential(scale: f64) -> Self {
        Self::new("exp", move |p1: &[f64], p2: &[f64]| {
            (-scale * distance(p1, p2)).exp()
        })
    }

    /// Gaussian kernel `exp(-a‖p₁ - p₂‖²)`.
    pub fn gaussian(scale: f64) -> Self {
        Self::new("gauss", move |p1: &[f64], p2: &[f64]| {
            let d = distance(p1, p2);
            (-scale * d * d).exp()
        })
    }

    /// Kernel induced by a snapshot set: `κ(p_i, p_j) = ⟨r(p_i), r(p_j)⟩`.
    /// Only defined on the grid the snapshots were sampled on; evaluation at
    /// other points panics.
    pub fn from_snapshots(snapshots: &SnapshotSet) -> Self {
        let gram = snapshots.kernel_gram().into_entries();
        let points = snapshots.grid().points().to_owned();
        Self::new("snapshot-induced", move |p1: &[f64], p2: &[f64]| {
            let i = locate(&points, p1).expect("point p1 is not on the snapshot grid");
            let j = locate(&points, p2).expect("point p2 is not on the snapshot grid");
            gram[[i, j]]
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn evaluate(&self, p1: &[f64], p2: &[f64]) -> f64 {
        (self.evaluator)(p1, p2)
    }

    /// Spot-check symmetry on 100 random grid pairs.
    pub fn check_symmetry(&self, grid: &ParameterGrid) -> Result<()> {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(0x5ca1_ab1e);
        let m = grid.len();
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let i = (rng.next_u64() % m as u64) as usize;
            let j = (rng.next_u64() % m as u64) as usize;
            let a = self.evaluate(
                grid.point(i).as_slice().unwrap(),
                grid.point(j).as_slice().unwrap(),
            );
            let b = self.evaluate(
                grid.point(j).as_slice().unwrap(),
                grid.point(i).as_slice().unwrap(),
            );
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
        }
        if worst > 1e-12 {
            return Err(Error::NonSymmetricKernel { residual: worst });
        }
        Ok(())
    }

    /// Assemble the kernel matrix on a grid.
    pub fn matrix_on(&self, grid: &ParameterGrid) -> Array2<f64> {
        let m = grid.len();
        Array2::from_shape_fn((m, m), |(i, j)| {
            self.evaluate(
                grid.point(i).as_slice().unwrap(),
                grid.point(j).as_slice().unwrap(),
            )
        })
    }
}

fn distance(p1: &[f64], p2: &[f64]) -> f64 {
    p1.iter()
        .zip(p2.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn locate(points: &Array2<f64>, p: &[f64]) -> Option<usize> {
    (0..points.nrows()).find(|&i| {
        points
            .row(i)
            .iter()
            .zip(p.iter())
            .all(|(a, b)| (a - b).abs() <= 1e-12)
    })
}

/// Eigenpairs of the kernel operator discretized on a grid.
#[derive(Debug, Clone)]
pub struct KernelEigen {
    eigenvalues: Vec<f64>,
    /// M×r eigenfunction samples, orthonormal in the weighted inner product.
    functions: Array2<f64>,
    /// Number of slightly negative eigenvalues clamped to zero and dropped.
    clamped: usize,
}

impl KernelEigen {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn functions(&self) -> ArrayView2<'_, f64> {
        self.functions.view()
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn clamped(&self) -> usize {
        self.clamped
    }
}

/// Nyström discretization of the Fredholm eigenproblem: solves
/// `W^{1/2} K W^{1/2} q = λ q` and returns up to `count` leading eigenpairs
/// with `s = W^{-1/2} q`.
pub fn nystrom_eigensolve(
    kernel: &KernelFunction,
    grid: &ParameterGrid,
    count: usize,
) -> Result<KernelEigen> {
    let m = grid.len();
    if count > m {
        return Err(Error::TooManyEigenpairs {
            requested: count,
            available: m,
        });
    }
    let mut k = kernel.matrix_on(grid);
    let scale = linalg::max_abs(k.view()).max(f64::MIN_POSITIVE);
    let asym = linalg::asymmetry(k.view());
    if asym > 1e-10 * scale {
        return Err(Error::NonSymmetricKernel { residual: asym / scale });
    }
    linalg::symmetrize(&mut k);
    eigensolve_weighted(k, grid, count)
}

fn eigensolve_weighted(kernel: Array2<f64>, grid: &ParameterGrid, count: usize) -> Result<KernelEigen> {
    let m = grid.len();
    let sqrt_w: Vec<f64> = grid.weights().iter().map(|&w| w.sqrt()).collect();
    let mut a = kernel;
    for i in 0..m {
        for j in 0..m {
            a[[i, j]] *= sqrt_w[i] * sqrt_w[j];
        }
    }
    linalg::symmetrize(&mut a);
    let eig = linalg::eigh_descending(a.view());
    let lambda_1 = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    if let Some(&smallest) = eig.values.last() {
        if smallest < -NEGATIVE_TOL * lambda_1.max(f64::MIN_POSITIVE) {
            return Err(Error::KernelNotPsd { eigenvalue: smallest });
        }
    }
    let clamped = eig.values.iter().filter(|&&l| l < 0.0).count();
    let keep = eig
        .values
        .iter()
        .take(count)
        .take_while(|&&l| l > RANK_CUTOFF * lambda_1 && l > 0.0)
        .count();

    let mut functions = Array2::<f64>::zeros((m, keep));
    let mut eigenvalues = Vec::with_capacity(keep);
    for c in 0..keep {
        eigenvalues.push(eig.values[c]);
        let mut s = Array1::<f64>::zeros(m);
        for i in 0..m {
            s[i] = eig.vectors[[i, c]] / sqrt_w[i];
        }
        if leading_is_negative(s.view()) {
            s.mapv_inplace(|x| -x);
        }
        functions.column_mut(c).assign(&s);
    }
    Ok(KernelEigen {
        eigenvalues,
        functions,
        clamped,
    })
}

fn leading_is_negative(v: ArrayView1<'_, f64>) -> bool {
    let mut best = f64::NEG_INFINITY;
    let mut value = 0.0;
    for &x in v.iter() {
        if x.abs() > best {
            best = x.abs();
            value = x;
        }
    }
    value < 0.0
}

/// Mercer partial sum `κ_n(p_i, p_j) = Σ_{m≤n} λ_m s_m(p_i) s_m(p_j)`.
pub fn mercer_reconstruct(
    eigenvalues: &[f64],
    functions: ArrayView2<'_, f64>,
    n: usize,
) -> Result<Array2<f64>> {
    if functions.ncols() != eigenvalues.len() {
        return Err(Error::DimensionMismatch {
            what: "eigenfunction columns vs eigenvalue count",
            expected: eigenvalues.len(),
            actual: functions.ncols(),
        });
    }
    if n > eigenvalues.len() {
        return Err(Error::DimensionMismatch {
            what: "partial-sum order vs available modes",
            expected: eigenvalues.len(),
            actual: n,
        });
    }
    let m = functions.nrows();
    let mut out = Array2::<f64>::zeros((m, m));
    for (&lambda, s) in eigenvalues.iter().zip(functions.columns()).take(n) {
        for i in 0..m {
            let li = lambda * s[i];
            for j in 0..m {
                out[[i, j]] += li * s[j];
            }
        }
    }
    Ok(out)
}

/// Nyström extension of an eigenfunction to an off-grid point:
/// `ŝ(p) = (1/λ) Σ_j w_j κ(p, p_j) s(p_j)`.
pub fn nystrom_extend(
    kernel: &KernelFunction,
    grid: &ParameterGrid,
    eigenvalue: f64,
    function: ArrayView1<'_, f64>,
    p: &[f64],
) -> f64 {
    let sum: f64 = (0..grid.len())
        .map(|j| {
            grid.weights()[j]
                * kernel.evaluate(p, grid.point(j).as_slice().unwrap())
                * function[j]
        })
        .sum();
    sum / eigenvalue
}

/// Samples of a feature map `g(p_i, x_ℓ)` over an auxiliary measure space
/// with quadrature weights `ν_ℓ`.
#[derive(Debug, Clone)]
pub struct FeatureMapSamples {
    /// M×L.
    g: Array2<f64>,
    x_weights: Array1<f64>,
}

impl FeatureMapSamples {
    pub fn new(g: Array2<f64>, x_weights: Array1<f64>) -> Result<Self> {
        if g.ncols() != x_weights.len() {
            return Err(Error::DimensionMismatch {
                what: "feature columns vs x-weights",
                expected: g.ncols(),
                actual: x_weights.len(),
            });
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "feature samples" });
        }
        for (l, &nu) in x_weights.iter().enumerate() {
            if !nu.is_finite() || nu <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "x-weight {l} is {nu}, must be > 0"
                )));
            }
        }
        Ok(Self { g, x_weights })
    }

    pub fn g_matrix(&self) -> ArrayView2<'_, f64> {
        self.g.view()
    }

    pub fn x_weights(&self) -> ArrayView1<'_, f64> {
        self.x_weights.view()
    }

    pub fn feature_count(&self) -> usize {
        self.g.ncols()
    }
}

/// Result of factorizing the kernel operator through a feature map.
#[derive(Debug, Clone)]
pub struct FeatureFactorization {
    /// Kernel assembled from the features, `κ̃ = G diag(ν) Gᵀ`.
    kernel_matrix: Array2<f64>,
    eigenvalues: Vec<f64>,
    /// M×r parameter-side eigenfunctions.
    parameter_modes: Array2<f64>,
    /// L×r feature-side orthonormal system χ.
    chi_modes: Array2<f64>,
}

impl FeatureFactorization {
    pub fn kernel_matrix(&self) -> ArrayView2<'_, f64> {
        self.kernel_matrix.view()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn parameter_modes(&self) -> ArrayView2<'_, f64> {
        self.parameter_modes.view()
    }

    pub fn chi_modes(&self) -> ArrayView2<'_, f64> {
        self.chi_modes.view()
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Re-indexed KL table `r(x) = Σ_m √λ_m χ_m(x) v_m` for a snapshot set
    /// whose Gram matrix the features factor.
    pub fn kl_table(&self, snapshots: &SnapshotSet) -> Result<FeatureKlTable> {
        let gram = snapshots.kernel_gram().into_entries();
        let scale = linalg::frobenius(gram.view()).max(f64::MIN_POSITIVE);
        let diff = linalg::frobenius((&self.kernel_matrix - &gram).view()) / scale;
        if diff > 1e-8 {
            return Err(Error::CorrelationMismatch {
                discrepancy: diff,
                tolerance: 1e-8,
            });
        }
        let n = snapshots.state_dim();
        let mut spatial = Array2::<f64>::zeros((n, self.rank()));
        for m in 0..self.rank() {
            let lifted = snapshots.apply_adjoint(self.parameter_modes.column(m))?;
            let inv_sigma = 1.0 / self.eigenvalues[m].sqrt();
            for i in 0..n {
                spatial[[i, m]] = lifted[i] * inv_sigma;
            }
        }
        Ok(FeatureKlTable {
            sqrt_eigenvalues: self.eigenvalues.iter().map(|&l| l.sqrt()).collect(),
            chi_modes: self.chi_modes.clone(),
            spatial_modes: spatial,
        })
    }
}

/// KL table re-indexed over the feature measure space.
#[derive(Debug, Clone)]
pub struct FeatureKlTable {
    pub sqrt_eigenvalues: Vec<f64>,
    /// L×r.
    pub chi_modes: Array2<f64>,
    /// N×r.
    pub spatial_modes: Array2<f64>,
}

/// Assemble the kernel induced by feature samples, solve its eigenproblem,
/// verify the factor spectra agree, and compute the transported system χ.
pub fn feature_factorize(
    features: &FeatureMapSamples,
    grid: &ParameterGrid,
) -> Result<FeatureFactorization> {
    let m = grid.len();
    if features.g.nrows() != m {
        return Err(Error::DimensionMismatch {
            what: "feature rows vs grid points",
            expected: m,
            actual: features.g.nrows(),
        });
    }
    let l = features.feature_count();

    // κ̃(p_i, p_j) = Σ_ℓ ν_ℓ g(p_i, x_ℓ) g(p_j, x_ℓ)
    let mut weighted_g = features.g.clone();
    for col in 0..l {
        let nu = features.x_weights[col];
        weighted_g.column_mut(col).mapv_inplace(|x| x * nu);
    }
    let mut kernel_matrix = weighted_g.dot(&features.g.t());
    linalg::symmetrize(&mut kernel_matrix);

    let eigen = eigensolve_weighted(kernel_matrix.clone(), grid, m)?;

    // Feature-side operator D = W^{1/2} G N^{1/2}: κ̃-side is DDᵀ, feature
    // side is DᵀD; their nonzero spectra must agree.
    let mut d = Array2::<f64>::zeros((m, l));
    for i in 0..m {
        let sw = grid.weights()[i].sqrt();
        for c in 0..l {
            d[[i, c]] = sw * features.g[[i, c]] * features.x_weights[c].sqrt();
        }
    }
    let mut feature_side = d.t().dot(&d);
    linalg::symmetrize(&mut feature_side);
    let feature_eig = linalg::eigh_descending(feature_side.view());
    let lambda_1 = eigen.eigenvalues().first().copied().unwrap_or(0.0);
    let mut worst = 0.0f64;
    for m_idx in 0..eigen.rank().min(feature_eig.values.len()) {
        let a = eigen.eigenvalues()[m_idx];
        let b = feature_eig.values[m_idx];
        worst = worst.max((a - b).abs() / lambda_1.max(f64::MIN_POSITIVE));
    }
    if worst > 1e-8 {
        return Err(Error::FactorMismatch { residual: worst });
    }

    // χ_m(x_ℓ) = λ_m^{-1/2} Σ_j w_j g(p_j, x_ℓ) s_m(p_j); eigenvalues below
    // the rank cutoff were already excluded by the eigensolve.
    let r = eigen.rank();
    let mut chi = Array2::<f64>::zeros((l, r));
    for m_idx in 0..r {
        let inv_sigma = 1.0 / eigen.eigenvalues()[m_idx].sqrt();
        for ell in 0..l {
            let mut sum = 0.0;
            for j in 0..m {
                sum += grid.weights()[j] * features.g[[j, ell]] * eigen.functions()[[j, m_idx]];
            }
            chi[[ell, m_idx]] = sum * inv_sigma;
        }
    }

    Ok(FeatureFactorization {
        kernel_matrix,
        eigenvalues: eigen.eigenvalues().to_vec(),
        parameter_modes: eigen.functions().to_owned(),
        chi_modes: chi,
    })
}
