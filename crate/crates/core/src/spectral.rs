//! Spectral decomposition of the correlation and best-n-term reduction.
//!
//! The decomposition is computed by the method of snapshots: the weighted
//! Gram eigenproblem `W^{1/2} K W^{1/2} q = λ q` on the parameter side,
//! whose nonzero spectrum coincides with that of the correlation matrix.
//! The resulting triplet `(λ_m, v_m, s_m)` is the singular value
//! decomposition of the associated map, and truncating it yields the
//! best n-term approximation with tail error `√(Σ_{m>n} λ_m)`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, s};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{ParameterGrid, SnapshotSet};

/// Default relative eigenvalue cutoff for the numerical rank.
pub const DEFAULT_RANK_CUTOFF: f64 = 1e-12;

/// Which eigenproblem carries the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecomposePath {
    /// M×M weighted Gram eigenproblem (method of snapshots); the default.
    Snapshots,
    /// N×N correlation eigenproblem; useful when N ≤ M.
    Correlation,
}

#[derive(Debug, Clone)]
pub struct DecomposeOptions {
    pub rank_cutoff: f64,
    pub path: DecomposePath,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            rank_cutoff: DEFAULT_RANK_CUTOFF,
            path: DecomposePath::Snapshots,
        }
    }
}

/// SVD triplet of the associated map: eigenvalues (descending), spatial
/// modes `v_m` (orthonormal columns), and parameter modes `s_m` sampled on
/// the grid (orthonormal in the weighted inner product).
#[derive(Debug, Clone)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    /// N×r.
    spatial_modes: Array2<f64>,
    /// M×r.
    parameter_modes: Array2<f64>,
    grid: ParameterGrid,
    source_hash: Option<String>,
}

impl SpectralData {
    /// Assemble from stored parts, e.g. when loading from disk.
    pub fn from_parts(
        eigenvalues: Vec<f64>,
        spatial_modes: Array2<f64>,
        parameter_modes: Array2<f64>,
        grid: ParameterGrid,
        source_hash: Option<String>,
    ) -> Result<Self> {
        let r = eigenvalues.len();
        if spatial_modes.ncols() != r || parameter_modes.ncols() != r {
            return Err(Error::DimensionMismatch {
                what: "mode columns vs eigenvalue count",
                expected: r,
                actual: spatial_modes.ncols().min(parameter_modes.ncols()),
            });
        }
        if parameter_modes.nrows() != grid.len() {
            return Err(Error::DimensionMismatch {
                what: "parameter mode rows vs grid points",
                expected: grid.len(),
                actual: parameter_modes.nrows(),
            });
        }
        let data = Self {
            eigenvalues,
            spatial_modes,
            parameter_modes,
            grid,
            source_hash,
        };
        data.verify()?;
        Ok(data)
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn singular_values(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|&l| l.sqrt()).collect()
    }

    pub fn spatial_modes(&self) -> ArrayView2<'_, f64> {
        self.spatial_modes.view()
    }

    pub fn parameter_modes(&self) -> ArrayView2<'_, f64> {
        self.parameter_modes.view()
    }

    pub fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    pub fn source_hash(&self) -> Option<&str> {
        self.source_hash.as_deref()
    }

    pub fn state_dim(&self) -> usize {
        self.spatial_modes.nrows()
    }

    pub fn total_energy(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// Check the self-contained invariants: positive descending eigenvalues,
    /// orthonormal spatial modes, weighted-orthonormal parameter modes.
    pub fn verify(&self) -> Result<()> {
        for pair in self.eigenvalues.windows(2) {
            if pair[1] > pair[0] {
                return Err(Error::InvalidInput(
                    "eigenvalues are not in descending order".into(),
                ));
            }
        }
        if self.eigenvalues.iter().any(|&l| l <= 0.0 || !l.is_finite()) {
            return Err(Error::InvalidInput(
                "retained eigenvalues must be finite and positive".into(),
            ));
        }
        let r = self.rank();
        if r == 0 {
            return Ok(());
        }
        let vtv = self.spatial_modes.t().dot(&self.spatial_modes);
        let mut worst = 0.0f64;
        for i in 0..r {
            for j in 0..r {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((vtv[[i, j]] - target).abs());
            }
        }
        if worst > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "spatial modes are not orthonormal (residual {worst:.3e})"
            )));
        }
        let mut worst_q = 0.0f64;
        for i in 0..r {
            for j in 0..r {
                let ip = self
                    .grid
                    .inner(self.parameter_modes.column(i), self.parameter_modes.column(j));
                let target = if i == j { 1.0 } else { 0.0 };
                worst_q = worst_q.max((ip - target).abs());
            }
        }
        if worst_q > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "parameter modes are not weighted-orthonormal (residual {worst_q:.3e})"
            )));
        }
        Ok(())
    }

    /// SVD-consistency against the generating snapshot set:
    /// `‖R* s_m − √λ_m v_m‖ ≤ 1e-8 √λ_1` for every retained mode.
    pub fn verify_against(&self, snapshots: &SnapshotSet) -> Result<()> {
        let scale = self.eigenvalues.first().copied().unwrap_or(0.0).sqrt();
        for m in 0..self.rank() {
            let lifted = snapshots.apply_adjoint(self.parameter_modes.column(m))?;
            let sigma = self.eigenvalues[m].sqrt();
            let resid: f64 = lifted
                .iter()
                .zip(self.spatial_modes.column(m).iter())
                .map(|(&a, &v)| (a - sigma * v) * (a - sigma * v))
                .sum::<f64>()
                .sqrt();
            if resid > 1e-8 * scale {
                return Err(Error::InvalidInput(format!(
                    "mode {m} violates SVD consistency (residual {resid:.3e})"
                )));
            }
        }
        Ok(())
    }

    fn truncated(&self, n: usize) -> SpectralData {
        SpectralData {
            eigenvalues: self.eigenvalues[..n].to_vec(),
            spatial_modes: self.spatial_modes.slice(s![.., ..n]).to_owned(),
            parameter_modes: self.parameter_modes.slice(s![.., ..n]).to_owned(),
            grid: self.grid.clone(),
            source_hash: self.source_hash.clone(),
        }
    }
}

/// Spectral decomposition with default options (method of snapshots,
/// rank cutoff 1e-12). An all-zero snapshot set yields rank 0.
pub fn decompose(snapshots: &SnapshotSet) -> SpectralData {
    decompose_with(snapshots, &DecomposeOptions::default())
}

pub fn decompose_with(snapshots: &SnapshotSet, opts: &DecomposeOptions) -> SpectralData {
    match opts.path {
        DecomposePath::Snapshots => decompose_gram(snapshots, opts.rank_cutoff),
        DecomposePath::Correlation => decompose_correlation(snapshots, opts.rank_cutoff),
    }
}

fn decompose_gram(snapshots: &SnapshotSet, rank_cutoff: f64) -> SpectralData {
    let m = snapshots.sample_count();
    let weights = snapshots.grid().weights();
    let sqrt_w: Vec<f64> = weights.iter().map(|&w| w.sqrt()).collect();

    let gram = snapshots.kernel_gram();
    let mut a = gram.into_entries();
    for i in 0..m {
        for j in 0..m {
            a[[i, j]] *= sqrt_w[i] * sqrt_w[j];
        }
    }
    linalg::symmetrize(&mut a);

    let eig = linalg::eigh_descending(a.view());
    let lambda_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let rank = eig
        .values
        .iter()
        .take_while(|&&l| l > rank_cutoff * lambda_max && l > 0.0)
        .count();

    let n = snapshots.state_dim();
    let mut eigenvalues = Vec::with_capacity(rank);
    let mut spatial = Array2::<f64>::zeros((n, rank));
    let mut parameter = Array2::<f64>::zeros((m, rank));
    for k in 0..rank {
        let lambda = eig.values[k];
        let mut s_mode = Array1::<f64>::zeros(m);
        for i in 0..m {
            s_mode[i] = eig.vectors[[i, k]] / sqrt_w[i];
        }
        let mut v_mode = snapshots
            .apply_adjoint(s_mode.view())
            .expect("dimensions match by construction");
        v_mode.mapv_inplace(|x| x / lambda.sqrt());
        if leading_entry_is_negative(v_mode.view()) {
            v_mode.mapv_inplace(|x| -x);
            s_mode.mapv_inplace(|x| -x);
        }
        eigenvalues.push(lambda);
        spatial.column_mut(k).assign(&v_mode);
        parameter.column_mut(k).assign(&s_mode);
    }

    SpectralData {
        eigenvalues,
        spatial_modes: spatial,
        parameter_modes: parameter,
        grid: snapshots.grid().clone(),
        source_hash: Some(snapshots.content_hash()),
    }
}

fn decompose_correlation(snapshots: &SnapshotSet, rank_cutoff: f64) -> SpectralData {
    let c = snapshots.correlation();
    let eig = linalg::eigh_descending(c.entries());
    let lambda_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let rank = eig
        .values
        .iter()
        .take_while(|&&l| l > rank_cutoff * lambda_max && l > 0.0)
        .count();

    let n = snapshots.state_dim();
    let m = snapshots.sample_count();
    let mut eigenvalues = Vec::with_capacity(rank);
    let mut spatial = Array2::<f64>::zeros((n, rank));
    let mut parameter = Array2::<f64>::zeros((m, rank));
    for k in 0..rank {
        let lambda = eig.values[k];
        let mut v_mode = eig.vectors.column(k).to_owned();
        let mut s_mode = snapshots
            .apply_map(v_mode.view())
            .expect("dimensions match by construction");
        s_mode.mapv_inplace(|x| x / lambda.sqrt());
        if leading_entry_is_negative(v_mode.view()) {
            v_mode.mapv_inplace(|x| -x);
            s_mode.mapv_inplace(|x| -x);
        }
        eigenvalues.push(lambda);
        spatial.column_mut(k).assign(&v_mode);
        parameter.column_mut(k).assign(&s_mode);
    }

    SpectralData {
        eigenvalues,
        spatial_modes: spatial,
        parameter_modes: parameter,
        grid: snapshots.grid().clone(),
        source_hash: Some(snapshots.content_hash()),
    }
}

/// Sign convention: the largest-magnitude entry of each spatial mode is
/// made positive. First index wins on exact ties.
fn leading_entry_is_negative(v: ArrayView1<'_, f64>) -> bool {
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

/// How to pick the truncation rank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationRule {
    /// Keep the first n modes (clamped to the available rank).
    Rank(usize),
    /// Relative tail-energy target τ: the smallest n with
    /// `Σ_{m>n} λ_m ≤ τ² Σ_m λ_m`.
    TailEnergy(f64),
}

/// Source bookkeeping for a reduced model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Provenance {
    pub source_name: Option<String>,
    pub source_hash: Option<String>,
}

/// Best-n-term truncation of a spectral decomposition.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    spectral: SpectralData,
    truncation_rank: usize,
    tail_energy: f64,
    /// Set when a requested rank exceeded the available rank.
    clamped: bool,
    provenance: Provenance,
}

impl ReducedModel {
    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    pub fn truncation_rank(&self) -> usize {
        self.truncation_rank
    }

    pub fn tail_energy(&self) -> f64 {
        self.tail_energy
    }

    pub fn was_clamped(&self) -> bool {
        self.clamped
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn set_source_name(&mut self, name: impl Into<String>) {
        self.provenance.source_name = Some(name.into());
    }

    /// Reported approximation error in the weighted L²⊗U norm: `√(Σ_{m>n} λ_m)`.
    pub fn truncation_error(&self) -> f64 {
        self.tail_energy.sqrt()
    }

    /// Rebuild from stored parts (used by persistence).
    pub fn from_parts(
        spectral: SpectralData,
        tail_energy: f64,
        provenance: Provenance,
    ) -> ReducedModel {
        ReducedModel {
            truncation_rank: spectral.rank(),
            spectral,
            tail_energy,
            clamped: false,
            provenance,
        }
    }

    /// Evaluate the reduced expansion at grid index j:
    /// `Σ_{m≤n} √λ_m s_m(p_j) v_m`.
    pub fn evaluate(&self, j: usize) -> Result<Array1<f64>> {
        let m_points = self.spectral.grid().len();
        if j >= m_points {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: m_points,
            });
        }
        let mut out = Array1::<f64>::zeros(self.spectral.state_dim());
        for m in 0..self.truncation_rank {
            let coeff = self.spectral.eigenvalues[m].sqrt() * self.spectral.parameter_modes[[j, m]];
            out.scaled_add(coeff, &self.spectral.spatial_modes.column(m));
        }
        Ok(out)
    }

    /// Truncate further. The energy already discarded upstream carries
    /// over into the new tail.
    pub fn retruncate(&self, rule: TruncationRule) -> ReducedModel {
        let mut rm = truncate(&self.spectral, rule);
        rm.tail_energy += self.tail_energy;
        rm.provenance = self.provenance.clone();
        rm
    }

    /// Discrete weighted reconstruction error
    /// `√(Σ_j w_j ‖r(p_j) − r_n(p_j)‖²)` against a snapshot set.
    pub fn reconstruction_error(&self, snapshots: &SnapshotSet) -> Result<f64> {
        if snapshots.state_dim() != self.spectral.state_dim() {
            return Err(Error::DimensionMismatch {
                what: "snapshot rows vs model state dimension",
                expected: self.spectral.state_dim(),
                actual: snapshots.state_dim(),
            });
        }
        if snapshots.sample_count() != self.spectral.grid().len() {
            return Err(Error::DimensionMismatch {
                what: "snapshot columns vs model grid",
                expected: self.spectral.grid().len(),
                actual: snapshots.sample_count(),
            });
        }
        let mut total = 0.0;
        for j in 0..snapshots.sample_count() {
            let approx = self.evaluate(j)?;
            let w = snapshots.grid().weights()[j];
            let diff: f64 = snapshots
                .snapshot(j)
                .iter()
                .zip(approx.iter())
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            total += w * diff;
        }
        Ok(total.sqrt())
    }
}

/// Truncate a decomposition by rank or by relative tail energy.
pub fn truncate(data: &SpectralData, rule: TruncationRule) -> ReducedModel {
    let r = data.rank();
    let total: f64 = data.eigenvalues.iter().sum();
    let (n, clamped) = match rule {
        TruncationRule::Rank(n) => (n.min(r), n > r),
        TruncationRule::TailEnergy(tau) => {
            let budget = tau * tau * total;
            let mut n = r;
            let mut tail = 0.0;
            // Walk from the smallest eigenvalue upwards while the tail fits.
            while n > 0 {
                let next_tail = tail + data.eigenvalues[n - 1];
                if next_tail <= budget {
                    tail = next_tail;
                    n -= 1;
                } else {
                    break;
                }
            }
            (n, false)
        }
    };
    let tail_energy: f64 = data.eigenvalues[n..].iter().sum();
    ReducedModel {
        spectral: data.truncated(n),
        truncation_rank: n,
        tail_energy,
        clamped,
        provenance: Provenance {
            source_name: None,
            source_hash: data.source_hash.clone(),
        },
    }
}
