//! Shift-invariant kernels on uniform periodic grids.
//!
//! On a periodic grid the kernel operator is a circulant: the DFT
//! diagonalizes it, the diagonal is the spectral density `κ̂`, and the
//! square-root multiplier `M_√κ̂ ∘ F` factors the operator. Seeding the
//! factor with Hermitian-symmetric Gaussian spectral noise synthesizes
//! real stationary realizations whose covariance is `κ`.
//!
//! Complex arithmetic stays inside this module; every public output is real.

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::rng::Xoshiro256PlusPlus;

/// Relative tolerance for the evenness of kernel samples.
const EVEN_TOL: f64 = 1e-12;
/// Imaginary parts of the density below this (relative) are discarded.
const IMAG_TOL: f64 = 1e-10;
/// Clamped mass beyond this flags the kernel as inadmissible on the grid.
const ADMISSIBLE_TOL: f64 = 1e-6;

/// Samples of an even periodic kernel `κ(z_j)` on `z_j = jΔ`, `L = MΔ`.
#[derive(Debug, Clone)]
pub struct StationaryKernel1D {
    samples: Vec<f64>,
    length: f64,
}

impl StationaryKernel1D {
    pub fn from_samples(samples: Vec<f64>, length: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("kernel needs at least one sample".into()));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidInput(format!("domain length {length} must be > 0")));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "kernel samples" });
        }
        let m = samples.len();
        let scale = samples.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(f64::MIN_POSITIVE);
        for j in 1..m {
            let diff = (samples[j] - samples[m - j]).abs();
            if diff > EVEN_TOL * scale {
                return Err(Error::NotSymmetric {
                    what: "stationary kernel samples (κ(z) = κ(L−z))",
                    residual: diff / scale,
                    tolerance: EVEN_TOL,
                });
            }
        }
        Ok(Self { samples, length })
    }

    /// Periodized exponential kernel `e^{-a|z|}`: the two nearest images,
    /// `e^{-az} + e^{-a(L-z)}`, which is exactly even on the grid.
    pub fn periodized_exponential(scale: f64, length: f64, points: usize) -> Result<Self> {
        let delta = length / points as f64;
        let samples = (0..points)
            .map(|j| {
                let z = j as f64 * delta;
                (-scale * z).exp() + (-scale * (length - z)).exp()
            })
            .collect();
        Self::from_samples(samples, length)
    }

    /// Periodized Gaussian kernel `e^{-a z²}` through the nearest image.
    pub fn periodized_gaussian(scale: f64, length: f64, points: usize) -> Result<Self> {
        let delta = length / points as f64;
        let samples = (0..points)
            .map(|j| {
                let z = j as f64 * delta;
                let znear = z.min(length - z);
                let zfar = length - znear;
                (-scale * znear * znear).exp() + (-scale * zfar * zfar).exp()
            })
            .collect();
        Self::from_samples(samples, length)
    }

    /// Constant kernel `κ ≡ c`.
    pub fn constant(value: f64, length: f64, points: usize) -> Result<Self> {
        Self::from_samples(vec![value; points], length)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.samples.len() as f64
    }

    /// Kernel value at a signed lag (in grid steps), using periodicity.
    pub fn at_lag(&self, lag: i64) -> f64 {
        let m = self.samples.len() as i64;
        self.samples[lag.rem_euclid(m) as usize]
    }
}

/// Spectral density `κ̂(ζ_k)` at the DFT frequencies `ζ_k = k/L`.
#[derive(Debug, Clone)]
pub struct SpectralDensity {
    values: Vec<f64>,
    length: f64,
    /// Largest clamped negative value relative to the density maximum.
    clamped_fraction: f64,
}

impl SpectralDensity {
    /// Wrap explicit density values (validated non-negative after clamping).
    pub fn from_values(values: Vec<f64>, length: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("density needs at least one value".into()));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidInput(format!("domain length {length} must be > 0")));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "density values" });
        }
        let max = values.iter().fold(0.0f64, |a, &x| a.max(x)).max(f64::MIN_POSITIVE);
        let mut clamped_fraction = 0.0f64;
        let clamped = values
            .into_iter()
            .map(|x| {
                if x < 0.0 {
                    clamped_fraction = clamped_fraction.max(-x / max);
                    0.0
                } else {
                    x
                }
            })
            .collect();
        Ok(Self {
            values: clamped,
            length,
            clamped_fraction,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.values.len() as f64
    }

    /// Frequency `ζ_k = k/L` of bin k.
    pub fn frequency(&self, k: usize) -> f64 {
        k as f64 / self.length
    }

    /// False when clamping removed more than `1e-6` of the peak: the kernel
    /// is not positive semi-definite on this grid.
    pub fn is_admissible(&self) -> bool {
        self.clamped_fraction <= ADMISSIBLE_TOL
    }

    pub fn clamped_fraction(&self) -> f64 {
        self.clamped_fraction
    }
}

fn fft(values: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let plan = if inverse {
        planner.plan_fft_inverse(values.len())
    } else {
        planner.plan_fft_forward(values.len())
    };
    plan.process(values);
}

/// Riemann-sum Fourier transform of the kernel samples:
/// `κ̂(ζ_k) = Δ Σ_j κ(z_j) e^{-2πi z_j ζ_k}`.
///
/// Small imaginary parts and slightly negative values are discarded; heavy
/// clamping is recorded and surfaces through [`SpectralDensity::is_admissible`].
pub fn spectral_density(kernel: &StationaryKernel1D) -> SpectralDensity {
    let delta = kernel.spacing();
    let mut buf: Vec<Complex64> = kernel
        .samples()
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    fft(&mut buf, false);
    let max_mag = buf.iter().fold(0.0f64, |a, c| a.max(c.norm())).max(f64::MIN_POSITIVE) * delta;
    let mut clamped_fraction = 0.0f64;
    let values: Vec<f64> = buf
        .iter()
        .map(|c| {
            let re = c.re * delta;
            let im = c.im * delta;
            debug_assert!(
                im.abs() <= IMAG_TOL * max_mag,
                "even samples must transform to a real density"
            );
            let _ = im;
            if re < 0.0 {
                // Negative mass is clamped; its size decides admissibility.
                clamped_fraction = clamped_fraction.max(-re / max_mag);
                0.0
            } else {
                re
            }
        })
        .collect();
    SpectralDensity {
        values,
        length: kernel.length(),
        clamped_fraction,
    }
}

/// Inverse of [`spectral_density`]: kernel samples from density values,
/// `κ(z_j) = (1/L) Σ_k κ̂(ζ_k) e^{+2πi z_j ζ_k}`.
pub fn kernel_from_density(density: &SpectralDensity) -> Result<StationaryKernel1D> {
    let mut buf: Vec<Complex64> = density
        .values()
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    fft(&mut buf, true);
    let samples = buf.iter().map(|c| c.re / density.length()).collect();
    StationaryKernel1D::from_samples(samples, density.length())
}

/// The factorization `C_Q = (M_√κ̂ F)* (M_√κ̂ F)` as a composable map.
///
/// Applying the factor and then its adjoint reproduces the quadrature
/// action of the kernel operator: circular convolution with `κ`, scaled
/// by the grid spacing.
#[derive(Debug, Clone)]
pub struct SqrtMultiplierFactor {
    density: SpectralDensity,
}

impl SqrtMultiplierFactor {
    pub fn density(&self) -> &SpectralDensity {
        &self.density
    }

    /// Full action `factor* ∘ factor`: `φ ↦ F*(κ̂ · Fφ)`, equal to
    /// `(C_Q φ)_i = Δ Σ_j κ(z_i − z_j) φ_j`.
    pub fn correlation_action(&self, phi: &[f64]) -> Result<Vec<f64>> {
        let m = self.density.len();
        if phi.len() != m {
            return Err(Error::DimensionMismatch {
                what: "grid function",
                expected: m,
                actual: phi.len(),
            });
        }
        let delta = self.density.spacing();
        let mut buf: Vec<Complex64> = phi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft(&mut buf, false);
        for (k, c) in buf.iter_mut().enumerate() {
            // Forward transform carries Δ, the adjoint carries 1/L.
            *c *= Complex64::new(self.density.values()[k] * delta / self.density.length(), 0.0);
        }
        fft(&mut buf, true);
        Ok(buf.iter().map(|c| c.re).collect())
    }
}

pub fn sqrt_multiplier_factor(density: &SpectralDensity) -> SqrtMultiplierFactor {
    SqrtMultiplierFactor {
        density: density.clone(),
    }
}

/// Synthesize `count` real stationary realizations with covariance `κ`.
///
/// Realization `i` uses the deterministic sub-stream `i` of `seed`; the
/// spectral noise is Hermitian-symmetric complex Gaussian, so each output
/// row is real up to machine rounding.
pub fn synthesize_realizations(
    density: &SpectralDensity,
    count: usize,
    seed: u64,
) -> Result<Array2<f64>> {
    if count == 0 {
        return Err(Error::InvalidInput("realization count must be ≥ 1".into()));
    }
    let m: usize = density.len();
    let sqrt_density: Vec<f64> = density.values().iter().map(|&x| x.sqrt()).collect();
    let inv_sqrt_len = 1.0 / density.length().sqrt();
    let mut out = Array2::<f64>::zeros((count, m));

    let mut planner = FftPlanner::<f64>::new();
    let plan = planner.plan_fft_inverse(m);
    let mut buf = vec![Complex64::new(0.0, 0.0); m];

    for r in 0..count {
        let mut rng = Xoshiro256PlusPlus::substream(seed, r as u64);
        // Hermitian-symmetric unit-variance spectral noise.
        buf[0] = Complex64::new(rng.next_normal(), 0.0);
        let half = m / 2;
        for k in 1..m {
            if k < m - k {
                let a = rng.next_normal();
                let b = rng.next_normal();
                let scale = std::f64::consts::FRAC_1_SQRT_2;
                buf[k] = Complex64::new(a * scale, b * scale);
                buf[m - k] = buf[k].conj();
            } else if k == half && m.is_multiple_of(2) {
                buf[k] = Complex64::new(rng.next_normal(), 0.0);
            }
        }
        for k in 0..m {
            buf[k] *= Complex64::new(sqrt_density[k], 0.0);
        }
        plan.process(&mut buf);
        for j in 0..m {
            debug_assert!(buf[j].im.abs() <= 1e-12 * buf[j].re.abs().max(1.0));
            out[[r, j]] = buf[j].re * inv_sqrt_len;
        }
    }
    Ok(out)
}
