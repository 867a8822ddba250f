//! Special functions and seeded samplers shared by the simulation modules.
//!
//! Every stochastic routine takes a caller-provided generator. Generators are
//! produced from an [`RngStream`], a `(master_seed, stream_index)` pair mapped
//! onto one ChaCha8 stream, so a given pair always replays the same draws no
//! matter which worker thread evaluates it.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Binomial, Distribution, Gamma, StandardNormal};
use statrs::function::erf::erfc_inv;

use crate::error::{domain, Error, Result};

/// Relative tolerance for the symmetry check and for eigenvalue clamping.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// Generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// A nested stream: `(seed, i).child(j)` is distinct from `(seed, i').child(j)`
    /// whenever `i != i'`.
    pub fn child(&self, index: u64) -> RngStream {
        RngStream {
            master_seed: splitmix64(self.master_seed ^ splitmix64(self.stream_index)),
            stream_index: index,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse of [`std_normal_cdf`] on the open unit interval.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("normal quantile needs 0 < p < 1, got {p}")));
    }
    let mut x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    // Newton steps against the accurate CDF polish erfc_inv's last digits
    for _ in 0..2 {
        let resid = std_normal_cdf(x) - p;
        let dens = std_normal_pdf(x);
        if dens <= 0.0 {
            break;
        }
        let polished = x - resid / dens;
        if (std_normal_cdf(polished) - p).abs() >= resid.abs() {
            break;
        }
        x = polished;
    }
    Ok(x)
}

/// A validated symmetric positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: DMatrix<f64>,
    diagonal: bool,
}

impl CovarianceMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "covariance must be square and nonempty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(domain("covariance has non-finite entries"));
        }
        let scale = entries.amax().max(f64::MIN_POSITIVE);
        let dim = entries.nrows();
        let mut diagonal = true;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let (a, b) = (entries[(i, j)], entries[(j, i)]);
                if (a - b).abs() > PSD_TOLERANCE * scale {
                    return Err(Error::NotSymmetric(format!("entries ({i},{j})={a} and ({j},{i})={b}")));
                }
                if a != 0.0 || b != 0.0 {
                    diagonal = false;
                }
            }
        }
        let eigenvalues: Vec<f64> = if diagonal {
            entries.diagonal().iter().copied().collect()
        } else {
            SymmetricEigen::new(entries.clone())
                .eigenvalues
                .iter()
                .copied()
                .collect()
        };
        check_psd(&eigenvalues)?;
        Ok(Self { entries, diagonal })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
            diagonal: true,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: DMatrix::zeros(dim, dim),
            diagonal: true,
        }
    }

    /// Diagonal matrix with the given nonnegative entries.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Dimension("empty diagonal".into()));
        }
        check_psd(diag)?;
        Ok(Self {
            entries: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
            diagonal: true,
        })
    }

    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.entries
    }
}

fn check_psd(eigenvalues: &[f64]) -> Result<()> {
    let max = eigenvalues.iter().copied().fold(0.0_f64, f64::max);
    let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOLERANCE * max.max(0.0) || (max == 0.0 && min < 0.0) {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
            max_eigenvalue: max,
        });
    }
    Ok(())
}

/// Multivariate normal sampler with a precomputed square-root factor.
///
/// Dense covariances go through a symmetric eigendecomposition with slightly
/// negative eigenvalues clamped to zero, so rank-deficient (and all-zero)
/// covariances are accepted and produce draws on the supporting subspace.
#[derive(Debug, Clone)]
pub struct MvnSampler {
    mean: DVector<f64>,
    factor: Factor,
}

#[derive(Debug, Clone)]
enum Factor {
    Diagonal(DVector<f64>),
    Dense(DMatrix<f64>),
}

impl MvnSampler {
    pub fn new(mean: DVector<f64>, cov: &CovarianceMatrix) -> Result<Self> {
        if mean.len() != cov.dimension() {
            return Err(Error::Dimension(format!(
                "mean has length {} but covariance is {}x{}",
                mean.len(),
                cov.dimension(),
                cov.dimension()
            )));
        }
        let factor = if cov.is_diagonal() {
            Factor::Diagonal(cov.entries().diagonal().map(|v| v.max(0.0).sqrt()))
        } else {
            let eig = SymmetricEigen::new(cov.entries().clone());
            let max = eig.eigenvalues.max().max(0.0);
            if eig.eigenvalues.min() < -PSD_TOLERANCE * max {
                return Err(Error::NotPsd {
                    min_eigenvalue: eig.eigenvalues.min(),
                    max_eigenvalue: max,
                });
            }
            let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
            let mut q = eig.eigenvectors;
            for (j, r) in roots.iter().enumerate() {
                q.column_mut(j).scale_mut(*r);
            }
            Factor::Dense(q)
        };
        Ok(Self { mean, factor })
    }

    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Draws `mean + scale * L z` with `z` standard normal and `L Lᵀ = cov`.
    pub fn sample_scaled<R: Rng + ?Sized>(&self, scale: f64, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.mean.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let shock = match &self.factor {
            Factor::Diagonal(d) => d.component_mul(&z),
            Factor::Dense(l) => l * z,
        };
        &self.mean + shock * scale
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        self.sample_scaled(1.0, rng)
    }
}

/// One draw from `N(mean, cov)`.
pub fn sample_mvn<R: Rng + ?Sized>(mean: &DVector<f64>, cov: &CovarianceMatrix, rng: &mut R) -> Result<DVector<f64>> {
    Ok(MvnSampler::new(mean.clone(), cov)?.sample(rng))
}

/// Inverse-gamma distribution with density proportional to `x^-(shape+1) exp(-scale/x)`.
#[derive(Debug, Clone, Copy)]
pub struct InverseGamma {
    gamma: Gamma<f64>,
}

impl InverseGamma {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite() && scale > 0.0 && scale.is_finite()) {
            return Err(domain(format!(
                "inverse gamma needs positive finite shape and scale, got ({shape}, {scale})"
            )));
        }
        // 1/X ~ Gamma(shape, rate = scale)
        let gamma = Gamma::new(shape, 1.0 / scale).map_err(|e| domain(e.to_string()))?;
        Ok(Self { gamma })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        1.0 / self.gamma.sample(rng)
    }
}

pub fn sample_inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<f64> {
    Ok(InverseGamma::new(shape, scale)?.sample(rng))
}

pub fn sample_beta<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> Result<f64> {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(domain(format!("beta shapes must be positive, got ({alpha}, {beta})")));
    }
    let dist = Beta::new(alpha, beta).map_err(|e| domain(e.to_string()))?;
    Ok(dist.sample(rng))
}

pub fn sample_binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> Result<u64> {
    if n == 0 {
        return Err(domain("binomial trial count must be positive"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("binomial probability must lie in [0, 1], got {p}")));
    }
    let dist = Binomial::new(n, p).map_err(|e| domain(e.to_string()))?;
    Ok(dist.sample(rng))
}
