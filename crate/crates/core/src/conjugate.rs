//! Monte Carlo assurance for conjugate Bayesian linear models.
//!
//! The model is `y = X β + ε`, `ε ~ N(0, σ² V_n)`. The analysis stage places
//! `β | σ² ~ N(μ_a, σ² V_a)` (supplied through the inverse `V_a⁻¹`, zero for a
//! flat prior) and, when the variance is unknown, `σ² ~ IG(a, b)`. The design
//! stage generates data from `β ~ N(μ_d, σ² V_d)`, which gives the marginal
//! `y ~ N(X μ_d, σ² (X V_d Xᵀ + V_n))`.
//!
//! A dataset supports `H: uᵀβ > C` when the posterior tail
//! `P(uᵀβ ≤ C | y)` falls below `α`; the assurance is the fraction of design
//! draws that do.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::design::{gen_design, gen_design_balanced, gen_design_longitudinal, replicate_pair};
use crate::design::{DesignMatrix, LongitudinalSpec};
use crate::error::{domain, Error, Result};
use crate::kernels::{std_normal_cdf, CovarianceMatrix, InverseGamma, MvnSampler, RngStream};
use crate::mc::{count_successes, mc_standard_error, McSettings};
use crate::table::{AssuranceRow, AssuranceTable, ContourGrid, SampleSize};
use crate::{check_alpha, Alternative};

const TAG_KNOWN: u64 = 0x6b6e_6f77;
const TAG_UNBALANCED: u64 = 0x756e_6261;
const TAG_UNKNOWN: u64 = 0x7661_7221;

/// Inputs shared by every conjugate-model simulation.
#[derive(Debug, Clone)]
pub struct ConjugateModelSpec {
    /// Explicit design; generated from the sample size when absent.
    pub xn: Option<DesignMatrix>,
    /// Coefficient count used to build a default design; defaults to `u.len()`.
    pub p: Option<usize>,
    /// Error correlation matrix; identity when absent.
    pub vn: Option<CovarianceMatrix>,
    /// Design-stage prior correlation `V_β^(d)`.
    pub vbeta_d: CovarianceMatrix,
    /// Analysis-stage prior inverse correlation `V_β^{-1(a)}`.
    pub vbeta_a_inv: CovarianceMatrix,
    pub mu_beta_d: DVector<f64>,
    pub mu_beta_a: DVector<f64>,
    /// Known variance; also the default scale of the design marginal.
    pub sigsq: f64,
    pub alt: Alternative,
    pub alpha: f64,
}

impl ConjugateModelSpec {
    /// Flat analysis prior, greater-than alternative at `alpha = 0.05`.
    pub fn new(vbeta_d: CovarianceMatrix, mu_beta_d: DVector<f64>, sigsq: f64) -> Self {
        let p = mu_beta_d.len();
        Self {
            xn: None,
            p: None,
            vn: None,
            vbeta_d,
            vbeta_a_inv: CovarianceMatrix::zeros(p.max(1)),
            mu_beta_a: DVector::zeros(p),
            mu_beta_d,
            sigsq,
            alt: Alternative::Greater,
            alpha: 0.05,
        }
    }

    pub fn with_analysis_prior(mut self, vbeta_a_inv: CovarianceMatrix, mu_beta_a: DVector<f64>) -> Self {
        self.vbeta_a_inv = vbeta_a_inv;
        self.mu_beta_a = mu_beta_a;
        self
    }

    pub fn with_design(mut self, xn: DesignMatrix) -> Self {
        self.xn = Some(xn);
        self
    }

    pub fn with_vn(mut self, vn: CovarianceMatrix) -> Self {
        self.vn = Some(vn);
        self
    }

    pub fn with_alternative(mut self, alt: Alternative, alpha: f64) -> Self {
        self.alt = alt;
        self.alpha = alpha;
        self
    }

    fn check_scalars(&self) -> Result<()> {
        if !(self.sigsq > 0.0 && self.sigsq.is_finite()) {
            return Err(domain(format!("sigsq must be positive, got {}", self.sigsq)));
        }
        check_alpha(self.alpha, "alpha")
    }

    fn check_dims(&self, p: usize, hyp: &HypothesisSpec) -> Result<()> {
        let named = [
            ("u", hyp.u.len()),
            ("mu_beta_d", self.mu_beta_d.len()),
            ("mu_beta_a", self.mu_beta_a.len()),
            ("Vbeta_d", self.vbeta_d.dimension()),
            ("Vbeta_a_inv", self.vbeta_a_inv.dimension()),
        ];
        for (name, len) in named {
            if len != p {
                return Err(Error::Dimension(format!(
                    "{name} has dimension {len} but the design has {p} coefficients"
                )));
            }
        }
        Ok(())
    }

    /// Design for one grid point: explicit, longitudinal or balanced default.
    fn design_for(
        &self,
        n: usize,
        hyp: &HypothesisSpec,
        longitudinal: Option<&LongitudinalSpec>,
    ) -> Result<DesignMatrix> {
        if let Some(x) = &self.xn {
            return Ok(x.clone());
        }
        if let Some(spec) = longitudinal {
            return gen_design_longitudinal(&spec.with_measures(n));
        }
        gen_design_balanced(n, self.p.unwrap_or(hyp.u.len()))
    }
}

/// Linear hypothesis `uᵀβ` compared against `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisSpec {
    pub u: DVector<f64>,
    pub c: f64,
}

impl HypothesisSpec {
    pub fn new(u: DVector<f64>, c: f64) -> Result<Self> {
        if u.is_empty() || u.iter().all(|&v| v == 0.0) {
            return Err(domain("contrast u must be a nonzero vector"));
        }
        Ok(Self { u, c })
    }
}

/// Inverse-gamma priors on `σ²` for the design and analysis stages.
///
/// The analysis pair may be improper (e.g. `a = -p/2, b = 0`); only the
/// resulting posterior is required to be proper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IGPriorPair {
    pub a_sig_d: f64,
    pub b_sig_d: f64,
    pub a_sig_a: f64,
    pub b_sig_a: f64,
}

/// Conjugate posterior: `β | σ², y ~ N(M m, σ² M)` and `σ² | y ~ IG(a*, b*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    /// `M_n = (V_a⁻¹ + Xᵀ V_n⁻¹ X)⁻¹`.
    pub m_matrix: DMatrix<f64>,
    /// `m_n = V_a⁻¹ μ_a + Xᵀ V_n⁻¹ y`.
    pub m_vector: DVector<f64>,
    pub a_star: f64,
    pub b_star: f64,
}

impl Posterior {
    pub fn mean(&self) -> DVector<f64> {
        &self.m_matrix * &self.m_vector
    }
}

/// Error covariance structure with the solves and draws the samplers need.
#[derive(Debug, Clone)]
enum Noise {
    Diagonal(DVector<f64>),
    Dense {
        chol: Option<Cholesky<f64, Dyn>>,
        sampler: MvnSampler,
    },
}

impl Noise {
    fn new(vn: Option<&CovarianceMatrix>, rows: usize) -> Result<Self> {
        match vn {
            None => Ok(Noise::Diagonal(DVector::from_element(rows, 1.0))),
            Some(v) if v.dimension() != rows => Err(Error::Dimension(format!(
                "Vn is {0}x{0} but the design has {rows} rows",
                v.dimension()
            ))),
            Some(v) if v.is_diagonal() => Ok(Noise::Diagonal(v.entries().diagonal())),
            Some(v) => Ok(Noise::Dense {
                chol: Cholesky::new(v.entries().clone()),
                sampler: MvnSampler::new(DVector::zeros(rows), v)?,
            }),
        }
    }

    /// `V_n⁻¹ B`.
    fn solve(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match self {
            Noise::Diagonal(d) => {
                if d.iter().any(|&v| v <= 0.0) {
                    return Err(Error::Singular("Vn has a zero diagonal entry".into()));
                }
                let mut out = b.clone();
                for (i, mut row) in out.row_iter_mut().enumerate() {
                    row /= d[i];
                }
                Ok(out)
            }
            Noise::Dense { chol: Some(c), .. } => Ok(c.solve(b)),
            Noise::Dense { chol: None, .. } => Err(Error::Singular("Vn is not positive definite".into())),
        }
    }

    fn solve_vec(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        let m = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
        Ok(self.solve(&m)?.column(0).into_owned())
    }

    /// One draw of `N(0, scale² V_n)`.
    fn sample<R: Rng + ?Sized>(&self, scale: f64, rng: &mut R) -> DVector<f64> {
        match self {
            Noise::Diagonal(d) => d.map(|v| v.max(0.0).sqrt() * scale * rng.sample::<f64, _>(StandardNormal)),
            Noise::Dense { sampler, .. } => sampler.sample_scaled(scale, rng),
        }
    }
}

/// Draws from the design-stage marginal of `y` for a fixed design.
#[derive(Debug, Clone)]
struct MarginalSampler {
    x: DMatrix<f64>,
    beta: MvnSampler,
    noise: Noise,
}

impl MarginalSampler {
    fn new(model: &ConjugateModelSpec, x: &DesignMatrix) -> Result<Self> {
        if model.mu_beta_d.len() != x.cols() || model.vbeta_d.dimension() != x.cols() {
            return Err(Error::Dimension(format!(
                "design has {} columns but mu_beta_d / Vbeta_d have dimension {} / {}",
                x.cols(),
                model.mu_beta_d.len(),
                model.vbeta_d.dimension()
            )));
        }
        Ok(Self {
            x: x.entries().clone(),
            beta: MvnSampler::new(model.mu_beta_d.clone(), &model.vbeta_d)?,
            noise: Noise::new(model.vn.as_ref(), x.rows())?,
        })
    }

    /// `y = X β + e` with `β ~ N(μ_d, σ² V_d)` and `e ~ N(0, σ² V_n)`; this is
    /// distributed as `N(X μ_d, σ² (X V_d Xᵀ + V_n))`.
    fn sample<R: Rng + ?Sized>(&self, sigma: f64, rng: &mut R) -> DVector<f64> {
        let beta = self.beta.sample_scaled(sigma, rng);
        &self.x * beta + self.noise.sample(sigma, rng)
    }
}

/// Posterior quantities that depend on the design but not on the data.
#[derive(Debug, Clone)]
struct PreparedModel {
    marginal: MarginalSampler,
    /// `M_n`.
    m_matrix: DMatrix<f64>,
    /// `Xᵀ V_n⁻¹`, as a p×N matrix.
    xt_vinv: DMatrix<f64>,
    /// `V_a⁻¹ μ_a`.
    prior_term: DVector<f64>,
    /// `μ_aᵀ V_a⁻¹ μ_a`.
    prior_quad: f64,
    /// `uᵀ M_n V_a⁻¹ μ_a`.
    contrast_offset: f64,
    /// `V_n⁻¹ X M_n u`, so that `uᵀ M_n m_n = contrast_offset + weightsᵀ y`.
    weights: DVector<f64>,
    /// `uᵀ M_n u`.
    contrast_var: f64,
    rows: usize,
}

impl PreparedModel {
    fn new(model: &ConjugateModelSpec, hyp: &HypothesisSpec, x: &DesignMatrix) -> Result<Self> {
        model.check_dims(x.cols(), hyp)?;
        let marginal = MarginalSampler::new(model, x)?;
        let xt_vinv = marginal.noise.solve(x.entries())?.transpose();
        let precision = model.vbeta_a_inv.entries() + &xt_vinv * x.entries();
        let m_matrix = invert_spd(precision)?;
        let prior_term = model.vbeta_a_inv.entries() * &model.mu_beta_a;
        let prior_quad = model.mu_beta_a.dot(&prior_term);
        let mu = &m_matrix * &hyp.u;
        let contrast_var = hyp.u.dot(&mu);
        if !(contrast_var > 0.0) {
            return Err(Error::DegenerateContrast(contrast_var));
        }
        Ok(Self {
            contrast_offset: mu.dot(&prior_term),
            weights: xt_vinv.transpose() * &mu,
            marginal,
            m_matrix,
            xt_vinv,
            prior_term,
            prior_quad,
            contrast_var,
            rows: x.rows(),
        })
    }

    fn contrast_mean(&self, y: &DVector<f64>) -> f64 {
        self.contrast_offset + self.weights.dot(y)
    }

    /// `a*` and `b*` of the inverse-gamma posterior for dataset `y`.
    fn variance_posterior(&self, y: &DVector<f64>, a: f64, b: f64) -> Result<(f64, f64)> {
        let m_vector = &self.prior_term + &self.xt_vinv * y;
        let vinv_y = self.marginal.noise.solve_vec(y)?;
        let quad = self.prior_quad + y.dot(&vinv_y) - m_vector.dot(&(&self.m_matrix * &m_vector));
        Ok((a + self.rows as f64 / 2.0, b + 0.5 * quad))
    }
}

fn invert_spd(precision: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = precision.nrows();
    Cholesky::new(precision).map(|c| c.inverse()).ok_or_else(|| {
        Error::Singular(format!(
            "posterior precision Vbeta_a_inv + X'Vn^-1 X ({p}x{p}) is not positive definite; \
             the design does not identify every coefficient under this analysis prior"
        ))
    })
}

/// Known-variance analysis objective on the standardized posterior contrast.
fn known_variance_decision(mean: f64, sd: f64, c: f64, alt: Alternative, alpha: f64) -> bool {
    let z = (c - mean) / sd;
    match alt {
        Alternative::Greater => std_normal_cdf(z) < alpha,
        Alternative::Less => std_normal_cdf(-z) < alpha,
        Alternative::TwoSided => std_normal_cdf(z) < alpha / 2.0 || std_normal_cdf(-z) < alpha / 2.0,
    }
}

/// Posterior update for one dataset under the model's explicit design.
pub fn posterior_update(model: &ConjugateModelSpec, y: &DVector<f64>, a_sig_a: f64, b_sig_a: f64) -> Result<Posterior> {
    let x = model
        .xn
        .as_ref()
        .ok_or_else(|| domain("posterior_update needs an explicit design matrix"))?;
    if y.len() != x.rows() {
        return Err(Error::Dimension(format!(
            "y has length {} but X has {} rows",
            y.len(),
            x.rows()
        )));
    }
    let p = x.cols();
    if model.vbeta_a_inv.dimension() != p || model.mu_beta_a.len() != p {
        return Err(Error::Dimension(format!(
            "analysis prior has dimension {} / {} but X has {p} columns",
            model.vbeta_a_inv.dimension(),
            model.mu_beta_a.len()
        )));
    }
    let noise = Noise::new(model.vn.as_ref(), x.rows())?;
    let xt_vinv = noise.solve(x.entries())?.transpose();
    let m_matrix = invert_spd(model.vbeta_a_inv.entries() + &xt_vinv * x.entries())?;
    let prior_term = model.vbeta_a_inv.entries() * &model.mu_beta_a;
    let m_vector = &prior_term + &xt_vinv * y;
    let quad = model.mu_beta_a.dot(&prior_term) + y.dot(&noise.solve_vec(y)?) - m_vector.dot(&(&m_matrix * &m_vector));
    Ok(Posterior {
        a_star: a_sig_a + x.rows() as f64 / 2.0,
        b_star: b_sig_a + 0.5 * quad,
        m_matrix,
        m_vector,
    })
}

/// Whether a dataset with posterior `(M, m)` supports the hypothesis at level `alpha`.
pub fn analysis_decision(
    m_matrix: &DMatrix<f64>,
    m_vector: &DVector<f64>,
    hyp: &HypothesisSpec,
    sigsq: f64,
    alt: Alternative,
    alpha: f64,
) -> Result<bool> {
    check_alpha(alpha, "alpha")?;
    if m_matrix.nrows() != hyp.u.len() || m_vector.len() != hyp.u.len() {
        return Err(Error::Dimension("u, M and m must share one dimension".into()));
    }
    let mu = m_matrix * &hyp.u;
    let var = hyp.u.dot(&mu);
    if !(var > 0.0) {
        return Err(Error::DegenerateContrast(var));
    }
    let mean = mu.dot(m_vector);
    Ok(known_variance_decision(mean, (sigsq * var).sqrt(), hyp.c, alt, alpha))
}

/// One dataset from the design-stage marginal under the model's explicit design.
/// `sigma2_override` replaces `model.sigsq` (the unknown-variance outer loop).
pub fn sample_design_marginal<R: Rng + ?Sized>(
    model: &ConjugateModelSpec,
    rng: &mut R,
    sigma2_override: Option<f64>,
) -> Result<DVector<f64>> {
    let x = model
        .xn
        .as_ref()
        .ok_or_else(|| domain("sample_design_marginal needs an explicit design matrix"))?;
    let sigsq = sigma2_override.unwrap_or(model.sigsq);
    if !(sigsq >= 0.0 && sigsq.is_finite()) {
        return Err(domain(format!("variance must be nonnegative, got {sigsq}")));
    }
    Ok(MarginalSampler::new(model, x)?.sample(sigsq.sqrt(), rng))
}

fn check_grid<T>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(domain("sample-size grid is empty"));
    }
    Ok(())
}

fn check_explicit_design(model: &ConjugateModelSpec, grid_len: usize) -> Result<()> {
    if model.xn.is_some() && grid_len != 1 {
        return Err(domain(
            "an explicit design matrix fixes the sample size; pass a single grid value",
        ));
    }
    Ok(())
}

fn known_variance_estimate(
    model: &ConjugateModelSpec,
    hyp: &HypothesisSpec,
    design: &DesignMatrix,
    task: RngStream,
    mc_iter: usize,
) -> Result<f64> {
    let prepared = PreparedModel::new(model, hyp, design)?;
    let sigma = model.sigsq.sqrt();
    let sd = sigma * prepared.contrast_var.sqrt();
    let hits = count_successes(task, mc_iter, |s| {
        let mut rng = s.rng();
        let y = prepared.marginal.sample(sigma, &mut rng);
        Ok(known_variance_decision(
            prepared.contrast_mean(&y),
            sd,
            hyp.c,
            model.alt,
            model.alpha,
        ))
    })?;
    Ok(hits as f64 / mc_iter as f64)
}

fn row(size: SampleSize, assurance: f64, iterations: usize) -> AssuranceRow {
    AssuranceRow {
        size,
        assurance,
        mc_se: mc_standard_error(assurance, iterations),
    }
}

/// Known-variance Monte Carlo assurance over a grid of per-group sample sizes.
///
/// Without an explicit design, each `n` builds `gen_design(n, ..., n)` with `p`
/// groups, or, when `longitudinal` is given, a longitudinal design with `n`
/// repeated measures per subject.
pub fn simulate_assurance(
    model: &ConjugateModelSpec,
    hyp: &HypothesisSpec,
    n_grid: &[usize],
    mc: &McSettings,
    longitudinal: Option<&LongitudinalSpec>,
) -> Result<AssuranceTable> {
    mc.validate()?;
    model.check_scalars()?;
    check_grid(n_grid)?;
    check_explicit_design(model, n_grid.len())?;
    let root = mc.root(TAG_KNOWN);
    let rows = mc.install(|| {
        n_grid
            .iter()
            .map(|&n| {
                let design = model.design_for(n, hyp, longitudinal)?;
                let est = known_variance_estimate(model, hyp, &design, root.child(n as u64), mc.mc_iter)?;
                Ok(row(SampleSize::Single(n), est, mc.mc_iter))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(AssuranceTable {
        method: "conjugate-known-variance",
        seed: mc.seed,
        mc_iter: mc.mc_iter,
        datasets: None,
        rows,
    })
}

/// Unbalanced designs: the `i`-th study has group sizes
/// `replicate_pair(n1[i], n2[i], repeats)`. With `surface` set, the full
/// Cartesian grid is also evaluated, one independent simulation per cell.
pub fn simulate_assurance_unbalanced(
    n1_grid: &[usize],
    n2_grid: &[usize],
    repeats: usize,
    model: &ConjugateModelSpec,
    hyp: &HypothesisSpec,
    mc: &McSettings,
    surface: bool,
) -> Result<(AssuranceTable, Option<ContourGrid>)> {
    mc.validate()?;
    model.check_scalars()?;
    check_grid(n1_grid)?;
    if n1_grid.len() != n2_grid.len() {
        return Err(domain(format!(
            "n1 and n2 grids differ in length ({} vs {})",
            n1_grid.len(),
            n2_grid.len()
        )));
    }
    check_explicit_design(model, n1_grid.len())?;
    let root = mc.root(TAG_UNBALANCED);
    let estimate = |n1: usize, n2: usize| -> Result<f64> {
        let design = match &model.xn {
            Some(x) => x.clone(),
            None => gen_design(&replicate_pair(n1, n2, repeats)?)?,
        };
        let key = ((n1 as u64) << 32) | n2 as u64;
        known_variance_estimate(model, hyp, &design, root.child(key), mc.mc_iter)
    };
    mc.install(|| {
        let rows = n1_grid
            .iter()
            .zip(n2_grid)
            .map(|(&n1, &n2)| Ok(row(SampleSize::Pair(n1, n2), estimate(n1, n2)?, mc.mc_iter)))
            .collect::<Result<Vec<_>>>()?;
        let contour = if surface {
            let values = n1_grid
                .iter()
                .map(|&n1| n2_grid.iter().map(|&n2| estimate(n1, n2)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Some(ContourGrid {
                n1: n1_grid.to_vec(),
                n2: n2_grid.to_vec(),
                values,
            })
        } else {
            None
        };
        Ok((
            AssuranceTable {
                method: "conjugate-unbalanced",
                seed: mc.seed,
                mc_iter: mc.mc_iter,
                datasets: None,
                rows,
            },
            contour,
        ))
    })
}

/// Nested estimator for unknown variance.
///
/// For each of `R` datasets: draw `σ²_d ~ IG(a_d, b_d)`, draw `y` from the
/// design marginal at `σ²_d`, then draw `J` posterior samples of
/// `(σ², uᵀβ)`. The dataset passes when more than `1 - α` of the samples lie
/// on the alternative side of `C` (`1 - α/2` on either side for two-sided).
/// Only the contrast `uᵀβ ~ N(uᵀM m, σ² uᵀMu)` is drawn; it has the same law
/// as projecting a full draw of `β`.
pub fn simulate_assurance_unknown_var(
    model: &ConjugateModelSpec,
    hyp: &HypothesisSpec,
    ig: &IGPriorPair,
    n_grid: &[usize],
    mc: &McSettings,
    longitudinal: Option<&LongitudinalSpec>,
) -> Result<AssuranceTable> {
    mc.validate()?;
    check_alpha(model.alpha, "alpha")?;
    check_grid(n_grid)?;
    check_explicit_design(model, n_grid.len())?;
    let design_ig = InverseGamma::new(ig.a_sig_d, ig.b_sig_d)?;
    let root = mc.root(TAG_UNKNOWN);
    let j_iter = mc.mc_iter;
    let needed = match model.alt {
        Alternative::TwoSided => 1.0 - model.alpha / 2.0,
        _ => 1.0 - model.alpha,
    };
    let rows = mc.install(|| {
        n_grid
            .iter()
            .map(|&n| {
                let design = model.design_for(n, hyp, longitudinal)?;
                let prepared = PreparedModel::new(model, hyp, &design)?;
                let task = root.child(n as u64);
                let passes = (0..mc.datasets as u64)
                    .into_par_iter()
                    .map(|r| -> Result<u64> {
                        let mut rng = task.child(r).rng();
                        let sigma_d = design_ig.sample(&mut rng).sqrt();
                        let y = prepared.marginal.sample(sigma_d, &mut rng);
                        let (a_star, b_star) = prepared.variance_posterior(&y, ig.a_sig_a, ig.b_sig_a)?;
                        if !(a_star > 0.0 && b_star > 0.0) {
                            return Err(Error::ImproperPosterior {
                                shape: a_star,
                                scale: b_star,
                            });
                        }
                        let post_ig = InverseGamma::new(a_star, b_star)?;
                        let mean = prepared.contrast_mean(&y);
                        let (mut above, mut below) = (0usize, 0usize);
                        for _ in 0..j_iter {
                            let sd = (post_ig.sample(&mut rng) * prepared.contrast_var).sqrt();
                            let draw = mean + sd * rng.sample::<f64, _>(StandardNormal);
                            if draw > hyp.c {
                                above += 1;
                            } else if draw < hyp.c {
                                below += 1;
                            }
                        }
                        let frac_above = above as f64 / j_iter as f64;
                        let frac_below = below as f64 / j_iter as f64;
                        let pass = match model.alt {
                            Alternative::Greater => frac_above > needed,
                            Alternative::Less => frac_below > needed,
                            Alternative::TwoSided => frac_above > needed || frac_below > needed,
                        };
                        Ok(u64::from(pass))
                    })
                    .try_reduce(|| 0, |a, b| Ok(a + b))?;
                let est = passes as f64 / mc.datasets as f64;
                Ok(row(SampleSize::Single(n), est, mc.datasets))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(AssuranceTable {
        method: "conjugate-unknown-variance",
        seed: mc.seed,
        mc_iter: mc.mc_iter,
        datasets: Some(mc.datasets),
        rows,
    })
}
