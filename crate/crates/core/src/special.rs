//! Assurance under a precision criterion and for a difference of two proportions.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::kernels::{sample_beta, sample_binomial, std_normal_cdf, std_normal_quantile};
use crate::mc::{count_successes, mc_standard_error, McSettings};
use crate::table::{AssuranceRow, AssuranceTable, SampleSize};
use crate::{check_alpha, Alternative};

const TAG_ADCOCK: u64 = 0x6164_636b;
const TAG_BETABIN: u64 = 0x6262_696e;

/// Precision criterion: the posterior puts at least `1 - α` mass within `±d`
/// of the sample mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcockSpec {
    pub d: f64,
    pub mu_beta_a: f64,
    pub mu_beta_d: f64,
    pub n_a: f64,
    pub n_d: f64,
    pub sig_sq: f64,
    pub alpha: f64,
}

impl AdcockSpec {
    fn validate(&self) -> Result<()> {
        if !(self.d > 0.0) {
            return Err(domain(format!("d must be positive, got {}", self.d)));
        }
        if !(self.sig_sq > 0.0 && self.sig_sq.is_finite()) {
            return Err(domain(format!("sig_sq must be positive, got {}", self.sig_sq)));
        }
        if !(self.n_a >= 0.0) {
            return Err(domain(format!("n_a must be nonnegative, got {}", self.n_a)));
        }
        if !(self.n_d > 0.0) {
            return Err(domain(format!(
                "n_d must be positive to sample the design prior, got {}",
                self.n_d
            )));
        }
        check_alpha(self.alpha, "alpha")
    }

    /// Whether a study of size `n` with sample mean `xbar` meets the criterion.
    pub fn indicator(&self, n: f64, xbar: f64) -> bool {
        let total = self.n_a + n;
        let lambda = (n * xbar + self.n_a * self.mu_beta_a) / total;
        let scale = total.sqrt() / self.sig_sq.sqrt();
        let mass = std_normal_cdf(scale * (xbar + self.d - lambda)) - std_normal_cdf(scale * (xbar - self.d - lambda));
        mass >= 1.0 - self.alpha
    }
}

fn check_sizes(grid: &[usize]) -> Result<()> {
    if grid.is_empty() {
        return Err(domain("sample-size grid is empty"));
    }
    if grid.contains(&0) {
        return Err(domain("sample sizes must be at least 1"));
    }
    Ok(())
}

/// Monte Carlo assurance under the precision criterion. The sample mean is
/// drawn from its design marginal `N(μ_d, σ²(1/n_d + 1/n))`.
pub fn adcock_assurance(n_grid: &[usize], spec: &AdcockSpec, mc: &McSettings) -> Result<AssuranceTable> {
    mc.validate()?;
    spec.validate()?;
    check_sizes(n_grid)?;
    let root = mc.root(TAG_ADCOCK);
    let rows = mc.install(|| {
        n_grid
            .iter()
            .map(|&n| {
                let nf = n as f64;
                let sd = (spec.sig_sq * (1.0 / spec.n_d + 1.0 / nf)).sqrt();
                let hits = count_successes(root.child(n as u64), mc.mc_iter, |s| {
                    let xbar = spec.mu_beta_d + sd * s.rng().sample::<f64, _>(StandardNormal);
                    Ok(spec.indicator(nf, xbar))
                })?;
                let est = hits as f64 / mc.mc_iter as f64;
                Ok(AssuranceRow {
                    size: SampleSize::Single(n),
                    assurance: est,
                    mc_se: mc_standard_error(est, mc.mc_iter),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(AssuranceTable {
        method: "adcock",
        seed: mc.seed,
        mc_iter: mc.mc_iter,
        datasets: None,
        rows,
    })
}

/// Two independent binomial arms with Beta analysis priors. A known `p_i`
/// fixes the data-generating proportion; otherwise it is drawn from the
/// arm's Beta prior on every iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaBinSpec {
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub alpha_1: f64,
    pub beta_1: f64,
    pub alpha_2: f64,
    pub beta_2: f64,
    pub sig_level: f64,
    pub alt: Alternative,
}

impl BetaBinSpec {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha_1", self.alpha_1),
            ("beta_1", self.beta_1),
            ("alpha_2", self.alpha_2),
            ("beta_2", self.beta_2),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if let Some(p) = p {
                if !(p > 0.0 && p < 1.0) {
                    return Err(domain(format!("{name} must lie in (0, 1), got {p}")));
                }
            }
        }
        check_alpha(self.sig_level, "sig_level")
    }
}

/// Posterior mean and variance of a `Beta(a, b)` arm.
fn beta_moments(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (a / s, a * b / (s * s * (s + 1.0)))
}

/// Whether the credible interval for `p1 - p2` excludes 0.
fn interval_excludes_zero(mean: f64, sd: f64, alt: Alternative, z_two: f64, z_one: f64) -> bool {
    match alt {
        Alternative::TwoSided => mean - z_two * sd >= 0.0 || mean + z_two * sd <= 0.0,
        Alternative::Greater => mean - z_one * sd >= 0.0,
        Alternative::Less => mean + z_one * sd <= 0.0,
    }
}

/// Monte Carlo assurance that the posterior interval for `p1 - p2` excludes 0,
/// for each pair `(n1[i], n2[i])`.
pub fn betabin_assurance(
    n1_grid: &[usize],
    n2_grid: &[usize],
    spec: &BetaBinSpec,
    mc: &McSettings,
) -> Result<AssuranceTable> {
    mc.validate()?;
    spec.validate()?;
    check_sizes(n1_grid)?;
    check_sizes(n2_grid)?;
    if n1_grid.len() != n2_grid.len() {
        return Err(domain(format!(
            "n1 and n2 grids differ in length ({} vs {})",
            n1_grid.len(),
            n2_grid.len()
        )));
    }
    let z_two = -std_normal_quantile(spec.sig_level / 2.0)?;
    let z_one = -std_normal_quantile(spec.sig_level)?;
    let root = mc.root(TAG_BETABIN);
    let rows = mc.install(|| {
        n1_grid
            .iter()
            .zip(n2_grid)
            .map(|(&n1, &n2)| {
                let key = ((n1 as u64) << 32) | n2 as u64;
                let hits = count_successes(root.child(key), mc.mc_iter, |s| {
                    let mut rng = s.rng();
                    let p1 = match spec.p1 {
                        Some(p) => p,
                        None => sample_beta(spec.alpha_1, spec.beta_1, &mut rng)?,
                    };
                    let p2 = match spec.p2 {
                        Some(p) => p,
                        None => sample_beta(spec.alpha_2, spec.beta_2, &mut rng)?,
                    };
                    let x1 = sample_binomial(n1 as u64, p1, &mut rng)? as f64;
                    let x2 = sample_binomial(n2 as u64, p2, &mut rng)? as f64;
                    let (m1, v1) = beta_moments(spec.alpha_1 + x1, spec.beta_1 + n1 as f64 - x1);
                    let (m2, v2) = beta_moments(spec.alpha_2 + x2, spec.beta_2 + n2 as f64 - x2);
                    Ok(interval_excludes_zero(
                        m1 - m2,
                        (v1 + v2).sqrt(),
                        spec.alt,
                        z_two,
                        z_one,
                    ))
                })?;
                let est = hits as f64 / mc.mc_iter as f64;
                Ok(AssuranceRow {
                    size: SampleSize::Pair(n1, n2),
                    assurance: est,
                    mc_se: mc_standard_error(est, mc.mc_iter),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(AssuranceTable {
        method: "betabin",
        seed: mc.seed,
        mc_iter: mc.mc_iter,
        datasets: None,
        rows,
    })
}

/// Normal-approximation power of the two-sided test of `p1 = p2` with `n`
/// per arm.
pub fn prop_diff_power(n: f64, p1: f64, p2: f64, sig_level: f64) -> Result<f64> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(domain(format!("n must be positive, got {n}")));
    }
    for p in [p1, p2] {
        if !(p > 0.0 && p < 1.0) {
            return Err(domain(format!("proportions must lie in (0, 1), got {p}")));
        }
    }
    if p1 == p2 {
        return Err(domain("p1 equals p2: the critical difference is zero"));
    }
    check_alpha(sig_level, "sig_level")?;
    let ratio = (p1 * (1.0 - p1) + p2 * (1.0 - p2)) / (p1 - p2).powi(2);
    Ok(std_normal_cdf(
        (n / ratio).sqrt() + std_normal_quantile(sig_level / 2.0)?,
    ))
}
