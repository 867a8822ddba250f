//! Rate of correct classification for a simple-vs-simple linear hypothesis.
//!
//! `H₀: uᵀβ = c₀` against `H₁: uᵀβ = c₁` with prior `P(H₀) = π` and utility
//! `K` for a correct acceptance (1 for a correct rejection). The estimator
//! `uᵀβ̂ = zᵀy` has standard deviation `σ√(zᵀz)` where `u = Xᵀz`.

use nalgebra::{DMatrix, DVector};

use crate::check_alpha;
use crate::design::{gen_design_balanced, DesignMatrix};
use crate::error::{domain, Error, Result};
use crate::kernels::{std_normal_cdf, std_normal_quantile};

#[derive(Debug, Clone, PartialEq)]
pub struct GoalSpec {
    pub k: f64,
    pub pi: f64,
    pub u: DVector<f64>,
    pub beta_0: DVector<f64>,
    pub beta_1: DVector<f64>,
    pub sigsq: f64,
}

impl GoalSpec {
    /// `δ = uᵀβ₁ − uᵀβ₀`, after validating the spec.
    pub fn delta(&self) -> Result<f64> {
        check_weights(self.k, self.pi)?;
        if !(self.sigsq > 0.0 && self.sigsq.is_finite()) {
            return Err(domain(format!("sigsq must be positive, got {}", self.sigsq)));
        }
        if self.beta_0.len() != self.u.len() || self.beta_1.len() != self.u.len() {
            return Err(Error::Dimension(format!(
                "u, beta_0 and beta_1 have lengths {}, {}, {}",
                self.u.len(),
                self.beta_0.len(),
                self.beta_1.len()
            )));
        }
        let delta = self.u.dot(&self.beta_1) - self.u.dot(&self.beta_0);
        if delta == 0.0 || !delta.is_finite() {
            return Err(domain("u'beta_1 equals u'beta_0: the hypotheses coincide"));
        }
        Ok(delta)
    }
}

fn check_weights(k: f64, pi: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(domain(format!("K must be positive, got {k}")));
    }
    check_alpha(pi, "pi")
}

/// Minimal-norm `z` with `Xᵀz = u`.
pub fn solve_contrast_vector(x: &DesignMatrix, u: &DVector<f64>) -> Result<DVector<f64>> {
    solve_contrast_matrix(x.entries(), u)
}

fn solve_contrast_matrix(x: &DMatrix<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
    if u.len() != x.ncols() {
        return Err(Error::Dimension(format!(
            "u has length {} but X has {} columns",
            u.len(),
            x.ncols()
        )));
    }
    let svd = x.transpose().svd(true, true);
    let cutoff = 1e-12 * svd.singular_values.max();
    let z = svd.solve(u, cutoff).map_err(|e| domain(e.to_string()))?;
    let residual = (x.transpose() * &z - u).norm();
    let tolerance = 1e-8 * u.norm();
    if residual > tolerance {
        return Err(Error::NotEstimable { residual, tolerance });
    }
    Ok(z)
}

/// `r*` given `zᵀz`, `δ` and `σ`. The Bayes rule accepts `H₀` on the side of
/// the cutoff nearer `c₀`, so only `|δ|` matters.
pub fn rate_from_ztz(k: f64, pi: f64, sigma: f64, delta: f64, ztz: f64) -> f64 {
    let delta = delta.abs();
    let sd = sigma * ztz.sqrt();
    let log_term = sd / delta * (k * pi / (1.0 - pi)).ln();
    let half = delta / (2.0 * sd);
    k * pi * std_normal_cdf(log_term + half) + (1.0 - pi) * (1.0 - std_normal_cdf(log_term - half))
}

/// `(n, r*)` for each per-group sample size, using the balanced design with
/// one column per entry of `u`.
pub fn rate_correct_classification(spec: &GoalSpec, n_grid: &[usize]) -> Result<Vec<(usize, f64)>> {
    if n_grid.is_empty() {
        return Err(domain("sample-size grid is empty"));
    }
    let delta = spec.delta()?;
    n_grid
        .iter()
        .map(|&n| {
            let x = gen_design_balanced(n, spec.u.len())?;
            let ztz = solve_contrast_vector(&x, &spec.u)?.norm_squared();
            Ok((n, rate_from_ztz(spec.k, spec.pi, spec.sigsq.sqrt(), delta, ztz)))
        })
        .collect()
}

/// `r*` for an explicit design.
pub fn rate_correct_classification_design(spec: &GoalSpec, x: &DesignMatrix) -> Result<f64> {
    let delta = spec.delta()?;
    let ztz = solve_contrast_vector(x, &spec.u)?.norm_squared();
    Ok(rate_from_ztz(spec.k, spec.pi, spec.sigsq.sqrt(), delta, ztz))
}

/// `n_F = (z_α + z_β)² (σ/δ)²`.
pub fn frequentist_sample_size(alpha: f64, beta: f64, sigma: f64, delta: f64) -> Result<f64> {
    check_alpha(alpha, "alpha")?;
    check_alpha(beta, "beta")?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(domain(format!("sigma must be positive, got {sigma}")));
    }
    if delta == 0.0 || !delta.is_finite() {
        return Err(domain("delta must be nonzero"));
    }
    let z = std_normal_quantile(alpha)? + std_normal_quantile(beta)?;
    Ok(z * z * (sigma / delta).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRow {
    pub n: f64,
    pub r_star: f64,
    pub beta: f64,
}

/// For each type II error rate `β`, the frequentist sample size `n_F` and the
/// `r*` of the scalar intercept model with `⌊n_F⌋` rows (at least one), so
/// `zᵀz = 1/⌊n_F⌋`. The reported `n` is the unrounded `n_F`.
pub fn power_rstar_pairs(
    beta_grid: &[f64],
    alpha: f64,
    sigma: f64,
    delta: f64,
    k: f64,
    pi: f64,
) -> Result<Vec<PairRow>> {
    if beta_grid.is_empty() {
        return Err(domain("beta grid is empty"));
    }
    check_weights(k, pi)?;
    beta_grid
        .iter()
        .map(|&beta| {
            let n = frequentist_sample_size(alpha, beta, sigma, delta)?;
            Ok(PairRow {
                n,
                r_star: rate_from_ztz(k, pi, sigma, delta, 1.0 / n.floor().max(1.0)),
                beta,
            })
        })
        .collect()
}

/// Sample size at which the one-sided power `1 − β(n)` equals `r*(n)` in the
/// scalar intercept model, found by bisection.
pub fn power_rstar_crossing(alpha: f64, sigma: f64, delta: f64, k: f64, pi: f64) -> Result<f64> {
    check_alpha(alpha, "alpha")?;
    check_weights(k, pi)?;
    let z_alpha = std_normal_quantile(alpha)?;
    let gap = |n: f64| {
        let power = std_normal_cdf(n.sqrt() * delta.abs() / sigma + z_alpha);
        power - rate_from_ztz(k, pi, sigma, delta, 1.0 / n)
    };
    let (mut lo, mut hi) = (1e-6, 1.0);
    let start = gap(lo);
    while gap(hi).signum() == start.signum() {
        hi *= 2.0;
        if hi > 1e15 {
            return Err(domain("power and r* never cross"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid).signum() == start.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::gen_design;
    use proptest::prelude::*;

    fn scalar(beta_1: f64) -> GoalSpec {
        GoalSpec {
            k: 1.0,
            pi: 0.5,
            u: DVector::from_element(1, 1.0),
            beta_0: DVector::from_element(1, 0.5),
            beta_1: DVector::from_element(1, beta_1),
            sigsq: 1.0,
        }
    }

    #[test]
    fn ones_design_contrast() {
        let x = gen_design(&[7]).unwrap();
        let z = solve_contrast_vector(&x, &DVector::from_element(1, 1.0)).unwrap();
        assert!(z.iter().all(|v| (v - 1.0 / 7.0).abs() < 1e-14));
    }

    #[test]
    fn two_group_contrast() {
        let lam = 20000.0;
        let n = 13;
        let x = gen_design(&[n, n]).unwrap();
        let z = solve_contrast_vector(&x, &DVector::from_vec(vec![lam, -1.0])).unwrap();
        let expected = (lam * lam + 1.0) / n as f64;
        assert!((z.norm_squared() - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn non_estimable_contrast() {
        let x = DesignMatrix::from_matrix(DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0])).unwrap();
        let err = solve_contrast_vector(&x, &DVector::from_vec(vec![1.0, -1.0])).unwrap_err();
        assert!(matches!(err, Error::NotEstimable { .. }));
        assert!(solve_contrast_vector(&x, &DVector::from_vec(vec![1.0, 1.0])).is_ok());
    }

    #[test]
    fn scalar_rates() {
        let r = rate_correct_classification(&scalar(0.6), &[100, 857]).unwrap();
        assert!((r[0].1 - 0.6914625).abs() < 5e-8);
        assert!((r[1].1 - std_normal_cdf(0.05 * 857f64.sqrt())).abs() < 1e-14);
        assert!((r[1].1 - 0.92837).abs() < 5e-6);
        // r* = 0.9283 is first reached at n = 857
        let r856 = rate_correct_classification(&scalar(0.6), &[856]).unwrap()[0].1;
        assert!(r856 < 0.9283 && r[1].1 >= 0.9283);
    }

    #[test]
    fn cost_effectiveness_rates() {
        let spec = GoalSpec {
            k: 1.0,
            pi: 0.5,
            u: DVector::from_vec(vec![20000.0, -1.0]),
            beta_0: DVector::from_vec(vec![5.0, 6000.0]),
            beta_1: DVector::from_vec(vec![6.5, 7200.0]),
            sigsq: 4.04f64.powi(2),
        };
        let r = rate_correct_classification(&spec, &[20, 45]).unwrap();
        assert!((r[0].1 - 0.7872786).abs() < 5e-7);
        assert!((r[1].1 - 0.8840583).abs() < 5e-7);
    }

    #[test]
    fn equal_hypotheses_rejected() {
        assert!(rate_correct_classification(&scalar(0.5), &[10]).is_err());
        assert!(frequentist_sample_size(0.05, 0.1, 1.0, 0.0).is_err());
    }

    #[test]
    fn sample_size_values() {
        assert!((frequentist_sample_size(0.05, 0.01, 1.0, 0.1).unwrap() - 1577.044136).abs() < 1e-4);
        assert!((frequentist_sample_size(0.05, 0.10, 1.0, 0.1).unwrap() - 856.384735).abs() < 1e-4);
        assert_eq!(frequentist_sample_size(0.5, 0.5, 1.0, 0.1).unwrap(), 0.0);
        // σ enters squared
        let base = frequentist_sample_size(0.05, 0.2, 1.0, 0.1).unwrap();
        assert!((frequentist_sample_size(0.05, 0.2, 2.0, 0.1).unwrap() - 4.0 * base).abs() < 1e-9);
    }

    #[test]
    fn pairs_and_crossing() {
        let rows = power_rstar_pairs(&[0.01, 0.10], 0.05, 1.0, 0.1, 1.0, 0.5).unwrap();
        assert!((rows[0].n - 1577.044136).abs() < 1e-6);
        assert!((rows[0].r_star - 0.9764596).abs() < 5e-7);
        assert!((rows[1].r_star - 0.9282491).abs() < 5e-7);
        assert_eq!(rows[1].beta, 0.10);
        let n = power_rstar_crossing(0.05, 1.0, 0.1, 1.0, 0.5).unwrap();
        let z = std_normal_quantile(0.05).unwrap();
        assert!((n - 400.0 * z * z).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn simplifies_at_unit_weights(ztz in 1e-4..10.0f64, delta in -3.0..3.0f64, sigma in 0.1..5.0f64) {
            prop_assume!(delta.abs() > 1e-3);
            let full = rate_from_ztz(1.0, 0.5, sigma, delta, ztz);
            let simple = std_normal_cdf(delta.abs() / (2.0 * sigma * ztz.sqrt()));
            prop_assert!((full - simple).abs() < 1e-12);
        }

        #[test]
        fn increasing_in_n(n in 1usize..3000, step in 1usize..500) {
            let spec = scalar(0.6);
            let r = rate_correct_classification(&spec, &[n, n + step]).unwrap();
            prop_assert!(r[1].1 > r[0].1);
            prop_assert!(r[0].1 > 0.0 && r[1].1 < 1.0);
        }

        #[test]
        fn hypothesis_swap_invariant(b0 in -2.0..2.0f64, b1 in -2.0..2.0f64, n in 1usize..500) {
            prop_assume!((b0 - b1).abs() > 1e-3);
            let mut spec = scalar(b1);
            spec.beta_0[0] = b0;
            let mut swapped = spec.clone();
            std::mem::swap(&mut swapped.beta_0, &mut swapped.beta_1);
            swapped.k = 1.0 / spec.k;
            swapped.pi = 1.0 - spec.pi;
            let a = rate_correct_classification(&spec, &[n]).unwrap()[0].1;
            let b = rate_correct_classification(&swapped, &[n]).unwrap()[0].1;
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn contrast_scaling_invariant(c in 0.01..100.0f64, n in 1usize..200) {
            // δ and σ√(zᵀz) are both linear in u
            let spec = GoalSpec {
                k: 1.3, pi: 0.4,
                u: DVector::from_vec(vec![2.0, -1.0]),
                beta_0: DVector::from_vec(vec![1.0, 0.5]),
                beta_1: DVector::from_vec(vec![1.4, 0.6]),
                sigsq: 0.8,
            };
            let scaled = GoalSpec { u: &spec.u * c, ..spec.clone() };
            let a = rate_correct_classification(&spec, &[n]).unwrap()[0].1;
            let b = rate_correct_classification(&scaled, &[n]).unwrap()[0].1;
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn random_estimable_contrasts(seed in 0u64..1000, rows in 3usize..12, cols in 1usize..4) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let x = DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-2.0..2.0));
            let w = DVector::from_fn(rows, |_, _| rng.random_range(-1.0..1.0));
            let u = x.transpose() * w;
            prop_assume!(u.norm() > 1e-6);
            let z = solve_contrast_matrix(&x, &u).unwrap();
            prop_assert!((x.transpose() * z - &u).norm() <= 1e-8 * u.norm());
        }
    }
}
