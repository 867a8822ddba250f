//! Exact power and assurance for the scalar normal-mean model.
//!
//! Observations are `N(θ, σ²)` with known `σ²`. The analysis prior is
//! `θ ~ N(θ₁, σ²/n_a)` and the design prior `θ ~ N(θ₁, σ²/n_d)`; the study
//! succeeds when the posterior probability of `θ > θ₀` exceeds `1 - α`.

use nalgebra::DVector;

use crate::conjugate::{simulate_assurance, ConjugateModelSpec, HypothesisSpec};
use crate::error::{domain, Result};
use crate::kernels::{std_normal_cdf, std_normal_quantile, CovarianceMatrix};
use crate::mc::McSettings;
use crate::{check_alpha, Alternative};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPriorSpec {
    pub theta_0: f64,
    pub theta_1: f64,
    pub sigsq: f64,
    pub n_a: f64,
    pub n_d: f64,
    pub alt: Alternative,
    pub alpha: f64,
}

impl TwoPriorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigsq > 0.0 && self.sigsq.is_finite()) {
            return Err(domain(format!("sigsq must be positive, got {}", self.sigsq)));
        }
        if !(self.n_a >= 0.0 && self.n_d >= 0.0) {
            return Err(domain(format!(
                "prior precisions must be nonnegative, got n_a={} n_d={}",
                self.n_a, self.n_d
            )));
        }
        check_alpha(self.alpha, "alpha")
    }

    /// Critical difference `Δ = θ₁ − θ₀`.
    pub fn delta(&self) -> f64 {
        self.theta_1 - self.theta_0
    }
}

fn check_n(n: f64) -> Result<()> {
    if n > 0.0 && n.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("sample size must be positive, got {n}")))
    }
}

/// Frequentist power of the one-sample z-test.
pub fn frequentist_power(n: f64, spec: &TwoPriorSpec) -> Result<f64> {
    check_n(n)?;
    spec.validate()?;
    let shift = n.sqrt() * spec.delta() / spec.sigsq.sqrt();
    Ok(match spec.alt {
        Alternative::Greater => std_normal_cdf(shift + std_normal_quantile(spec.alpha)?),
        Alternative::Less => std_normal_cdf(-shift + std_normal_quantile(spec.alpha)?),
        Alternative::TwoSided => {
            let z = std_normal_quantile(spec.alpha / 2.0)?;
            std_normal_cdf(shift + z) + std_normal_cdf(-shift + z)
        }
    })
}

/// Exact assurance.
///
/// The posterior is `N((n_a θ₁ + n ȳ)/(n + n_a), σ²/(n + n_a))`, so the
/// greater-than objective holds when `ȳ` exceeds
/// `t = [(n + n_a)(θ₀ + σ z_{1-α}/√(n + n_a)) − n_a θ₁]/n`. Under the design
/// prior `ȳ ~ N(θ₁, σ²(1/n + 1/n_d))`.
pub fn closed_form_assurance(n: f64, spec: &TwoPriorSpec) -> Result<f64> {
    check_n(n)?;
    spec.validate()?;
    let sigma = spec.sigsq.sqrt();
    let total = n + spec.n_a;
    // 1/sd of ȳ in units of σ; zero when n_d = 0
    let scale = (n * spec.n_d / (n + spec.n_d)).sqrt();
    let upper_tail = |alpha: f64| -> Result<f64> {
        let z = -std_normal_quantile(alpha)?;
        let t = (total * (spec.theta_0 + sigma * z / total.sqrt()) - spec.n_a * spec.theta_1) / n;
        Ok(std_normal_cdf(scale * (spec.theta_1 - t) / sigma))
    };
    let lower_tail = |alpha: f64| -> Result<f64> {
        let z = -std_normal_quantile(alpha)?;
        let t = (total * (spec.theta_0 - sigma * z / total.sqrt()) - spec.n_a * spec.theta_1) / n;
        Ok(std_normal_cdf(scale * (t - spec.theta_1) / sigma))
    };
    let value = match spec.alt {
        Alternative::Greater => upper_tail(spec.alpha)?,
        Alternative::Less => lower_tail(spec.alpha)?,
        Alternative::TwoSided => upper_tail(spec.alpha / 2.0)? + lower_tail(spec.alpha / 2.0)?,
    };
    Ok(value.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub n: f64,
    pub power: f64,
    pub assurance_exact: f64,
    pub assurance_sim: Option<f64>,
}

/// Scalar problem as a one-coefficient conjugate model: `X = 1_n`,
/// `V_d = 1/n_d`, `V_a⁻¹ = n_a`, `μ = θ₁`, `u = 1`, `C = θ₀`.
pub fn scalar_conjugate_model(spec: &TwoPriorSpec) -> Result<(ConjugateModelSpec, HypothesisSpec)> {
    spec.validate()?;
    if spec.n_d <= 0.0 {
        return Err(domain("simulation needs n_d > 0; use a small positive value"));
    }
    let mu = DVector::from_element(1, spec.theta_1);
    let model = ConjugateModelSpec::new(
        CovarianceMatrix::from_diagonal(&[1.0 / spec.n_d])?,
        mu.clone(),
        spec.sigsq,
    )
    .with_analysis_prior(CovarianceMatrix::from_diagonal(&[spec.n_a])?, mu)
    .with_alternative(spec.alt, spec.alpha);
    let hyp = HypothesisSpec::new(DVector::from_element(1, 1.0), spec.theta_0)?;
    Ok((model, hyp))
}

/// Power and exact assurance per `n`, plus simulated assurance when
/// `include_sim` is set (which requires whole-number `n`).
pub fn power_assurance_curve(
    n_grid: &[f64],
    spec: &TwoPriorSpec,
    include_sim: bool,
    mc: &McSettings,
) -> Result<Vec<CurveRow>> {
    if n_grid.is_empty() {
        return Err(domain("sample-size grid is empty"));
    }
    let mut rows = n_grid
        .iter()
        .map(|&n| {
            Ok(CurveRow {
                n,
                power: frequentist_power(n, spec)?,
                assurance_exact: closed_form_assurance(n, spec)?,
                assurance_sim: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if include_sim {
        let ints = n_grid
            .iter()
            .map(|&n| {
                if n.fract() == 0.0 {
                    Ok(n as usize)
                } else {
                    Err(domain(format!("simulation needs whole-number n, got {n}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let (model, hyp) = scalar_conjugate_model(spec)?;
        let table = simulate_assurance(&model, &hyp, &ints, mc, None)?;
        for (row, sim) in rows.iter_mut().zip(table.rows) {
            row.assurance_sim = Some(sim.assurance);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::RngStream;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn spec(n_a: f64, n_d: f64, sigsq: f64) -> TwoPriorSpec {
        TwoPriorSpec {
            theta_0: 0.15,
            theta_1: 0.25,
            sigsq,
            n_a,
            n_d,
            alt: Alternative::Greater,
            alpha: 0.05,
        }
    }

    /// Samples θ and ȳ from the design prior and evaluates the posterior tail directly.
    fn mc_oracle(n: f64, s: &TwoPriorSpec, draws: usize, seed: u64) -> f64 {
        let mut rng = RngStream::new(seed, 0).rng();
        let sigma = s.sigsq.sqrt();
        let mut hits = 0usize;
        for _ in 0..draws {
            let theta = s.theta_1 + sigma / s.n_d.sqrt() * rng.sample::<f64, _>(StandardNormal);
            let ybar = theta + sigma / n.sqrt() * rng.sample::<f64, _>(StandardNormal);
            let post_mean = (s.n_a * s.theta_1 + n * ybar) / (n + s.n_a);
            let post_sd = sigma / (n + s.n_a).sqrt();
            let below = std_normal_cdf((s.theta_0 - post_mean) / post_sd);
            let above = 1.0 - below;
            let pass = match s.alt {
                Alternative::Greater => below < s.alpha,
                Alternative::Less => above < s.alpha,
                Alternative::TwoSided => below < s.alpha / 2.0 || above < s.alpha / 2.0,
            };
            hits += usize::from(pass);
        }
        hits as f64 / draws as f64
    }

    #[test]
    fn power_examples() {
        let mut s = spec(0.0, 0.0, 0.30);
        s.theta_1 = 0.35;
        assert!((frequentist_power(20.0, &s).unwrap() - 0.495).abs() < 5e-4);
        let s = spec(0.0, 0.0, 0.104);
        assert!((frequentist_power(10.0, &s).unwrap() - 0.2532578).abs() < 5e-7);
        let mut null = s;
        null.theta_1 = null.theta_0;
        assert!((frequentist_power(37.0, &null).unwrap() - 0.05).abs() < 1e-15);
        assert!(frequentist_power(0.0, &s).is_err());
    }

    #[test]
    fn frequentist_limit_values() {
        let s = spec(1e-8, 1e8, 0.104);
        assert!((closed_form_assurance(10.0, &s).unwrap() - 0.2532578).abs() < 5e-7);
        assert!((closed_form_assurance(30.0, &s).unwrap() - 0.5213579).abs() < 5e-7);
    }

    #[test]
    fn flat_priors_give_one_half() {
        for n in [1.0, 10.0, 250.0, 5000.0] {
            assert!((closed_form_assurance(n, &spec(0.0, 0.0, 0.3)).unwrap() - 0.5).abs() < 1e-12);
            // sentinel precisions leave a residual of order √(n_d) · z
            assert!((closed_form_assurance(n, &spec(1e-8, 1e-8, 0.3)).unwrap() - 0.5).abs() < 1e-4);
        }
    }

    #[test]
    fn informative_case_matches_oracle() {
        let s = spec(10.0, 10.0, 0.30);
        let exact = closed_form_assurance(100.0, &s).unwrap();
        assert!((exact - 0.5340).abs() < 0.005, "{exact}");
        let sim = mc_oracle(100.0, &s, 200_000, 3);
        assert!((sim - exact).abs() < 3.0 * (exact * (1.0 - exact) / 2e5).sqrt() + 1e-3);
    }

    #[test]
    fn two_sided_and_less_match_oracle() {
        for alt in [Alternative::Less, Alternative::TwoSided] {
            let mut s = spec(5.0, 20.0, 0.2);
            s.alt = alt;
            s.theta_1 = 0.05;
            let exact = closed_form_assurance(40.0, &s).unwrap();
            let sim = mc_oracle(40.0, &s, 100_000, 11);
            assert!(
                (sim - exact).abs() < 3.0 * (exact * (1.0 - exact) / 1e5).sqrt() + 1e-3,
                "{alt}"
            );
        }
    }

    #[test]
    fn curve_with_simulation() {
        let s = spec(1e-8, 1e8, 0.104);
        let grid = [10.0, 60.0, 110.0];
        let rows = power_assurance_curve(&grid, &s, true, &McSettings::new(5000, 17)).unwrap();
        for r in &rows {
            assert!((r.power - r.assurance_exact).abs() < 1e-6);
            assert!((r.assurance_sim.unwrap() - r.assurance_exact).abs() <= 0.03);
        }
        assert!(power_assurance_curve(&[10.5], &s, true, &McSettings::default()).is_err());
        assert!(power_assurance_curve(&[], &s, false, &McSettings::default()).is_err());
    }

    proptest! {
        #[test]
        fn less_mirrors_greater(t0 in -2.0..2.0f64, t1 in -2.0..2.0f64, n in 1.0..500.0f64,
                                n_a in 0.0..50.0f64, n_d in 0.01..50.0f64) {
            let g = TwoPriorSpec { theta_0: -t0, theta_1: -t1, sigsq: 0.7, n_a, n_d,
                                   alt: Alternative::Greater, alpha: 0.05 };
            let l = TwoPriorSpec { theta_0: t0, theta_1: t1, alt: Alternative::Less, ..g };
            prop_assert_eq!(closed_form_assurance(n, &g).unwrap(), closed_form_assurance(n, &l).unwrap());
        }

        #[test]
        fn frequentist_limit_identity(n in 1.0..1e4f64, sigsq in 0.01..5.0f64) {
            // the 1e±8 sentinels perturb the argument by about n/(2 n_d); tighter ones cover n up to 1e4
            let s = spec(1e-12, 1e12, sigsq);
            prop_assert!((closed_form_assurance(n, &s).unwrap() - frequentist_power(n, &s).unwrap()).abs() <= 1e-6);
            let m = n.min(400.0);
            let s = spec(1e-8, 1e8, sigsq);
            prop_assert!((closed_form_assurance(m, &s).unwrap() - frequentist_power(m, &s).unwrap()).abs() <= 1e-6);
        }

        #[test]
        // n_a stays below (|Z_α|σ/Δ)² ≈ 80: a stronger analysis prior already
        // passes at tiny n and can lose assurance as data dilutes it
        fn monotone_in_n(n in 1.0..2000.0f64, step in 0.0..200.0f64, n_a in 0.0..30.0f64, n_d in 0.1..30.0f64) {
            let s = spec(n_a, n_d, 0.3);
            let a = closed_form_assurance(n, &s).unwrap();
            let b = closed_form_assurance(n + step, &s).unwrap();
            prop_assert!(b >= a - 1e-15);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
