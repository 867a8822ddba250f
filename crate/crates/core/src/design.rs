//! Default design matrices and block covariance structures.

use nalgebra::DMatrix;

use crate::error::{domain, Error, Result};
use crate::kernels::CovarianceMatrix;

/// Design matrix `X_n` together with the group sizes it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    entries: DMatrix<f64>,
    group_sizes: Vec<usize>,
}

impl DesignMatrix {
    /// Wraps a user-supplied matrix; no indicator structure is assumed.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::Dimension("design matrix must be nonempty".into()));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(domain("design matrix has non-finite entries"));
        }
        Ok(Self {
            entries,
            group_sizes: Vec::new(),
        })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Group sizes for generated designs; empty for user-supplied matrices.
    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }
}

/// Block-indicator design: column `k` is a ones vector over the `k`-th group's rows.
pub fn gen_design(group_sizes: &[usize]) -> Result<DesignMatrix> {
    if group_sizes.is_empty() {
        return Err(domain("gen_design needs at least one group size"));
    }
    if let Some(pos) = group_sizes.iter().position(|&n| n == 0) {
        return Err(domain(format!("group size at position {pos} must be positive")));
    }
    let rows: usize = group_sizes.iter().sum();
    let mut entries = DMatrix::zeros(rows, group_sizes.len());
    let mut start = 0;
    for (col, &n) in group_sizes.iter().enumerate() {
        entries.view_mut((start, col), (n, 1)).fill(1.0);
        start += n;
    }
    Ok(DesignMatrix {
        entries,
        group_sizes: group_sizes.to_vec(),
    })
}

/// Balanced design with `n` observations in each of `p` groups.
pub fn gen_design_balanced(n: usize, p: usize) -> Result<DesignMatrix> {
    if p == 0 {
        return Err(domain("number of groups p must be positive"));
    }
    gen_design(&vec![n; p])
}

/// Balanced longitudinal layout with equally spaced measurement times.
#[derive(Debug, Clone, PartialEq)]
pub struct LongitudinalSpec {
    pub ids: Vec<i64>,
    pub from: f64,
    pub to: f64,
    pub num_repeated_measures: usize,
    pub poly_degree: usize,
}

impl LongitudinalSpec {
    /// Rounds a fractional number of repeated measures up.
    pub fn new(ids: Vec<i64>, from: f64, to: f64, num_repeated_measures: f64) -> Result<Self> {
        if !(num_repeated_measures.is_finite() && num_repeated_measures > 0.0) {
            return Err(domain(format!(
                "num_repeated_measures must be positive, got {num_repeated_measures}"
            )));
        }
        let spec = Self {
            ids,
            from,
            to,
            num_repeated_measures: num_repeated_measures.ceil() as usize,
            poly_degree: 1,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_poly_degree(mut self, degree: usize) -> Self {
        self.poly_degree = degree;
        self
    }

    pub fn with_measures(&self, num_repeated_measures: usize) -> Self {
        Self {
            num_repeated_measures,
            ..self.clone()
        }
    }

    /// Coefficients in the resulting design: one intercept plus one column per degree, per id.
    pub fn coefficient_count(&self) -> usize {
        self.ids.len() * (1 + self.poly_degree)
    }

    pub fn timepoints(&self) -> Vec<f64> {
        let k = self.num_repeated_measures;
        let step = (self.to - self.from) / (k - 1) as f64;
        (0..k)
            .map(|i| {
                if i + 1 == k {
                    self.to
                } else {
                    self.from + step * i as f64
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.ids.is_empty() {
            return Err(domain("longitudinal design needs at least one subject id"));
        }
        let mut sorted = self.ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(domain("subject ids must be distinct"));
        }
        if !(self.from.is_finite() && self.to.is_finite() && self.from < self.to) {
            return Err(domain(format!(
                "longitudinal time range needs from < to, got [{}, {}]",
                self.from, self.to
            )));
        }
        if self.num_repeated_measures < 2 {
            return Err(domain("at least two repeated measures are required"));
        }
        if self.poly_degree == 0 {
            return Err(domain("poly_degree must be at least 1"));
        }
        Ok(())
    }
}

/// Longitudinal design: `ids` intercept indicators followed, for each degree
/// `d = 1..=poly_degree`, by `ids` columns holding `t^d` on that subject's rows.
pub fn gen_design_longitudinal(spec: &LongitudinalSpec) -> Result<DesignMatrix> {
    spec.validate()?;
    let m = spec.ids.len();
    let k = spec.num_repeated_measures;
    let times = spec.timepoints();
    let mut entries = DMatrix::zeros(m * k, spec.coefficient_count());
    for subject in 0..m {
        for (j, &t) in times.iter().enumerate() {
            let row = subject * k + j;
            entries[(row, subject)] = 1.0;
            for d in 1..=spec.poly_degree {
                entries[(row, d * m + subject)] = t.powi(d as i32);
            }
        }
    }
    Ok(DesignMatrix {
        entries,
        group_sizes: vec![k; m],
    })
}

/// `(n1, n2)` repeated `repeats` times.
pub fn replicate_pair(n1: usize, n2: usize, repeats: usize) -> Result<Vec<usize>> {
    if n1 == 0 || n2 == 0 || repeats == 0 {
        return Err(domain(format!(
            "replicate_pair needs positive arguments, got ({n1}, {n2}, {repeats})"
        )));
    }
    Ok(std::iter::repeat_n([n1, n2], repeats).flatten().collect())
}

/// Block-diagonal covariance with `multiplier * I` blocks of the given sizes.
pub fn block_diagonal_cov(blocks: &[(usize, f64)]) -> Result<CovarianceMatrix> {
    if blocks.is_empty() {
        return Err(domain("block_diagonal_cov needs at least one block"));
    }
    let mut diag = Vec::new();
    for (i, &(size, multiplier)) in blocks.iter().enumerate() {
        if size == 0 {
            return Err(domain(format!("block {i} has zero size")));
        }
        if !(multiplier > 0.0 && multiplier.is_finite()) {
            return Err(domain(format!(
                "block {i} multiplier must be positive, got {multiplier}"
            )));
        }
        diag.extend(std::iter::repeat_n(multiplier, size));
    }
    CovarianceMatrix::from_diagonal(&diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gen_design_printed_example() {
        let x = gen_design(&[1, 3, 5, 8]).unwrap();
        assert_eq!((x.rows(), x.cols()), (17, 4));
        let expected_col: Vec<usize> = [0, 1, 1, 1, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 3, 3].to_vec();
        for (row, &col) in expected_col.iter().enumerate() {
            for c in 0..4 {
                assert_eq!(x.entries()[(row, c)], if c == col { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn single_group_and_balanced_expansion() {
        let x = gen_design(&[5]).unwrap();
        assert_eq!(x.entries(), &DMatrix::from_element(5, 1, 1.0));
        let b = gen_design_balanced(2, 4).unwrap();
        assert_eq!((b.rows(), b.cols()), (8, 4));
        assert_eq!(b, gen_design(&[2, 2, 2, 2]).unwrap());
        for r in 0..8 {
            assert_eq!(b.entries()[(r, r / 2)], 1.0);
        }
    }

    #[test]
    fn gen_design_errors() {
        assert!(gen_design(&[]).is_err());
        assert!(gen_design(&[3, 0]).is_err());
    }

    #[test]
    fn longitudinal_printed_examples() {
        let spec = LongitudinalSpec::new(vec![1, 2, 3, 4], 1.0, 10.0, 4.0).unwrap();
        let x = gen_design_longitudinal(&spec).unwrap();
        assert_eq!((x.rows(), x.cols()), (16, 8));
        let times = [1.0, 4.0, 7.0, 10.0];
        for s in 0..4 {
            for (j, t) in times.iter().enumerate() {
                let row = s * 4 + j;
                for c in 0..8 {
                    let expected = if c == s {
                        1.0
                    } else if c == 4 + s {
                        *t
                    } else {
                        0.0
                    };
                    assert_eq!(x.entries()[(row, c)], expected);
                }
            }
        }
        let q = gen_design_longitudinal(&spec.clone().with_poly_degree(2)).unwrap();
        assert_eq!((q.rows(), q.cols()), (16, 12));
        assert_eq!(q.entries()[(1, 8)], 16.0);
        assert_eq!(q.entries()[(2, 8)], 49.0);
        assert_eq!(q.entries()[(15, 11)], 100.0);
        assert_eq!(q.entries()[(15, 10)], 0.0);
    }

    #[test]
    fn longitudinal_minimal() {
        let spec = LongitudinalSpec::new(vec![7], 0.0, 1.0, 2.0).unwrap();
        let x = gen_design_longitudinal(&spec).unwrap();
        assert_eq!(x.entries(), &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]));
    }

    #[test]
    fn longitudinal_validation() {
        assert!(LongitudinalSpec::new(vec![], 0.0, 1.0, 3.0).is_err());
        assert!(LongitudinalSpec::new(vec![1, 1], 0.0, 1.0, 3.0).is_err());
        assert!(LongitudinalSpec::new(vec![1], 2.0, 1.0, 3.0).is_err());
        assert!(LongitudinalSpec::new(vec![1], 0.0, 1.0, 1.0).is_err());
        assert_eq!(
            LongitudinalSpec::new(vec![1], 0.0, 1.0, 3.2)
                .unwrap()
                .num_repeated_measures,
            4
        );
    }

    #[test]
    fn replicate_pair_examples() {
        assert_eq!(replicate_pair(285, 285, 1).unwrap(), vec![285, 285]);
        assert_eq!(replicate_pair(4, 8, 2).unwrap(), vec![4, 8, 4, 8]);
        assert_eq!(replicate_pair(3, 5, 3).unwrap(), vec![3, 5, 3, 5, 3, 5]);
        assert!(replicate_pair(3, 5, 0).is_err());
    }

    #[test]
    fn block_diagonal_examples() {
        assert_eq!(block_diagonal_cov(&[(3, 1.0)]).unwrap(), CovarianceMatrix::identity(3));
        let b = block_diagonal_cov(&[(2, 1.0), (2, 4.0)]).unwrap();
        assert_eq!(b.entries().diagonal().as_slice(), &[1.0, 1.0, 4.0, 4.0]);
        assert!(block_diagonal_cov(&[(2, 0.0)]).is_err());

        let n = 285;
        let r = (8700.0_f64 / 4.04).powi(2);
        let vn = block_diagonal_cov(&[(n, 1.0), (n, r), (n, 1.0), (n, r)]).unwrap();
        assert_eq!(vn.dimension(), 1140);
        assert!(vn.is_diagonal());
        assert_eq!(vn.entries()[(0, 0)], 1.0);
        assert_eq!(vn.entries()[(n, n)], r);
        assert_eq!(vn.entries()[(2 * n, 2 * n)], 1.0);
        assert_eq!(vn.entries()[(4 * n - 1, 4 * n - 1)], r);
        assert_eq!(vn.entries()[(0, 1)], 0.0);
    }

    proptest! {
        #[test]
        fn indicator_sums(groups in proptest::collection::vec(1usize..12, 1..6)) {
            let x = gen_design(&groups).unwrap();
            for (c, &g) in groups.iter().enumerate() {
                prop_assert_eq!(x.entries().column(c).sum(), g as f64);
            }
            for r in 0..x.rows() {
                prop_assert_eq!(x.entries().row(r).sum(), 1.0);
            }
        }

        #[test]
        fn longitudinal_structure(m in 1usize..5, k in 2usize..7, deg in 1usize..4, from in -5.0f64..5.0, span in 0.5f64..20.0) {
            let ids: Vec<i64> = (0..m as i64).collect();
            let spec = LongitudinalSpec::new(ids, from, from + span, k as f64).unwrap().with_poly_degree(deg);
            let x = gen_design_longitudinal(&spec).unwrap();
            let plain = gen_design(&vec![k; m]).unwrap();
            prop_assert_eq!(x.entries().columns(0, m).into_owned(), plain.entries().clone());
            for d in 2..=deg {
                for c in 0..m {
                    for r in 0..x.rows() {
                        let base = x.entries()[(r, m + c)];
                        let got = x.entries()[(r, d * m + c)];
                        prop_assert!((got - base.powi(d as i32)).abs() <= 1e-12 * (1.0 + got.abs()));
                    }
                }
            }
        }
    }
}
