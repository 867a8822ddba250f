//! Result containers returned by the simulation routines.

/// Sample-size key of one table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleSize {
    Single(usize),
    Pair(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssuranceRow {
    pub size: SampleSize,
    pub assurance: f64,
    /// Binomial Monte Carlo standard error of `assurance`.
    pub mc_se: f64,
}

/// Per-sample-size assurance estimates plus the settings that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct AssuranceTable {
    pub method: &'static str,
    pub seed: u64,
    pub mc_iter: usize,
    /// Number of outer datasets, for the nested unknown-variance estimator.
    pub datasets: Option<usize>,
    pub rows: Vec<AssuranceRow>,
}

impl AssuranceTable {
    pub fn assurances(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.assurance).collect()
    }

    pub fn is_paired(&self) -> bool {
        matches!(self.rows.first().map(|r| r.size), Some(SampleSize::Pair(..)))
    }
}

/// Assurance over the Cartesian product of two sample-size grids.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourGrid {
    pub n1: Vec<usize>,
    pub n2: Vec<usize>,
    /// `values[i][j]` belongs to `(n1[i], n2[j])`.
    pub values: Vec<Vec<f64>>,
}
