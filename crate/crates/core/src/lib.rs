//! Bayesian assurance and sample-size determination.
//!
//! Assurance is the probability, under a design-stage prior, that a future study
//! meets an analysis-stage objective. This crate computes it
//!
//! * exactly, for the scalar normal-mean model ([`closed_form`]);
//! * by seeded Monte Carlo, for conjugate linear models with known or unknown
//!   variance, balanced, unbalanced and longitudinal designs ([`conjugate`]);
//! * under a precision criterion and a two-proportion credible-interval
//!   criterion ([`special`]);
//!
//! and provides the rate-of-correct-classification goal function with its
//! frequentist companion ([`goal`]). Design matrices are built by [`design`];
//! special functions and samplers live in [`kernels`].
//!
//! All Monte Carlo estimates are reproducible: each iteration draws from its
//! own ChaCha stream derived from the master seed, so results do not depend on
//! the number of worker threads.

pub mod closed_form;
pub mod conjugate;
pub mod design;
pub mod error;
pub mod goal;
pub mod kernels;
pub mod mc;
pub mod special;
pub mod table;

use std::fmt;
use std::str::FromStr;

pub use error::{Error, Result};
pub use mc::McSettings;
pub use table::{AssuranceRow, AssuranceTable, ContourGrid, SampleSize};

/// Library version, recorded in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Direction of the analysis objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Alternative {
    #[default]
    Greater,
    Less,
    TwoSided,
}

impl FromStr for Alternative {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greater" => Ok(Self::Greater),
            "less" => Ok(Self::Less),
            "two.sided" | "two-sided" | "two_sided" => Ok(Self::TwoSided),
            other => Err(Error::Domain(format!(
                "unknown alternative {other:?}; expected greater, less or two.sided"
            ))),
        }
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Greater => "greater",
            Self::Less => "less",
            Self::TwoSided => "two.sided",
        })
    }
}

pub(crate) fn check_alpha(alpha: f64, name: &str) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in (0, 1), got {alpha}")))
    }
}
