//! Command-line front end: configuration, dispatch, tables and plots.

pub mod config;
pub mod error;
pub mod output;
pub mod params;
pub mod plot;
pub mod report;
pub mod run;

pub use config::{Command, McFlags, RunConfig};
pub use error::{CliError, Result};
pub use report::Bundle;
pub use run::run;
