//! Command-line front end for `biharmonic-core`: argument parsing, field
//! files, deterministic CSV/JSON output and the verification suite.

pub mod args;
pub mod checks;
pub mod error;
pub mod fieldio;
pub mod output;
pub mod run;

pub use error::{CliError, CliResult};
