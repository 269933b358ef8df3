//! Configuration, ensemble runs and CSV reports for the `sks` binary.

pub mod config;
pub mod error;
pub mod run;
pub mod validate;

pub use config::{load_config, parse_config, InitSpec, Mode, RunConfig};
pub use error::CliError;
pub use run::{run, RunSummary};
