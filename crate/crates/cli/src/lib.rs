//! Command-line front end for `k3lat` and the dataset verification report.

pub mod commands;
pub mod error;
pub mod verify;

pub use commands::{execute, Cli, Outcome};
pub use error::CliError;
pub use verify::{default_dataset_dir, verify_dataset, ReportRow, RowKind, VerificationReport};
