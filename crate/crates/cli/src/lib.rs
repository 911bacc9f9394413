//! Front end for the `atbench` cross-checks: argument parsing, versioned
//! records, the result cache and the equivalence report.

pub mod cache;
pub mod commands;
pub mod equiv;

pub use commands::{run, Cli, ExitStatus};
