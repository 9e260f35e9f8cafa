//! Command-line front end: scenario loading, the subcommands and their file
//! formats. The binary is a thin wrapper around [`run`].

pub mod app;
pub mod commands;
pub mod error;
pub mod scenario;

pub use app::run;
pub use error::CliError;
