//! Command-line front end for the klab sweeps and experiments.

pub mod app;
pub mod args;
pub mod commands;
pub mod manifest;
pub mod sampling;
pub mod table;

pub use app::{main_with_args, EXIT_FAILED, EXIT_OK, EXIT_USAGE};
