//! Command-line front end: state files, reports, lattice dumps.

pub mod commands;
pub mod files;
pub mod json;
pub mod lattice;

pub use commands::{run, Cli};
