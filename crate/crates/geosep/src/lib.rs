//! Command line, file formats and configuration around `geosep-core`.
//!
//! * [`io`]: PNG / PGM in, 16-bit PNG out.
//! * [`config`]: the flat TOML run configuration.
//! * [`report`]: CSV tables.
//! * [`plot`]: a minimal line-plot renderer.
//! * [`cli`]: the `geosep` subcommands.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod plot;
pub mod report;

pub use error::{CliError, Result};
