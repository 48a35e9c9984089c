//! Files, parallel execution and the command-line front-end for
//! leakage-aware randomized benchmarking, built on [`leakrb_core`].
//!
//! - [`config`]: the flat JSON run configuration and its hash.
//! - [`io`]: group caches, channel files, CSV tables and manifests.
//! - [`parallel`]: thread-parallel runs, twirls, T-maps and bootstraps.
//! - [`commands`]: the `gen-group`, `run`, `fit`, `irb` and `variance`
//!   subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod parallel;

pub use error::{CliError, Result};
