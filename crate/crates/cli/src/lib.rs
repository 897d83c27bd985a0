//! Command-line front end for `sdemem`: configuration files, dataset and
//! chain CSV files, and the subcommands `simulate`, `fit-pmm`, `fit-bsl`,
//! `diagnose`, `ppc` and `sim-study`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chainio;
pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod study;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult};
