//! Configuration, result persistence, SVG charts and the command line for
//! the experiments in `inflation-core`.

// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod plot;
pub mod run;
pub mod store;

pub use config::{parse_config, parse_str, ConfigError, Experiment, RunConfig};
pub use run::{rerender, run, RunError, RunOutcome};
pub use store::{Manifest, ResultStore};
