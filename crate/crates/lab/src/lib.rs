//! Experiment harness for the zero-temperature Edwards–Anderson spin glass:
//! configuration, record files, Monte Carlo experiments and verification
//! suites on top of `ea-core`.

mod error;

pub mod cli;
pub mod config;
pub mod experiments;
pub mod instances;
pub mod io;
pub mod record;
pub mod stats;
pub mod verify;

pub use error::{LabError, Result};
