//! Configuration-driven experiment runner for preamble schedule design.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod output;
pub mod validate;

pub use config::{ConfigError, ExperimentConfig};
pub use experiments::{run, write, Experiment, Outputs};
pub use validate::{validate, Problem, Report, Severity};
