//! Experiment runner behind the `fraclap` binary: configuration, weight
//! specs, the five run modes and CSV output.

pub mod config;
pub mod runs;
pub mod table;
pub mod weight_spec;

pub use config::{Command, ConfigError, ConfigLayer, RunConfig, SGrid};
pub use runs::{run, run_branch, run_compare, run_extend, run_sweep};
pub use table::{Row, Table};
pub use weight_spec::{parse_weight, WeightSpecError};
