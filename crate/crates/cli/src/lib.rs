//! Command-line front end for the `subquantum` laboratory: configuration,
//! scenario runs with CSV/SVG output and a manifest, and the validation
//! suite.

pub mod config;
pub mod output;
pub mod scenario;
pub mod svg;
pub mod validate;

pub use config::{ConfigError, Scenario, ScenarioConfig};
pub use scenario::{render, run_scenario, RunError};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION_FAILED: i32 = 1;
    pub const CONFIG_ERROR: i32 = 2;
    pub const RUNTIME_ERROR: i32 = 3;
}
