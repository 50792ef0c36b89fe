//! Scenario configuration, parameter sweeps, and CSV emission for the
//! dissemination model; the user-facing companion to `dissem-core`.

pub mod config;
pub mod presets;
pub mod scenario;

pub use config::{parse_scenario, ConfigError};
pub use presets::{describe, preset, PRESET_NAMES};
pub use scenario::{
    exit_code, fmt_value, run_scenario, to_csv, Engine, Metric, PolicyMode, RunError, Scenario,
    SweepAxis, Table,
};
