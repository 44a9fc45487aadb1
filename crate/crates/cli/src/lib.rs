//! Sweep runner for the IRS-assisted SWIPT toolkit: JSON configuration,
//! the two figure presets, and CSV emission.

pub mod config;
pub mod sweep;

pub use config::{
    parse_config, parse_config_str, ConfigError, Metric, ModelFamily, Preset, SweepSpec,
};
pub use sweep::{
    read_csv, run_sweep, run_sweep_with, write_csv, AnalyticMethod, ResultRow, SweepError, HEADER,
};
