//! Config-driven experiment runner: structured-text configs, figure
//! recipes, sweep orchestration over thresholds / bias / density, and CSV
//! plus plot-data emission.

pub mod config;
pub mod emit;
pub mod presets;
pub mod recipes;
pub mod runner;
pub mod table;
pub mod units;

pub use config::{
    load_config, parse_config, CaseSpec, ConfigError, ExperimentConfig, McSettings, Metric,
    Overrides, Sweep, SweepVariable, WalkerSettings,
};
pub use runner::{run_experiment, CaseResult, RunMeta};
pub use table::{ResultRow, ResultTable};
