//! Scenario files, batch execution and tabular output for the command-line tool.

pub mod config;
pub mod expr;
pub mod scenario;
pub mod table;

pub use config::{parse_config, ConfigError, Mode, ScenarioConfig};
pub use scenario::{run_scenario, run_sweep, ScenarioOutput, Summary};
pub use table::{emit_table, TableRow, HEADER};
