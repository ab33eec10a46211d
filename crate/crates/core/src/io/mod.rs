//! Scenario files, report writers and the embedded reference tables.

pub mod golden;
mod report;
mod scenario_file;

pub use golden::{golden_tables, GoldenKind, GoldenTable, GoldenValue, Quantity};
pub use report::{read_report, render, sig6, write_report, Format, Report, ReportDocument, REPORT_SCHEMA_VERSION};
pub use scenario_file::{load_scenario, parse_scenario, LoadedScenario, SimSettings, SCENARIO_SCHEMA_VERSION};
