//! Scenario files, the task pipeline and report emission.

mod config;
mod report;
mod run;

pub use config::{
    parse_angle, parse_scenario, parse_scenario_str, AmplitudeSpec, ScenarioConfig, Task,
    Tolerances, DEFAULT_TIMEOUT_SECS, INPUT_UNITARY_TOL, SCHEMA_VERSION,
};
pub use report::{
    emit, from_structured, to_structured, to_text, Check, Format, NamedValue, Report,
    ScenarioSummary, Status, TaskReport, Value, REPORT_SCHEMA, REPORT_VERSION,
};
pub use run::{error_exit_code, exit_code, run, run_task};
