//! Scenario files, the closed-loop runner, telemetry and batch statistics.

pub mod batch;
pub mod checks;
pub mod plot;
pub mod run;
pub mod scenario;
pub mod suite;
pub mod telemetry;

pub use batch::{mean_and_std, run_batch, summarize, BatchSummary, Summary, SummaryRow};
pub use plot::write_plot;
pub use run::{initial_world, run_scenario, run_scenario_traced, Outcome, RunRecord, TelemetryRow, TickTrace};
pub use scenario::{load_scenario, parse_scenario, Scenario, SimConfig, StartPose, CONFIG_ENV};
pub use telemetry::{export_timeseries, read_csv, Format};
