//! Closed-loop scenario engine, telemetry and controller comparison.

pub mod compare;
pub mod engine;
pub mod mass;
pub mod scenario;
pub mod telemetry;

pub use compare::{compare_controllers, ComparisonReport, ComparisonRow};
pub use engine::{run_closed_loop, Engine, RunResult, SETTLING_BAND_PCT};
pub use mass::apply_mass_uncertainty;
pub use scenario::{Disturbance, Scenario};
pub use telemetry::{format_g9, write_csv, TelemetryRecord, CSV_HEADER};
