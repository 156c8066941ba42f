//! Closed-loop scenario runner for the centerline-following and
//! vehicle-following experiments.

mod config;
mod lead;
mod log;
mod metrics;
mod runner;

pub use config::{
    CameraParams, Experiment, LeadParams, PerceptionParams, ScenarioConfig, TrackParams,
};
pub use lead::{lead_vehicle_step, LeadScript};
pub use log::{DetectionSample, StepRecord, TrajectoryLog, CSV_HEADER};
pub use metrics::{compute_metrics, Metrics};
pub use runner::{run_scenario, ScenarioRun, Termination};
