//! Two-point visual driver model (TPVDCM) steering controller and a
//! closed-loop lane-keeping simulator built around it.
//!
//! The crate is organised bottom-up:
//!
//! * [`controller`] turns the near/far visual angles into a steering command.
//! * [`track`] holds the oval centerline and lateral-error queries.
//! * [`vehicle`] is the kinematic bicycle plant plus the speed PID.
//! * [`perception`] extracts `(theta_near, theta_far)` from ground truth, a
//!   top-down cost map, or a projected lead-vehicle bounding box.
//! * [`sim`] wires everything into the centerline-following and
//!   vehicle-following experiments and computes lateral-error metrics.
//! * [`cli`] parses scenario files and drives runs from the command line.

pub mod cli;
pub mod controller;
pub mod error;
pub mod geometry;
pub mod perception;
pub mod sim;
pub mod track;
pub mod vehicle;

pub use controller::{Controller, DriverParams, SteerCommand, SteerMapping};
pub use error::{ConfigError, ControllerError, PerceptionError, SimError, TrackError};
pub use perception::{BoundingBox, CameraModel, CostMapGrid, FeatureAngles};
pub use sim::{Experiment, Metrics, ScenarioConfig, TrajectoryLog};
pub use track::{LateralSample, Track};
pub use vehicle::{PidState, VehicleState};
