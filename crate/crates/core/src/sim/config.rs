use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::controller::{DriverParams, SteerMapping};
use crate::error::SimError;
use crate::perception::{
    CameraModel, DEFAULT_FOV_DEG, DEFAULT_IMAGE_SIZE, DEFAULT_MOUNT_HEIGHT, FAR_DISTANCE, FAR_ROWS,
    NEAR_DISTANCE, NEAR_ROWS,
};
use crate::track::Track;
use crate::vehicle::{PidGains, VehicleParams};

/// Which feature-input pipeline feeds the controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    /// Both angles from pose and the recorded centerline.
    Baseline,
    /// Both angles from the top-down cost map.
    Costmap,
    /// `theta_near` from the cost map, `theta_far` from the lead vehicle's
    /// bounding box.
    VehicleFollow,
}

impl Experiment {
    pub const ALL: [Experiment; 3] = [
        Experiment::Baseline,
        Experiment::Costmap,
        Experiment::VehicleFollow,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Baseline => "baseline",
            Experiment::Costmap => "costmap",
            Experiment::VehicleFollow => "vehicle_follow",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Experiment::Baseline),
            "costmap" => Ok(Experiment::Costmap),
            "vehicle_follow" => Ok(Experiment::VehicleFollow),
            other => Err(format!(
                "unknown experiment `{other}` (expected baseline, costmap or vehicle_follow)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackParams {
    pub outer_diameter: f64,
    pub aspect_ratio: f64,
    pub half_width: f64,
    pub spacing: f64,
    /// Load the centerline from an `x,y` CSV instead of building the oval.
    pub centerline_csv: Option<PathBuf>,
}

impl Default for TrackParams {
    fn default() -> Self {
        Self {
            outer_diameter: 30.0,
            aspect_ratio: 0.75,
            half_width: 1.5,
            spacing: 0.05,
            centerline_csv: None,
        }
    }
}

impl TrackParams {
    pub fn build(&self) -> Result<Track, SimError> {
        match &self.centerline_csv {
            None => Ok(Track::build_oval(
                self.outer_diameter,
                self.aspect_ratio,
                self.half_width,
                self.spacing,
            )?),
            Some(path) => {
                let file = std::fs::File::open(path).map_err(|e| {
                    SimError::InvalidConfig(format!("cannot open {}: {e}", path.display()))
                })?;
                Ok(Track::read_csv(std::io::BufReader::new(file), self.half_width)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerceptionParams {
    /// Near probe distance for ground-truth extraction [m].
    pub l_near: f64,
    /// Far probe distance for ground-truth extraction [m].
    pub l_far: f64,
    pub near_rows: usize,
    pub far_rows: usize,
    /// Cost-map update rate; zero-order hold between updates.
    pub costmap_rate_hz: f64,
    /// Detector update rate; zero-order hold between updates.
    pub detection_rate_hz: f64,
    /// How long the last detection may be held while the lead is not visible.
    pub dropout_timeout: f64,
}

impl Default for PerceptionParams {
    fn default() -> Self {
        Self {
            l_near: NEAR_DISTANCE,
            l_far: FAR_DISTANCE,
            near_rows: NEAR_ROWS,
            far_rows: FAR_ROWS,
            costmap_rate_hz: 40.0,
            detection_rate_hz: 13.0,
            dropout_timeout: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraParams {
    pub fov_deg: f64,
    pub width: u32,
    pub height: u32,
    pub mount_height: f64,
}

impl Default for CameraParams {
    fn default() -> Self {
        Self {
            fov_deg: DEFAULT_FOV_DEG,
            width: DEFAULT_IMAGE_SIZE,
            height: DEFAULT_IMAGE_SIZE,
            mount_height: DEFAULT_MOUNT_HEIGHT,
        }
    }
}

impl CameraParams {
    pub fn model(&self) -> CameraModel {
        CameraModel::from_fov(
            self.width,
            self.height,
            self.fov_deg.to_radians(),
            self.mount_height,
        )
    }
}

/// Scripted lead vehicle for the vehicle-following experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadParams {
    /// Arc-length speed along the centerline [m/s].
    pub speed: f64,
    /// Initial arc-length lead over the controlled vehicle [m].
    pub gap: f64,
    /// Bound on the seeded lateral wander [m].
    pub amplitude: f64,
    /// Box dimensions (length, width, height) [m].
    pub dims: (f64, f64, f64),
}

impl Default for LeadParams {
    fn default() -> Self {
        Self {
            speed: 4.0,
            gap: 5.0,
            amplitude: 0.4,
            dims: (1.0, 0.6, 0.4),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub experiment: Experiment,
    pub laps: u32,
    pub v_target: f64,
    /// Controller step [s]; also the logging step.
    pub dt: f64,
    /// Plant Euler substeps per controller step.
    pub plant_substeps: u32,
    /// Starting arc length on the centerline; drawn from the seed when unset.
    pub start_arc: Option<f64>,
    /// Hard stop on simulated time; derived from the lap count when unset.
    pub max_time: Option<f64>,
    pub driver: DriverParams,
    pub steer: SteerMapping,
    pub track: TrackParams,
    pub vehicle: VehicleParams,
    pub pid: PidGains,
    pub perception: PerceptionParams,
    pub camera: CameraParams,
    pub lead: LeadParams,
    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Baseline,
            laps: 5,
            v_target: 4.0,
            dt: 0.01,
            plant_substeps: 1,
            start_arc: None,
            max_time: None,
            driver: DriverParams::default(),
            steer: SteerMapping::default(),
            track: TrackParams::default(),
            vehicle: VehicleParams::default(),
            pid: PidGains::default(),
            perception: PerceptionParams::default(),
            camera: CameraParams::default(),
            lead: LeadParams::default(),
            rng_seed: 0,
        }
    }
}

impl ScenarioConfig {
    /// Cross-field checks that the individual constructors don't cover.
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        if self.laps < 1 {
            return bad("laps must be >= 1".into());
        }
        if !(self.v_target.is_finite() && self.v_target > 0.0) {
            return bad(format!("v_target must be > 0, got {}", self.v_target));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if self.driver.dt != self.dt {
            return bad(format!(
                "controller dt {} differs from simulation dt {}",
                self.driver.dt, self.dt
            ));
        }
        if self.plant_substeps < 1 {
            return bad("plant_substeps must be >= 1".into());
        }
        if !(self.vehicle.wheelbase.is_finite() && self.vehicle.wheelbase > 0.0) {
            return bad(format!("wheelbase must be > 0, got {}", self.vehicle.wheelbase));
        }
        let p = &self.perception;
        if !(p.l_near > 0.0 && p.l_far > p.l_near) {
            return bad(format!("need 0 < l_near < l_far, got {} and {}", p.l_near, p.l_far));
        }
        if p.costmap_rate_hz <= 0.0 || p.detection_rate_hz <= 0.0 || p.dropout_timeout < 0.0 {
            return bad("sensor rates must be > 0 and dropout_timeout >= 0".into());
        }
        let c = &self.camera;
        if !(c.fov_deg > 0.0 && c.fov_deg < 180.0) || c.width == 0 || c.height == 0 {
            return bad("camera needs 0 < fov_deg < 180 and a non-empty image".into());
        }
        let l = &self.lead;
        if !(l.speed > 0.0 && l.amplitude >= 0.0 && l.dims.0 > 0.0 && l.dims.1 > 0.0 && l.dims.2 > 0.0) {
            return bad("lead needs speed > 0, amplitude >= 0 and positive dimensions".into());
        }
        if let Some(max_time) = self.max_time {
            if max_time.is_nan() || max_time <= 0.0 {
                return bad(format!("max_time must be > 0, got {max_time}"));
            }
        }
        let g = &self.pid;
        if g.a_max <= 0.0 || g.integ_max < 0.0 {
            return bad("pid needs a_max > 0 and integ_max >= 0".into());
        }
        self.driver.validate()?;
        self.steer.validate()?;
        Ok(())
    }
}
