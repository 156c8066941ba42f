use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::controller::Controller;
use crate::error::{PerceptionError, SimError};
use crate::geometry::wrap_angle;
use crate::perception::{
    bearing_from_bbox, bounding_box_from_pose, costmap_angles, ground_truth_angles,
    render_cost_map, FeatureAngles, Visibility,
};
use crate::track::Track;
use crate::vehicle::{PidState, VehicleState};

use super::config::{Experiment, ScenarioConfig};
use super::lead::LeadScript;
use super::log::{DetectionSample, StepRecord, TrajectoryLog};
use super::metrics::{compute_metrics, Metrics};

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Completed,
    Collided,
    /// Simulated-time limit reached before the requested laps.
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub log: TrajectoryLog,
    pub metrics: Metrics,
    pub termination: Termination,
    pub start_arc: f64,
}

/// Fires once per sensor period, emulating a slower sensor with a
/// zero-order hold in between.
#[derive(Debug, Clone)]
struct SensorClock {
    rate_hz: f64,
    last_tick: Option<u64>,
}

impl SensorClock {
    fn new(rate_hz: f64) -> Self {
        Self {
            rate_hz,
            last_tick: None,
        }
    }

    fn due(&mut self, step: usize, dt: f64) -> bool {
        // Epsilon guards exact multiples that land just below an integer.
        let tick = (step as f64 * dt * self.rate_hz + 1e-9).floor() as u64;
        if self.last_tick == Some(tick) {
            false
        } else {
            self.last_tick = Some(tick);
            true
        }
    }
}

// Nearest-neighbour window for the per-step lateral error query.
const TRACKING_WINDOW: usize = 40;

/// Runs one closed-loop scenario.
///
/// A boundary collision ends the run early but is still `Ok` (see
/// [`Metrics::collided`]); failing to extract the feature angles is an
/// error.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioRun, SimError> {
    cfg.validate()?;
    let track = cfg.track.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let start_arc = match cfg.start_arc {
        Some(s) => s.rem_euclid(track.length()),
        None => rng.gen_range(0.0..track.length()),
    };
    let lead = LeadScript::new(&cfg.lead, start_arc, &mut rng);
    let camera = cfg.camera.model();

    let (p0, tangent0) = track.point_at(start_arc);
    let mut state = VehicleState::new(p0.x, p0.y, tangent0.y.atan2(tangent0.x), 0.0);
    let mut controller = Controller::new(cfg.driver, cfg.steer)?;
    let mut pid = PidState::new(cfg.pid);

    let dt = cfg.dt;
    let lap_length = track.length();
    let goal = cfg.laps as f64 * lap_length;
    let max_time = cfg
        .max_time
        .unwrap_or(2.0 * goal / cfg.v_target + 30.0);

    let mut log = TrajectoryLog::default();
    let mut hint = track.nearest_centerline_point(&state.position()).nn_index;
    let mut prev_arc = track.arc_length_at(hint);
    let mut progress = 0.0;

    let mut angles = FeatureAngles::default();
    let mut costmap_clock = SensorClock::new(cfg.perception.costmap_rate_hz);
    let mut detection_clock = SensorClock::new(cfg.perception.detection_rate_hz);
    let mut last_detection_t = 0.0;

    let mut termination = Termination::TimeLimit;
    let mut step = 0usize;
    loop {
        let t = step as f64 * dt;
        if t > max_time {
            break;
        }

        let here = track.nearest_near(&state.position(), hint, TRACKING_WINDOW);
        hint = here.nn_index;
        let arc = track.arc_length_at(hint);
        progress += wrap_arc(arc - prev_arc, lap_length);
        prev_arc = arc;
        while progress >= (log.laps_completed() + 1) as f64 * lap_length
            && log.laps_completed() < cfg.laps as usize
        {
            log.lap_boundaries.push(log.len());
        }
        if progress >= goal {
            termination = Termination::Completed;
            break;
        }

        let collided = here.signed_error.abs() > track.half_width();
        if !collided {
            let extraction = extract(
                cfg,
                &track,
                &state,
                t,
                step,
                &mut angles,
                &mut costmap_clock,
                &mut detection_clock,
                &mut last_detection_t,
                &lead,
                &camera,
                &mut log,
            );
            if let Err(source) = extraction {
                return Err(SimError::Extraction { t, source });
            }
        }

        let cmd = controller.step(angles.theta_near, angles.theta_far)?;
        let accel = pid.step(cfg.v_target, state.v, dt);
        log.records.push(StepRecord {
            t,
            x: state.x,
            y: state.y,
            psi: state.psi,
            v: state.v,
            theta_near: angles.theta_near,
            theta_far: angles.theta_far,
            steer_cmd: cmd.steer_angle,
            lat_err: here.signed_error,
        });
        if collided {
            termination = Termination::Collided;
            break;
        }

        let sub_dt = dt / cfg.plant_substeps as f64;
        for _ in 0..cfg.plant_substeps {
            state = state.step(cmd.steer_angle, accel, sub_dt, cfg.vehicle.wheelbase)?;
        }
        step += 1;
    }

    let mut metrics = compute_metrics(&log)?;
    metrics.collided = termination == Termination::Collided;
    Ok(ScenarioRun {
        log,
        metrics,
        termination,
        start_arc,
    })
}

#[allow(clippy::too_many_arguments)]
fn extract(
    cfg: &ScenarioConfig,
    track: &Track,
    state: &VehicleState,
    t: f64,
    step: usize,
    angles: &mut FeatureAngles,
    costmap_clock: &mut SensorClock,
    detection_clock: &mut SensorClock,
    last_detection_t: &mut f64,
    lead: &LeadScript,
    camera: &crate::perception::CameraModel,
    log: &mut TrajectoryLog,
) -> Result<(), PerceptionError> {
    let p = &cfg.perception;
    match cfg.experiment {
        Experiment::Baseline => {
            *angles = ground_truth_angles(track, state, p.l_near, p.l_far)?;
        }
        Experiment::Costmap => {
            if costmap_clock.due(step, cfg.dt) {
                let grid = render_cost_map(track, state);
                *angles = costmap_angles(&grid, p.near_rows, p.far_rows)?;
            }
        }
        Experiment::VehicleFollow => {
            if costmap_clock.due(step, cfg.dt) {
                let grid = render_cost_map(track, state);
                angles.theta_near = costmap_angles(&grid, p.near_rows, p.far_rows)?.theta_near;
            }
            if detection_clock.due(step, cfg.dt) {
                let lead_pose = lead.pose(track, t);
                let visibility = bounding_box_from_pose(camera, state, &lead_pose, cfg.lead.dims);
                let rel = lead_pose.position() - state.position();
                let true_bearing = wrap_angle(rel.y.atan2(rel.x) - state.psi);
                let detected = visibility.bbox().map(|b| bearing_from_bbox(&b, camera));
                log.detections.push(DetectionSample {
                    t,
                    detected_bearing: detected,
                    true_bearing,
                    fully_in_frame: matches!(visibility, Visibility::Visible { truncated: false, .. }),
                });
                match detected {
                    Some(theta) => {
                        angles.theta_far = theta;
                        *last_detection_t = t;
                    }
                    None if t - *last_detection_t > p.dropout_timeout => {
                        return Err(PerceptionError::LeadLost {
                            elapsed: t - *last_detection_t,
                        });
                    }
                    None => {}
                }
            }
        }
    }
    Ok(())
}

fn wrap_arc(ds: f64, length: f64) -> f64 {
    let w = ds.rem_euclid(length);
    if w > length / 2.0 {
        w - length
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sensor_clock_rates() {
        let mut every = SensorClock::new(100.0);
        assert!((0..100).all(|k| every.due(k, 0.01)));
        let mut forty = SensorClock::new(40.0);
        let fired = (0..100).filter(|&k| forty.due(k, 0.01)).count();
        assert_eq!(fired, 40);
        let mut thirteen = SensorClock::new(13.0);
        let fired = (0..100).filter(|&k| thirteen.due(k, 0.01)).count();
        assert_eq!(fired, 13);
    }

    #[test]
    fn arc_wrap_is_signed_and_short() {
        assert!((wrap_arc(0.04, 70.0) - 0.04).abs() < 1e-12);
        assert!((wrap_arc(-69.96, 70.0) - 0.04).abs() < 1e-9);
        assert!((wrap_arc(69.96, 70.0) + 0.04).abs() < 1e-9);
    }
}
