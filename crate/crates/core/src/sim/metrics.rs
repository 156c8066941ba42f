use std::fmt::Write as _;

use crate::error::SimError;

use super::log::TrajectoryLog;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub mean_abs_lat_err: f64,
    /// Population standard deviation of `|lat_err|`.
    pub std_lat_err: f64,
    pub collided: bool,
    pub laps_completed: usize,
}

impl Metrics {
    /// Flat `key=value` block, one key per line.
    pub fn to_key_value(&self, seed: u64) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mean_abs_lat_err={}", self.mean_abs_lat_err);
        let _ = writeln!(out, "std_lat_err={}", self.std_lat_err);
        let _ = writeln!(out, "laps_completed={}", self.laps_completed);
        let _ = writeln!(out, "collided={}", self.collided);
        let _ = writeln!(out, "seed={seed}");
        out
    }
}

/// Lateral-error statistics over every logged step. `collided` is left false;
/// the runner sets it.
pub fn compute_metrics(log: &TrajectoryLog) -> Result<Metrics, SimError> {
    if log.is_empty() {
        return Err(SimError::EmptyLog);
    }
    let n = log.len() as f64;
    let mean = log.records.iter().map(|r| r.lat_err.abs()).sum::<f64>() / n;
    let var = log
        .records
        .iter()
        .map(|r| (r.lat_err.abs() - mean).powi(2))
        .sum::<f64>()
        / n;
    Ok(Metrics {
        mean_abs_lat_err: mean,
        std_lat_err: var.sqrt(),
        collided: false,
        laps_completed: log.laps_completed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::log::StepRecord;

    fn log_of(errs: &[f64]) -> TrajectoryLog {
        TrajectoryLog {
            records: errs
                .iter()
                .enumerate()
                .map(|(k, &e)| StepRecord {
                    t: k as f64 * 0.01,
                    x: 0.0,
                    y: 0.0,
                    psi: 0.0,
                    v: 0.0,
                    theta_near: 0.0,
                    theta_far: 0.0,
                    steer_cmd: 0.0,
                    lat_err: e,
                })
                .collect(),
            ..Default::default()
        }
    }

    #[test]
    fn constant_error() {
        let m = compute_metrics(&log_of(&[0.3; 10])).unwrap();
        assert!((m.mean_abs_lat_err - 0.3).abs() < 1e-15);
        assert!(m.std_lat_err < 1e-15);
    }

    #[test]
    fn absolute_value_taken_first() {
        let m = compute_metrics(&log_of(&[0.2, -0.2, 0.2, -0.2])).unwrap();
        assert!((m.mean_abs_lat_err - 0.2).abs() < 1e-15);
        assert!(m.std_lat_err < 1e-15);
    }

    #[test]
    fn two_point_spread() {
        let m = compute_metrics(&log_of(&[0.0, 0.4])).unwrap();
        assert!((m.mean_abs_lat_err - 0.2).abs() < 1e-15);
        assert!((m.std_lat_err - 0.2).abs() < 1e-15);
    }

    #[test]
    fn empty_log_rejected() {
        assert_eq!(compute_metrics(&TrajectoryLog::default()), Err(SimError::EmptyLog));
    }

    #[test]
    fn key_value_block() {
        let m = Metrics {
            mean_abs_lat_err: 0.25,
            std_lat_err: 0.5,
            collided: false,
            laps_completed: 5,
        };
        assert_eq!(
            m.to_key_value(7),
            "mean_abs_lat_err=0.25\nstd_lat_err=0.5\nlaps_completed=5\ncollided=false\nseed=7\n"
        );
    }
}
