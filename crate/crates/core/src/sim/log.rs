use std::io::Write;

/// Column header of the trajectory CSV.
pub const CSV_HEADER: &str = "t,x,y,psi,v,theta_near,theta_far,steer_cmd,lat_err";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub v: f64,
    pub theta_near: f64,
    pub theta_far: f64,
    pub steer_cmd: f64,
    pub lat_err: f64,
}

/// One detector update in the vehicle-following experiment, paired with the
/// true body-frame bearing to the lead's center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionSample {
    pub t: f64,
    pub detected_bearing: Option<f64>,
    pub true_bearing: f64,
    pub fully_in_frame: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    pub records: Vec<StepRecord>,
    /// Record index at which each completed lap ended.
    pub lap_boundaries: Vec<usize>,
    pub detections: Vec<DetectionSample>,
}

impl TrajectoryLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn laps_completed(&self) -> usize {
        self.lap_boundaries.len()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.records {
            // `{}` prints the shortest string that round-trips the f64.
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                r.t, r.x, r.y, r.psi, r.v, r.theta_near, r.theta_far, r.steer_cmd, r.lat_err
            )?;
        }
        Ok(())
    }
}
