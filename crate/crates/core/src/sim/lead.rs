//! Scripted lead vehicle: constant arc-length speed along the centerline
//! plus a smooth, lap-periodic lateral wander drawn from the seed.

use std::f64::consts::TAU;

use nalgebra::Vector2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::track::Track;
use crate::vehicle::VehicleState;

use super::config::LeadParams;

const HARMONICS: usize = 3;
/// Highest number of wander cycles per lap.
const MAX_CYCLES_PER_LAP: u32 = 5;

#[derive(Debug, Clone, PartialEq)]
struct Harmonic {
    amplitude: f64,
    cycles_per_lap: u32,
    phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeadScript {
    speed: f64,
    start_arc: f64,
    harmonics: Vec<Harmonic>,
}

impl LeadScript {
    /// The sum of harmonic amplitudes equals `params.amplitude`, which bounds
    /// the lateral offset.
    pub fn new(params: &LeadParams, start_arc: f64, rng: &mut ChaCha8Rng) -> Self {
        let weights: Vec<f64> = (0..HARMONICS).map(|_| rng.gen_range(0.2..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let harmonics = weights
            .into_iter()
            .map(|w| Harmonic {
                amplitude: params.amplitude * w / total,
                cycles_per_lap: rng.gen_range(1..=MAX_CYCLES_PER_LAP),
                phase: rng.gen_range(0.0..TAU),
            })
            .collect();
        Self {
            speed: params.speed,
            start_arc: start_arc + params.gap,
            harmonics,
        }
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    /// Lap time at the scripted speed.
    pub fn lap_time(&self, track: &Track) -> f64 {
        track.length() / self.speed
    }

    fn arc_at(&self, t: f64) -> f64 {
        self.start_arc + self.speed * t
    }

    /// Signed lateral offset (left positive) and its arc-length derivative.
    fn offset(&self, track: &Track, s: f64) -> (f64, f64) {
        let k = TAU / track.length();
        self.harmonics.iter().fold((0.0, 0.0), |(o, d), h| {
            let w = k * h.cycles_per_lap as f64;
            let arg = w * s + h.phase;
            (o + h.amplitude * arg.sin(), d + h.amplitude * w * arg.cos())
        })
    }

    /// Lateral offset from the centerline at time `t`.
    pub fn lateral_offset(&self, track: &Track, t: f64) -> f64 {
        self.offset(track, self.arc_at(t).rem_euclid(track.length())).0
    }

    /// Lead pose at time `t` (seconds since the scenario started).
    pub fn pose(&self, track: &Track, t: f64) -> VehicleState {
        let s = self.arc_at(t).rem_euclid(track.length());
        let (p, tangent) = track.point_at(s);
        let normal = Vector2::new(-tangent.y, tangent.x);
        let (off, slope) = self.offset(track, s);
        let pos = p + normal * off;
        let heading = tangent.y.atan2(tangent.x) + slope.atan();
        VehicleState::new(pos.x, pos.y, heading, self.speed)
    }
}

/// Lead pose at `t` for `script` on `track`.
pub fn lead_vehicle_step(script: &LeadScript, track: &Track, t: f64) -> VehicleState {
    script.pose(track, t)
}
