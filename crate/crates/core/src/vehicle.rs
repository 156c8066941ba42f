//! Kinematic bicycle plant and longitudinal speed PID.

use crate::error::SimError;
use crate::geometry::{wrap_angle, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Heading, CCW from +x, wrapped to `(-pi, pi]`.
    pub psi: f64,
    /// Forward speed, never negative.
    pub v: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, psi: f64, v: f64) -> Self {
        Self {
            x,
            y,
            psi: wrap_angle(psi),
            v: v.max(0.0),
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    /// One forward-Euler step of the kinematic bicycle.
    pub fn step(&self, steer: f64, accel: f64, dt: f64, wheelbase: f64) -> Result<Self, SimError> {
        let inputs = [self.x, self.y, self.psi, self.v, steer, accel, dt, wheelbase];
        if inputs.iter().any(|v| !v.is_finite()) {
            return Err(SimError::InvalidConfig(format!(
                "non-finite plant input: state={self:?} steer={steer} accel={accel} dt={dt} wheelbase={wheelbase}"
            )));
        }
        if dt <= 0.0 || wheelbase <= 0.0 {
            return Err(SimError::InvalidConfig(format!(
                "plant needs dt > 0 and wheelbase > 0 (dt={dt}, wheelbase={wheelbase})"
            )));
        }
        let (sin, cos) = self.psi.sin_cos();
        Ok(Self {
            x: self.x + self.v * cos * dt,
            y: self.y + self.v * sin * dt,
            psi: wrap_angle(self.psi + self.v / wheelbase * steer.tan() * dt),
            v: (self.v + accel * dt).max(0.0),
        })
    }
}

/// Physical parameters of the simulated car.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleParams {
    pub wheelbase: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self { wheelbase: 0.57 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Integrator clamp (anti-windup).
    pub integ_max: f64,
    /// Output clamp [m/s^2].
    pub a_max: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        Self {
            kp: 4.0,
            ki: 0.5,
            kd: 0.0,
            integ_max: 1.0,
            a_max: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidState {
    pub gains: PidGains,
    pub integ: f64,
    pub prev_err: f64,
}

impl PidState {
    pub fn new(gains: PidGains) -> Self {
        Self {
            gains,
            integ: 0.0,
            prev_err: 0.0,
        }
    }

    /// Returns the commanded acceleration.
    ///
    /// Anti-windup: the integrator is clamped to `±integ_max` and frozen
    /// while the output is saturated in the direction of the error.
    pub fn step(&mut self, v_target: f64, v: f64, dt: f64) -> f64 {
        let g = &self.gains;
        let err = v_target - v;
        let deriv = (err - self.prev_err) / dt;
        self.prev_err = err;
        let candidate = (self.integ + err * dt).clamp(-g.integ_max, g.integ_max);
        let raw = g.kp * err + g.ki * candidate + g.kd * deriv;
        if raw.abs() <= g.a_max || raw * err <= 0.0 {
            self.integ = candidate;
        }
        (g.kp * err + g.ki * self.integ + g.kd * deriv).clamp(-g.a_max, g.a_max)
    }
}
