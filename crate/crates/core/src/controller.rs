//! Discrete two-point visual driver model.
//!
//! Channel structure, with kinesthetic feedback removed:
//!
//! ```text
//! theta_far  --> K_a --------------------------------+ T_ant
//!                                                    (+)--> 1/(T_N s + 1) --> T_dr
//! theta_near --> delay(T_P) --> K_c (T_L s + 1)/(T_I s + 1) + T_com
//! ```
//!
//! The rational filters are discretized with the bilinear (Tustin) transform
//! and the processing delay is a sample FIFO of `round(T_P / dt)` entries.

use std::collections::VecDeque;
use std::f64::consts::PI;

use crate::error::ControllerError;

/// Driver-model constants. Defaults are the values used on the real vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverParams {
    /// Neuromuscular lag time constant [s].
    pub t_n: f64,
    /// Processing (transport) delay [s].
    pub t_p: f64,
    /// Anticipatory gain on `theta_far`.
    pub k_a: f64,
    /// Compensatory gain on `theta_near`.
    pub k_c: f64,
    /// Lead time constant of the compensatory channel [s].
    pub t_l: f64,
    /// Lag time constant of the compensatory channel [s].
    pub t_i: f64,
    /// Controller step [s].
    pub dt: f64,
}

impl Default for DriverParams {
    fn default() -> Self {
        Self {
            t_n: 0.12,
            t_p: 0.06,
            k_a: 30.0,
            k_c: 10.0,
            t_l: 2.8,
            t_i: 0.18,
            dt: 0.01,
        }
    }
}

impl DriverParams {
    pub fn validate(&self) -> Result<(), ControllerError> {
        let positive = [
            ("T_N", self.t_n),
            ("T_L", self.t_l),
            ("T_I", self.t_i),
            ("dt", self.dt),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ControllerError::InvalidParam {
                    name,
                    value,
                    reason: "must be finite and > 0",
                });
            }
        }
        if !(self.t_p.is_finite() && self.t_p >= 0.0) {
            return Err(ControllerError::InvalidParam {
                name: "T_P",
                value: self.t_p,
                reason: "must be finite and >= 0",
            });
        }
        for (name, value) in [("K_a", self.k_a), ("K_c", self.k_c)] {
            if !value.is_finite() {
                return Err(ControllerError::InvalidParam {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
        }
        if self.dt > self.t_n / 10.0 {
            return Err(ControllerError::InvalidParam {
                name: "dt",
                value: self.dt,
                reason: "must be <= T_N/10",
            });
        }
        Ok(())
    }

    /// Length of the processing-delay FIFO.
    pub fn delay_steps(&self) -> usize {
        (self.t_p / self.dt).round() as usize
    }
}

/// Maps the dimensionless driver torque onto a road-wheel angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteerMapping {
    /// rad per torque unit.
    pub gain: f64,
    /// Saturation limit [rad].
    pub max_angle: f64,
}

impl Default for SteerMapping {
    fn default() -> Self {
        Self {
            gain: 0.05,
            max_angle: 0.35,
        }
    }
}

impl SteerMapping {
    pub fn validate(&self) -> Result<(), ControllerError> {
        if !self.gain.is_finite() {
            return Err(ControllerError::InvalidParam {
                name: "steer_gain",
                value: self.gain,
                reason: "must be finite",
            });
        }
        if !(self.max_angle.is_finite() && self.max_angle > 0.0 && self.max_angle < PI / 2.0) {
            return Err(ControllerError::InvalidParam {
                name: "delta_max",
                value: self.max_angle,
                reason: "must be in (0, pi/2)",
            });
        }
        Ok(())
    }

    pub fn apply(&self, torque: f64) -> f64 {
        (self.gain * torque).clamp(-self.max_angle, self.max_angle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteerCommand {
    /// Driver torque `T_dr` before the steering map.
    pub torque: f64,
    /// Saturated road-wheel angle [rad].
    pub steer_angle: f64,
}

/// First-order section `(b0 + b1 z^-1) / (1 + a1 z^-1)` in transposed
/// direct form II, so the whole history is one memory cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FirstOrderSection {
    b0: f64,
    b1: f64,
    a1: f64,
    mem: f64,
}

impl FirstOrderSection {
    /// Tustin discretization of `gain * (num_tc s + 1) / (den_tc s + 1)`.
    pub(crate) fn tustin(gain: f64, num_tc: f64, den_tc: f64, dt: f64) -> Self {
        let n = 2.0 * num_tc / dt;
        let d = 2.0 * den_tc / dt;
        Self {
            b0: gain * (n + 1.0) / (d + 1.0),
            b1: gain * (1.0 - n) / (d + 1.0),
            a1: (1.0 - d) / (1.0 + d),
            mem: 0.0,
        }
    }

    pub(crate) fn step(&mut self, u: f64) -> f64 {
        let y = self.b0 * u + self.mem;
        self.mem = self.b1 * u - self.a1 * y;
        y
    }

    pub(crate) fn reset(&mut self) {
        self.mem = 0.0;
    }
}

/// Controller state: filter memories and the processing-delay line.
#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    params: DriverParams,
    mapping: SteerMapping,
    lead_lag: FirstOrderSection,
    neuromuscular: FirstOrderSection,
    delay: VecDeque<f64>,
    last_torque: f64,
}

impl Controller {
    pub fn new(params: DriverParams, mapping: SteerMapping) -> Result<Self, ControllerError> {
        params.validate()?;
        mapping.validate()?;
        Ok(Self {
            params,
            mapping,
            lead_lag: FirstOrderSection::tustin(params.k_c, params.t_l, params.t_i, params.dt),
            neuromuscular: FirstOrderSection::tustin(1.0, 0.0, params.t_n, params.dt),
            delay: std::iter::repeat_n(0.0, params.delay_steps()).collect(),
            last_torque: 0.0,
        })
    }

    pub fn params(&self) -> &DriverParams {
        &self.params
    }

    pub fn mapping(&self) -> &SteerMapping {
        &self.mapping
    }

    pub fn delay_len(&self) -> usize {
        self.delay.len()
    }

    pub fn last_torque(&self) -> f64 {
        self.last_torque
    }

    /// Advances the model by one `dt`.
    ///
    /// Inputs must be finite and within `[-pi, pi]`; on error the state is
    /// untouched.
    pub fn step(&mut self, theta_near: f64, theta_far: f64) -> Result<SteerCommand, ControllerError> {
        if !theta_near.is_finite() || !theta_far.is_finite() {
            return Err(ControllerError::NonFiniteInput {
                theta_near,
                theta_far,
            });
        }
        for theta in [theta_near, theta_far] {
            if theta.abs() > PI {
                return Err(ControllerError::InputOutOfRange(theta));
            }
        }

        let anticipatory = self.params.k_a * theta_far;
        let delayed_near = if self.delay.is_empty() {
            theta_near
        } else {
            self.delay.push_back(theta_near);
            self.delay.pop_front().unwrap_or_default()
        };
        let compensatory = self.lead_lag.step(delayed_near);
        let torque = self.neuromuscular.step(anticipatory + compensatory);
        self.last_torque = torque;

        Ok(SteerCommand {
            torque,
            steer_angle: self.mapping.apply(torque),
        })
    }

    /// Returns the controller to rest, keeping its parameters.
    pub fn reset(&mut self) {
        self.lead_lag.reset();
        self.neuromuscular.reset();
        self.delay.iter_mut().for_each(|v| *v = 0.0);
        self.last_torque = 0.0;
    }
}
