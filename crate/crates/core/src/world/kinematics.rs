use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

/// Wraps an angle into `(-π, π]`.
#[inline]
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, heading: f64, speed: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_angle(heading),
            speed,
        }
    }
}

/// Steering angle (rad, positive turns left) and speed command (m/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    pub steering: f64,
    pub speed: f64,
}

impl ControlInput {
    pub fn new(steering: f64, speed: f64) -> Self {
        Self { steering, speed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    pub wheelbase: f64,
    pub steer_max: f64,
    pub v_max: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            wheelbase: 0.5,
            steer_max: 0.5,
            v_max: 2.0,
        }
    }
}

impl VehicleParams {
    /// Clamps a command into the actuator limits.
    #[inline]
    pub fn clamp(&self, c: ControlInput) -> ControlInput {
        ControlInput {
            steering: c.steering.clamp(-self.steer_max, self.steer_max),
            speed: c.speed.clamp(0.0, self.v_max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stepped {
    pub state: VehicleState,
    /// The command was outside the actuator limits and got clamped.
    pub clamped: bool,
}

/// Kinematic bicycle step with explicit Euler integration.
pub fn step_vehicle(state: &VehicleState, control: ControlInput, dt: f64, params: &VehicleParams) -> Stepped {
    let c = params.clamp(control);
    let clamped = c != control;
    let v = c.speed;
    let (sin, cos) = state.heading.sin_cos();
    Stepped {
        state: VehicleState {
            x: state.x + v * cos * dt,
            y: state.y + v * sin * dt,
            heading: normalize_angle(state.heading + v / params.wheelbase * c.steering.tan() * dt),
            speed: v,
        },
        clamped,
    }
}
