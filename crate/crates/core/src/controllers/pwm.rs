use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric actuator bound on the control action.
pub const PWM_LIMIT: f64 = 255.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlAction {
    pub u: f64,
    pub u_sat: f64,
    pub pwm_magnitude: u8,
    pub direction: Direction,
}

/// Clamps to [-255, 255] and splits into an unsigned PWM duty and a
/// direction bit. Rounds half away from zero.
pub fn saturate_to_pwm(u: f64) -> Result<ControlAction> {
    if !u.is_finite() {
        return Err(Error::NonFiniteControl(u));
    }
    let u_sat = u.clamp(-PWM_LIMIT, PWM_LIMIT);
    Ok(ControlAction {
        u,
        u_sat,
        pwm_magnitude: u_sat.abs().round() as u8,
        direction: if u_sat < 0.0 {
            Direction::Reverse
        } else {
            Direction::Forward
        },
    })
}
