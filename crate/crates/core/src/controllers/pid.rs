use serde::{Deserialize, Serialize};

use super::pwm::PWM_LIMIT;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl PidGains {
    pub fn new(kp: f64, ki: f64, kd: f64) -> Self {
        PidGains { kp, ki, kd }
    }

    /// Gains used for the balancing experiments.
    pub fn reference() -> Self {
        PidGains::new(10.0, 0.005, 0.015)
    }
}

/// Integrator and error memory shared by the PID and fuzzy controllers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PidState {
    pub integral: f64,
    pub prev_error: f64,
}

impl PidState {
    /// Trapezoidal update of the error integral, clamped so that
    /// `ki * integral` stays within the actuator range.
    pub(crate) fn advance(&self, ki: f64, error: f64, dt: f64) -> PidState {
        let mut integral = self.integral + 0.5 * (error + self.prev_error) * dt;
        if ki != 0.0 {
            let limit = PWM_LIMIT / ki.abs();
            integral = integral.clamp(-limit, limit);
        }
        PidState {
            integral,
            prev_error: error,
        }
    }
}

/// One PID update with derivative on error and a clamped integrator.
pub fn pid_step(gains: &PidGains, st: &PidState, error: f64, dt: f64) -> (f64, PidState) {
    let next = st.advance(gains.ki, error, dt);
    let derivative = (error - st.prev_error) / dt;
    let u = gains.kp * error + gains.ki * next.integral + gains.kd * derivative;
    (u, next)
}
