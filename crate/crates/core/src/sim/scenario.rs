use serde::{Deserialize, Serialize};

use crate::controllers::{ControllerConfig, ControllerKind, PWM_LIMIT};
use crate::error::{Error, Result};
use crate::plant::{PlantState, RobotParams};
use crate::sensors::ImuConfig;

pub const DEFAULT_DURATION: f64 = 30.0;
pub const DEFAULT_CONTROL_RATE: f64 = 200.0;
pub const DEFAULT_SUBSTEPS: u32 = 10;
pub const DEFAULT_FILTER_WEIGHT: f64 = 0.98;
pub const DEFAULT_INITIAL_TILT: f64 = 0.1;
pub const DEFAULT_MOUNT_HEIGHT: f64 = 0.04;
/// Per-wheel torque at full PWM [N m].
pub const DEFAULT_TAU_MAX: f64 = 255.0;

/// Torque impulse applied to the chassis during the tick containing `time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disturbance {
    /// [s]
    pub time: f64,
    /// Total over both wheels [N m s].
    pub impulse: f64,
}

/// A complete closed-loop experiment, as read from a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "RobotParams::reference")]
    pub params: RobotParams,
    #[serde(default)]
    pub imu: ImuConfig,
    pub controller: ControllerConfig,
    #[serde(default = "default_filter_weight")]
    pub filter_weight: f64,
    #[serde(default = "default_initial_state")]
    pub initial_state: PlantState,
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default = "default_control_rate")]
    pub control_rate: f64,
    #[serde(default = "default_substeps")]
    pub substeps: u32,
    #[serde(default)]
    pub added_mass: f64,
    #[serde(default = "default_mount_height")]
    pub mount_height: f64,
    #[serde(default = "default_tau_max")]
    pub tau_max: f64,
    /// Feed the controller the true tilt instead of the filtered estimate.
    #[serde(default)]
    pub act_on_true_angle: bool,
    #[serde(default)]
    pub disturbances: Vec<Disturbance>,
}

fn default_filter_weight() -> f64 {
    DEFAULT_FILTER_WEIGHT
}
fn default_initial_state() -> PlantState {
    PlantState::tilted(DEFAULT_INITIAL_TILT)
}
fn default_duration() -> f64 {
    DEFAULT_DURATION
}
fn default_control_rate() -> f64 {
    DEFAULT_CONTROL_RATE
}
fn default_substeps() -> u32 {
    DEFAULT_SUBSTEPS
}
fn default_mount_height() -> f64 {
    DEFAULT_MOUNT_HEIGHT
}
fn default_tau_max() -> f64 {
    DEFAULT_TAU_MAX
}

impl Scenario {
    /// Kit parameters, noiseless IMU, 0.1 rad initial tilt, 30 s at 200 Hz.
    pub fn nominal(controller: ControllerConfig) -> Self {
        Scenario {
            params: RobotParams::reference(),
            imu: ImuConfig::default(),
            controller,
            filter_weight: DEFAULT_FILTER_WEIGHT,
            initial_state: default_initial_state(),
            duration: DEFAULT_DURATION,
            control_rate: DEFAULT_CONTROL_RATE,
            substeps: DEFAULT_SUBSTEPS,
            added_mass: 0.0,
            mount_height: DEFAULT_MOUNT_HEIGHT,
            tau_max: DEFAULT_TAU_MAX,
            act_on_true_angle: false,
            disturbances: Vec::new(),
        }
    }

    pub fn reference(kind: ControllerKind) -> Self {
        Scenario::nominal(ControllerConfig::reference(kind))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)
            .map_err(|e| Error::Scenario(format!("line {} column {}: {e}", e.line(), e.column())))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.imu.validate()?;
        let positive = |field, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(field, format!("must be > 0, got {v}")))
            }
        };
        positive("duration", self.duration)?;
        positive("control_rate", self.control_rate)?;
        positive("tau_max", self.tau_max)?;
        if self.substeps == 0 {
            return Err(Error::param("substeps", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.filter_weight) {
            return Err(Error::param("filter_weight", format!("must be in [0, 1], got {}", self.filter_weight)));
        }
        if !(self.added_mass >= 0.0 && self.added_mass.is_finite()) {
            return Err(Error::param("added_mass", format!("must be >= 0, got {}", self.added_mass)));
        }
        if !self.initial_state.is_finite() {
            return Err(Error::param("initial_state", "must be finite"));
        }
        for d in &self.disturbances {
            if !(d.time >= 0.0 && d.time.is_finite() && d.impulse.is_finite()) {
                return Err(Error::param("disturbances", "time must be >= 0 and impulse finite"));
            }
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.control_rate
    }

    /// Records produced by a full run.
    pub fn tick_count(&self) -> usize {
        // guard against 30 * 200 evaluating to 5999.999...
        let exact = self.duration * self.control_rate;
        (exact * (1.0 + 1e-12)).floor() as usize
    }

    /// Wheel-torque sum per unit of saturated control action.
    pub fn actuator_gain(&self) -> f64 {
        2.0 * self.tau_max / PWM_LIMIT
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let s = Scenario::from_json(r#"{"controller":{"type":"pid","kp":10,"ki":0.005,"kd":0.015}}"#).unwrap();
        assert_eq!(s, Scenario::reference(ControllerKind::Pid));
        assert_eq!(s.tick_count(), 6000);
        assert_eq!(s.actuator_gain(), 2.0);
    }

    #[test]
    fn round_trip() {
        let mut s = Scenario::reference(ControllerKind::Flc);
        s.disturbances.push(Disturbance { time: 2.0, impulse: 0.05 });
        s.imu.seed = 9;
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_documents() {
        let base = r#""controller":{"type":"pid","kp":1,"ki":0,"kd":0}"#;
        for extra in [
            r#","unknown":1"#,
            r#","duration":0"#,
            r#","substeps":0"#,
            r#","filter_weight":1.5"#,
            r#","added_mass":-1"#,
            r#","imu":{"accel_noise_std":-0.1}"#,
        ] {
            let doc = format!("{{{base}{extra}}}");
            assert!(Scenario::from_json(&doc).is_err(), "{doc}");
        }
        let err = Scenario::from_json("{\n  \"controller\": 3\n}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn tick_count_floors() {
        let mut s = Scenario::reference(ControllerKind::Pid);
        s.duration = 0.0124;
        assert_eq!(s.tick_count(), 2);
        s.duration = 0.3;
        s.control_rate = 10.0;
        assert_eq!(s.tick_count(), 3);
    }
}
