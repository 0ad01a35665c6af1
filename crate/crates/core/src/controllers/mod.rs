//! Discrete PID, lead-lag and fuzzy controllers plus PWM saturation.

pub mod biquad;
pub mod fuzzy;
pub mod leadlag;
pub mod pid;
pub mod pwm;

use serde::{Deserialize, Serialize};

pub use biquad::{biquad_step, discretize_tustin, Biquad, DiscreteBiquadChain};
pub use fuzzy::{flc_step, DefuzzMethod, Flc, FlcConfig, FuzzyCore, FuzzyLabel, MembershipFamily, RuleTable};
pub use leadlag::{leadlag_tf, LeadLagParams};
pub use pid::{pid_step, PidGains, PidState};
pub use pwm::{saturate_to_pwm, ControlAction, Direction, PWM_LIMIT};

use crate::error::{Error, Result};
use crate::tf::RationalTF;

/// Lead-lag parameters plus the discretization rate. `fs` defaults to the
/// control rate of the loop that runs the compensator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeadLagConfig {
    pub kc: f64,
    pub tau_lead: f64,
    pub alpha: f64,
    pub tau_lag: f64,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fs: Option<f64>,
}

impl LeadLagConfig {
    pub fn params(&self) -> LeadLagParams {
        LeadLagParams {
            kc: self.kc,
            tau_lead: self.tau_lead,
            alpha: self.alpha,
            tau_lag: self.tau_lag,
            beta: self.beta,
        }
    }
}

impl From<LeadLagParams> for LeadLagConfig {
    fn from(p: LeadLagParams) -> Self {
        LeadLagConfig {
            kc: p.kc,
            tau_lead: p.tau_lead,
            alpha: p.alpha,
            tau_lag: p.tau_lag,
            beta: p.beta,
            fs: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ControllerConfig {
    Pid(PidGains),
    LeadLag(LeadLagConfig),
    Flc(FlcConfig),
}

impl ControllerConfig {
    pub fn kind(&self) -> ControllerKind {
        match self {
            ControllerConfig::Pid(_) => ControllerKind::Pid,
            ControllerConfig::LeadLag(_) => ControllerKind::LeadLag,
            ControllerConfig::Flc(_) => ControllerKind::Flc,
        }
    }

    /// Continuous-time equivalent for loop analysis, `None` for the
    /// nonlinear fuzzy controller. The PID becomes `(kd s^2 + kp s + ki) / s`.
    pub fn continuous_tf(&self) -> Option<RationalTF> {
        match self {
            ControllerConfig::Pid(g) => Some(RationalTF {
                num: vec![g.kd, g.kp, g.ki],
                den: vec![1.0, 0.0],
            }),
            ControllerConfig::LeadLag(c) => Some(leadlag_tf(&c.params())),
            ControllerConfig::Flc(_) => None,
        }
    }

    pub fn reference(kind: ControllerKind) -> Self {
        match kind {
            ControllerKind::Pid => ControllerConfig::Pid(PidGains::reference()),
            ControllerKind::LeadLag => ControllerConfig::LeadLag(LeadLagParams::reference().into()),
            ControllerKind::Flc => ControllerConfig::Flc(FlcConfig::reference()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    Pid,
    LeadLag,
    Flc,
}

impl ControllerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ControllerKind::Pid => "pid",
            ControllerKind::LeadLag => "lead_lag",
            ControllerKind::Flc => "flc",
        }
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pid" => Ok(ControllerKind::Pid),
            "lead_lag" | "leadlag" => Ok(ControllerKind::LeadLag),
            "flc" | "fuzzy" => Ok(ControllerKind::Flc),
            other => Err(Error::param("controller", format!("unknown controller `{other}`"))),
        }
    }
}

/// Partial gain change. Fields that do not apply to the active controller
/// are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainUpdate {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ki: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ku: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kc: Option<f64>,
}

impl GainUpdate {
    fn values(&self) -> impl Iterator<Item = (&'static str, f64)> {
        [("kp", self.kp), ("ki", self.ki), ("kd", self.kd), ("ku", self.ku), ("kc", self.kc)]
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k, v)))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Law {
    Pid { gains: PidGains, state: PidState },
    LeadLag { config: LeadLagConfig, chain: DiscreteBiquadChain },
    Flc { flc: Flc, state: PidState },
}

/// A configured controller with its internal state.
#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    law: Law,
    revision: u64,
}

impl Controller {
    /// `rate` is the control rate in Hz; it is the lead-lag sample rate
    /// unless the config overrides it.
    pub fn new(config: &ControllerConfig, rate: f64) -> Result<Self> {
        let law = match *config {
            ControllerConfig::Pid(gains) => {
                for (field, v) in [("kp", gains.kp), ("ki", gains.ki), ("kd", gains.kd)] {
                    if !v.is_finite() {
                        return Err(Error::param(field, "must be finite"));
                    }
                }
                Law::Pid {
                    gains,
                    state: PidState::default(),
                }
            }
            ControllerConfig::LeadLag(mut config) => {
                let params = config.params();
                params.validate()?;
                let fs = config.fs.unwrap_or(rate);
                config.fs = Some(fs);
                Law::LeadLag {
                    config,
                    chain: discretize_tustin(&leadlag_tf(&params), fs)?,
                }
            }
            ControllerConfig::Flc(cfg) => Law::Flc {
                flc: Flc::new(cfg)?,
                state: PidState::default(),
            },
        };
        Ok(Controller { law, revision: 0 })
    }

    pub fn kind(&self) -> ControllerKind {
        match self.law {
            Law::Pid { .. } => ControllerKind::Pid,
            Law::LeadLag { .. } => ControllerKind::LeadLag,
            Law::Flc { .. } => ControllerKind::Flc,
        }
    }

    /// Incremented on every applied gain change.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn config(&self) -> ControllerConfig {
        match &self.law {
            Law::Pid { gains, .. } => ControllerConfig::Pid(*gains),
            Law::LeadLag { config, .. } => ControllerConfig::LeadLag(*config),
            Law::Flc { flc, .. } => ControllerConfig::Flc(flc.config),
        }
    }

    /// Control value for the current error. `dt` is the control period.
    pub fn step(&mut self, error: f64, dt: f64) -> f64 {
        match &mut self.law {
            Law::Pid { gains, state } => {
                let (u, next) = pid_step(gains, state, error, dt);
                *state = next;
                u
            }
            Law::LeadLag { chain, .. } => biquad_step(chain, error),
            Law::Flc { flc, state } => {
                let (u, next) = flc_step(flc, error, state, dt);
                *state = next;
                u
            }
        }
    }

    /// Clears integrators, error memory and filter delays.
    pub fn reset(&mut self) {
        match &mut self.law {
            Law::Pid { state, .. } | Law::Flc { state, .. } => *state = PidState::default(),
            Law::LeadLag { chain, .. } => chain.reset(),
        }
    }

    /// Applies a gain change without disturbing the controller state. A
    /// lead-lag gain change rescales the filter delays along with the
    /// numerator, so the output scales without a transient.
    pub fn apply_gains(&mut self, update: &GainUpdate) -> Result<()> {
        let kind = self.kind();
        for (field, v) in update.values() {
            if !v.is_finite() {
                return Err(Error::param(field, "must be finite"));
            }
            let allowed = match kind {
                ControllerKind::Pid => matches!(field, "kp" | "ki" | "kd"),
                ControllerKind::LeadLag => field == "kc",
                ControllerKind::Flc => matches!(field, "kp" | "ki" | "kd" | "ku"),
            };
            if !allowed {
                return Err(Error::param(field, format!("not a gain of the {} controller", kind.as_str())));
            }
        }
        match &mut self.law {
            Law::Pid { gains, .. } => {
                gains.kp = update.kp.unwrap_or(gains.kp);
                gains.ki = update.ki.unwrap_or(gains.ki);
                gains.kd = update.kd.unwrap_or(gains.kd);
            }
            Law::LeadLag { config, chain } => {
                if let Some(kc) = update.kc {
                    if kc <= 0.0 {
                        return Err(Error::param("kc", "must be > 0"));
                    }
                    let ratio = kc / config.kc;
                    config.kc = kc;
                    let first = &mut chain.sections[0];
                    first.b0 *= ratio;
                    first.b1 *= ratio;
                    first.b2 *= ratio;
                    for s in &mut chain.sections {
                        s.s1 *= ratio;
                        s.s2 *= ratio;
                    }
                }
            }
            Law::Flc { flc, .. } => {
                let c = flc.config;
                flc.set_gains(
                    update.kp.unwrap_or(c.kp),
                    update.ki.unwrap_or(c.ki),
                    update.kd.unwrap_or(c.kd),
                    update.ku.unwrap_or(c.ku),
                );
            }
        }
        self.revision += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_is_tagged() {
        let c: ControllerConfig = serde_json::from_str(r#"{"type":"pid","kp":10,"ki":0.005,"kd":0.015}"#).unwrap();
        assert_eq!(c, ControllerConfig::reference(ControllerKind::Pid));
        let c: ControllerConfig = serde_json::from_str(
            r#"{"type":"lead_lag","kc":3.25,"tau_lead":0.1095,"alpha":0.4494,"tau_lag":1.123,"beta":7.1439}"#,
        )
        .unwrap();
        assert_eq!(c, ControllerConfig::reference(ControllerKind::LeadLag));
        let c: ControllerConfig = serde_json::from_str(r#"{"type":"flc","kp":150,"ki":1.5,"kd":1,"ku":1}"#).unwrap();
        assert_eq!(c.kind(), ControllerKind::Flc);
        assert!(serde_json::from_str::<ControllerConfig>(r#"{"type":"pid","kp":1,"ki":0,"kd":0,"x":1}"#).is_err());
        assert!(serde_json::from_str::<ControllerConfig>(r#"{"type":"lqr"}"#).is_err());
        for kind in [ControllerKind::Pid, ControllerKind::LeadLag, ControllerKind::Flc] {
            let c = ControllerConfig::reference(kind);
            let back: ControllerConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn gain_update_validation() {
        let mut c = Controller::new(&ControllerConfig::reference(ControllerKind::Pid), 200.0).unwrap();
        assert!(c.apply_gains(&GainUpdate { kc: Some(1.0), ..Default::default() }).is_err());
        assert_eq!(c.revision(), 0);
        c.apply_gains(&GainUpdate { kp: Some(20.0), ..Default::default() }).unwrap();
        assert_eq!(c.revision(), 1);
        assert_eq!(c.config(), ControllerConfig::Pid(PidGains::new(20.0, 0.005, 0.015)));
        assert!(c.apply_gains(&GainUpdate { kd: Some(f64::NAN), ..Default::default() }).is_err());
    }

    #[test]
    fn leadlag_gain_change_scales_output() {
        let cfg = ControllerConfig::reference(ControllerKind::LeadLag);
        let mut a = Controller::new(&cfg, 200.0).unwrap();
        let mut b = a.clone();
        let inputs: Vec<f64> = (0..300).map(|k| (k as f64 * 0.05).sin()).collect();
        for x in &inputs[..150] {
            a.step(*x, 0.005);
            b.step(*x, 0.005);
        }
        b.apply_gains(&GainUpdate { kc: Some(6.5), ..Default::default() }).unwrap();
        for x in &inputs[150..] {
            let ya = a.step(*x, 0.005);
            let yb = b.step(*x, 0.005);
            assert!((yb - 2.0 * ya).abs() < 1e-12 * (1.0 + ya.abs()));
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("leadlag".parse::<ControllerKind>().unwrap(), ControllerKind::LeadLag);
        assert!("lqr".parse::<ControllerKind>().is_err());
    }
}
