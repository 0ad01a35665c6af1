//! Newline-delimited JSON messages exchanged with front-panel clients.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::analysis::StepMetrics;
use crate::controllers::{ControllerConfig, GainUpdate};
use crate::sim::{Scenario, TelemetryRecord};

pub const PROTOCOL_VERSION: u32 = 1;

/// Machine-readable error reasons.
pub mod reason {
    pub const INVALID_PHASE: &str = "invalid_phase";
    pub const UNKNOWN_TYPE: &str = "unknown_type";
    pub const INVALID_MESSAGE: &str = "invalid_message";
    pub const MISSING_REF: &str = "missing_ref";
    pub const UNSUPPORTED_VERSION: &str = "unsupported_version";
    pub const REJECTED: &str = "rejected";
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Hello { version: u32 },
    LoadScenario(Box<Scenario>),
    SetController(ControllerConfig),
    SetGains(GainUpdate),
    SetFilterWeight(f64),
    Start,
    Pause,
    Reset,
    InjectDisturbance { impulse: f64 },
    SetAddedMass { added_mass: f64, mount_height: Option<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientMessage {
    /// Client-chosen correlation value, echoed verbatim.
    pub reference: Value,
    pub command: Command,
}

/// A message that could not be turned into a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub reference: Value,
    pub reason: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HelloPayload {
    version: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioPayload {
    scenario: Scenario,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControllerPayload {
    controller: ControllerConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightPayload {
    weight: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DisturbancePayload {
    impulse: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AddedMassPayload {
    added_mass: f64,
    #[serde(default)]
    mount_height: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Empty {}

fn payload<T: DeserializeOwned>(body: Map<String, Value>) -> Result<T, String> {
    serde_json::from_value(Value::Object(body)).map_err(|e| format!("{}: {e}", reason::INVALID_MESSAGE))
}

/// Parses one frame. Every failure carries the `ref` when one was present so
/// the reply can still be correlated.
pub fn parse_client_message(line: &str) -> Result<ClientMessage, Rejection> {
    let reject = |reference: Value, reason: String| Rejection { reference, reason };
    let mut body = match serde_json::from_str::<Value>(line) {
        Ok(Value::Object(map)) => map,
        Ok(_) => return Err(reject(Value::Null, format!("{}: expected a JSON object", reason::INVALID_MESSAGE))),
        Err(e) => return Err(reject(Value::Null, format!("{}: {e}", reason::INVALID_MESSAGE))),
    };
    let reference = body.remove("ref");
    let kind = body.remove("type");
    let Some(reference) = reference else {
        return Err(reject(Value::Null, reason::MISSING_REF.to_string()));
    };
    let Some(Value::String(kind)) = kind else {
        return Err(reject(reference, format!("{}: missing `type`", reason::INVALID_MESSAGE)));
    };
    let command = match kind.as_str() {
        "hello" => payload::<HelloPayload>(body).map(|p| Command::Hello { version: p.version }),
        "load_scenario" => payload::<ScenarioPayload>(body).map(|p| Command::LoadScenario(Box::new(p.scenario))),
        "set_controller" => payload::<ControllerPayload>(body).map(|p| Command::SetController(p.controller)),
        "set_gains" => payload::<GainUpdate>(body).map(Command::SetGains),
        "set_filter_weight" => payload::<WeightPayload>(body).map(|p| Command::SetFilterWeight(p.weight)),
        "start" => payload::<Empty>(body).map(|_| Command::Start),
        "pause" => payload::<Empty>(body).map(|_| Command::Pause),
        "reset" => payload::<Empty>(body).map(|_| Command::Reset),
        "inject_disturbance" => {
            payload::<DisturbancePayload>(body).map(|p| Command::InjectDisturbance { impulse: p.impulse })
        }
        "set_added_mass" => payload::<AddedMassPayload>(body).map(|p| Command::SetAddedMass {
            added_mass: p.added_mass,
            mount_height: p.mount_height,
        }),
        other => Err(format!("{}: `{other}`", reason::UNKNOWN_TYPE)),
    };
    command
        .map(|command| ClientMessage {
            reference: reference.clone(),
            command,
        })
        .map_err(|reason| reject(reference, reason))
}

/// Final figures sent when a run ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub metrics: Option<StepMetrics>,
    pub ticks: u64,
    pub effort: f64,
    pub max_abs_theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    HelloAck {
        #[serde(rename = "ref")]
        reference: Value,
        version: u32,
    },
    Ack {
        #[serde(rename = "ref")]
        reference: Value,
    },
    Error {
        #[serde(rename = "ref")]
        reference: Value,
        reason: String,
    },
    Telemetry {
        seq: u64,
        record: TelemetryRecord,
    },
    RunComplete {
        metrics: RunSummary,
    },
}

impl ServerMessage {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }

    pub fn is_telemetry(&self) -> bool {
        matches!(self, ServerMessage::Telemetry { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn parses_every_command() {
        let cases = [
            (json!({"type":"hello","ref":1,"version":1}), Command::Hello { version: 1 }),
            (json!({"type":"start","ref":"a"}), Command::Start),
            (json!({"type":"pause","ref":"a"}), Command::Pause),
            (json!({"type":"reset","ref":"a"}), Command::Reset),
            (
                json!({"type":"set_gains","ref":2,"kp":10,"ki":0.005,"kd":0.015}),
                Command::SetGains(GainUpdate { kp: Some(10.0), ki: Some(0.005), kd: Some(0.015), ..Default::default() }),
            ),
            (json!({"type":"set_filter_weight","ref":3,"weight":0.9}), Command::SetFilterWeight(0.9)),
            (json!({"type":"inject_disturbance","ref":4,"impulse":0.02}), Command::InjectDisturbance { impulse: 0.02 }),
            (
                json!({"type":"set_added_mass","ref":5,"added_mass":0.2}),
                Command::SetAddedMass { added_mass: 0.2, mount_height: None },
            ),
            (
                json!({"type":"set_controller","ref":6,"controller":{"type":"pid","kp":1,"ki":0,"kd":0}}),
                Command::SetController(ControllerConfig::Pid(crate::controllers::PidGains::new(1.0, 0.0, 0.0))),
            ),
        ];
        for (msg, want) in cases {
            let parsed = parse_client_message(&msg.to_string()).unwrap();
            assert_eq!(parsed.command, want);
            assert_eq!(parsed.reference, msg["ref"]);
        }
        let load = json!({"type":"load_scenario","ref":7,"scenario":{"controller":{"type":"flc","kp":150,"ki":1.5,"kd":1,"ku":1}}});
        assert!(matches!(parse_client_message(&load.to_string()).unwrap().command, Command::LoadScenario(_)));
    }

    #[test]
    fn rejections_keep_the_ref() {
        let r = parse_client_message(r#"{"type":"warp","ref":9}"#).unwrap_err();
        assert_eq!(r.reference, json!(9));
        assert!(r.reason.starts_with(reason::UNKNOWN_TYPE));
        let r = parse_client_message(r#"{"type":"set_gains","ref":"x","kq":1}"#).unwrap_err();
        assert_eq!(r.reference, json!("x"));
        assert!(r.reason.starts_with(reason::INVALID_MESSAGE));
        let r = parse_client_message(r#"{"type":"start"}"#).unwrap_err();
        assert_eq!(r.reason, reason::MISSING_REF);
        assert!(parse_client_message("not json").is_err());
        assert!(parse_client_message("[1,2]").is_err());
    }

    #[test]
    fn server_message_shapes() {
        let m = ServerMessage::HelloAck { reference: json!(1), version: PROTOCOL_VERSION };
        assert_eq!(m.to_line(), r#"{"type":"hello_ack","ref":1,"version":1}"#);
        let m = ServerMessage::Error { reference: json!("a"), reason: reason::INVALID_PHASE.into() };
        assert_eq!(m.to_line(), r#"{"type":"error","ref":"a","reason":"invalid_phase"}"#);
        assert!(!m.to_line().contains('\n'));
    }
}
