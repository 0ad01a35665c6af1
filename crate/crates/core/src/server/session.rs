//! Session state machine. Commands are applied between ticks only.
//!
//! | command            | idle | running | paused | finished |
//! |--------------------|------|---------|--------|----------|
//! | hello              | yes  | yes     | yes    | yes      |
//! | load_scenario      | yes  |         | yes    | yes      |
//! | set_controller     | yes  |         | yes    |          |
//! | set_gains          | yes  | yes     | yes    |          |
//! | set_filter_weight  | yes  | yes     | yes    |          |
//! | start              | yes  |         | yes    |          |
//! | pause              |      | yes     |        |          |
//! | reset              | yes  | yes     | yes    | yes      |
//! | inject_disturbance |      | yes     | yes    |          |
//! | set_added_mass     | yes  |         |        |          |
//!
//! `load_scenario` and `reset` return the session to idle; a run that
//! reaches its duration moves to finished.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::protocol::{parse_client_message, reason, ClientMessage, Command, RunSummary, ServerMessage, PROTOCOL_VERSION};
use crate::error::Result;
use crate::sim::engine::{effort, run_metrics};
use crate::sim::{Engine, Scenario, TelemetryRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Idle,
    Running,
    Paused,
    Finished,
}

/// What one tick produced.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TickOutput {
    /// Telemetry (after decimation) and, on the last tick, the run summary.
    pub broadcast: Vec<ServerMessage>,
}

#[derive(Debug, Clone)]
pub struct Session {
    phase: Phase,
    scenario: Scenario,
    engine: Engine,
    decimation: u32,
    seq: u64,
    log: Vec<TelemetryRecord>,
}

impl Session {
    /// `decimation` selects every n-th tick for the live stream.
    pub fn new(scenario: Scenario, decimation: u32) -> Result<Self> {
        let engine = Engine::new(&scenario)?;
        Ok(Session {
            phase: Phase::Idle,
            scenario,
            engine,
            decimation: decimation.max(1),
            seq: 0,
            log: Vec::new(),
        })
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    /// Every tick of the current run, undecimated.
    pub fn log(&self) -> &[TelemetryRecord] {
        &self.log
    }

    /// Parses and applies one frame; the result is addressed to its sender.
    pub fn handle_line(&mut self, line: &str) -> Vec<ServerMessage> {
        match parse_client_message(line) {
            Ok(msg) => self.handle_message(msg),
            Err(r) => vec![ServerMessage::Error {
                reference: r.reference,
                reason: r.reason,
            }],
        }
    }

    pub fn handle_message(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        let reference = msg.reference;
        let reply = match self.apply(msg.command) {
            Ok(Some(version)) => ServerMessage::HelloAck { reference, version },
            Ok(None) => ServerMessage::Ack { reference },
            Err(reason) => ServerMessage::Error { reference, reason },
        };
        vec![reply]
    }

    fn allowed(&self, command: &Command) -> bool {
        use Phase::*;
        let phases: &[Phase] = match command {
            Command::Hello { .. } | Command::Reset => &[Idle, Running, Paused, Finished],
            Command::LoadScenario(_) => &[Idle, Paused, Finished],
            Command::SetController(_) | Command::Start => &[Idle, Paused],
            Command::SetGains(_) | Command::SetFilterWeight(_) => &[Idle, Running, Paused],
            Command::Pause => &[Running],
            Command::InjectDisturbance { .. } => &[Running, Paused],
            Command::SetAddedMass { .. } => &[Idle],
        };
        phases.contains(&self.phase)
    }

    /// Returns the negotiated version for `hello`.
    fn apply(&mut self, command: Command) -> std::result::Result<Option<u32>, String> {
        if !self.allowed(&command) {
            return Err(reason::INVALID_PHASE.to_string());
        }
        let rejected = |e: crate::Error| format!("{}: {e}", reason::REJECTED);
        match command {
            Command::Hello { version } => {
                if version != PROTOCOL_VERSION {
                    return Err(reason::UNSUPPORTED_VERSION.to_string());
                }
                return Ok(Some(PROTOCOL_VERSION));
            }
            Command::LoadScenario(scenario) => {
                let engine = Engine::new(&scenario).map_err(rejected)?;
                self.scenario = *scenario;
                self.restart(engine);
            }
            Command::SetController(config) => {
                let mut engine = self.engine.clone();
                engine.set_controller(&config).map_err(rejected)?;
                self.engine = engine;
                self.scenario.controller = config;
            }
            Command::SetGains(update) => {
                self.engine.apply_gains(&update).map_err(rejected)?;
                self.scenario.controller = self.engine.controller().config();
            }
            Command::SetFilterWeight(w) => {
                self.engine.set_filter_weight(w).map_err(rejected)?;
                self.scenario.filter_weight = w;
            }
            Command::Start => self.phase = Phase::Running,
            Command::Pause => self.phase = Phase::Paused,
            Command::Reset => {
                let engine = Engine::new(&self.scenario).map_err(rejected)?;
                self.restart(engine);
            }
            Command::InjectDisturbance { impulse } => {
                if !impulse.is_finite() {
                    return Err(format!("{}: impulse must be finite", reason::REJECTED));
                }
                self.engine.inject_impulse(impulse);
            }
            Command::SetAddedMass { added_mass, mount_height } => {
                let mut scenario = self.scenario.clone();
                scenario.added_mass = added_mass;
                if let Some(h) = mount_height {
                    scenario.mount_height = h;
                }
                let engine = Engine::new(&scenario).map_err(rejected)?;
                self.scenario = scenario;
                self.restart(engine);
            }
        }
        Ok(None)
    }

    fn restart(&mut self, engine: Engine) {
        self.engine = engine;
        self.phase = Phase::Idle;
        self.seq = 0;
        self.log.clear();
    }

    /// Advances the simulation one tick if running.
    pub fn tick(&mut self) -> TickOutput {
        let mut out = TickOutput::default();
        if self.phase != Phase::Running {
            return out;
        }
        let index = self.engine.ticks_done();
        match self.engine.tick() {
            Ok(record) => {
                self.log.push(record);
                if index.is_multiple_of(self.decimation as u64) {
                    out.broadcast.push(ServerMessage::Telemetry { seq: self.seq, record });
                    self.seq += 1;
                }
                if self.engine.is_finished() {
                    out.broadcast.push(self.finish(None));
                }
            }
            Err(e) => out.broadcast.push(self.finish(Some(e.to_string()))),
        }
        out
    }

    fn finish(&mut self, aborted: Option<String>) -> ServerMessage {
        self.phase = Phase::Finished;
        let max_abs_theta = self.log.iter().map(|r| r.theta_true.abs()).fold(0.0, f64::max);
        ServerMessage::RunComplete {
            metrics: RunSummary {
                metrics: run_metrics(&self.log),
                ticks: self.log.len() as u64,
                effort: effort(&self.log),
                max_abs_theta,
                aborted,
            },
        }
    }
}

/// Reply reference helper for frames the transport itself rejects.
pub fn transport_error(reason: &str) -> ServerMessage {
    ServerMessage::Error {
        reference: Value::Null,
        reason: reason.to_string(),
    }
}
