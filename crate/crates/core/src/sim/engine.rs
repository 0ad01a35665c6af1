use serde::{Deserialize, Serialize};

use super::mass::apply_mass_uncertainty;
use super::scenario::Scenario;
use super::telemetry::TelemetryRecord;
use crate::analysis::{step_metrics, StepMetrics};
use crate::controllers::{saturate_to_pwm, Controller, ControllerConfig, GainUpdate};
use crate::error::{Error, Result};
use crate::plant::{rk4_step, PlantState, RobotParams, WheelTorque};
use crate::sensors::{complementary_filter, sample_imu, FilterState};

/// Settling band used for run metrics [%].
pub const SETTLING_BAND_PCT: f64 = 2.0;

/// Tick-by-tick closed loop. Batch runs drive it to completion; the live
/// server interleaves ticks with operator commands.
#[derive(Debug, Clone)]
pub struct Engine {
    scenario: Scenario,
    params: RobotParams,
    controller: Controller,
    state: PlantState,
    filter: FilterState,
    theta_gyro: f64,
    tick: u64,
    pending_impulse: f64,
}

impl Engine {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let params = apply_mass_uncertainty(&scenario.params, scenario.added_mass, scenario.mount_height)?;
        params.validate()?;
        let controller = Controller::new(&scenario.controller, scenario.control_rate)?;
        Ok(Engine {
            scenario: scenario.clone(),
            params,
            controller,
            state: scenario.initial_state,
            filter: FilterState::new(0.0, scenario.filter_weight)?,
            theta_gyro: 0.0,
            tick: 0,
            pending_impulse: 0.0,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Parameters in effect, including any added mass.
    pub fn params(&self) -> &RobotParams {
        &self.params
    }

    pub fn state(&self) -> &PlantState {
        &self.state
    }

    pub fn controller(&self) -> &Controller {
        &self.controller
    }

    pub fn ticks_done(&self) -> u64 {
        self.tick
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 / self.scenario.control_rate
    }

    pub fn is_finished(&self) -> bool {
        self.tick as usize >= self.scenario.tick_count()
    }

    pub fn apply_gains(&mut self, update: &GainUpdate) -> Result<()> {
        self.controller.apply_gains(update)
    }

    /// Swaps in a freshly initialised controller.
    pub fn set_controller(&mut self, config: &ControllerConfig) -> Result<()> {
        self.controller = Controller::new(config, self.scenario.control_rate)?;
        self.scenario.controller = *config;
        Ok(())
    }

    pub fn set_filter_weight(&mut self, weight: f64) -> Result<()> {
        self.filter = FilterState::new(self.filter.theta_filt, weight)?;
        self.scenario.filter_weight = weight;
        Ok(())
    }

    /// Queues a torque impulse [N m s] for the next tick.
    pub fn inject_impulse(&mut self, impulse: f64) {
        self.pending_impulse += impulse;
    }

    /// Advances one control period and returns its telemetry.
    pub fn tick(&mut self) -> Result<TelemetryRecord> {
        let dt = self.scenario.dt();
        let t = self.time();
        let abort = |source: Error| Error::Aborted {
            t,
            source: Box::new(source),
        };

        let reading = sample_imu(&self.state, &self.scenario.imu, t, self.tick);
        if self.tick == 0 {
            self.theta_gyro = reading.theta_acc;
            self.filter.theta_filt = reading.theta_acc;
        } else {
            self.theta_gyro += reading.omega_gyro * dt;
            self.filter = complementary_filter(&self.filter, &reading, dt);
        }

        let measured = if self.scenario.act_on_true_angle {
            self.state.theta_p
        } else {
            self.filter.theta_filt
        };
        let u = self.controller.step(0.0 - measured, dt);
        let action = saturate_to_pwm(u).map_err(abort)?;

        let impulse = self.scheduled_impulse(t) + std::mem::take(&mut self.pending_impulse);
        let per_wheel = 0.5 * (self.scenario.actuator_gain() * action.u_sat + impulse / dt);
        let torque = WheelTorque::symmetric(per_wheel);

        let record = TelemetryRecord {
            t,
            theta_acc: reading.theta_acc,
            theta_gyro: self.theta_gyro,
            theta_filt: self.filter.theta_filt,
            omega: reading.omega_gyro,
            u: action.u,
            u_sat: action.u_sat,
            pwm_left: action.pwm_magnitude,
            pwm_right: action.pwm_magnitude,
            controller_id: self.controller.kind(),
            controller_revision: self.controller.revision(),
            theta_true: self.state.theta_p,
        };

        let h = dt / self.scenario.substeps as f64;
        let mut state = self.state;
        for _ in 0..self.scenario.substeps {
            state = rk4_step(&self.params, &state, &torque, h).map_err(abort)?;
        }
        if !state.is_finite() {
            return Err(abort(Error::NonFiniteState));
        }
        self.state = state;
        self.tick += 1;
        Ok(record)
    }

    fn scheduled_impulse(&self, t: f64) -> f64 {
        let end = (self.tick + 1) as f64 / self.scenario.control_rate;
        self.scenario
            .disturbances
            .iter()
            .filter(|d| d.time >= t && d.time < end)
            .map(|d| d.impulse)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub telemetry: Vec<TelemetryRecord>,
    /// Metrics of `theta_filt` regulated to zero; absent if the run aborted
    /// before two records were produced.
    pub metrics: Option<StepMetrics>,
    pub final_state: PlantState,
    pub settled: bool,
    /// Abort reason; the telemetry up to the failing tick is kept.
    #[serde(skip)]
    pub aborted: Option<Error>,
}

impl RunResult {
    /// Control effort `sum |u_sat| dt`.
    pub fn effort(&self) -> f64 {
        effort(&self.telemetry)
    }

    /// Largest true tilt magnitude over the run [rad].
    pub fn max_abs_theta(&self) -> f64 {
        self.telemetry
            .iter()
            .map(|r| r.theta_true.abs())
            .fold(self.final_state.theta_p.abs(), f64::max)
    }
}

pub fn effort(telemetry: &[TelemetryRecord]) -> f64 {
    let dt = match telemetry {
        [a, b, ..] => b.t - a.t,
        _ => return 0.0,
    };
    telemetry.iter().map(|r| r.u_sat.abs()).sum::<f64>() * dt
}

pub fn run_metrics(telemetry: &[TelemetryRecord]) -> Option<StepMetrics> {
    let t: Vec<f64> = telemetry.iter().map(|r| r.t).collect();
    let y: Vec<f64> = telemetry.iter().map(|r| r.theta_filt).collect();
    step_metrics(&t, &y, 0.0, SETTLING_BAND_PCT).ok()
}

/// Runs the scenario for its full duration. Invalid scenarios are errors;
/// failures during the run are reported in [`RunResult::aborted`].
pub fn run_closed_loop(scenario: &Scenario) -> Result<RunResult> {
    let mut engine = Engine::new(scenario)?;
    let mut telemetry = Vec::with_capacity(scenario.tick_count());
    let mut aborted = None;
    while !engine.is_finished() {
        match engine.tick() {
            Ok(r) => telemetry.push(r),
            Err(e) => {
                aborted = Some(e);
                break;
            }
        }
    }
    let metrics = run_metrics(&telemetry);
    Ok(RunResult {
        settled: aborted.is_none() && metrics.is_some_and(|m| m.settled()),
        metrics,
        final_state: *engine.state(),
        telemetry,
        aborted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::{ControllerKind, PidGains};
    use crate::plant::total_energy;

    fn short(kind: ControllerKind, duration: f64) -> Scenario {
        let mut s = Scenario::reference(kind);
        s.duration = duration;
        s
    }

    #[test]
    fn equilibrium_is_silent() {
        let mut s = short(ControllerKind::Pid, 2.0);
        s.initial_state = PlantState::upright();
        let r = run_closed_loop(&s).unwrap();
        assert_eq!(r.telemetry.len(), 400);
        for rec in &r.telemetry {
            assert_eq!(
                [rec.theta_acc, rec.theta_gyro, rec.theta_filt, rec.omega, rec.u, rec.u_sat],
                [0.0; 6]
            );
            assert_eq!((rec.pwm_left, rec.pwm_right), (0, 0));
        }
    }

    #[test]
    fn time_grid_is_exact() {
        let r = run_closed_loop(&short(ControllerKind::Pid, 1.0)).unwrap();
        assert_eq!(r.telemetry.len(), 200);
        for (k, rec) in r.telemetry.iter().enumerate() {
            assert_eq!(rec.t, k as f64 / 200.0);
        }
        assert_eq!(r.telemetry[0].theta_filt, 0.1);
    }

    #[test]
    fn pid_balances_from_tilt() {
        let r = run_closed_loop(&Scenario::reference(ControllerKind::Pid)).unwrap();
        assert!(r.aborted.is_none());
        assert!(r.settled, "{:?}", r.metrics);
        let last = r.telemetry.last().unwrap();
        assert!(last.theta_filt.abs() < 0.02 * 0.1);
    }

    #[test]
    fn runs_are_deterministic_with_noise() {
        let mut s = short(ControllerKind::LeadLag, 3.0);
        s.imu.accel_noise_std = 0.002;
        s.imu.gyro_noise_std = 0.001;
        s.imu.seed = 11;
        let a = run_closed_loop(&s).unwrap();
        let b = run_closed_loop(&s).unwrap();
        assert_eq!(a.telemetry, b.telemetry);
        s.imu.seed = 12;
        assert_ne!(run_closed_loop(&s).unwrap().telemetry, a.telemetry);
    }

    #[test]
    fn actuation_stays_in_range() {
        let mut s = short(ControllerKind::Flc, 5.0);
        s.initial_state = PlantState::tilted(0.4);
        let r = run_closed_loop(&s).unwrap();
        for rec in &r.telemetry {
            assert!(rec.u_sat.abs() <= 255.0);
            assert_eq!(rec.u_sat, rec.u.clamp(-255.0, 255.0));
        }
    }

    #[test]
    fn unforced_energy_never_increases() {
        let mut s = short(ControllerKind::Pid, 3.0);
        s.controller = ControllerConfig::Pid(PidGains::new(0.0, 0.0, 0.0));
        s.initial_state = PlantState {
            x: 0.0,
            theta_p: 0.3,
            v: 0.5,
            omega_p: -1.0,
        };
        let mut engine = Engine::new(&s).unwrap();
        let mut e_prev = total_energy(engine.params(), engine.state()).total();
        while !engine.is_finished() {
            engine.tick().unwrap();
            let e = total_energy(engine.params(), engine.state()).total();
            assert!(e <= e_prev + 1e-12, "{e} > {e_prev}");
            e_prev = e;
        }
    }

    #[test]
    fn disturbance_kicks_the_chassis() {
        let mut s = short(ControllerKind::Pid, 2.0);
        s.initial_state = PlantState::upright();
        s.disturbances.push(crate::sim::Disturbance { time: 0.5, impulse: 0.01 });
        let r = run_closed_loop(&s).unwrap();
        let k = 100;
        assert_eq!(r.telemetry[k].theta_true, 0.0);
        assert!(r.telemetry[k + 1].theta_true.abs() > 0.0);
        assert!(r.telemetry[..=k].iter().all(|rec| rec.u == 0.0));
    }

    #[test]
    fn live_gain_change_bumps_revision() {
        let mut engine = Engine::new(&short(ControllerKind::Pid, 1.0)).unwrap();
        let a = engine.tick().unwrap();
        engine
            .apply_gains(&GainUpdate {
                kp: Some(12.0),
                ..Default::default()
            })
            .unwrap();
        let b = engine.tick().unwrap();
        assert_eq!((a.controller_revision, b.controller_revision), (0, 1));
    }

    #[test]
    fn abort_keeps_partial_telemetry() {
        let mut s = short(ControllerKind::Pid, 1.0);
        // kp large enough to drive the state to infinity
        s.controller = ControllerConfig::Pid(PidGains::new(f64::MAX, 0.0, 0.0));
        s.initial_state = PlantState::tilted(-0.1);
        s.tau_max = f64::MAX;
        let r = run_closed_loop(&s).unwrap();
        assert!(r.aborted.is_some());
        assert!(!r.settled);
        assert!(r.telemetry.len() < 200);
    }
}
