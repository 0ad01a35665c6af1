use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;

use twsbr_core::controllers::{Controller, ControllerConfig, GainUpdate};
use twsbr_core::sim::{run_closed_loop, write_csv, RunResult, Scenario};

use super::{fmt_opt, kind, load_scenario, sibling};
use crate::args::SimulateArgs;
use crate::error::{io_error, CliError, CliResult};

pub fn run(args: &SimulateArgs) -> CliResult {
    let mut scenario = load_scenario(&args.scenario)?;
    apply_overrides(&mut scenario, args)?;
    let result = run_closed_loop(&scenario).map_err(|e| CliError::Config(e.to_string()))?;

    let file = File::create(&args.out).map_err(|e| io_error(&args.out, e))?;
    write_csv(BufWriter::new(file), &result.telemetry).map_err(|e| io_error(&args.out, e))?;
    let metrics_path = sibling(&args.out, ".metrics.txt");
    std::fs::write(&metrics_path, summary(&scenario, &result)).map_err(|e| io_error(&metrics_path, e))?;

    match &result.aborted {
        Some(e) => Err(CliError::Runtime(format!(
            "{e} ({} rows kept in {})",
            result.telemetry.len(),
            args.out.display()
        ))),
        None => Ok(()),
    }
}

fn apply_overrides(scenario: &mut Scenario, args: &SimulateArgs) -> CliResult {
    if let Some(arg) = args.controller {
        let k = kind(arg);
        if scenario.controller.kind() != k {
            scenario.controller = ControllerConfig::reference(k);
        }
    }
    let update = GainUpdate {
        kp: args.kp,
        ki: args.ki,
        kd: args.kd,
        ku: args.ku,
        kc: args.kc,
    };
    if update != GainUpdate::default() {
        let mut c = Controller::new(&scenario.controller, scenario.control_rate)
            .map_err(|e| CliError::Config(e.to_string()))?;
        c.apply_gains(&update).map_err(|e| CliError::Config(e.to_string()))?;
        scenario.controller = c.config();
    }
    Ok(())
}

fn summary(scenario: &Scenario, r: &RunResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "controller: {}", scenario.controller.kind().as_str());
    let _ = writeln!(s, "ticks: {}", r.telemetry.len());
    if let Some(m) = &r.metrics {
        let _ = writeln!(s, "settling_time_s: {}", fmt_opt(m.settling_time));
        let _ = writeln!(s, "overshoot_pct: {:.4}", m.overshoot_pct);
        let _ = writeln!(s, "steady_state_error_rad: {:.6e}", m.steady_state_error);
        let _ = writeln!(s, "peak_time_s: {:.3}", m.peak_time);
    }
    let _ = writeln!(s, "effort: {:.6}", r.effort());
    let _ = writeln!(s, "max_abs_theta_rad: {:.6}", r.max_abs_theta());
    let _ = writeln!(s, "settled: {}", r.settled);
    if let Some(e) = &r.aborted {
        let _ = writeln!(s, "aborted: {e}");
    }
    s
}
