use std::fmt::Write as _;

use twsbr_core::controllers::ControllerConfig;
use twsbr_core::sim::{compare_controllers, format_g9, ComparisonReport};

use super::{fmt_opt, kind, load_scenario, sibling};
use crate::args::CompareArgs;
use crate::error::{io_error, CliError, CliResult};

pub fn run(args: &CompareArgs) -> CliResult {
    let scenario = load_scenario(&args.scenario)?;
    let configs: Vec<ControllerConfig> = args
        .controllers
        .iter()
        .map(|a| {
            let k = kind(*a);
            if scenario.controller.kind() == k {
                scenario.controller
            } else {
                ControllerConfig::reference(k)
            }
        })
        .collect();
    let report = compare_controllers(&scenario, &configs).map_err(|e| CliError::Config(e.to_string()))?;

    std::fs::write(&args.out, csv(&report)).map_err(|e| io_error(&args.out, e))?;
    let table = text_table(&report);
    let text_path = sibling(&args.out, ".txt");
    std::fs::write(&text_path, &table).map_err(|e| io_error(&text_path, e))?;
    print!("{table}");

    let failed: Vec<String> = report.rows.iter().filter_map(|r| r.error.clone()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(failed.join("; ")))
    }
}

fn csv(report: &ComparisonReport) -> String {
    let mut s = String::from("controller,settling_time,overshoot_pct,steady_state_error,effort,max_abs_theta,settled\n");
    for r in &report.rows {
        let m = r.metrics;
        let cell = |v: Option<f64>| v.map(format_g9).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.controller.as_str(),
            cell(m.and_then(|m| m.settling_time)),
            cell(m.map(|m| m.overshoot_pct)),
            cell(m.map(|m| m.steady_state_error)),
            format_g9(r.effort),
            format_g9(r.max_abs_theta),
            m.is_some_and(|m| m.settled()) && r.error.is_none(),
        );
    }
    s
}

fn text_table(report: &ComparisonReport) -> String {
    let header = ["controller", "settling [s]", "overshoot [%]", "sse [rad]", "effort", "max |theta| [rad]"];
    let rows: Vec<[String; 6]> = report
        .rows
        .iter()
        .map(|r| {
            let m = r.metrics;
            [
                r.controller.as_str().to_string(),
                m.map_or_else(|| "-".into(), |m| fmt_opt(m.settling_time)),
                m.map_or_else(|| "-".into(), |m| format!("{:.3}", m.overshoot_pct)),
                m.map_or_else(|| "-".into(), |m| format!("{:.3e}", m.steady_state_error)),
                format!("{:.4}", r.effort),
                format!("{:.4}", r.max_abs_theta),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|i| rows.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(header.to_vec(), &mut out);
    for r in &rows {
        line(r.iter().map(String::as_str).collect(), &mut out);
    }
    out
}
