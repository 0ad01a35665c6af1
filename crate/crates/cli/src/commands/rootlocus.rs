use std::fs::File;
use std::io::{BufWriter, Write};

use twsbr_core::analysis::locus::{linear_grid, log_grid};
use twsbr_core::analysis::{plant_tf, root_locus};
use twsbr_core::controllers::{ControllerConfig, ControllerKind};
use twsbr_core::sim::Scenario;
use twsbr_core::RationalTF;

use super::load_scenario;
use crate::args::{CompensatorArg, GridArg, RootlocusArgs};
use crate::error::{io_error, CliError, CliResult};

pub fn run(args: &RootlocusArgs) -> CliResult {
    let gains = gain_grid(args)?;
    let scenario = match &args.scenario {
        Some(p) => load_scenario(p)?,
        None => Scenario::reference(ControllerKind::Pid),
    };
    let plant = plant_tf(&scenario.params)
        .map_err(|e| CliError::Config(e.to_string()))?
        .scaled(scenario.actuator_gain());
    let compensator = compensator(args.compensator);

    let locus = root_locus(&plant, &compensator, &gains).map_err(|e| {
        CliError::Runtime(format!("root locus failed: {e}"))
    })?;

    let file = File::create(&args.out).map_err(|e| io_error(&args.out, e))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "gain,re,im,branch")?;
        for (k, poles) in locus.gains.iter().zip(&locus.poles) {
            for (branch, p) in poles.iter().enumerate() {
                writeln!(w, "{},{},{},{}", fmt(*k), fmt(p.re), fmt(p.im), branch)?;
            }
        }
        w.flush()
    };
    write(&mut w).map_err(|e| io_error(&args.out, e))
}

fn fmt(v: f64) -> String {
    twsbr_core::sim::format_g9(v)
}

/// Loop shape whose overall gain is swept.
fn compensator(arg: CompensatorArg) -> RationalTF {
    let kind = match arg {
        CompensatorArg::None => return RationalTF::constant(1.0),
        CompensatorArg::Pid => ControllerKind::Pid,
        CompensatorArg::Leadlag => ControllerKind::LeadLag,
    };
    let config = ControllerConfig::reference(kind);
    let tf = config.continuous_tf().expect("linear controller");
    match config {
        // sweep K_c itself
        ControllerConfig::LeadLag(c) => tf.scaled(1.0 / c.kc),
        _ => tf,
    }
}

fn gain_grid(args: &RootlocusArgs) -> CliResult<Vec<f64>> {
    let (min, max, n) = (args.kmin, args.kmax, args.points);
    if !(min.is_finite() && max.is_finite() && min > 0.0) {
        return Err(CliError::Config("gains must be finite and > 0".into()));
    }
    if n == 1 {
        if min != max {
            return Err(CliError::Config("a single-point grid needs --kmin equal to --kmax".into()));
        }
        return Ok(vec![min]);
    }
    if n < 2 || !(min < max) {
        return Err(CliError::Config("need --kmin < --kmax and --points >= 2".into()));
    }
    Ok(match args.grid {
        GridArg::Log => log_grid(min, max, n),
        GridArg::Linear => linear_grid(min, max, n),
    })
}
