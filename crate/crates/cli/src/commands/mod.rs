pub mod compare;
pub mod rootlocus;
pub mod serve;
pub mod simulate;

use std::path::{Path, PathBuf};

use twsbr_core::controllers::ControllerKind;
use twsbr_core::sim::Scenario;

use crate::args::ControllerArg;
use crate::error::{CliError, CliResult};

pub fn load_scenario(path: &Path) -> CliResult<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Scenario::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn kind(arg: ControllerArg) -> ControllerKind {
    match arg {
        ControllerArg::Pid => ControllerKind::Pid,
        ControllerArg::LeadLag => ControllerKind::LeadLag,
        ControllerArg::Flc => ControllerKind::Flc,
    }
}

/// `dir/stem.csv` -> `dir/stem<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "not_settled".to_string(), |v| format!("{v:.3}"))
}
