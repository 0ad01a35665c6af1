use serde::{Deserialize, Serialize};

use super::engine::run_closed_loop;
use super::scenario::Scenario;
use crate::analysis::StepMetrics;
use crate::controllers::{ControllerConfig, ControllerKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub controller: ControllerKind,
    pub metrics: Option<StepMetrics>,
    /// `sum |u_sat| dt`
    pub effort: f64,
    pub max_abs_theta: f64,
    /// Set when the run aborted or could not be built.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
}

/// Runs every controller on the same scenario (same seed and initial state).
/// Rows keep the input order; a failing row does not stop the others.
pub fn compare_controllers(base: &Scenario, controllers: &[ControllerConfig]) -> Result<ComparisonReport> {
    if controllers.len() < 2 {
        return Err(Error::param("controllers", "need at least two controllers"));
    }
    base.validate()?;
    let rows = controllers
        .iter()
        .map(|c| {
            let scenario = Scenario {
                controller: *c,
                ..base.clone()
            };
            match run_closed_loop(&scenario) {
                Ok(r) => ComparisonRow {
                    controller: c.kind(),
                    metrics: r.metrics,
                    effort: r.effort(),
                    max_abs_theta: r.max_abs_theta(),
                    error: r.aborted.as_ref().map(|e| e.to_string()),
                },
                Err(e) => ComparisonRow {
                    controller: c.kind(),
                    metrics: None,
                    effort: f64::NAN,
                    max_abs_theta: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(ComparisonReport { rows })
}
