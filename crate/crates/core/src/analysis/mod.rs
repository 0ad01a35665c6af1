//! Transfer functions, root finding, root-locus sweeps and step metrics.

pub mod locus;
pub mod metrics;
pub mod roots;
pub mod sstf;

use num_complex::Complex64;

pub use locus::{closed_loop_poles, root_locus, RootLocusData};
pub use metrics::{step_metrics, StepMetrics};
pub use roots::{poly_roots, PolyRoots};
pub use sstf::ss_to_tf;

use crate::error::Result;
use crate::plant::{linearize, RobotParams};
use crate::tf::RationalTF;

/// Minimal tilt-per-torque transfer function `theta_p / (tau_L + tau_R)`.
///
/// The ground position is not observable from the tilt, so the pole/zero
/// pair it contributes at the origin is cancelled.
pub fn plant_tf(params: &RobotParams) -> Result<RationalTF> {
    let full = ss_to_tf(&linearize(params)?)?;
    Ok(full.cancel_common_origin_roots(1e-12))
}

/// Second-order pole target for a settling time (2% band, `4 / (zeta wn)`)
/// and fractional overshoot.
pub fn second_order_target(settling_time: f64, overshoot: f64) -> Complex64 {
    let log = -overshoot.ln();
    let zeta = log / (std::f64::consts::PI.powi(2) + log * log).sqrt();
    let wn = 4.0 / (zeta * settling_time);
    Complex64::new(-zeta * wn, wn * (1.0 - zeta * zeta).sqrt())
}

/// Upper-half-plane member of the complex pair closest to the imaginary axis.
pub fn dominant_complex_pole(poles: &[Complex64]) -> Option<Complex64> {
    poles
        .iter()
        .filter(|p| p.im > 1e-9)
        .max_by(|a, b| a.re.total_cmp(&b.re))
        .copied()
}
