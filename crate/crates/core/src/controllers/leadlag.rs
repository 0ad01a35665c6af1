use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tf::{polymul, RationalTF};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadLagParams {
    pub kc: f64,
    pub tau_lead: f64,
    pub alpha: f64,
    pub tau_lag: f64,
    pub beta: f64,
}

impl LeadLagParams {
    /// Compensator designed on the root locus for 0.7 s settling and 6%
    /// overshoot.
    pub fn reference() -> Self {
        LeadLagParams {
            kc: 3.25,
            tau_lead: 0.1095,
            alpha: 0.4494,
            tau_lag: 1.123,
            beta: 7.1439,
        }
    }

    /// Checks the structural constraints. `alpha = beta = 1` is accepted as
    /// the degenerate pure-gain case.
    pub fn validate(&self) -> Result<()> {
        let finite_positive = |field, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(field, format!("must be > 0, got {v}")))
            }
        };
        finite_positive("kc", self.kc)?;
        finite_positive("tau_lead", self.tau_lead)?;
        finite_positive("tau_lag", self.tau_lag)?;
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::param("alpha", format!("must be in (0, 1], got {}", self.alpha)));
        }
        if !(self.beta >= 1.0 && self.beta.is_finite()) {
            return Err(Error::param("beta", format!("must be >= 1, got {}", self.beta)));
        }
        Ok(())
    }
}

/// Lead-lag compensator
///
/// ```text
///            alpha (tau_lead s + 1)     (tau_lag s + 1)
/// Gc(s) = Kc ---------------------- * ----------------
///            (alpha tau_lead s + 1)   (beta tau_lag s + 1)
/// ```
///
/// The lead section has unit high-frequency gain and the lag section unit DC
/// gain, so `Gc(0) = Kc * alpha`. Returned with a monic denominator.
pub fn leadlag_tf(p: &LeadLagParams) -> RationalTF {
    let num = polymul(&[p.tau_lead, 1.0], &[p.tau_lag, 1.0])
        .into_iter()
        .map(|c| c * p.kc * p.alpha)
        .collect();
    let den = polymul(&[p.alpha * p.tau_lead, 1.0], &[p.beta * p.tau_lag, 1.0]);
    RationalTF { num, den }.monic()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    const REFERENCE_NUM: [f64; 3] = [0.13998, 1.40322, 1.1381];
    const REFERENCE_DEN: [f64; 3] = [1.0, 20.4484, 2.53227];

    #[test]
    fn reproduces_reference_coefficients() {
        let p = LeadLagParams::reference();
        let tf = leadlag_tf(&p);
        for (got, want) in tf.den.iter().zip(REFERENCE_DEN) {
            assert!(((got - want) / want).abs() < 1e-3, "{got} vs {want}");
        }
        for (got, want) in tf.num.iter().zip(REFERENCE_NUM) {
            let want = want * p.kc;
            assert!(((got - want) / want).abs() < 1e-3, "{got} vs {want}");
        }
    }

    #[test]
    fn unit_ratios_cancel() {
        let p = LeadLagParams {
            alpha: 1.0,
            beta: 1.0,
            ..LeadLagParams::reference()
        };
        let tf = leadlag_tf(&p);
        for s in [0.0, 0.3, 5.0, 100.0] {
            let v = tf.eval(Complex64::new(0.0, s));
            assert!((v - Complex64::new(p.kc, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn dc_gain() {
        let tf = leadlag_tf(&LeadLagParams::reference());
        let expected: f64 = 3.25 * 1.1381 / 2.53227;
        assert!((expected - 1.4607).abs() < 1e-4);
        assert!((tf.dc_gain() - expected).abs() < 1e-3);
    }

    #[test]
    fn poles_and_zeros_from_time_constants() {
        let p = LeadLagParams::reference();
        let tf = leadlag_tf(&p);
        let poles = tf.poles().unwrap();
        let zeros = tf.zeros().unwrap();
        let want_p = [-1.0 / (p.alpha * p.tau_lead), -1.0 / (p.beta * p.tau_lag)];
        let want_z = [-1.0 / p.tau_lead, -1.0 / p.tau_lag];
        for (g, w) in poles.iter().zip(want_p) {
            assert!((g.re - w).abs() < 1e-9 * w.abs() && g.im == 0.0);
        }
        for (g, w) in zeros.iter().zip(want_z) {
            assert!((g.re - w).abs() < 1e-9 * w.abs() && g.im == 0.0);
        }
        assert!((poles[0].re + 20.32).abs() < 0.01 && (poles[1].re + 0.1247).abs() < 1e-4);
        assert!((zeros[0].re + 9.13).abs() < 0.01 && (zeros[1].re + 0.890).abs() < 1e-3);
    }

    #[test]
    fn validation() {
        assert!(LeadLagParams::reference().validate().is_ok());
        let bad = LeadLagParams { alpha: 1.5, ..LeadLagParams::reference() };
        assert!(bad.validate().is_err());
        let bad = LeadLagParams { beta: 0.5, ..LeadLagParams::reference() };
        assert!(bad.validate().is_err());
        let bad = LeadLagParams { tau_lag: 0.0, ..LeadLagParams::reference() };
        assert!(bad.validate().is_err());
    }
}
