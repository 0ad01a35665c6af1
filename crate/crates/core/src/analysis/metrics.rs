use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    /// Entry time into the tolerance tube after which the signal never
    /// leaves it; `None` when the signal is outside the tube at the end.
    pub settling_time: Option<f64>,
    pub overshoot_pct: f64,
    pub steady_state_error: f64,
    pub peak_time: f64,
}

impl StepMetrics {
    pub fn settled(&self) -> bool {
        self.settling_time.is_some()
    }

    /// Settling time with "not settled" ranked after every finite time.
    pub fn settling_rank(&self) -> f64 {
        self.settling_time.unwrap_or(f64::INFINITY)
    }
}

/// Step-response metrics for a uniformly sampled signal `y(t_i)`.
///
/// The tube half-width is `band_pct/100 * |target|`, or
/// `band_pct/100 * |y(0)|` when regulating to zero.
pub fn step_metrics(t: &[f64], y: &[f64], target: f64, band_pct: f64) -> Result<StepMetrics> {
    if t.len() != y.len() || t.len() < 2 {
        return Err(Error::param("traj", "need at least two samples of equal length"));
    }
    if !(t[t.len() - 1] > t[0]) {
        return Err(Error::param("traj", "duration must be > 0"));
    }
    let scale = if target != 0.0 { target.abs() } else { y[0].abs() };
    let band = band_pct / 100.0 * scale;

    let last_outside = y.iter().rposition(|v| (v - target).abs() > band);
    let settling_time = match last_outside {
        None => Some(0.0),
        Some(i) if i + 1 < y.len() => Some(t[i + 1] - t[0]),
        Some(_) => None,
    };

    let step = target - y[0];
    let (overshoot_pct, peak_time) = if step == 0.0 {
        (0.0, 0.0)
    } else {
        let dir = step.signum();
        let (peak_idx, _) = y
            .iter()
            .enumerate()
            .map(|(i, v)| (i, (v - y[0]) * dir))
            .fold((0usize, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        let excess = y
            .iter()
            .map(|v| (v - target) * dir)
            .fold(0.0f64, f64::max);
        (100.0 * excess / step.abs(), t[peak_idx] - t[0])
    };

    let tail = (y.len() / 10).max(1);
    let steady_state_error = y[y.len() - tail..]
        .iter()
        .map(|v| (v - target).abs())
        .sum::<f64>()
        / tail as f64;

    Ok(StepMetrics {
        settling_time,
        overshoot_pct,
        steady_state_error,
        peak_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(dt: f64, duration: f64) -> Vec<f64> {
        (0..=(duration / dt).round() as usize).map(|i| i as f64 * dt).collect()
    }

    #[test]
    fn constant_at_target() {
        let t = grid(0.01, 1.0);
        let y = vec![1.0; t.len()];
        let m = step_metrics(&t, &y, 1.0, 2.0).unwrap();
        assert_eq!(m.settling_time, Some(0.0));
        assert_eq!(m.overshoot_pct, 0.0);
        assert_eq!(m.steady_state_error, 0.0);
    }

    #[test]
    fn second_order_overshoot() {
        let zeta: f64 = 0.6;
        let wn = 2.0;
        let wd = wn * (1.0 - zeta * zeta).sqrt();
        let phi = zeta.acos();
        let t = grid(1e-3, 10.0);
        let y: Vec<f64> = t
            .iter()
            .map(|&t| 1.0 - (-zeta * wn * t).exp() / (1.0 - zeta * zeta).sqrt() * (wd * t + phi).sin())
            .collect();
        let m = step_metrics(&t, &y, 1.0, 2.0).unwrap();
        let expected = 100.0 * (-std::f64::consts::PI * zeta / (1.0 - zeta * zeta).sqrt()).exp();
        assert!((expected - 9.4780).abs() < 1e-3);
        assert!((m.overshoot_pct - expected).abs() < 0.1, "{}", m.overshoot_pct);
        assert!((m.peak_time - std::f64::consts::PI / wd).abs() < 2e-3);
    }

    #[test]
    fn exponential_settling() {
        let dt = 1e-3;
        let t = grid(dt, 8.0);
        let y: Vec<f64> = t.iter().map(|t| 1.0 + (-t).exp()).collect();
        let m = step_metrics(&t, &y, 1.0, 2.0).unwrap();
        let ts = m.settling_time.unwrap();
        assert!((ts - 50f64.ln()).abs() <= dt, "{ts}");
    }

    #[test]
    fn regulation_to_zero_uses_initial_value() {
        let t = grid(0.01, 5.0);
        let y: Vec<f64> = t.iter().map(|t| 0.1 * (-2.0 * t).exp()).collect();
        let m = step_metrics(&t, &y, 0.0, 2.0).unwrap();
        let ts = m.settling_time.unwrap();
        assert!((ts - 50f64.ln() / 2.0).abs() <= 0.01);
        assert_eq!(m.overshoot_pct, 0.0);
    }

    #[test]
    fn unsettled_is_flagged() {
        let t = grid(0.01, 5.0);
        let y: Vec<f64> = t.iter().map(|t| 0.1 * (3.0 * t).cos()).collect();
        let m = step_metrics(&t, &y, 0.0, 2.0).unwrap();
        assert!(!m.settled());
        assert_eq!(m.settling_rank(), f64::INFINITY);
        assert!(step_metrics(&[0.0], &[1.0], 1.0, 2.0).is_err());
    }
}
