use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::controllers::ControllerKind;

/// One control tick as seen by the operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRecord {
    pub t: f64,
    pub theta_acc: f64,
    /// Pure gyro integration, seeded with the first accelerometer reading.
    pub theta_gyro: f64,
    pub theta_filt: f64,
    /// Gyro rate reading [rad/s].
    pub omega: f64,
    pub u: f64,
    pub u_sat: f64,
    pub pwm_left: u8,
    pub pwm_right: u8,
    pub controller_id: ControllerKind,
    /// Gain revision of the controller that produced `u`.
    pub controller_revision: u64,
    /// True chassis tilt at the start of the tick.
    pub theta_true: f64,
}

pub const CSV_HEADER: &str = "t,theta_acc,theta_gyro,theta_filt,omega,u,u_sat,pwm_left,pwm_right";

/// `printf("%.9g")` formatting, with negative zero printed as `0`.
pub fn format_g9(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl TelemetryRecord {
    pub fn csv_row(&self) -> String {
        let floats = [
            self.t,
            self.theta_acc,
            self.theta_gyro,
            self.theta_filt,
            self.omega,
            self.u,
            self.u_sat,
        ];
        let mut row: Vec<String> = floats.iter().map(|v| format_g9(*v)).collect();
        row.push(self.pwm_left.to_string());
        row.push(self.pwm_right.to_string());
        row.join(",")
    }
}

pub fn write_csv<W: Write>(mut out: W, records: &[TelemetryRecord]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    out.flush()
}
