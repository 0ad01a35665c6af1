use crate::error::{Error, Result};
use crate::plant::RobotParams;

/// Chassis parameters after rigidly attaching a point mass `added_mass` at
/// height `mount_height` above the axle. The inertia about the new centre of
/// mass is recomposed with the parallel-axis theorem.
pub fn apply_mass_uncertainty(params: &RobotParams, added_mass: f64, mount_height: f64) -> Result<RobotParams> {
    if !(added_mass >= 0.0 && added_mass.is_finite()) {
        return Err(Error::param("added_mass", format!("must be >= 0, got {added_mass}")));
    }
    if !mount_height.is_finite() {
        return Err(Error::param("mount_height", "must be finite"));
    }
    if added_mass == 0.0 {
        return Ok(*params);
    }
    let m = params.m + added_mass;
    let l = (params.m * params.l + added_mass * mount_height) / m;
    let j_c = params.j_c
        + added_mass * (mount_height - l).powi(2)
        + params.m * (params.l - l).powi(2);
    Ok(RobotParams { m, l, j_c, ..*params })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mass_is_identity() {
        let p = RobotParams::reference();
        assert_eq!(apply_mass_uncertainty(&p, 0.0, 0.04).unwrap(), p);
    }

    #[test]
    fn coincident_mass_keeps_inertia() {
        let p = RobotParams::reference();
        let q = apply_mass_uncertainty(&p, p.m, p.l).unwrap();
        assert!((q.m - 2.0 * p.m).abs() < 1e-15);
        assert!((q.l - p.l).abs() < 1e-15);
        assert!((q.j_c - p.j_c).abs() < 1e-15);
    }

    #[test]
    fn robustness_payload() {
        let q = apply_mass_uncertainty(&RobotParams::reference(), 0.2, 0.04).unwrap();
        assert!((q.m - 0.95).abs() < 1e-12);
        assert!((q.l - 0.02421).abs() < 1e-5);
        // inertia about the axle grows by exactly the point-mass term
        let p = RobotParams::reference();
        let about_axle = |r: &RobotParams| r.j_c + r.m * r.l * r.l;
        assert!((about_axle(&q) - about_axle(&p) - 0.2 * 0.04 * 0.04).abs() < 1e-15);
    }

    #[test]
    fn negative_mass_rejected() {
        assert!(apply_mass_uncertainty(&RobotParams::reference(), -0.1, 0.04).is_err());
    }
}
