//! Planar dynamics of the robot: chassis pendulum on a driven wheel pair.
//!
//! Generalised coordinates are the ground position `x` and the chassis tilt
//! `theta_p` (zero is upright). The equations of motion follow from the
//! Lagrangian built out of the chassis and wheel kinetic energies, the
//! gravitational potential `m g l cos(theta_p)` and the Rayleigh dissipation
//! `mu0 v^2 + mu1 omega_p^2`. Wheel torque enters the tilt equation only.

use nalgebra::{Matrix4, RowVector4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Determinant threshold below which the configuration mass matrix is treated
/// as singular.
pub const MASS_MATRIX_TOL: f64 = 1e-12;

/// Physical constants of the robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RobotParamsDoc", into = "RobotParamsDoc")]
pub struct RobotParams {
    /// Chassis mass [kg].
    pub m: f64,
    /// Mass of one wheel [kg].
    pub wheel_mass: f64,
    /// Distance from the axle to the chassis centre of mass [m].
    pub l: f64,
    /// Wheel radius [m].
    pub wheel_radius: f64,
    /// Rotational inertia of one wheel [kg m^2].
    pub j_w: f64,
    /// Chassis rotational inertia about its centre of mass [kg m^2].
    pub j_c: f64,
    /// Wheel/ground friction coefficient.
    pub mu0: f64,
    /// Chassis/axle friction coefficient.
    pub mu1: f64,
    /// Gravitational acceleration [m/s^2].
    pub g: f64,
}

/// On-disk form of [`RobotParams`]. `J_w` may be omitted, in which case the
/// wheels are treated as solid discs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotParamsDoc {
    m: f64,
    #[serde(rename = "M")]
    wheel_mass: f64,
    l: f64,
    #[serde(rename = "R")]
    wheel_radius: f64,
    #[serde(rename = "J_w", default, skip_serializing_if = "Option::is_none")]
    j_w: Option<f64>,
    #[serde(rename = "J_c")]
    j_c: f64,
    mu0: f64,
    mu1: f64,
    #[serde(default = "default_g")]
    g: f64,
}

fn default_g() -> f64 {
    9.81
}

impl TryFrom<RobotParamsDoc> for RobotParams {
    type Error = Error;

    fn try_from(doc: RobotParamsDoc) -> Result<Self> {
        let j_w = doc
            .j_w
            .unwrap_or(0.5 * doc.wheel_mass * doc.wheel_radius * doc.wheel_radius);
        let params = RobotParams {
            m: doc.m,
            wheel_mass: doc.wheel_mass,
            l: doc.l,
            wheel_radius: doc.wheel_radius,
            j_w,
            j_c: doc.j_c,
            mu0: doc.mu0,
            mu1: doc.mu1,
            g: doc.g,
        };
        params.validate()?;
        Ok(params)
    }
}

impl From<RobotParams> for RobotParamsDoc {
    fn from(p: RobotParams) -> Self {
        RobotParamsDoc {
            m: p.m,
            wheel_mass: p.wheel_mass,
            l: p.l,
            wheel_radius: p.wheel_radius,
            j_w: Some(p.j_w),
            j_c: p.j_c,
            mu0: p.mu0,
            mu1: p.mu1,
            g: p.g,
        }
    }
}

impl RobotParams {
    /// Identified kit parameters with solid-disc wheels and the workbench's
    /// default chassis inertia of 5e-3 kg m^2.
    pub fn reference() -> Self {
        let wheel_mass = 0.08;
        let wheel_radius = 0.035;
        RobotParams {
            m: 0.75,
            wheel_mass,
            l: 0.02,
            wheel_radius,
            j_w: 0.5 * wheel_mass * wheel_radius * wheel_radius,
            j_c: 5e-3,
            mu0: 0.1,
            mu1: 0.0,
            g: 9.81,
        }
    }

    /// Effective translational mass `m + 2M + 2 J_w / R^2`.
    pub fn num(&self) -> f64 {
        self.m + 2.0 * self.wheel_mass + 2.0 * self.j_w / (self.wheel_radius * self.wheel_radius)
    }

    /// Chassis inertia about the axle, `m l^2 + J_c`.
    pub fn tilt_inertia(&self) -> f64 {
        self.m * self.l * self.l + self.j_c
    }

    /// Upright determinant of the mass matrix, `num (m l^2 + J_c) - (m l)^2`.
    pub fn den(&self) -> f64 {
        let ml = self.m * self.l;
        self.num() * self.tilt_inertia() - ml * ml
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m", self.m),
            ("M", self.wheel_mass),
            ("l", self.l),
            ("R", self.wheel_radius),
            ("g", self.g),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::param(field, format!("must be > 0, got {value}")));
            }
        }
        let non_negative = [
            ("J_w", self.j_w),
            ("J_c", self.j_c),
            ("mu0", self.mu0),
            ("mu1", self.mu1),
        ];
        for (field, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::param(field, format!("must be >= 0, got {value}")));
            }
        }
        let den = self.den();
        if den <= MASS_MATRIX_TOL {
            return Err(Error::param("J_c", format!("den = {den:e} must be > 0")));
        }
        Ok(())
    }
}

/// State vector `[x, theta_p, v, omega_p]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantState {
    #[serde(default)]
    pub x: f64,
    #[serde(default)]
    pub theta_p: f64,
    #[serde(default)]
    pub v: f64,
    #[serde(default)]
    pub omega_p: f64,
}

impl PlantState {
    pub fn upright() -> Self {
        Self::default()
    }

    pub fn tilted(theta_p: f64) -> Self {
        PlantState {
            theta_p,
            ..Self::default()
        }
    }

    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.x, self.theta_p, self.v, self.omega_p)
    }

    pub fn from_vector(v: Vector4<f64>) -> Self {
        PlantState {
            x: v[0],
            theta_p: v[1],
            v: v[2],
            omega_p: v[3],
        }
    }

    /// Tilt wrapped to (-pi, pi]. Integration keeps the raw angle.
    pub fn wrapped_theta(&self) -> f64 {
        wrap_angle(self.theta_p)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.theta_p.is_finite() && self.v.is_finite() && self.omega_p.is_finite()
    }
}

pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::PI;
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WheelTorque {
    pub tau_l: f64,
    pub tau_r: f64,
}

impl WheelTorque {
    pub fn symmetric(per_wheel: f64) -> Self {
        WheelTorque {
            tau_l: per_wheel,
            tau_r: per_wheel,
        }
    }

    pub fn total(&self) -> f64 {
        self.tau_l + self.tau_r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateDerivative {
    pub dx: f64,
    pub dtheta_p: f64,
    pub dv: f64,
    pub domega_p: f64,
}

impl StateDerivative {
    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.dx, self.dtheta_p, self.dv, self.domega_p)
    }
}

/// Exact nonlinear state derivative.
///
/// Solves the 2x2 configuration-dependent system
///
/// ```text
/// [ num          m l cos th ] [ dv      ]   [ m l sin th w^2 - 2 mu0 v             ]
/// [ m l cos th   m l^2 + Jc ] [ domega  ] = [ tau_L + tau_R + m g l sin th - 2 mu1 w ]
/// ```
pub fn nonlinear_dynamics(
    params: &RobotParams,
    state: &PlantState,
    torque: &WheelTorque,
) -> Result<StateDerivative> {
    let (s, c) = state.theta_p.sin_cos();
    let ml = params.m * params.l;
    let a11 = params.num();
    let a12 = ml * c;
    let a22 = params.tilt_inertia();
    let det = a11 * a22 - a12 * a12;
    if det.abs() < MASS_MATRIX_TOL {
        return Err(Error::SingularMassMatrix { det });
    }
    let r1 = ml * s * state.omega_p * state.omega_p - 2.0 * params.mu0 * state.v;
    let r2 = torque.total() + ml * params.g * s - 2.0 * params.mu1 * state.omega_p;
    Ok(StateDerivative {
        dx: state.v,
        dtheta_p: state.omega_p,
        dv: (a22 * r1 - a12 * r2) / det,
        domega_p: (a11 * r2 - a12 * r1) / det,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub ke_chassis: f64,
    pub ke_wheels: f64,
    pub ke_total: f64,
    pub pe: f64,
    /// Rayleigh function `mu0 v^2 + mu1 omega_p^2`. The mechanical power
    /// removed from the system is twice this value.
    pub dissipation_rate: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.ke_total + self.pe
    }

    pub fn power_loss(&self) -> f64 {
        2.0 * self.dissipation_rate
    }
}

pub fn total_energy(params: &RobotParams, state: &PlantState) -> EnergyBreakdown {
    let RobotParams {
        m,
        wheel_mass,
        l,
        wheel_radius,
        j_w,
        j_c,
        mu0,
        mu1,
        g,
    } = *params;
    let PlantState {
        theta_p, v, omega_p, ..
    } = *state;
    let c = theta_p.cos();
    let ke_chassis = 0.5 * m * (v * v + l * l * omega_p * omega_p)
        + m * v * l * omega_p * c
        + 0.5 * j_c * omega_p * omega_p;
    let ke_wheels = wheel_mass * v * v + j_w * v * v / (wheel_radius * wheel_radius);
    EnergyBreakdown {
        ke_chassis,
        ke_wheels,
        ke_total: ke_chassis + ke_wheels,
        pe: m * g * l * c,
        dissipation_rate: mu0 * v * v + mu1 * omega_p * omega_p,
    }
}

/// One classical fourth-order Runge-Kutta step with the torque held constant.
pub fn rk4_step(
    params: &RobotParams,
    state: &PlantState,
    torque: &WheelTorque,
    dt: f64,
) -> Result<PlantState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", format!("must be > 0, got {dt}")));
    }
    let f = |x: Vector4<f64>| -> Result<Vector4<f64>> {
        Ok(nonlinear_dynamics(params, &PlantState::from_vector(x), torque)?.to_vector())
    };
    let x0 = state.to_vector();
    let k1 = f(x0)?;
    let k2 = f(x0 + k1 * (dt / 2.0))?;
    let k3 = f(x0 + k2 * (dt / 2.0))?;
    let k4 = f(x0 + k3 * dt)?;
    Ok(PlantState::from_vector(
        x0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0),
    ))
}

/// Linearized model `xdot = A x + B u`, `y = C x` with `u = tau_L + tau_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub a: Matrix4<f64>,
    pub b: Vector4<f64>,
    pub c: RowVector4<f64>,
    pub num: f64,
    pub den: f64,
}

impl StateSpaceModel {
    pub fn with_output(mut self, c: RowVector4<f64>) -> Self {
        self.c = c;
        self
    }

    pub fn derivative(&self, state: &PlantState, u: f64) -> Vector4<f64> {
        self.a * state.to_vector() + self.b * u
    }

    /// Eigenvalues of `A`.
    pub fn open_loop_poles(&self) -> Vec<num_complex::Complex64> {
        self.a
            .complex_eigenvalues()
            .iter()
            .map(|z| num_complex::Complex64::new(z.re, z.im))
            .collect()
    }
}

/// Linearize about the upright equilibrium (`sin th ~ th`, `cos th ~ 1`,
/// products of state variables dropped).
pub fn linearize(params: &RobotParams) -> Result<StateSpaceModel> {
    params.validate()?;
    let num = params.num();
    let den = params.den();
    let ml = params.m * params.l;
    let inertia = params.tilt_inertia();
    let (mu0, mu1, g) = (params.mu0, params.mu1, params.g);
    #[rustfmt::skip]
    let a = Matrix4::new(
        0.0, 0.0,                    1.0,                          0.0,
        0.0, 0.0,                    0.0,                          1.0,
        0.0, -ml * ml * g / den,     -2.0 * mu0 * inertia / den,   2.0 * ml * mu1 / den,
        0.0, ml * g * num / den,     2.0 * mu0 * ml / den,         -2.0 * mu1 * num / den,
    );
    let b = Vector4::new(0.0, 0.0, -ml / den, num / den);
    Ok(StateSpaceModel {
        a,
        b,
        c: RowVector4::new(0.0, 1.0, 0.0, 0.0),
        num,
        den,
    })
}
