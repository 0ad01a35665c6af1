//! Simulation and controller-design workbench for a two-wheeled self-balancing
//! robot (TWSBR).
//!
//! The crate is organised bottom-up:
//!
//! * [`plant`] – nonlinear planar dynamics, energy bookkeeping, RK4 integration
//!   and linearization to state space.
//! * [`sensors`] – a seeded IMU model and the complementary filter.
//! * [`controllers`] – discrete PID, lead-lag (continuous definition plus
//!   Tustin biquads), a PID-like fuzzy controller and PWM saturation.
//! * [`analysis`] – state-space to transfer function, polynomial roots, root
//!   locus sweeps and step-response metrics.
//! * [`sim`] – the closed-loop scenario engine, telemetry and comparisons.
//! * [`server`] – the live-session protocol used by the front panel.

pub mod analysis;
pub mod controllers;
pub mod error;
pub mod plant;
pub mod sensors;
pub mod server;
pub mod sim;
pub mod tf;

pub use error::{Error, Result};
pub use plant::{PlantState, RobotParams, StateSpaceModel, WheelTorque};
pub use tf::RationalTF;
