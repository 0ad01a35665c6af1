//! Simulated IMU and complementary filter.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::PlantState;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImuConfig {
    /// Accelerometer tilt noise [rad].
    #[serde(default)]
    pub accel_noise_std: f64,
    /// Gyro rate noise [rad/s].
    #[serde(default)]
    pub gyro_noise_std: f64,
    /// Constant gyro bias [rad/s].
    #[serde(default)]
    pub gyro_bias: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ImuConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("accel_noise_std", self.accel_noise_std), ("gyro_noise_std", self.gyro_noise_std)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(field, format!("must be >= 0, got {v}")));
            }
        }
        if !self.gyro_bias.is_finite() {
            return Err(Error::param("gyro_bias", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuReading {
    pub theta_acc: f64,
    pub omega_gyro: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterState {
    pub theta_filt: f64,
    pub weight: f64,
}

impl FilterState {
    pub fn new(theta_filt: f64, weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::param("filter_weight", format!("must be in [0, 1], got {weight}")));
        }
        Ok(FilterState { theta_filt, weight })
    }
}

/// Two standard normal draws for sample `index`. Each index owns its own
/// ChaCha stream, so a reading depends only on `(seed, index)`.
fn gaussian_pair(seed: u64, index: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
}

/// Noisy tilt and rate for the true state; `index` selects the noise sample.
pub fn sample_imu(state: &PlantState, config: &ImuConfig, t: f64, index: u64) -> ImuReading {
    let (na, ng) = if config.accel_noise_std == 0.0 && config.gyro_noise_std == 0.0 {
        (0.0, 0.0)
    } else {
        gaussian_pair(config.seed, index)
    };
    ImuReading {
        theta_acc: state.theta_p + config.accel_noise_std * na,
        omega_gyro: state.omega_p + config.gyro_bias + config.gyro_noise_std * ng,
        t,
    }
}

/// `theta <- w (theta + omega dt) + (1 - w) theta_acc`
pub fn complementary_filter(prev: &FilterState, reading: &ImuReading, dt: f64) -> FilterState {
    let w = prev.weight;
    FilterState {
        theta_filt: w * (prev.theta_filt + reading.omega_gyro * dt) + (1.0 - w) * reading.theta_acc,
        weight: w,
    }
}
