//! Inverse strapdown: turns trajectory truth into body-frame IMU samples.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::trajectory::TrajectoryState;
use crate::earth::EarthModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    /// Specific force, body frame, m/s^2.
    pub f_b: Vector3<f64>,
    /// Angular rate relative to inertial space, body frame, rad/s.
    pub omega_b: Vector3<f64>,
}

/// Sensor error model. Noise is white with the given one-sided PSDs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct ImuErrors {
    pub accel_bias: [f64; 3],
    pub gyro_bias: [f64; 3],
    /// (m/s^2)^2/Hz
    pub accel_noise_psd: f64,
    /// (rad/s)^2/Hz
    pub gyro_noise_psd: f64,
}

impl ImuErrors {
    pub fn is_zero(&self) -> bool {
        *self == ImuErrors::default()
    }
}

/// Synthesizes IMU samples at `rate` from a trajectory sampled at an integer
/// multiple of that rate.
///
/// `f_b = Cᵀ (a_u − g(p_u) + 2 Ω×v_u) + bias + noise`; the Coriolis term
/// vanishes when Earth rotation is off.
pub fn synthesize_imu(
    traj: &[TrajectoryState],
    rate: f64,
    errors: &ImuErrors,
    earth: &EarthModel,
    seed: u64,
) -> Result<Vec<ImuSample>> {
    if traj.len() < 2 {
        return Err(Error::InvalidParameter("trajectory needs at least two samples".into()));
    }
    if !(rate > 0.0) {
        return Err(Error::InvalidParameter("IMU rate must be positive".into()));
    }
    let traj_dt = traj[1].t - traj[0].t;
    let ratio = 1.0 / (traj_dt * rate);
    let decim = ratio.round();
    if decim < 1.0 || (ratio - decim).abs() > 1e-6 {
        return Err(Error::InvalidParameter(format!(
            "trajectory step {traj_dt} s is not an integer fraction of the IMU period"
        )));
    }
    let decim = decim as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sa = (errors.accel_noise_psd * rate).sqrt();
    let sg = (errors.gyro_noise_psd * rate).sqrt();
    let ba = Vector3::from(errors.accel_bias);
    let bg = Vector3::from(errors.gyro_bias);
    let w = earth.omega_ie();
    let mut out = Vec::with_capacity(traj.len() / decim + 1);
    for s in traj.iter().step_by(decim) {
        let f_e = s.a_u - earth.gravity(&s.p_u) + 2.0 * w.cross(&s.v_u);
        let mut f_b = s.q.inverse_transform_vector(&f_e) + ba;
        let mut omega_b = s.omega_b + bg;
        if sa > 0.0 || sg > 0.0 {
            let n: [f64; 6] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
            f_b += sa * Vector3::new(n[0], n[1], n[2]);
            omega_b += sg * Vector3::new(n[3], n[4], n[5]);
        }
        out.push(ImuSample { t: s.t, f_b, omega_b });
    }
    Ok(out)
}
