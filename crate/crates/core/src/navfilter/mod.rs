//! Strapdown INS plus the tightly coupled error-state EKF over pseudorange
//! and Doppler observations, the feedback sets for the tracking loops and
//! the scalar/vector mode switch.

pub mod doppler;
pub mod ekf;
pub mod feedback;
pub mod ins;
pub mod mode;

use serde::{Deserialize, Serialize};

pub use doppler::{doppler_from_kinematics, doppler_predict, doppler_rate, doppler_rate_from_kinematics};
pub use ekf::{ekf_propagate, ekf_update, EkfErrorState, NavFilter, UpdateReport, N_ERR};
pub use feedback::{lead_doppler_rate, make_feedback, Aiding, AidingSet};
pub use ins::{ins_mechanize, NavState};
pub use mode::{Mode, ModeSwitch};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NavConfig {
    /// Navigation epoch rate, Hz.
    pub rate: f64,
    /// Initialization error, 1σ per axis.
    pub init_pos_sigma: f64,
    pub init_vel_sigma: f64,
    /// deg
    pub init_att_sigma: f64,
    /// m
    pub init_clk_bias_sigma: f64,
    /// m/s
    pub init_clk_drift_sigma: f64,
    /// m/s²
    pub init_accel_bias_sigma: f64,
    /// rad/s
    pub init_gyro_bias_sigma: f64,
    /// White-noise PSDs assumed by the filter: (m/s²)²/Hz, (rad/s)²/Hz.
    pub accel_noise_psd: f64,
    pub gyro_noise_psd: f64,
    /// Bias random-walk PSDs: (m/s³)²/Hz, (rad/s²)²/Hz.
    pub accel_bias_psd: f64,
    pub gyro_bias_psd: f64,
    /// Clock phase and frequency PSDs: m²/s, m²/s³.
    pub clock_bias_psd: f64,
    pub clock_drift_psd: f64,
    /// Receiver clock jerk carried into the Doppler rate, m/s².
    pub clock_jerk: f64,
    /// Innovation gate, σ.
    pub gate_sigma: f64,
    /// Position covariance trace below which the filter may enter VTL, m².
    pub switch_pos_trace: f64,
    /// Time below `min_sats` before falling back to STL, s.
    pub fallback_time: f64,
    pub min_sats: usize,
    /// Scale from 1 ms discriminator variances to loop-smoothed observables.
    pub obs_variance_scale: f64,
}

impl Default for NavConfig {
    fn default() -> Self {
        Self {
            rate: 10.0,
            init_pos_sigma: 10.0,
            init_vel_sigma: 0.5,
            init_att_sigma: 1.0,
            init_clk_bias_sigma: 10.0,
            init_clk_drift_sigma: 0.5,
            init_accel_bias_sigma: 0.01,
            init_gyro_bias_sigma: 5e-5,
            accel_noise_psd: 1e-6,
            gyro_noise_psd: 1e-10,
            accel_bias_psd: 1e-10,
            gyro_bias_psd: 1e-14,
            clock_bias_psd: 0.01,
            clock_drift_psd: 0.04,
            clock_jerk: 0.0,
            gate_sigma: 5.0,
            switch_pos_trace: 100.0,
            fallback_time: 1.0,
            min_sats: 4,
            obs_variance_scale: 0.01,
        }
    }
}

impl NavConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("rate", self.rate),
            ("gate_sigma", self.gate_sigma),
            ("switch_pos_trace", self.switch_pos_trace),
            ("obs_variance_scale", self.obs_variance_scale),
        ];
        for (name, v) in pos {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("nav.{name} must be positive")));
            }
        }
        let non_neg = [
            ("init_pos_sigma", self.init_pos_sigma),
            ("init_vel_sigma", self.init_vel_sigma),
            ("init_att_sigma", self.init_att_sigma),
            ("init_clk_bias_sigma", self.init_clk_bias_sigma),
            ("init_clk_drift_sigma", self.init_clk_drift_sigma),
            ("init_accel_bias_sigma", self.init_accel_bias_sigma),
            ("init_gyro_bias_sigma", self.init_gyro_bias_sigma),
            ("accel_noise_psd", self.accel_noise_psd),
            ("gyro_noise_psd", self.gyro_noise_psd),
            ("accel_bias_psd", self.accel_bias_psd),
            ("gyro_bias_psd", self.gyro_bias_psd),
            ("clock_bias_psd", self.clock_bias_psd),
            ("clock_drift_psd", self.clock_drift_psd),
            ("fallback_time", self.fallback_time),
        ];
        for (name, v) in non_neg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("nav.{name} must be non-negative")));
            }
        }
        if !self.clock_jerk.is_finite() {
            return Err(Error::Config("nav.clock_jerk must be finite".into()));
        }
        if self.min_sats < 1 {
            return Err(Error::Config("nav.min_sats must be at least 1".into()));
        }
        Ok(())
    }
}
