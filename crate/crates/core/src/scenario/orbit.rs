//! Circular-orbit satellites standing in for decoded broadcast ephemeris.

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::consts::MU_EARTH;
use crate::earth::EarthModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularOrbit {
    /// m
    pub semi_major_axis: f64,
    /// rad
    pub inclination: f64,
    /// Right ascension of the ascending node at t = 0, rad.
    pub raan: f64,
    /// Argument of latitude at t = 0, rad.
    pub arg_lat_epoch: f64,
}

impl CircularOrbit {
    pub fn mean_motion(&self) -> f64 {
        (MU_EARTH / self.semi_major_axis.powi(3)).sqrt()
    }

    pub fn speed(&self) -> f64 {
        (MU_EARTH / self.semi_major_axis).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatelliteTruth {
    pub prn: u8,
    pub orbit: CircularOrbit,
    /// c·δt_s at t = 0, m.
    #[serde(default)]
    pub clock_bias: f64,
    /// c·δṫ_s, m/s.
    #[serde(default)]
    pub clock_drift: f64,
    /// c·δẗ_s, m/s^2.
    #[serde(default)]
    pub clock_jerk: f64,
}

/// Satellite position, velocity and acceleration in ECEF plus its clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatPva {
    pub prn: u8,
    pub p: Vector3<f64>,
    pub v: Vector3<f64>,
    pub a: Vector3<f64>,
    pub clock_bias: f64,
    pub clock_drift: f64,
    pub clock_jerk: f64,
}

impl SatelliteTruth {
    pub fn clock(&self, t: f64) -> (f64, f64, f64) {
        (
            self.clock_bias + self.clock_drift * t + 0.5 * self.clock_jerk * t * t,
            self.clock_drift + self.clock_jerk * t,
            self.clock_jerk,
        )
    }
}

/// ECEF kinematics of a circular orbit at time `t`.
///
/// With Earth rotation on, the ECEF frame turns at Ω about z and the returned
/// acceleration carries the Coriolis and centrifugal terms.
pub fn sat_pva(sat: &SatelliteTruth, t: f64, earth: &EarthModel) -> SatPva {
    let o = &sat.orbit;
    let n = o.mean_motion();
    let a = o.semi_major_axis;
    let u = o.arg_lat_epoch + n * t;
    let (su, cu) = u.sin_cos();
    let (sw, cw) = o.raan.sin_cos();
    let (si, ci) = o.inclination.sin_cos();
    let p_i = a * Vector3::new(cw * cu - sw * su * ci, sw * cu + cw * su * ci, su * si);
    let v_i = a * n * Vector3::new(-cw * su - sw * cu * ci, -sw * su + cw * cu * ci, cu * si);
    let a_i = -n * n * p_i;
    let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), -earth.rotation_angle(t));
    let w = earth.omega_ie();
    let p = rot * p_i;
    let v = rot * v_i - w.cross(&p);
    let acc = rot * a_i - 2.0 * w.cross(&v) - w.cross(&w.cross(&p));
    let (clock_bias, clock_drift, clock_jerk) = sat.clock(t);
    SatPva {
        prn: sat.prn,
        p,
        v,
        a: acc,
        clock_bias,
        clock_drift,
        clock_jerk,
    }
}
