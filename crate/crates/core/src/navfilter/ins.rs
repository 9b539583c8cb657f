//! Strapdown mechanization in ECEF.

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::earth::{quat_from_rotvec, EarthModel};
use crate::scenario::ImuSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavState {
    pub t: f64,
    /// ECEF, m
    pub p: Vector3<f64>,
    /// ECEF, m/s
    pub v: Vector3<f64>,
    /// Body→ECEF.
    pub q: UnitQuaternion<f64>,
    /// m/s²
    pub b_a: Vector3<f64>,
    /// rad/s
    pub b_g: Vector3<f64>,
    /// cδt_u, m
    pub clk_b: f64,
    /// cδṫ_u, m/s
    pub clk_d: f64,
}

impl NavState {
    /// ECEF acceleration implied by a specific-force measurement.
    pub fn acceleration(&self, imu: &ImuSample, earth: &EarthModel) -> Vector3<f64> {
        self.q * (imu.f_b - self.b_a) + earth.gravity(&self.p) - 2.0 * earth.omega_ie().cross(&self.v)
    }
}

/// Advances `nav` from `imu0.t` to `imu1.t`.
///
/// Attitude: `q' = exp(−Ω dt)·q·exp(ω̄ dt)` with ω̄ the bias-corrected mean
/// rate. Velocity and position: Heun (trapezoidal) on
/// `v̇ = C(f − b_a) + g(p) − 2Ω×v`. Clock: `clk_b += clk_d·dt`.
pub fn ins_mechanize(nav: &NavState, imu0: &ImuSample, imu1: &ImuSample, earth: &EarthModel) -> NavState {
    let dt = imu1.t - imu0.t;
    let w_ie = earth.omega_ie();
    let omega = 0.5 * (imu0.omega_b + imu1.omega_b) - nav.b_g;
    let q1 = quat_from_rotvec(&(-w_ie * dt)) * nav.q * quat_from_rotvec(&(omega * dt));
    let q1 = UnitQuaternion::new_normalize(q1.into_inner());

    let a0 = nav.q * (imu0.f_b - nav.b_a) + earth.gravity(&nav.p) - 2.0 * w_ie.cross(&nav.v);
    let v_pred = nav.v + a0 * dt;
    let p_pred = nav.p + nav.v * dt;
    let a1 = q1 * (imu1.f_b - nav.b_a) + earth.gravity(&p_pred) - 2.0 * w_ie.cross(&v_pred);
    let v1 = nav.v + 0.5 * (a0 + a1) * dt;
    let p1 = nav.p + 0.5 * (nav.v + v1) * dt;
    NavState { t: imu1.t, p: p1, v: v1, q: q1, clk_b: nav.clk_b + nav.clk_d * dt, ..*nav }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::MU_EARTH;
    use crate::earth::GravityModel;

    fn rest(p: Vector3<f64>, v: Vector3<f64>) -> NavState {
        NavState {
            t: 0.0,
            p,
            v,
            q: UnitQuaternion::identity(),
            b_a: Vector3::zeros(),
            b_g: Vector3::zeros(),
            clk_b: 0.0,
            clk_d: 0.0,
        }
    }

    fn still(t: f64) -> ImuSample {
        ImuSample { t, f_b: Vector3::zeros(), omega_b: Vector3::zeros() }
    }

    #[test]
    fn force_free_motion_is_linear() {
        let earth = EarthModel::ZERO_GRAVITY;
        let v = Vector3::new(3.0, -2.0, 1.0);
        let mut n = NavState { clk_d: 2.0, ..rest(Vector3::new(6.4e6, 0.0, 0.0), v) };
        for k in 0..100 {
            n = ins_mechanize(&n, &still(k as f64 * 0.01), &still((k + 1) as f64 * 0.01), &earth);
        }
        assert!((n.p - Vector3::new(6.4e6 + 3.0, -2.0, 1.0)).norm() < 1e-6);
        assert_eq!(n.v, v);
        assert_eq!(n.q, UnitQuaternion::identity());
        assert!((n.clk_b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn radial_free_fall() {
        let earth = EarthModel { gravity: GravityModel::PointMass, earth_rotation: false };
        let r0 = 6.378e6;
        let mut n = rest(Vector3::new(r0, 0.0, 0.0), Vector3::zeros());
        let dt = 0.01;
        for k in 0..1000 {
            n = ins_mechanize(&n, &still(k as f64 * dt), &still((k + 1) as f64 * dt), &earth);
        }
        // series solution of r̈ = −μ/r²: r = r0 − g0 t²/2 − g0² t⁴/(12 r0)
        let g0 = MU_EARTH / (r0 * r0);
        let t: f64 = 10.0;
        let r = r0 - 0.5 * g0 * t * t - g0 * g0 * t.powi(4) / (12.0 * r0);
        assert!((n.p.x - r).abs() < 0.01, "{}", n.p.x - r);
        assert!(n.p.y.abs() < 1e-9 && n.p.z.abs() < 1e-9);
    }

    #[test]
    fn quaternion_norm_is_preserved() {
        let earth = EarthModel::default();
        let mut n = rest(Vector3::new(6.378e6, 0.0, 0.0), Vector3::zeros());
        let imu = |t: f64| ImuSample {
            t,
            f_b: Vector3::new(0.1, 9.8, 0.0),
            omega_b: Vector3::new(0.3 * (t).sin(), 0.2, -0.1 * (2.0 * t).cos()),
        };
        for k in 0..1_000_000 {
            let t = k as f64 * 0.01;
            n = ins_mechanize(&n, &imu(t), &imu(t + 0.01), &earth);
            n.p = Vector3::new(6.378e6, 0.0, 0.0);
            n.v = Vector3::zeros();
        }
        assert!((n.q.into_inner().norm() - 1.0).abs() < 1e-7);
    }
}
