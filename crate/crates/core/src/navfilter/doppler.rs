//! Doppler and Doppler rate from receiver and satellite kinematics.
//!
//! `f_d = −(f_c/c)·ρ̇` with `ρ̇ = e_ρᵀ(v_s − v_u) + cδṫ_u − cδṫ_s` and `e_ρ` the
//! receiver→satellite unit vector; the same function serves signal truth
//! and the navigation filter.

use nalgebra::Vector3;

use super::ins::NavState;
use crate::consts::{F_L1, SPEED_OF_LIGHT};
use crate::error::Result;
use crate::scenario::{geometry, SatPva};

const K: f64 = F_L1 / SPEED_OF_LIGHT;

/// Carrier Doppler, Hz. `clk_drift_u` is cδṫ_u in m/s.
pub fn doppler_from_kinematics(p_u: &Vector3<f64>, v_u: &Vector3<f64>, clk_drift_u: f64, sat: &SatPva) -> f64 {
    let e = (sat.p - p_u).normalize();
    -K * (e.dot(&(sat.v - v_u)) + clk_drift_u - sat.clock_drift)
}

/// Doppler rate, Hz/s. `clk_jerk_u` is cδẗ_u in m/s².
pub fn doppler_rate_from_kinematics(
    p_u: &Vector3<f64>,
    v_u: &Vector3<f64>,
    a_u: &Vector3<f64>,
    clk_jerk_u: f64,
    sat: &SatPva,
) -> Result<f64> {
    let g = geometry(p_u, v_u, sat)?;
    let rho_ddot = g.e_rho_dot.dot(&(sat.v - v_u)) + g.e_rho.dot(&(sat.a - a_u)) + clk_jerk_u - sat.clock_jerk;
    Ok(-K * rho_ddot)
}

pub fn doppler_predict(nav: &NavState, sat: &SatPva) -> f64 {
    doppler_from_kinematics(&nav.p, &nav.v, nav.clk_d, sat)
}

/// Doppler rate for the navigation solution with receiver acceleration `a_u`
/// (ECEF) and zero receiver clock jerk.
pub fn doppler_rate(nav: &NavState, sat: &SatPva, a_u: &Vector3<f64>) -> Result<f64> {
    doppler_rate_from_kinematics(&nav.p, &nav.v, a_u, 0.0, sat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sat(p: Vector3<f64>, v: Vector3<f64>, a: Vector3<f64>) -> SatPva {
        SatPva { prn: 3, p, v, a, clock_bias: 0.0, clock_drift: 0.0, clock_jerk: 0.0 }
    }

    #[test]
    fn static_geometry_has_no_doppler() {
        let s = sat(Vector3::new(1e7, 2e7, 1e7), Vector3::zeros(), Vector3::zeros());
        let p = Vector3::new(6.4e6, 0.0, 0.0);
        assert_eq!(doppler_from_kinematics(&p, &Vector3::zeros(), 0.0, &s), 0.0);
        assert_eq!(doppler_rate_from_kinematics(&p, &Vector3::zeros(), &Vector3::zeros(), 0.0, &s).unwrap(), 0.0);
    }

    #[test]
    fn receiver_clock_drift_alone() {
        let s = sat(Vector3::new(1e7, 2e7, 1e7), Vector3::zeros(), Vector3::zeros());
        let f = doppler_from_kinematics(&Vector3::new(6.4e6, 0.0, 0.0), &Vector3::zeros(), 1.0, &s);
        assert!((f + 1575.42e6 / 299_792_458.0).abs() < 1e-12);
        assert!((f + 5.25504).abs() < 1e-5);
    }

    #[test]
    fn tangential_relative_velocity() {
        let rho = 2.0e7;
        let v_rel = 3000.0;
        let s = sat(Vector3::new(0.0, 0.0, rho), Vector3::new(v_rel, 0.0, 0.0), Vector3::zeros());
        let f_dot = doppler_rate_from_kinematics(&Vector3::zeros(), &Vector3::zeros(), &Vector3::zeros(), 0.0, &s).unwrap();
        assert!((f_dot + K * v_rel * v_rel / rho).abs() < 1e-9);
    }

    fn fd_at(p_u: Vector3<f64>, v_u: Vector3<f64>, a_u: Vector3<f64>, s: &SatPva, d: f64, t: f64) -> f64 {
        let shifted = SatPva {
            p: s.p + s.v * t + 0.5 * s.a * t * t,
            v: s.v + s.a * t,
            clock_drift: s.clock_drift + s.clock_jerk * t,
            ..*s
        };
        doppler_from_kinematics(&(p_u + v_u * t + 0.5 * a_u * t * t), &(v_u + a_u * t), d, &shifted)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn rate_is_derivative_of_doppler(
            ps in proptest::array::uniform3(-2.6e7f64..2.6e7),
            vs in proptest::array::uniform3(-4e3f64..4e3),
            az in proptest::array::uniform3(-1.0f64..1.0),
            vu in proptest::array::uniform3(-100.0f64..100.0),
            au in proptest::array::uniform3(-20.0f64..20.0),
            jerk in -1e-3f64..1e-3,
        ) {
            let p_s = Vector3::from(ps);
            prop_assume!(p_s.norm() > 1.5e7);
            let p_u = Vector3::new(6.378e6, 0.0, 0.0);
            let s = SatPva { clock_jerk: jerk, ..sat(p_s, Vector3::from(vs), Vector3::from(az)) };
            let (v_u, a_u) = (Vector3::from(vu), Vector3::from(au));
            let h = 1e-3;
            let fd = (fd_at(p_u, v_u, a_u, &s, 0.0, h) - fd_at(p_u, v_u, a_u, &s, 0.0, -h)) / (2.0 * h);
            let rate = doppler_rate_from_kinematics(&p_u, &v_u, &a_u, 0.0, &s).unwrap();
            prop_assert!((rate - fd).abs() < 1e-3, "{} vs {}", rate, fd);
        }
    }
}
