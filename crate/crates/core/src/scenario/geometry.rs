use nalgebra::Vector3;

use super::orbit::SatPva;
use crate::error::{Error, Result};

/// Receiver→satellite line-of-sight quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// Geometric range, m.
    pub range: f64,
    /// Unit vector from receiver to satellite.
    pub e_rho: Vector3<f64>,
    /// Time derivative of `e_rho`, 1/s.
    pub e_rho_dot: Vector3<f64>,
    /// Elevation above the local (spherical) horizon, rad.
    pub elevation: f64,
}

/// Line-of-sight geometry between a receiver at `(p_u, v_u)` and a satellite.
///
/// `e_rho_dot = (v_rel − e_rho (e_rhoᵀ v_rel)) / range`, `v_rel = v_s − v_u`.
pub fn geometry(p_u: &Vector3<f64>, v_u: &Vector3<f64>, sat: &SatPva) -> Result<Geometry> {
    let d = sat.p - p_u;
    let range = d.norm();
    if !(range > 0.0) || !range.is_finite() {
        return Err(Error::DegenerateGeometry("zero range".into()));
    }
    let e_rho = d / range;
    let v_rel = sat.v - v_u;
    let e_rho_dot = (v_rel - e_rho * e_rho.dot(&v_rel)) / range;
    let r_u = p_u.norm();
    let elevation = if r_u > 0.0 {
        e_rho.dot(&(p_u / r_u)).clamp(-1.0, 1.0).asin()
    } else {
        std::f64::consts::FRAC_PI_2
    };
    Ok(Geometry {
        range,
        e_rho,
        e_rho_dot,
        elevation,
    })
}
