//! Earth model: point-mass gravity, optional rotation, and the local
//! east-north-up frame used to lay out trajectories.

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::consts::{MU_EARTH, OMEGA_EARTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GravityModel {
    #[default]
    PointMass,
    /// No gravity at all; isolates kinematics in tests.
    Zero,
}

/// Frame and gravity settings shared by the trajectory generator, IMU
/// synthesis, satellite kinematics and the strapdown mechanization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarthModel {
    pub gravity: GravityModel,
    pub earth_rotation: bool,
}

impl Default for EarthModel {
    fn default() -> Self {
        Self {
            gravity: GravityModel::PointMass,
            earth_rotation: true,
        }
    }
}

impl EarthModel {
    pub const ZERO_GRAVITY: EarthModel = EarthModel {
        gravity: GravityModel::Zero,
        earth_rotation: false,
    };

    /// Earth rotation vector in ECEF, rad/s (zero when rotation is off).
    pub fn omega_ie(&self) -> Vector3<f64> {
        if self.earth_rotation {
            Vector3::new(0.0, 0.0, OMEGA_EARTH)
        } else {
            Vector3::zeros()
        }
    }

    /// Rotation angle of ECEF relative to inertial after `t` seconds.
    pub fn rotation_angle(&self, t: f64) -> f64 {
        if self.earth_rotation {
            OMEGA_EARTH * t
        } else {
            0.0
        }
    }

    /// Gravitational acceleration (no centrifugal term), m/s^2.
    pub fn gravitation(&self, p: &Vector3<f64>) -> Vector3<f64> {
        match self.gravity {
            GravityModel::Zero => Vector3::zeros(),
            GravityModel::PointMass => {
                let r = p.norm();
                -MU_EARTH / (r * r * r) * p
            }
        }
    }

    /// Gravity as felt in ECEF: gravitation plus centrifugal.
    pub fn gravity(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let w = self.omega_ie();
        self.gravitation(p) - w.cross(&w.cross(p))
    }

    /// Jacobian of [`EarthModel::gravity`] with respect to position.
    pub fn gravity_gradient(&self, p: &Vector3<f64>) -> Matrix3<f64> {
        let grav = match self.gravity {
            GravityModel::Zero => Matrix3::zeros(),
            GravityModel::PointMass => {
                let r = p.norm();
                let u = p / r;
                -MU_EARTH / (r * r * r) * (Matrix3::identity() - 3.0 * u * u.transpose())
            }
        };
        let w = skew(&self.omega_ie());
        grav - w * w
    }
}

/// Cross-product matrix `[v×]`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Quaternion for a rotation vector (axis × angle).
pub fn quat_from_rotvec(phi: &Vector3<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::from_scaled_axis(*phi)
}

/// Local east-north-up frame anchored at a point on a spherical Earth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub origin: Vector3<f64>,
    /// Columns are east, north and up expressed in ECEF.
    pub enu_to_ecef: Rotation3<f64>,
}

impl LocalFrame {
    pub fn at(origin: Vector3<f64>) -> Self {
        let lon = origin.y.atan2(origin.x);
        let lat = origin.z.atan2(origin.xy().norm());
        let (sl, cl) = lat.sin_cos();
        let (so, co) = lon.sin_cos();
        let east = Vector3::new(-so, co, 0.0);
        let north = Vector3::new(-sl * co, -sl * so, cl);
        let up = Vector3::new(cl * co, cl * so, sl);
        let m = Matrix3::from_columns(&[east, north, up]);
        Self {
            origin,
            enu_to_ecef: Rotation3::from_matrix_unchecked(m),
        }
    }

    /// Origin from geocentric latitude/longitude (rad) and height above the
    /// mean sphere (m).
    pub fn from_lat_lon_height(lat: f64, lon: f64, h: f64) -> Self {
        let r = crate::consts::EARTH_RADIUS + h;
        let origin = Vector3::new(r * lat.cos() * lon.cos(), r * lat.cos() * lon.sin(), r * lat.sin());
        Self::at(origin)
    }

    pub fn to_ecef(&self, enu: &Vector3<f64>) -> Vector3<f64> {
        self.origin + self.enu_to_ecef * enu
    }

    pub fn vec_to_ecef(&self, enu: &Vector3<f64>) -> Vector3<f64> {
        self.enu_to_ecef * enu
    }

    pub fn vec_to_enu(&self, ecef: &Vector3<f64>) -> Vector3<f64> {
        self.enu_to_ecef.inverse() * ecef
    }

    pub fn up(&self) -> Vector3<f64> {
        self.enu_to_ecef.matrix().column(2).into()
    }
}

/// Roll, pitch, yaw (rad) of a body→ECEF attitude, expressed relative to the
/// local ENU frame at `p`. Only used for readable telemetry.
pub fn euler_in_local(q: &UnitQuaternion<f64>, p: &Vector3<f64>) -> (f64, f64, f64) {
    let frame = LocalFrame::at(*p);
    let c_bn = frame.enu_to_ecef.inverse() * q.to_rotation_matrix();
    c_bn.euler_angles()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn local_frame_is_orthonormal_and_up_is_radial() {
        let f = LocalFrame::from_lat_lon_height(0.761, 0.025, 200.0);
        let m = f.enu_to_ecef.matrix();
        assert!((m.transpose() * m - Matrix3::identity()).norm() < 1e-12);
        let up = f.up();
        assert!(close(up.dot(&f.origin.normalize()), 1.0, 1e-12));
    }

    #[test]
    fn gravity_gradient_matches_finite_difference() {
        let em = EarthModel::default();
        let p = Vector3::new(4.6e6, 0.12e6, 4.39e6);
        let g = em.gravity_gradient(&p);
        let h = 1.0;
        for k in 0..3 {
            let mut dp = Vector3::zeros();
            dp[k] = h;
            let fd = (em.gravity(&(p + dp)) - em.gravity(&(p - dp))) / (2.0 * h);
            for i in 0..3 {
                assert!(close(g[(i, k)], fd[i], 1e-12), "{i}{k}");
            }
        }
    }
}
