//! Vehicle ground truth: analytic trajectories sampled into
//! [`TrajectoryState`] sequences.
//!
//! The figure-eight is a lemniscate of Gerono laid out in the local
//! east-north-up plane,
//!
//! ```text
//!   x(s) = L sin s,   y(s) = L sin s cos s,   s ∈ [0, 2π n_loops]
//! ```
//!
//! traversed with a raised-cosine ramp in `ṡ`, a constant-rate cruise and a
//! symmetric ramp down. Curvature is continuous (zero at the crossing point,
//! maximal at the lobe tips) so the commanded jerk stays bounded.

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::earth::{EarthModel, LocalFrame};
use crate::error::{Error, Result};

/// One sample of vehicle truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryState {
    pub t: f64,
    /// ECEF position, m.
    pub p_u: Vector3<f64>,
    /// ECEF velocity, m/s.
    pub v_u: Vector3<f64>,
    /// ECEF acceleration, m/s^2.
    pub a_u: Vector3<f64>,
    /// Body→ECEF attitude.
    pub q: UnitQuaternion<f64>,
    /// Body angular rate relative to inertial space, rad/s.
    pub omega_b: Vector3<f64>,
}

/// Peak path acceleration share spent on speeding up/slowing down.
const RAMP_ACCEL_SHARE: f64 = 0.5;
/// Centripetal design margin below `a_max` at cruise speed.
const CURVATURE_MARGIN: f64 = 0.97;
/// max over s of |P''(s)| / L for the lemniscate of Gerono (= sqrt(289/64)).
const MAX_SECOND_DERIVATIVE: f64 = 2.125;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureEightParams {
    /// Center of the figure in ECEF, m.
    pub center: [f64; 3],
    /// Lobe half-width `L`, m. Derived from `v_max`/`a_max` when absent.
    #[serde(default)]
    pub loop_radius: Option<f64>,
    pub n_loops: u32,
    pub v_max: f64,
    pub a_max: f64,
    /// Stationary phase before and after the loops, s.
    pub dwell: f64,
    /// Sampling rate for [`gen_figure_eight`], Hz.
    pub rate: f64,
}

impl FigureEightParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_max > 0.0) || !(self.a_max > 0.0) {
            return Err(Error::InvalidParameter("v_max and a_max must be positive".into()));
        }
        if !(self.rate >= 10.0) {
            return Err(Error::InvalidParameter(format!("rate {} Hz below 10 Hz", self.rate)));
        }
        if !(self.dwell >= 0.0) {
            return Err(Error::InvalidParameter("dwell must be non-negative".into()));
        }
        if Vector3::from(self.center).norm() < 1.0e6 {
            return Err(Error::InvalidParameter("center must be an ECEF position near the Earth surface".into()));
        }
        Ok(())
    }
}

/// Closed-form figure-eight trajectory.
#[derive(Debug, Clone)]
pub struct FigureEight {
    frame: LocalFrame,
    q_enu: UnitQuaternion<f64>,
    earth: EarthModel,
    lobe: f64,
    /// Cruise value of ṡ, rad/s.
    rate_max: f64,
    dwell: f64,
    ramp: f64,
    cruise: f64,
}

impl FigureEight {
    pub fn new(params: &FigureEightParams, earth: EarthModel) -> Result<Self> {
        params.validate()?;
        let lobe = match params.loop_radius {
            Some(l) => {
                if !(l > 0.0) {
                    return Err(Error::InvalidParameter("loop_radius must be positive".into()));
                }
                // cruise at v_max through the crossing point gives ṡ = v/(√2 L)
                let peak = MAX_SECOND_DERIVATIVE * params.v_max * params.v_max / (2.0 * l);
                if peak > 1.05 * params.a_max {
                    return Err(Error::InfeasibleTrajectory(format!(
                        "loop_radius {l} m needs {peak:.2} m/s^2 at {} m/s, a_max is {}",
                        params.v_max, params.a_max
                    )));
                }
                l
            }
            None => MAX_SECOND_DERIVATIVE * params.v_max * params.v_max / (2.0 * CURVATURE_MARGIN * params.a_max),
        };
        let frame = LocalFrame::at(Vector3::from(params.center));
        let q_enu = UnitQuaternion::from_rotation_matrix(&frame.enu_to_ecef);
        let mut rate_max = params.v_max / (std::f64::consts::SQRT_2 * lobe);
        let ramp = std::f64::consts::PI * params.v_max / (2.0 * RAMP_ACCEL_SHARE * params.a_max);
        let s_total = 2.0 * std::f64::consts::PI * params.n_loops as f64;
        let mut cruise = s_total / rate_max - ramp;
        if params.n_loops == 0 {
            rate_max = 0.0;
            cruise = 0.0;
        } else if cruise < 0.0 {
            rate_max = s_total / ramp;
            cruise = 0.0;
        }
        Ok(Self {
            frame,
            q_enu,
            earth,
            lobe,
            rate_max,
            dwell: params.dwell,
            ramp: if params.n_loops == 0 { 0.0 } else { ramp },
            cruise,
        })
    }

    pub fn lobe(&self) -> f64 {
        self.lobe
    }

    /// Time at which the vehicle stops after the last loop.
    pub fn motion_end(&self) -> f64 {
        self.dwell + 2.0 * self.ramp + self.cruise
    }

    /// Total duration including both stationary phases.
    pub fn duration(&self) -> f64 {
        self.motion_end() + self.dwell
    }

    pub fn frame(&self) -> &LocalFrame {
        &self.frame
    }

    /// Path parameter and its first two time derivatives.
    fn path_phase(&self, t: f64) -> (f64, f64, f64) {
        use std::f64::consts::PI;
        let s_rate = self.rate_max;
        let tr = self.ramp;
        let mut tau = t - self.dwell;
        if s_rate == 0.0 || tau <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        if tau < tr {
            let w = PI / tr;
            let s = 0.5 * s_rate * (tau - (w * tau).sin() / w);
            return (s, 0.5 * s_rate * (1.0 - (w * tau).cos()), 0.5 * s_rate * w * (w * tau).sin());
        }
        let s_ramp = 0.5 * s_rate * tr;
        tau -= tr;
        if tau < self.cruise {
            return (s_ramp + s_rate * tau, s_rate, 0.0);
        }
        let s_cruise_end = s_ramp + s_rate * self.cruise;
        tau -= self.cruise;
        if tau < tr {
            let w = PI / tr;
            let s = s_cruise_end + 0.5 * s_rate * (tau + (w * tau).sin() / w);
            return (s, 0.5 * s_rate * (1.0 + (w * tau).cos()), -0.5 * s_rate * w * (w * tau).sin());
        }
        (s_cruise_end + s_ramp, 0.0, 0.0)
    }

    pub fn eval(&self, t: f64) -> TrajectoryState {
        let l = self.lobe;
        let (s, sd, sdd) = self.path_phase(t);
        let (ss, cs) = s.sin_cos();
        let (s2, c2) = (2.0 * s).sin_cos();
        let pos = Vector3::new(l * ss, 0.5 * l * s2, 0.0);
        let d1 = Vector3::new(l * cs, l * c2, 0.0);
        let d2 = Vector3::new(-l * ss, -2.0 * l * s2, 0.0);
        let vel = d1 * sd;
        let acc = d2 * sd * sd + d1 * sdd;
        // heading follows the path tangent, which is defined even at rest
        let yaw = d1.y.atan2(d1.x);
        let yaw_rate = (d1.x * d2.y - d1.y * d2.x) / (d1.x * d1.x + d1.y * d1.y) * sd;
        let q = self.q_enu * UnitQuaternion::from_euler_angles(0.0, 0.0, yaw);
        let omega_b = Vector3::new(0.0, 0.0, yaw_rate) + q.inverse_transform_vector(&self.earth.omega_ie());
        TrajectoryState {
            t,
            p_u: self.frame.to_ecef(&pos),
            v_u: self.frame.vec_to_ecef(&vel),
            a_u: self.frame.vec_to_ecef(&acc),
            q,
            omega_b,
        }
    }
}

/// Straight-line motion at constant velocity with a fixed attitude.
#[derive(Debug, Clone)]
pub struct ConstantVelocity {
    pub p0: Vector3<f64>,
    pub v: Vector3<f64>,
    pub q: UnitQuaternion<f64>,
    pub earth: EarthModel,
    pub duration: f64,
}

impl ConstantVelocity {
    pub fn eval(&self, t: f64) -> TrajectoryState {
        TrajectoryState {
            t,
            p_u: self.p0 + self.v * t,
            v_u: self.v,
            a_u: Vector3::zeros(),
            q: self.q,
            omega_b: self.q.inverse_transform_vector(&self.earth.omega_ie()),
        }
    }
}

/// Any trajectory the scenario layer can drive.
#[derive(Debug, Clone)]
pub enum Trajectory {
    FigureEight(FigureEight),
    ConstantVelocity(ConstantVelocity),
}

impl Trajectory {
    pub fn eval(&self, t: f64) -> TrajectoryState {
        match self {
            Trajectory::FigureEight(f) => f.eval(t),
            Trajectory::ConstantVelocity(c) => c.eval(t),
        }
    }

    pub fn duration(&self) -> f64 {
        match self {
            Trajectory::FigureEight(f) => f.duration(),
            Trajectory::ConstantVelocity(c) => c.duration,
        }
    }

    /// Samples `[0, until]` at `rate` Hz (inclusive of both ends when
    /// `until` is a whole number of periods).
    pub fn sample(&self, rate: f64, until: f64) -> Vec<TrajectoryState> {
        let n = (until * rate + 1e-9).floor() as usize;
        (0..=n).map(|k| self.eval(k as f64 / rate)).collect()
    }
}

/// Samples a figure-eight at `params.rate` over its full duration.
pub fn gen_figure_eight(params: &FigureEightParams, earth: EarthModel) -> Result<Vec<TrajectoryState>> {
    let f = FigureEight::new(params, earth)?;
    let d = f.duration();
    Ok(Trajectory::FigureEight(f).sample(params.rate, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::earth::LocalFrame;

    pub(crate) fn toulouse_center() -> [f64; 3] {
        let f = LocalFrame::from_lat_lon_height(43.6045_f64.to_radians(), 1.444_f64.to_radians(), 200.0);
        f.origin.into()
    }

    fn params(n_loops: u32) -> FigureEightParams {
        FigureEightParams {
            center: toulouse_center(),
            loop_radius: None,
            n_loops,
            v_max: 30.0,
            a_max: 10.0,
            dwell: 2.0,
            rate: 100.0,
        }
    }

    #[test]
    fn dwell_only_is_stationary() {
        let traj = gen_figure_eight(&params(0), EarthModel::default()).unwrap();
        let p0 = traj[0].p_u;
        for s in &traj {
            assert_eq!(s.p_u, p0);
            assert_eq!(s.v_u, Vector3::zeros());
            assert_eq!(s.a_u, Vector3::zeros());
        }
    }

    #[test]
    fn peak_dynamics_hit_the_commanded_limits() {
        let traj = gen_figure_eight(&params(1), EarthModel::default()).unwrap();
        let vmax = traj.iter().map(|s| s.v_u.norm()).fold(0.0, f64::max);
        let amax = traj.iter().map(|s| s.a_u.norm()).fold(0.0, f64::max);
        assert!((27.0..=30.0 + 1e-9).contains(&vmax), "{vmax}");
        assert!((9.0..=10.5).contains(&amax), "{amax}");
        assert!(amax <= 1.05 * 10.0);
    }

    #[test]
    fn starts_and_ends_at_rest() {
        let p = params(2);
        let f = FigureEight::new(&p, EarthModel::default()).unwrap();
        for t in [0.0, 1.0, f.motion_end() + 0.01, f.duration()] {
            assert!(f.eval(t).v_u.norm() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn integrated_velocity_closes_the_loop() {
        // trapezoidal integration of the generator's own velocity samples
        let traj = gen_figure_eight(&params(1), EarthModel::default()).unwrap();
        let dt = 1.0 / 100.0;
        let mut p = traj[0].p_u;
        for w in traj.windows(2) {
            p += 0.5 * (w[0].v_u + w[1].v_u) * dt;
        }
        assert!((p - traj[0].p_u).norm() < 1.0, "{}", (p - traj[0].p_u).norm());
        assert!((traj.last().unwrap().p_u - traj[0].p_u).norm() < 1e-6);
    }

    #[test]
    fn velocity_is_derivative_of_position() {
        let f = FigureEight::new(&params(1), EarthModel::default()).unwrap();
        let h = 1e-3;
        for k in 0..400 {
            let t = 0.1 * k as f64;
            let fd = (f.eval(t + h).p_u - f.eval(t - h).p_u) / (2.0 * h);
            assert!((fd - f.eval(t).v_u).norm() < 1e-4, "t = {t}");
            let fa = (f.eval(t + h).v_u - f.eval(t - h).v_u) / (2.0 * h);
            assert!((fa - f.eval(t).a_u).norm() < 1e-3, "t = {t}");
        }
    }

    #[test]
    fn quaternion_is_unit_and_yaw_follows_heading() {
        let f = FigureEight::new(&params(1), EarthModel::default()).unwrap();
        for k in 0..450 {
            let s = f.eval(0.1 * k as f64);
            assert!((s.q.quaternion().norm() - 1.0).abs() < 1e-9);
            if s.v_u.norm() > 1.0 {
                let fwd = s.q.transform_vector(&Vector3::x());
                assert!((fwd.dot(&s.v_u.normalize()) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn infeasible_radius_rejected() {
        let mut p = params(1);
        p.loop_radius = Some(20.0);
        assert!(matches!(
            FigureEight::new(&p, EarthModel::default()),
            Err(Error::InfeasibleTrajectory(_))
        ));
        p.loop_radius = Some(200.0);
        assert!(FigureEight::new(&p, EarthModel::default()).is_ok());
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = params(1);
        p.v_max = 0.0;
        assert!(FigureEight::new(&p, EarthModel::default()).is_err());
        let mut p = params(1);
        p.rate = 5.0;
        assert!(FigureEight::new(&p, EarthModel::default()).is_err());
    }
}
