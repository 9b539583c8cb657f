//! Ground truth for every experiment: vehicle trajectory, IMU samples,
//! satellite orbits and clocks, line-of-sight geometry and the C/N0 schedule.
//!
//! A [`ScenarioConfig`] is the serializable description (TOML on disk); a
//! [`Scenario`] is the realized, evaluable truth built from it.

pub mod cn0;
pub mod geometry;
pub mod imu;
pub mod orbit;
pub mod preset;
pub mod trajectory;

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use cn0::{cn0_at, Cn0Schedule, Cn0Segment};
pub use geometry::{geometry, Geometry};
pub use imu::{synthesize_imu, ImuErrors, ImuSample};
pub use orbit::{sat_pva, CircularOrbit, SatPva, SatelliteTruth};
pub use trajectory::{gen_figure_eight, ConstantVelocity, FigureEight, FigureEightParams, Trajectory, TrajectoryState};

use crate::earth::{EarthModel, LocalFrame};
use crate::error::{Error, Result};
use crate::loops::LoopConfig;
use crate::navfilter::NavConfig;
use crate::signal::SignalConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectoryConfig {
    FigureEight(FigureEightParams),
    /// Vehicle at rest, body axes aligned with local east-north-up.
    Static { position: [f64; 3] },
    ConstantVelocity { position: [f64; 3], velocity: [f64; 3] },
}

/// Deterministic receiver clock: `cδt_u(t) = bias + drift·t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct ReceiverClock {
    /// m
    pub bias: f64,
    /// m/s
    pub drift: f64,
}

impl ReceiverClock {
    pub fn at(&self, t: f64) -> (f64, f64) {
        (self.bias + self.drift * t, self.drift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImuConfig {
    /// Hz
    pub rate: f64,
    pub errors: ImuErrors,
}

impl Default for ImuConfig {
    fn default() -> Self {
        Self { rate: 100.0, errors: ImuErrors::default() }
    }
}

/// Base seeds; a run mixes its own seed into each of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Seeds {
    pub nav_bits: u64,
    pub noise: u64,
    pub imu: u64,
    pub init: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self { nav_bits: 0x6e61_7662, noise: 0x6e6f_6973, imu: 0x696d_7500, init: 0x696e_6974 }
    }
}

impl Seeds {
    pub fn mixed(&self, run_seed: u64) -> Seeds {
        Seeds {
            nav_bits: splitmix64(self.nav_bits ^ splitmix64(run_seed)),
            noise: splitmix64(self.noise ^ splitmix64(run_seed.wrapping_add(1))),
            imu: splitmix64(self.imu ^ splitmix64(run_seed.wrapping_add(2))),
            init: splitmix64(self.init ^ splitmix64(run_seed.wrapping_add(3))),
        }
    }
}

/// One round of the SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    /// s
    pub duration: f64,
    #[serde(default)]
    pub earth: EarthModel,
    pub trajectory: TrajectoryConfig,
    #[serde(default)]
    pub satellites: Vec<SatelliteTruth>,
    pub cn0: Cn0Schedule,
    #[serde(default)]
    pub receiver_clock: ReceiverClock,
    #[serde(default)]
    pub imu: ImuConfig,
    #[serde(default)]
    pub signal: SignalConfig,
    #[serde(default)]
    pub tracking: LoopConfig,
    #[serde(default)]
    pub nav: NavConfig,
    #[serde(default)]
    pub seeds: Seeds,
}

impl ScenarioConfig {
    /// Parses and validates a TOML scenario.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::Config("duration must be positive".into()));
        }
        match &self.trajectory {
            TrajectoryConfig::FigureEight(p) => p.validate().map_err(cfg_err)?,
            TrajectoryConfig::Static { position } => finite_nonzero(position, "trajectory.position")?,
            TrajectoryConfig::ConstantVelocity { position, velocity } => {
                finite_nonzero(position, "trajectory.position")?;
                if velocity.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config("trajectory.velocity must be finite".into()));
                }
            }
        }
        let mut seen = [false; 33];
        for s in &self.satellites {
            if !(1..=32).contains(&s.prn) {
                return Err(Error::Config(format!("PRN {} outside 1..=32", s.prn)));
            }
            if std::mem::replace(&mut seen[s.prn as usize], true) {
                return Err(Error::Config(format!("PRN {} listed twice", s.prn)));
            }
            let o = &s.orbit;
            if !(o.semi_major_axis > crate::consts::EARTH_RADIUS)
                || ![o.inclination, o.raan, o.arg_lat_epoch, s.clock_bias, s.clock_drift, s.clock_jerk]
                    .iter()
                    .all(|x| x.is_finite())
            {
                return Err(Error::Config(format!("PRN {}: invalid orbit or clock", s.prn)));
            }
        }
        self.cn0.validate().map_err(cfg_err)?;
        let (t0, t1) = self.cn0.span();
        if t0 > 0.0 || t1 < self.duration {
            return Err(Error::Config(format!(
                "C/N0 schedule covers [{t0}, {t1}] but the scenario runs [0, {}]",
                self.duration
            )));
        }
        if !(self.imu.rate >= 1.0) || !self.imu.rate.is_finite() {
            return Err(Error::Config("imu.rate must be at least 1 Hz".into()));
        }
        if ![self.receiver_clock.bias, self.receiver_clock.drift].iter().all(|x| x.is_finite()) {
            return Err(Error::Config("receiver_clock must be finite".into()));
        }
        self.signal.validate()?;
        self.tracking.validate()?;
        self.nav.validate()?;
        if (self.imu.rate / self.nav.rate).fract().abs() > 1e-9 {
            return Err(Error::Config("imu.rate must be an integer multiple of nav.rate".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded. Identifies the truth
    /// a report or raw sample file was produced from.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("scenario serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn build(&self) -> Result<Scenario> {
        self.validate()?;
        let trajectory = match &self.trajectory {
            TrajectoryConfig::FigureEight(p) => Trajectory::FigureEight(FigureEight::new(p, self.earth)?),
            TrajectoryConfig::Static { position } => constant_velocity(*position, [0.0; 3], self),
            TrajectoryConfig::ConstantVelocity { position, velocity } => constant_velocity(*position, *velocity, self),
        };
        Ok(Scenario { config: self.clone(), trajectory })
    }
}

fn constant_velocity(position: [f64; 3], velocity: [f64; 3], cfg: &ScenarioConfig) -> Trajectory {
    let frame = LocalFrame::at(Vector3::from(position));
    Trajectory::ConstantVelocity(ConstantVelocity {
        p0: frame.origin,
        v: Vector3::from(velocity),
        q: UnitQuaternion::from_rotation_matrix(&frame.enu_to_ecef),
        earth: cfg.earth,
        duration: cfg.duration,
    })
}

fn cfg_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

fn finite_nonzero(v: &[f64; 3], what: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) || Vector3::from(*v).norm() < 1.0 {
        return Err(Error::Config(format!("{what} must be a finite, nonzero ECEF point")));
    }
    Ok(())
}

/// Realized truth for one scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub trajectory: Trajectory,
}

impl Scenario {
    pub fn earth(&self) -> &EarthModel {
        &self.config.earth
    }

    pub fn duration(&self) -> f64 {
        self.config.duration
    }

    pub fn satellites(&self) -> &[SatelliteTruth] {
        &self.config.satellites
    }

    pub fn vehicle(&self, t: f64) -> TrajectoryState {
        self.trajectory.eval(t)
    }

    pub fn sat(&self, index: usize, t: f64) -> SatPva {
        sat_pva(&self.config.satellites[index], t, &self.config.earth)
    }

    pub fn receiver_clock(&self, t: f64) -> (f64, f64) {
        self.config.receiver_clock.at(t)
    }

    pub fn cn0(&self, t: f64) -> Result<f64> {
        cn0_at(&self.config.cn0, t)
    }

    /// True pseudorange `|p_s − p_u| + cδt_u − cδt_s` at receiver time `t`, m.
    pub fn pseudorange(&self, index: usize, t: f64) -> f64 {
        let v = self.vehicle(t);
        let s = self.sat(index, t);
        (s.p - v.p_u).norm() + self.receiver_clock(t).0 - s.clock_bias
    }

    /// IMU samples over the whole scenario at the configured rate.
    pub fn imu_samples(&self, seed: u64) -> Result<Vec<ImuSample>> {
        let traj = self.trajectory.sample(self.config.imu.rate, self.config.duration);
        synthesize_imu(&traj, self.config.imu.rate, &self.config.imu.errors, &self.config.earth, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_round_trips_through_toml() {
        let cfg = preset::figure_eight_desk(30.0);
        let text = cfg.to_toml_string().unwrap();
        let back = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn hash_tracks_content() {
        let a = preset::figure_eight_desk(30.0);
        let b = preset::figure_eight_desk(25.0);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(ScenarioConfig::from_toml_str("not toml ["), Err(Error::Config(_))));
        let mut cfg = preset::figure_eight_desk(30.0);
        cfg.satellites[1].prn = cfg.satellites[0].prn;
        assert!(cfg.validate().is_err());
        let mut cfg = preset::figure_eight_desk(30.0);
        cfg.duration = 500.0;
        assert!(cfg.validate().is_err(), "C/N0 schedule no longer covers the run");
        let mut cfg = preset::figure_eight_desk(30.0);
        cfg.satellites[0].prn = 40;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn static_trajectory_builds() {
        let mut cfg = preset::static_desk(45.0);
        cfg.duration = 5.0;
        cfg.cn0 = Cn0Schedule::constant(45.0, 5.0);
        let sc = cfg.build().unwrap();
        let a = sc.vehicle(0.0);
        let b = sc.vehicle(4.0);
        assert_eq!(a.p_u, b.p_u);
        assert_eq!(b.v_u, Vector3::zeros());
    }

    #[test]
    fn seeds_mix_with_run_seed() {
        let s = Seeds::default();
        assert_eq!(s.mixed(7), s.mixed(7));
        assert_ne!(s.mixed(7), s.mixed(8));
        assert_ne!(s.mixed(7).noise, s.mixed(7).imu);
    }
}
