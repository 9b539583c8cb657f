//! Built-in scenarios.
//!
//! The desk figure-eight compresses the drone experiment into 60 s: one loop
//! at 30 m/s and 10 m/s² between two 10 s dwells, ephemeris available after a
//! short warm-up, and the C/N0 step from 50 dB·Hz to the target level placed
//! before the vehicle reaches cruise speed.

use nalgebra::Vector3;

use super::{
    Cn0Schedule, FigureEightParams, ImuConfig, ImuErrors, ReceiverClock, ScenarioConfig, Seeds, TrajectoryConfig,
};
use super::orbit::{CircularOrbit, SatelliteTruth};
use crate::earth::{EarthModel, LocalFrame};
use crate::error::{Error, Result};
use crate::loops::LoopConfig;
use crate::navfilter::NavConfig;
use crate::signal::SignalConfig;

/// GPS nominal semi-major axis, m.
pub const GPS_SEMI_MAJOR_AXIS: f64 = 26_559_700.0;

pub const DESK_DURATION: f64 = 60.0;
pub const DESK_RAMP_START: f64 = 15.0;
pub const DESK_RAMP_LEN: f64 = 5.0;
pub const DESK_INITIAL_CN0: f64 = 50.0;
pub const DESK_EPHEMERIS_WARMUP: f64 = 8.0;

/// Where a satellite should appear in the sky at t = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkyPlacement {
    pub prn: u8,
    /// rad, clockwise from north
    pub azimuth: f64,
    /// rad
    pub elevation: f64,
}

/// Desk constellation. PRN 29 sits low, as in the drone campaign.
pub fn desk_sky() -> Vec<SkyPlacement> {
    [(2, 40.0, 62.0), (6, 118.0, 47.0), (12, 205.0, 36.0), (17, 300.0, 71.0), (19, 258.0, 28.5),
     (24, 160.0, 79.0), (25, 18.0, 41.0), (29, 332.0, 11.0)]
        .iter()
        .map(|&(prn, az, el): &(u8, f64, f64)| SkyPlacement { prn, azimuth: az.to_radians(), elevation: el.to_radians() })
        .collect()
}

/// Toulouse-like site on the mean sphere.
pub fn desk_site() -> Vector3<f64> {
    LocalFrame::from_lat_lon_height(43.6045f64.to_radians(), 1.444f64.to_radians(), 200.0).origin
}

/// Solves circular-orbit elements that put a satellite at `place` as seen
/// from `site` at t = 0 (ECEF and inertial frames coincide at t = 0).
///
/// `ascending` selects which of the two orbit branches through the point is
/// used.
pub fn satellite_from_sky(site: &Vector3<f64>, place: &SkyPlacement, ascending: bool) -> Result<SatelliteTruth> {
    if !(1..=32).contains(&place.prn) {
        return Err(Error::InvalidPrn(place.prn));
    }
    if !(place.elevation > -0.1 && place.elevation < std::f64::consts::FRAC_PI_2 + 1e-12) {
        return Err(Error::InvalidParameter(format!("elevation {} rad", place.elevation)));
    }
    let frame = LocalFrame::at(*site);
    let (se, ce) = place.elevation.sin_cos();
    let (sa, ca) = place.azimuth.sin_cos();
    let los = frame.vec_to_ecef(&Vector3::new(ce * sa, ce * ca, se));
    let a = GPS_SEMI_MAJOR_AXIS;
    let b = site.dot(&los);
    let range = -b + (b * b - site.norm_squared() + a * a).sqrt();
    let p = site + range * los;
    let dec = (p.z / a).asin();
    let ra = p.y.atan2(p.x);
    let inc = 55f64.to_radians().max(dec.abs() + 0.5f64.to_radians());
    let mut u = (dec.sin() / inc.sin()).clamp(-1.0, 1.0).asin();
    if !ascending {
        u = std::f64::consts::PI - u;
    }
    let raan = ra - (u.sin() * inc.cos()).atan2(u.cos());
    let prn = place.prn as f64;
    Ok(SatelliteTruth {
        prn: place.prn,
        orbit: CircularOrbit { semi_major_axis: a, inclination: inc, raan, arg_lat_epoch: u },
        clock_bias: 4_000.0 * (0.7 * prn).sin(),
        clock_drift: 0.02 * (1.3 * prn).cos(),
        clock_jerk: 0.0,
    })
}

fn desk_satellites(site: &Vector3<f64>) -> Vec<SatelliteTruth> {
    desk_sky()
        .iter()
        .enumerate()
        .map(|(i, p)| satellite_from_sky(site, p, i % 2 == 0).expect("desk sky is valid"))
        .collect()
}

fn desk_common(name: &str, trajectory: TrajectoryConfig, cn0: Cn0Schedule) -> ScenarioConfig {
    let site = desk_site();
    ScenarioConfig {
        name: name.into(),
        duration: DESK_DURATION,
        earth: EarthModel::default(),
        trajectory,
        satellites: desk_satellites(&site),
        cn0,
        receiver_clock: ReceiverClock { bias: 1_500.0, drift: 45.0 },
        imu: ImuConfig {
            rate: 100.0,
            errors: ImuErrors {
                accel_bias: [0.005, -0.004, 0.006],
                gyro_bias: [2e-5, -1.5e-5, 1e-5],
                accel_noise_psd: 1e-6,
                gyro_noise_psd: 1e-10,
            },
        },
        signal: SignalConfig { ephemeris_warmup: DESK_EPHEMERIS_WARMUP, ..SignalConfig::default() },
        tracking: LoopConfig::default(),
        nav: NavConfig::default(),
        seeds: Seeds::default(),
    }
}

/// Staged degradation used by the desk presets.
pub fn desk_schedule(target_cn0: f64) -> Cn0Schedule {
    if target_cn0 == DESK_INITIAL_CN0 {
        Cn0Schedule::constant(DESK_INITIAL_CN0, DESK_DURATION)
    } else {
        Cn0Schedule::degrade(DESK_INITIAL_CN0, target_cn0, DESK_RAMP_START, DESK_RAMP_LEN, DESK_DURATION)
    }
}

/// 60 s figure-eight, 30 m/s and 10 m/s² peaks, 8 satellites.
pub fn figure_eight_desk(target_cn0: f64) -> ScenarioConfig {
    let params = FigureEightParams {
        center: desk_site().into(),
        loop_radius: None,
        n_loops: 1,
        v_max: 30.0,
        a_max: 10.0,
        dwell: 10.0,
        rate: 100.0,
    };
    desk_common(
        &format!("figure-eight-{target_cn0}dBHz"),
        TrajectoryConfig::FigureEight(params),
        desk_schedule(target_cn0),
    )
}

/// Same sky and timeline as [`figure_eight_desk`] with the vehicle at rest.
pub fn static_desk(target_cn0: f64) -> ScenarioConfig {
    desk_common(
        &format!("static-{target_cn0}dBHz"),
        TrajectoryConfig::Static { position: desk_site().into() },
        desk_schedule(target_cn0),
    )
}

pub const PRESETS: &[&str] = &["figure-eight", "static"];

/// Named preset with the default 30 dB·Hz target.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    match name {
        "figure-eight" => Ok(figure_eight_desk(30.0)),
        "static" => Ok(static_desk(30.0)),
        other => Err(Error::Config(format!("unknown preset {other:?}; known: {}", PRESETS.join(", ")))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{geometry, sat_pva};

    #[test]
    fn satellites_land_at_requested_az_el() {
        let site = desk_site();
        let frame = LocalFrame::at(site);
        let earth = EarthModel::default();
        for (i, place) in desk_sky().iter().enumerate() {
            let sat = satellite_from_sky(&site, place, i % 2 == 1).unwrap();
            let pva = sat_pva(&sat, 0.0, &earth);
            assert!((pva.p.norm() - GPS_SEMI_MAJOR_AXIS).abs() < 1e-3);
            let g = geometry(&site, &Vector3::zeros(), &pva).unwrap();
            assert!((g.elevation - place.elevation).abs() < 1e-9, "PRN {}", place.prn);
            let enu = frame.vec_to_enu(&g.e_rho);
            let az = enu.x.atan2(enu.y).rem_euclid(std::f64::consts::TAU);
            assert!((az - place.azimuth).abs() < 1e-9, "PRN {}", place.prn);
        }
    }

    #[test]
    fn desk_preset_is_valid_and_spans_the_run() {
        for target in [50.0, 40.0, 30.0, 25.0] {
            let cfg = figure_eight_desk(target);
            cfg.validate().unwrap();
            let sc = cfg.build().unwrap();
            assert!(sc.trajectory.duration() <= DESK_DURATION);
            assert_eq!(sc.cn0(DESK_DURATION).unwrap(), target);
            assert_eq!(sc.cn0(1.0).unwrap(), DESK_INITIAL_CN0);
        }
        assert!(preset("figure-eight").is_ok());
        assert!(matches!(preset("spiral"), Err(Error::Config(_))));
    }
}
