//! Feedback sets for the tracking loops: ζ = (ρ, ρ̇) and ξ = ḟ_d.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::doppler::doppler_rate_from_kinematics;
use super::ins::NavState;
use crate::error::Result;
use crate::loops::ChannelFeedback;
use crate::scenario::SatPva;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aiding {
    pub prn: u8,
    /// m
    pub rho: f64,
    /// m/s
    pub rho_dot: f64,
    /// Hz/s
    pub fd_dot: f64,
}

/// One navigation epoch's feedback, published as a unit.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AidingSet {
    pub t: f64,
    pub entries: Vec<Aiding>,
}

impl AidingSet {
    pub fn get(&self, prn: u8) -> Option<&Aiding> {
        self.entries.iter().find(|a| a.prn == prn)
    }

    pub fn feedback(&self, prn: u8) -> Option<ChannelFeedback> {
        self.get(prn)
            .map(|a| ChannelFeedback { prn, t: self.t, rho: a.rho, rho_dot: a.rho_dot, fd_dot: a.fd_dot })
    }
}

/// Predicted pseudorange, its rate (receiver and satellite clocks included)
/// and the Doppler rate for every satellite in `sats` whose PRN is in
/// `locked`. `a_u` is the ECEF receiver acceleration.
pub fn make_feedback(nav: &NavState, sats: &[SatPva], locked: &[u8], a_u: &Vector3<f64>, clk_jerk: f64) -> Result<AidingSet> {
    let mut entries = Vec::with_capacity(locked.len());
    for s in sats.iter().filter(|s| locked.contains(&s.prn)) {
        let d = s.p - nav.p;
        let u = d.normalize();
        entries.push(Aiding {
            prn: s.prn,
            rho: d.norm() + nav.clk_b - s.clock_bias,
            rho_dot: u.dot(&(s.v - nav.v)) + nav.clk_d - s.clock_drift,
            fd_dot: doppler_rate_from_kinematics(&nav.p, &nav.v, a_u, clk_jerk, s)?,
        });
    }
    Ok(AidingSet { t: nav.t, entries })
}

/// Moves each Doppler rate in `set` forward by `lead` seconds along the
/// slope from the matching entry of `prev`, so a value held over the next
/// interval is centred on it. Entries without a predecessor are unchanged.
pub fn lead_doppler_rate(set: &mut AidingSet, prev: &AidingSet, lead: f64) {
    let dt = set.t - prev.t;
    if !(dt > 0.0) {
        return;
    }
    for a in &mut set.entries {
        if let Some(p) = prev.get(a.prn) {
            a.fd_dot += lead * (a.fd_dot - p.fd_dot) / dt;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::{F_L1, SPEED_OF_LIGHT};
    use crate::navfilter::doppler_predict;
    use nalgebra::UnitQuaternion;

    fn nav() -> NavState {
        NavState {
            t: 3.0,
            p: Vector3::new(6.378e6, 0.0, 0.0),
            v: Vector3::new(0.0, 20.0, -3.0),
            q: UnitQuaternion::identity(),
            b_a: Vector3::zeros(),
            b_g: Vector3::zeros(),
            clk_b: 1500.0,
            clk_d: 45.0,
        }
    }

    fn sat(prn: u8, p: Vector3<f64>) -> SatPva {
        SatPva {
            prn,
            p,
            v: Vector3::new(-1000.0, 2500.0, 1800.0),
            a: -3.986e14 / p.norm().powi(3) * p,
            clock_bias: 12.0,
            clock_drift: 0.3,
            clock_jerk: 0.0,
        }
    }

    #[test]
    fn rate_agrees_with_doppler() {
        let n = nav();
        let sats = [sat(4, Vector3::new(2.0e7, 1.0e7, 1.2e7)), sat(9, Vector3::new(1.8e7, -1.5e7, 0.9e7))];
        let set = make_feedback(&n, &sats, &[4, 9], &Vector3::zeros(), 0.0).unwrap();
        assert_eq!(set.t, 3.0);
        for (a, s) in set.entries.iter().zip(&sats) {
            let from_doppler = -(SPEED_OF_LIGHT / F_L1) * doppler_predict(&n, s);
            assert!((a.rho_dot - from_doppler).abs() < 1e-3);
            assert!((a.rho - ((s.p - n.p).norm() + 1500.0 - 12.0)).abs() < 1e-6);
        }
    }

    #[test]
    fn unlocked_channels_are_omitted() {
        let sats = [sat(4, Vector3::new(2.0e7, 1.0e7, 1.2e7)), sat(9, Vector3::new(1.8e7, -1.5e7, 0.9e7))];
        let set = make_feedback(&nav(), &sats, &[9], &Vector3::zeros(), 0.0).unwrap();
        assert_eq!(set.entries.len(), 1);
        assert!(set.get(4).is_none());
        let fb = set.feedback(9).unwrap();
        assert_eq!((fb.prn, fb.t), (9, 3.0));
    }

    #[test]
    fn lead_follows_the_slope() {
        let entry = |prn, fd_dot| Aiding { prn, rho: 0.0, rho_dot: 0.0, fd_dot };
        let prev = AidingSet { t: 1.0, entries: vec![entry(4, 10.0)] };
        let mut set = AidingSet { t: 1.1, entries: vec![entry(4, 12.0), entry(9, 3.0)] };
        lead_doppler_rate(&mut set, &prev, 0.05);
        assert!((set.get(4).unwrap().fd_dot - 13.0).abs() < 1e-12);
        assert_eq!(set.get(9).unwrap().fd_dot, 3.0);
        let mut same = set.clone();
        lead_doppler_rate(&mut same, &set, 0.05);
        assert_eq!(same, set);
    }
}
