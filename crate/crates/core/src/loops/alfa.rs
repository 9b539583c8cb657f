//! The STL loop filter and its UT-ALFA variant.
//!
//! ```text
//!   f_PLL = acc + K3·δφ          (acc before this update: z⁻¹)
//!   f_DLL = K1·δτ + SF·acc
//!   acc'  = acc + T·(K2·δφ + a)   a = K_f·δf (STL) or ḟ_d (UT-ALFA)
//! ```

use serde::{Deserialize, Serialize};

use super::gains::LoopGains;
use super::ControlParams;
use crate::channel::DiscriminatorOutputs;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlfaFilterState {
    /// Doppler accumulator, Hz.
    pub acc: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub sf: f64,
    /// Update period, s.
    pub t: f64,
}

impl AlfaFilterState {
    pub fn new(acc: f64, gains: &LoopGains, t: f64) -> Self {
        Self { acc, k1: gains.k1, k2: gains.k2, k3: gains.k3, sf: gains.sf, t }
    }

    pub fn with_gains(&self, gains: &LoopGains) -> Self {
        Self::new(self.acc, gains, self.t)
    }
}

fn step(s: &AlfaFilterState, d_tau: f64, d_phi: f64, assist: f64) -> (ControlParams, AlfaFilterState) {
    let theta = ControlParams { f_dll: s.k1 * d_tau + s.sf * s.acc, f_pll: s.acc + s.k3 * d_phi };
    let next = AlfaFilterState { acc: s.acc + s.t * (s.k2 * d_phi + assist), ..*s };
    (theta, next)
}

/// Classical FLL-assisted PLL; invalid discriminators contribute zero.
pub fn stl_update(state: &AlfaFilterState, d: &DiscriminatorOutputs, k_f: f64) -> (ControlParams, AlfaFilterState) {
    let (d_tau, d_phi, d_fd) = d.effective();
    step(state, d_tau, d_phi, k_f * d_fd)
}

/// UT-ALFA: FLL assist replaced by the fed-back Doppler rate (Hz/s).
pub fn alfa_update(state: &AlfaFilterState, d_tau: f64, d_phi: f64, fd_dot: f64) -> (ControlParams, AlfaFilterState) {
    step(state, d_tau, d_phi, fd_dot)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AidStatus {
    Fresh,
    /// Feedback missing or older than the staleness bound; zero assist used.
    Stale,
}

/// [`alfa_update`] with a staleness check on the feedback `(fd_dot, stamp)`.
pub fn alfa_update_fed(
    state: &AlfaFilterState,
    d: &DiscriminatorOutputs,
    feedback: Option<(f64, f64)>,
    now: f64,
    staleness: f64,
) -> (ControlParams, AlfaFilterState, AidStatus) {
    let (d_tau, d_phi, _) = d.effective();
    match feedback {
        Some((fd_dot, stamp)) if now - stamp <= staleness && fd_dot.is_finite() => {
            let (c, s) = alfa_update(state, d_tau, d_phi, fd_dot);
            (c, s, AidStatus::Fresh)
        }
        _ => {
            let (c, s) = alfa_update(state, d_tau, d_phi, 0.0);
            (c, s, AidStatus::Stale)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loops::gains::gains_from_bandwidth;

    fn disc(d_tau: f64, d_phi: f64, d_fd: f64) -> DiscriminatorOutputs {
        DiscriminatorOutputs { d_tau, d_phi, d_fd, tau_valid: true, phi_valid: true, fd_valid: true }
    }

    fn state(b: f64) -> AlfaFilterState {
        AlfaFilterState::new(0.0, &gains_from_bandwidth(b, 1.0, 1e-3).unwrap(), 1e-3)
    }

    #[test]
    fn equilibrium_holds() {
        let s = state(10.0);
        let (c, n) = stl_update(&s, &disc(0.0, 0.0, 0.0), 8.0);
        assert_eq!(c, ControlParams::default());
        assert_eq!(n, s);
        let (c, n) = alfa_update(&s, 0.0, 0.0, 0.0);
        assert_eq!(c, ControlParams::default());
        assert_eq!(n, s);
    }

    #[test]
    fn difference_equations() {
        let s = AlfaFilterState { acc: 0.0, k1: 4.0, k2: 356.0, k3: 26.68, sf: 1.0 / 1540.0, t: 1e-3 };
        let (c, n) = stl_update(&s, &disc(0.0, 0.01, 0.0), 8.0);
        assert!((c.f_pll - 0.2668).abs() < 1e-12);
        assert!((n.acc - 0.00356).abs() < 1e-15);
        let (c, n) = alfa_update(&s, 0.0, 0.0, 5.0);
        assert_eq!(c.f_pll, 0.0);
        assert!((n.acc - 0.005).abs() < 1e-15);
    }

    /// Closed loop on a noiseless carrier: truth phase `phi(t)`, NCO driven by
    /// the filter output, exact phase-error discriminator.
    fn closed_loop(b: f64, steps: usize, truth: impl Fn(f64) -> (f64, f64), aid: impl Fn(f64) -> Option<f64>) -> (f64, f64) {
        let mut s = state(b);
        let t = 1e-3;
        let mut nco_phase = 0.0;
        let mut f_nco = 0.0;
        let mut err = 0.0;
        for k in 0..steps {
            let tk = k as f64 * t;
            // average phase error over the epoch
            let (p0, _) = truth(tk);
            let (p1, _) = truth(tk + t);
            let d_phi = 0.5 * (p0 + p1) - (nco_phase + 0.5 * f_nco * t);
            err = d_phi;
            let (c, n) = match aid(tk) {
                Some(fd_dot) => alfa_update(&s, 0.0, d_phi, fd_dot),
                None => {
                    let d_fd = truth(tk + 0.5 * t).1 - f_nco;
                    stl_update(&s, &disc(0.0, d_phi, d_fd), 0.0)
                }
            };
            nco_phase += f_nco * t;
            f_nco = c.f_pll;
            s = n;
        }
        (f_nco, err)
    }

    #[test]
    fn pll_pulls_in_a_doppler_step() {
        let (f, _) = closed_loop(10.0, 1000, |t| (10.0 * t, 10.0), |_| None);
        assert!((f - 10.0).abs() < 0.01, "{f}");
    }

    #[test]
    fn doppler_rate_aiding_removes_ramp_lag() {
        let ramp = |t: f64| (2.5 * t * t, 5.0 * t);
        let (_, unaided) = closed_loop(3.0, 4000, ramp, |_| Some(0.0));
        let (_, aided) = closed_loop(3.0, 4000, ramp, |_| Some(5.0));
        assert!(aided.abs() < 1e-3, "aided lag {aided}");
        assert!(unaided.abs() > 0.1, "unaided lag {unaided}");
    }

    #[test]
    fn staleness_falls_back_to_zero_assist() {
        let s = state(3.0);
        let d = disc(0.0, 0.0, 0.0);
        let (_, n, st) = alfa_update_fed(&s, &d, Some((5.0, 9.8)), 10.0, 0.5);
        assert_eq!(st, AidStatus::Fresh);
        assert!((n.acc - 0.005).abs() < 1e-15);
        let (_, n, st) = alfa_update_fed(&s, &d, Some((5.0, 9.0)), 10.0, 0.5);
        assert_eq!(st, AidStatus::Stale);
        assert_eq!(n.acc, 0.0);
        assert_eq!(alfa_update_fed(&s, &d, None, 10.0, 0.5).2, AidStatus::Stale);
    }

    proptest::proptest! {
        #[test]
        fn alfa_matches_stl_with_equivalent_assist(
            acc in -5e3f64..5e3, d_tau in -0.5f64..0.5, d_phi in -0.25f64..0.25, d_fd in -200.0f64..200.0,
        ) {
            let s = AlfaFilterState { acc, ..state(10.0) };
            let k_f = 8.0;
            let (c1, n1) = stl_update(&s, &disc(d_tau, d_phi, d_fd), k_f);
            let (c2, n2) = alfa_update(&s, d_tau, d_phi, k_f * d_fd);
            proptest::prop_assert!((c1.f_pll - c2.f_pll).abs() <= 1e-12 * c1.f_pll.abs().max(1.0));
            proptest::prop_assert!((c1.f_dll - c2.f_dll).abs() <= 1e-12 * c1.f_dll.abs().max(1.0));
            proptest::prop_assert!((n1.acc - n2.acc).abs() <= 1e-12 * n1.acc.abs().max(1.0));
        }
    }

    #[test]
    fn bounded_under_extreme_discriminators() {
        for b in [3.0, 10.0] {
            let mut s = state(b);
            let mut a = state(b);
            for k in 0..1000 {
                let sign = if (k / 37) % 2 == 0 { 1.0 } else { -1.0 };
                let (c, n) = stl_update(&s, &disc(0.5 * sign, 0.25 * sign, 250.0 * sign), 8.0);
                assert!(c.f_pll.abs() < 50_000.0);
                s = n;
                let (c, n) = alfa_update(&a, 0.5 * sign, 0.25 * sign, 100.0 * sign);
                assert!(c.f_pll.abs() < 50_000.0);
                a = n;
            }
        }
    }
}
