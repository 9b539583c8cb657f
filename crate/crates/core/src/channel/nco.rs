//! Code and carrier NCOs.

use crate::consts::{CODE_LENGTH, F_CHIP};
use crate::loops::ControlParams;

const CODE_LEN: f64 = CODE_LENGTH as f64;

/// Replica parameters at receiver time `t_rx`.
///
/// `tau_nco` is the replica code phase in chips within the current period;
/// `code_periods` counts completed periods, so the replica transmit time is
/// `(code_periods·1023 + tau_nco)/f_chip`. Carrier phase is split into a
/// fraction in `[0, 1)` and an integer cycle count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelNcoState {
    pub tau_nco: f64,
    pub code_periods: i64,
    /// chips/s
    pub f_code: f64,
    pub phi_nco: f64,
    pub phi_cycles: i64,
    /// Hz
    pub f_carr: f64,
    pub t_rx: f64,
}

impl ChannelNcoState {
    /// State from an absolute code phase (chips) and carrier phase (cycles).
    pub fn new(code_phase: f64, phase: f64, theta: &ControlParams, t_rx: f64) -> Self {
        let periods = (code_phase / CODE_LEN).floor();
        let cycles = phase.floor();
        Self {
            tau_nco: code_phase - periods * CODE_LEN,
            code_periods: periods as i64,
            f_code: F_CHIP + theta.f_dll,
            phi_nco: phase - cycles,
            phi_cycles: cycles as i64,
            f_carr: theta.f_pll,
            t_rx,
        }
    }

    pub fn code_phase(&self) -> f64 {
        self.code_periods as f64 * CODE_LEN + self.tau_nco
    }

    pub fn phase(&self) -> f64 {
        self.phi_cycles as f64 + self.phi_nco
    }

    /// Replica transmit time, s.
    pub fn transmit_time(&self) -> f64 {
        self.code_phase() / F_CHIP
    }

    /// Samples until the replica completes its current code period.
    pub fn samples_to_period_end(&self, fs: f64) -> usize {
        ((CODE_LEN - self.tau_nco) * fs / self.f_code).ceil().max(1.0) as usize
    }
}

/// Advances the NCOs by `dt` at the rates commanded by `theta`
/// (`f_code = f_chip + f_DLL`, `f_carr = f_PLL`). Negative `dt` rewinds.
pub fn nco_advance(state: &ChannelNcoState, theta: &ControlParams, dt: f64) -> ChannelNcoState {
    let f_code = F_CHIP + theta.f_dll;
    let f_carr = theta.f_pll;
    let raw = state.tau_nco + f_code * dt;
    let wraps = (raw / CODE_LEN).floor();
    let p_raw = state.phi_nco + f_carr * dt;
    let cycles = p_raw.floor();
    ChannelNcoState {
        tau_nco: raw - wraps * CODE_LEN,
        code_periods: state.code_periods + wraps as i64,
        f_code,
        phi_nco: p_raw - cycles,
        phi_cycles: state.phi_cycles + cycles as i64,
        f_carr,
        t_rx: state.t_rx + dt,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn at_zero() -> ChannelNcoState {
        ChannelNcoState::new(0.0, 0.0, &ControlParams::default(), 0.0)
    }

    #[test]
    fn nominal_rate_wraps_one_period_per_ms() {
        let s = nco_advance(&at_zero(), &ControlParams::default(), 1e-3);
        assert!(s.tau_nco < 1e-9 || (CODE_LEN - s.tau_nco) < 1e-9);
        assert!((s.code_phase() - 1023.0).abs() < 1e-9);
        assert!((s.t_rx - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn carrier_and_code_increments() {
        let s = nco_advance(&at_zero(), &ControlParams { f_dll: 0.0, f_pll: 100.0 }, 1e-3);
        assert!((s.phase() - 0.1).abs() < 1e-12);
        let start = ChannelNcoState::new(10.0, 0.0, &ControlParams::default(), 0.0);
        let s = nco_advance(&start, &ControlParams { f_dll: 1.0, f_pll: 0.0 }, 1e-3);
        assert!((s.code_phase() - 10.0 - 1023.001).abs() < 1e-9);
        assert!((s.tau_nco - 10.001).abs() < 1e-9);
        assert_eq!(s.code_periods, 1);
    }

    #[test]
    fn period_end_lands_just_past_the_wrap() {
        let s = ChannelNcoState::new(5.3, 0.0, &ControlParams { f_dll: 2.0, f_pll: 0.0 }, 0.0);
        let n = s.samples_to_period_end(4e6);
        let theta = ControlParams { f_dll: 2.0, f_pll: 0.0 };
        let e = nco_advance(&s, &theta, n as f64 / 4e6);
        assert_eq!(e.code_periods, 1);
        assert!(e.tau_nco >= 0.0 && e.tau_nco < e.f_code / 4e6 + 1e-9);
    }

    proptest! {
        #[test]
        fn advance_is_reversible(
            code in 0.0f64..2e6, phase in -1e6f64..1e6,
            f_dll in -50.0f64..50.0, f_pll in -5e3f64..5e3, dt in 1e-5f64..0.1
        ) {
            let theta = ControlParams { f_dll, f_pll };
            let s = ChannelNcoState::new(code, phase, &theta, 3.0);
            let back = nco_advance(&nco_advance(&s, &theta, dt), &theta, -dt);
            prop_assert!((back.code_phase() - s.code_phase()).abs() <= 1e-12 * s.code_phase().abs().max(1.0) * 10.0);
            prop_assert!((back.phase() - s.phase()).abs() <= 1e-12 * s.phase().abs().max(1.0) * 10.0);
            prop_assert!((back.t_rx - s.t_rx).abs() <= 1e-12 * s.t_rx);
            prop_assert!(back.tau_nco >= 0.0 && back.tau_nco < CODE_LEN);
            prop_assert!(back.phi_nco >= 0.0 && back.phi_nco < 1.0);
        }
    }
}
