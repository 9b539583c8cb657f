//! Observation generator: pseudorange and Doppler from the replica state.

use super::ChannelObservation;
use crate::channel::ChannelNcoState;
use crate::consts::{F_CHIP, F_L1, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OgInput {
    pub prn: u8,
    /// Loop Doppler estimate, Hz (accumulator for STL/UT-ALFA, corrected
    /// carrier NCO for VDFLL).
    pub doppler: f64,
    /// Residual code delay estimate, chips (zero without a local KF).
    pub delta_tau: f64,
    /// dB·Hz
    pub cn0: f64,
    pub locked: bool,
}

/// Observables referred to `t_epoch`, or `None` for an unlocked channel.
/// The replica pseudorange is extrapolated from the NCO time with the loop
/// Doppler; `t_epoch` must lie within half an epoch of `nco.t_rx`.
pub fn og_generate(nco: &ChannelNcoState, input: &OgInput, t_epoch: f64) -> Option<ChannelObservation> {
    if !input.locked {
        return None;
    }
    let rho_nco = SPEED_OF_LIGHT * (nco.t_rx - nco.transmit_time()) + input.delta_tau * SPEED_OF_LIGHT / F_CHIP;
    let rho = rho_nco - (SPEED_OF_LIGHT / F_L1) * input.doppler * (t_epoch - nco.t_rx);
    Some(ChannelObservation { prn: input.prn, t_rx: t_epoch, rho_tilde: rho, fd_tilde: input.doppler, cn0: input.cn0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loops::ControlParams;

    fn input(doppler: f64) -> OgInput {
        OgInput { prn: 7, doppler, delta_tau: 0.0, cn0: 45.0, locked: true }
    }

    #[test]
    fn travel_time_to_range() {
        // 0.07 s of travel = 71 610 chips
        let nco = ChannelNcoState::new(100.0 * F_CHIP - 71_610.0, 0.0, &ControlParams::default(), 100.0);
        let o = og_generate(&nco, &input(0.0), 100.0).unwrap();
        assert!((o.rho_tilde - 20_985_472.06).abs() < 1e-4, "{}", o.rho_tilde);
        assert_eq!(o.prn, 7);
    }

    #[test]
    fn doppler_passes_through_and_extrapolates() {
        let theta = ControlParams { f_dll: 0.0, f_pll: -1234.5 };
        let nco = ChannelNcoState::new(1e5, 0.3, &theta, 10.0);
        let o = og_generate(&nco, &input(nco.f_carr), 10.0).unwrap();
        assert_eq!(o.fd_tilde, -1234.5);
        let later = og_generate(&nco, &input(nco.f_carr), 10.0005).unwrap();
        let rho_dot = 1234.5 * SPEED_OF_LIGHT / F_L1;
        assert!((later.rho_tilde - o.rho_tilde - rho_dot * 5e-4).abs() < 1e-6);
    }

    #[test]
    fn delay_state_correction() {
        let nco = ChannelNcoState::new(1e5, 0.0, &ControlParams::default(), 10.0);
        let a = og_generate(&nco, &input(0.0), 10.0).unwrap();
        let b = og_generate(&nco, &OgInput { delta_tau: 0.1, ..input(0.0) }, 10.0).unwrap();
        assert!((b.rho_tilde - a.rho_tilde - 0.1 * SPEED_OF_LIGHT / F_CHIP).abs() < 1e-6);
    }

    #[test]
    fn unlocked_channel_is_silent() {
        let nco = ChannelNcoState::new(1e5, 0.0, &ControlParams::default(), 10.0);
        assert!(og_generate(&nco, &OgInput { locked: false, ..input(0.0) }, 10.0).is_none());
    }
}
