//! Control parameter generator: NCO commands from the navigation filter's
//! predicted pseudorange and pseudorange rate.

use super::{ChannelFeedback, ControlParams};
use crate::channel::ChannelNcoState;
use crate::consts::{F_CHIP, F_L1, SPEED_OF_LIGHT};

/// θ^VTL for the epoch starting at `nco.t_rx`.
///
/// ζ is propagated from its navigation epoch with the fed-back Doppler rate.
/// The carrier command is the predicted Doppler at the epoch midpoint; the
/// code command is carrier-aided plus a proportional pull of the replica
/// delay toward the predicted pseudorange.
pub fn cpg(fb: &ChannelFeedback, nco: &ChannelNcoState, t_i: f64, k_cpg: f64) -> ControlParams {
    let rho_ddot = -(SPEED_OF_LIGHT / F_L1) * fb.fd_dot;
    let dt = nco.t_rx - fb.t;
    let rho = fb.rho + fb.rho_dot * dt + 0.5 * rho_ddot * dt * dt;
    let rho_dot_mid = fb.rho_dot + rho_ddot * (dt + 0.5 * t_i);
    let f_pll = -(F_L1 / SPEED_OF_LIGHT) * rho_dot_mid;
    let delay_err = rho / SPEED_OF_LIGHT - (nco.t_rx - nco.transmit_time());
    ControlParams { f_dll: (F_CHIP / F_L1) * f_pll - k_cpg * F_CHIP * delay_err / t_i, f_pll }
}
