use serde::{Deserialize, Serialize};

use crate::consts::CODE_CARRIER_RATIO;
use crate::error::{Error, Result};

/// Second-order PLL and first-order carrier-aided DLL coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopGains {
    /// DLL gain, 1/s
    pub k1: f64,
    /// PLL integral gain, Hz/s per cycle
    pub k2: f64,
    /// PLL proportional gain, Hz per cycle
    pub k3: f64,
    /// Carrier-to-code aiding scale
    pub sf: f64,
}

/// Noise-bandwidth design with ζ = 0.707: `ω_n = B/0.53`, `K3 = 1.414·ω_n`,
/// `K2 = ω_n²`, `K1 = 4·B_dll`, `SF = f_chip/f_c`.
pub fn gains_from_bandwidth(b_pll: f64, b_dll: f64, t: f64) -> Result<LoopGains> {
    if !(b_pll > 0.0 && b_dll > 0.0 && t > 0.0) {
        return Err(Error::InvalidParameter("bandwidths and T must be positive".into()));
    }
    if !(b_pll * t < 0.1) || !(b_dll * t < 0.1) {
        return Err(Error::InvalidParameter(format!("B·T = {} exceeds the 0.1 stability margin", b_pll * t)));
    }
    let wn = b_pll / 0.53;
    Ok(LoopGains { k1: 4.0 * b_dll, k2: wn * wn, k3: 1.414 * wn, sf: CODE_CARRIER_RATIO })
}
