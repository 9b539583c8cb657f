//! Complex-baseband GPS L1 C/A sample synthesis.
//!
//! Zero-IF model: each sample is
//!
//! ```text
//!   s[n] = Σ_i A_i d_i(t) c_i(ψ_i(t)) exp(j2π φ_i(t)) + w[n],   t = n / fs
//! ```
//!
//! with `w` complex white Gaussian noise of per-component variance σ². The
//! carrier power is `A²` and the noise density `N0 = 2σ²/fs`, so
//! `A = σ·sqrt(2·10^(C/N0/10)/fs)`.

pub mod prn;
pub mod rawfile;
pub mod synth;
pub mod truth;

use serde::{Deserialize, Serialize};

pub use prn::{code_table, prn_code};
pub use rawfile::{decode_ci8, encode_ci8, read_raw, RawSidecar, RawWriter};
pub use synth::{
    agc_scale, quantize, synthesize_analog, synthesize_block, synthesize_span, IfBlock, Sample, CHUNK,
};
pub use truth::{amplitude_from_cn0, signal_truth_from_scenario, SatSignal, SignalTruth};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SignalConfig {
    /// Sampling frequency, Hz.
    pub fs: f64,
    /// Per-component analog noise standard deviation.
    pub noise_sigma: f64,
    /// 8-bit quantization with the fixed AGC scale.
    pub quantize: bool,
    /// Receiver time after which decoded ephemeris is considered valid, s.
    pub ephemeris_warmup: f64,
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self { fs: 4.0e6, noise_sigma: 1.0, quantize: true, ephemeris_warmup: 30.0 }
    }
}

impl SignalConfig {
    pub fn validate(&self) -> Result<()> {
        // a synthesis chunk must stay within the replicated code table
        if !(self.fs >= 1.1e6 && self.fs <= 1.0e8) {
            return Err(Error::Config(format!("signal.fs = {} outside [1.1 MHz, 100 MHz]", self.fs)));
        }
        if !(self.noise_sigma > 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::Config("signal.noise_sigma must be positive".into()));
        }
        if !(self.ephemeris_warmup >= 0.0) || !self.ephemeris_warmup.is_finite() {
            return Err(Error::Config("signal.ephemeris_warmup must be non-negative".into()));
        }
        Ok(())
    }
}
