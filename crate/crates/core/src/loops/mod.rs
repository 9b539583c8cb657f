//! Loop closure: the classical FLL-assisted PLL with carrier-aided DLL, the
//! UT-ALFA variant whose FLL assist is replaced by the navigation filter's
//! Doppler rate, the per-channel Kalman local estimator used by the VDFLL,
//! the observation generator (OG) and the control parameter generator (CPG).

pub mod alfa;
pub mod bus;
pub mod cpg;
pub mod gains;
pub mod kf;
pub mod og;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use alfa::{alfa_update, alfa_update_fed, stl_update, AidStatus, AlfaFilterState};
pub use bus::FeedbackBus;
pub use cpg::cpg;
pub use gains::{gains_from_bandwidth, LoopGains};
pub use kf::{
    kf_channel_update, kf_predict, kf_shift_frame, variance_from_cn0, variance_from_cn0_clamped, KfChannelState,
    KfDiagnostics, MeasurementVariances,
};
pub use og::{og_generate, OgInput};

use crate::error::{Error, Result};

/// Maximum plausible carrier Doppler command, Hz.
pub const F_PLL_LIMIT: f64 = 50_000.0;

/// NCO commands. `f_dll` is added to the nominal chipping rate and `f_pll`
/// is the absolute carrier Doppler of the replica.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlParams {
    /// chips/s
    pub f_dll: f64,
    /// Hz
    pub f_pll: f64,
}

impl ControlParams {
    pub fn is_sane(&self) -> bool {
        self.f_dll.is_finite() && self.f_pll.is_finite() && self.f_pll.abs() < F_PLL_LIMIT
    }
}

/// Observables one channel hands to the navigation filter (the η set).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelObservation {
    pub prn: u8,
    /// Epoch the observables refer to, s.
    pub t_rx: f64,
    /// Pseudorange, m.
    pub rho_tilde: f64,
    /// Doppler, Hz.
    pub fd_tilde: f64,
    /// C/N0 estimate used to weight the observables, dB·Hz.
    pub cn0: f64,
}

/// Plausibility window for MEO pseudoranges, m.
pub const RHO_WINDOW: (f64, f64) = (1.5e7, 3.5e7);

impl ChannelObservation {
    /// Pseudorange inside [`RHO_WINDOW`] once the receiver clock bias
    /// `clock_bias` (m) is removed.
    pub fn plausible(&self, clock_bias: f64) -> bool {
        let r = self.rho_tilde - clock_bias;
        r >= RHO_WINDOW.0 && r <= RHO_WINDOW.1 && self.fd_tilde.is_finite()
    }
}

/// Navigation-filter feedback for one channel: ζ = (ρ, ρ̇) for the CPG and
/// ξ = ḟ_d for the UT-ALFA loop filter, stamped with the producing epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelFeedback {
    pub prn: u8,
    /// Navigation epoch, s.
    pub t: f64,
    /// m
    pub rho: f64,
    /// m/s
    pub rho_dot: f64,
    /// Hz/s
    pub fd_dot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Stl,
    Vdfll1,
    Vdfll2,
    Alfa,
}

impl Architecture {
    pub const ALL: [Architecture; 4] = [Architecture::Stl, Architecture::Vdfll1, Architecture::Vdfll2, Architecture::Alfa];

    pub fn name(&self) -> &'static str {
        match self {
            Architecture::Stl => "stl",
            Architecture::Vdfll1 => "vdfll1",
            Architecture::Vdfll2 => "vdfll2",
            Architecture::Alfa => "alfa",
        }
    }

    pub fn is_vdfll(&self) -> bool {
        matches!(self, Architecture::Vdfll1 | Architecture::Vdfll2)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown architecture {s:?} (stl|vdfll1|vdfll2|alfa)")))
    }
}

/// Shortest PLI history a lock decision is made on, s.
pub const LOCK_MIN_WINDOW: f64 = 0.5;

/// Lock detector settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LockConfig {
    /// dB·Hz
    pub cn0_threshold: f64,
    pub pli_threshold: f64,
    /// Longest PLI averaging span, s. Decisions start once
    /// [`LOCK_MIN_WINDOW`] is available.
    pub window: f64,
    /// Minimum time between lock-state changes, s.
    pub hold: f64,
}

impl Default for LockConfig {
    fn default() -> Self {
        Self { cn0_threshold: 22.0, pli_threshold: 0.6, window: 2.0, hold: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoopConfig {
    /// Nominal integration period, s (epochs follow the replica code period).
    pub t_i: f64,
    /// Early-late spacing, chips.
    pub spacing: f64,
    /// Hz
    pub b_pll_stl: f64,
    /// Hz, UT-ALFA once aided.
    pub b_pll_alfa: f64,
    /// Hz
    pub b_dll: f64,
    /// FLL-assist bandwidth, Hz; K_f = 4·b_fll.
    pub b_fll: f64,
    /// chips² per epoch
    pub kf_q_tau: f64,
    /// cycles² per epoch
    pub kf_q_phi: f64,
    /// Hz² per epoch
    pub kf_q_fd_vdfll1: f64,
    pub kf_q_fd_vdfll2: f64,
    pub k_cpg: f64,
    /// Feedback older than this is ignored, s.
    pub staleness: f64,
    /// Adds −δτ̂/T_I to the CPG code command in VTL mode.
    pub vdfll_code_kf_term: bool,
    /// 1σ code-phase error at hand-over from acquisition, chips.
    pub init_code_sigma: f64,
    /// 1σ Doppler error at hand-over, Hz.
    pub init_doppler_sigma: f64,
    pub lock: LockConfig,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            t_i: 1e-3,
            spacing: 0.5,
            b_pll_stl: 10.0,
            b_pll_alfa: 3.0,
            b_dll: 1.0,
            b_fll: 2.0,
            kf_q_tau: 1e-10,
            kf_q_phi: 1e-10,
            kf_q_fd_vdfll1: 6.4e-3,
            kf_q_fd_vdfll2: 6.4e-5,
            k_cpg: 0.1,
            staleness: 0.5,
            vdfll_code_kf_term: false,
            init_code_sigma: 0.05,
            init_doppler_sigma: 2.0,
            lock: LockConfig::default(),
        }
    }
}

impl LoopConfig {
    pub fn k_f(&self) -> f64 {
        4.0 * self.b_fll
    }

    pub fn kf_q_fd(&self, arch: Architecture) -> f64 {
        match arch {
            Architecture::Vdfll2 => self.kf_q_fd_vdfll2,
            _ => self.kf_q_fd_vdfll1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("t_i", self.t_i),
            ("b_pll_stl", self.b_pll_stl),
            ("b_pll_alfa", self.b_pll_alfa),
            ("b_dll", self.b_dll),
            ("kf_q_tau", self.kf_q_tau),
            ("kf_q_phi", self.kf_q_phi),
            ("kf_q_fd_vdfll1", self.kf_q_fd_vdfll1),
            ("kf_q_fd_vdfll2", self.kf_q_fd_vdfll2),
            ("k_cpg", self.k_cpg),
            ("staleness", self.staleness),
            ("lock.window", self.lock.window),
        ];
        for (name, v) in pos {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("tracking.{name} must be positive")));
            }
        }
        if !(self.b_fll >= 0.0) || !(self.init_code_sigma >= 0.0) || !(self.init_doppler_sigma >= 0.0) || !(self.lock.hold >= 0.0) {
            return Err(Error::Config("tracking: negative bandwidth or sigma".into()));
        }
        if !(self.spacing > 0.0 && self.spacing <= 1.0) {
            return Err(Error::Config("tracking.spacing must lie in (0, 1]".into()));
        }
        if !(self.k_cpg < 1.0) {
            return Err(Error::Config("tracking.k_cpg must be below 1".into()));
        }
        gains_from_bandwidth(self.b_pll_stl, self.b_dll, self.t_i).map_err(|e| Error::Config(e.to_string()))?;
        gains_from_bandwidth(self.b_pll_alfa, self.b_dll, self.t_i).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}
