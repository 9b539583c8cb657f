//! Per-satellite baseband core: NCOs, E/P/L correlators, discriminators and
//! the C/N0 estimator. Phases are in cycles; radians appear only at trig
//! call sites.

pub mod cn0;
pub mod correlator;
pub mod discriminator;
pub mod nco;

use serde::{Deserialize, Serialize};

pub use cn0::{estimate_cn0, Cn0Estimate, Cn0Estimator};
pub use correlator::{correlate, CodeReplica, CorrelatorOutputs};
pub use discriminator::{discriminate, dll_disc, fll_disc, pll_disc, DiscriminatorOutputs};
pub use nco::{nco_advance, ChannelNcoState};

/// One channel telemetry line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelTelemetry {
    pub t_rx: f64,
    pub prn: u8,
    pub ip: f64,
    pub qp: f64,
    pub d_tau: f64,
    pub d_phi: f64,
    pub d_fd: f64,
    pub cn0: f64,
    pub pli: f64,
    pub locked: bool,
    pub vtl: bool,
    pub f_carr: f64,
    /// Loop Doppler estimate, Hz.
    pub doppler: f64,
}

impl ChannelTelemetry {
    pub const CSV_HEADER: &'static str = "t_rx,prn,ip,qp,d_tau,d_phi,d_fd,cn0,pli,locked,vtl,f_carr,doppler";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.6},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.3},{:.4},{},{},{:.6},{:.6}",
            self.t_rx,
            self.prn,
            self.ip,
            self.qp,
            self.d_tau,
            self.d_phi,
            self.d_fd,
            self.cn0,
            self.pli,
            self.locked as u8,
            self.vtl as u8,
            self.f_carr,
            self.doppler
        )
    }
}
