//! RMSE bookkeeping and the per-run metrics report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Fidelity;
use crate::error::{Error, Result};
use crate::loops::{Architecture, LoopConfig};

/// Root-mean-square of `est − truth` over the epochs where `mask` is set;
/// `None` when the mask selects nothing.
pub fn rmse(est: &[f64], truth: &[f64], mask: &[bool]) -> Result<Option<f64>> {
    if est.len() != truth.len() || est.len() != mask.len() {
        return Err(Error::InvalidParameter(format!(
            "rmse: series lengths differ ({}, {}, {})",
            est.len(),
            truth.len(),
            mask.len()
        )));
    }
    let (sum, n) = est
        .iter()
        .zip(truth)
        .zip(mask)
        .filter(|(_, &m)| m)
        .fold((0.0, 0usize), |(s, n), ((e, t), _)| (s + (e - t) * (e - t), n + 1));
    Ok((n > 0).then(|| (sum / n as f64).sqrt()))
}

/// Loop settings a report was produced with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopSettings {
    pub b_pll_stl: f64,
    pub b_pll_alfa: f64,
    pub b_dll: f64,
    pub b_fll: f64,
    pub kf_q_tau: f64,
    pub kf_q_phi: f64,
    pub kf_q_fd: f64,
    pub k_cpg: f64,
    pub t_i: f64,
}

impl LoopSettings {
    pub fn new(cfg: &LoopConfig, arch: Architecture) -> Self {
        Self {
            b_pll_stl: cfg.b_pll_stl,
            b_pll_alfa: cfg.b_pll_alfa,
            b_dll: cfg.b_dll,
            b_fll: cfg.b_fll,
            kf_q_tau: cfg.kf_q_tau,
            kf_q_phi: cfg.kf_q_phi,
            kf_q_fd: cfg.kf_q_fd(arch),
            k_cpg: cfg.k_cpg,
            t_i: cfg.t_i,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatMetrics {
    pub prn: u8,
    /// Plateau level, dB·Hz.
    pub cn0: f64,
    /// Mean elevation over the plateau, deg.
    pub elevation_deg: f64,
    /// m; `None` when no epoch qualified.
    pub pr_rmse: Option<f64>,
    /// Hz
    pub fd_rmse: Option<f64>,
    /// Epochs entering the RMSE.
    pub samples: usize,
    pub lock_fraction: f64,
    /// Navigation epochs on the plateau.
    pub epochs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scenario: String,
    pub scenario_hash: String,
    /// Hash of the scenario without its name and C/N0 schedule; reports sharing
    /// it differ only in signal strength.
    pub geometry_hash: String,
    pub architecture: Architecture,
    pub seed: u64,
    pub fidelity: Fidelity,
    pub switch_time: Option<f64>,
    /// Epochs earlier than `switch_time + convergence_window` are excluded, s.
    pub convergence_window: f64,
    pub position_rmse: Option<f64>,
    pub position_samples: usize,
    pub loop_settings: LoopSettings,
    pub satellites: Vec<SatMetrics>,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(format!("metrics report: {e}")))
    }

    pub const CSV_HEADER: &'static str = "prn,cn0,elevation_deg,pr_rmse_m,fd_rmse_hz,samples,lock_fraction,epochs";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for s in &self.satellites {
            let _ = writeln!(
                out,
                "{},{},{:.2},{},{},{},{:.4},{}",
                s.prn,
                s.cn0,
                s.elevation_deg,
                opt(s.pr_rmse),
                opt(s.fd_rmse),
                s.samples,
                s.lock_fraction,
                s.epochs
            );
        }
        out
    }

    pub fn get(&self, prn: u8, cn0: f64) -> Option<&SatMetrics> {
        self.satellites.iter().find(|s| s.prn == prn && s.cn0 == cn0)
    }
}

pub(crate) fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

#[derive(Debug, Clone, Copy)]
struct EpochSample {
    t: f64,
    pr_err: f64,
    fd_err: f64,
    has_obs: bool,
    locked: bool,
    elevation: f64,
}

/// Collects per-epoch errors keyed by satellite and C/N0 plateau.
#[derive(Debug, Default)]
pub struct MetricsAccumulator {
    per_key: BTreeMap<(usize, u64), (u8, f64, Vec<EpochSample>)>,
    position: Vec<(f64, f64)>,
}

impl MetricsAccumulator {
    #[allow(clippy::too_many_arguments)]
    pub fn record(&mut self, t: f64, index: usize, prn: u8, plateau: f64, locked: bool, errors: Option<(f64, f64)>, elevation: f64) {
        let entry = self.per_key.entry((index, plateau.to_bits())).or_insert_with(|| (prn, plateau, Vec::new()));
        let (pr_err, fd_err) = errors.unwrap_or((0.0, 0.0));
        entry.2.push(EpochSample { t, pr_err, fd_err, has_obs: errors.is_some(), locked, elevation });
    }

    pub fn record_position(&mut self, t: f64, err: f64) {
        self.position.push((t, err));
    }

    /// Per-satellite metrics ordered by satellite then first appearance of
    /// the plateau, plus position RMSE and its sample count.
    pub fn finish(&self, start: Option<f64>) -> (Vec<SatMetrics>, Option<f64>, usize) {
        let mut keys: Vec<_> = self.per_key.iter().collect();
        keys.sort_by(|a, b| a.0 .0.cmp(&b.0 .0).then(a.1 .2[0].t.total_cmp(&b.1 .2[0].t)));
        let sats = keys
            .into_iter()
            .map(|(_, (prn, cn0, v))| {
                let mask: Vec<bool> =
                    v.iter().map(|s| s.locked && s.has_obs && start.is_some_and(|t0| s.t >= t0)).collect();
                let zeros = vec![0.0; v.len()];
                let pr: Vec<f64> = v.iter().map(|s| s.pr_err).collect();
                let fd: Vec<f64> = v.iter().map(|s| s.fd_err).collect();
                SatMetrics {
                    prn: *prn,
                    cn0: *cn0,
                    elevation_deg: v.iter().map(|s| s.elevation).sum::<f64>() / v.len() as f64,
                    pr_rmse: rmse(&pr, &zeros, &mask).expect("equal lengths"),
                    fd_rmse: rmse(&fd, &zeros, &mask).expect("equal lengths"),
                    samples: mask.iter().filter(|m| **m).count(),
                    lock_fraction: v.iter().filter(|s| s.locked).count() as f64 / v.len() as f64,
                    epochs: v.len(),
                }
            })
            .collect();
        let mask: Vec<bool> = self.position.iter().map(|(t, _)| start.is_some_and(|t0| *t >= t0)).collect();
        let err: Vec<f64> = self.position.iter().map(|p| p.1).collect();
        let pos = rmse(&err, &vec![0.0; err.len()], &mask).expect("equal lengths");
        (sats, pos, mask.iter().filter(|m| **m).count())
    }
}
