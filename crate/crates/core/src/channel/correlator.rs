//! Early/prompt/late correlators.

use serde::{Deserialize, Serialize};

use super::nco::ChannelNcoState;
use crate::consts::CODE_LENGTH;
use crate::error::{Error, Result};
use crate::signal::{prn_code, IfBlock, Sample};

/// Code periods replicated in the replica table; the offset of one period
/// keeps the late index non-negative.
const TABLE_PERIODS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CorrelatorOutputs {
    pub ie: f64,
    pub qe: f64,
    pub ip: f64,
    pub qp: f64,
    pub il: f64,
    pub ql: f64,
    /// Integration period, s.
    pub t_i: f64,
    pub n_samples: usize,
}

impl CorrelatorOutputs {
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            ie: self.ie * k,
            qe: self.qe * k,
            ip: self.ip * k,
            qp: self.qp * k,
            il: self.il * k,
            ql: self.ql * k,
            ..*self
        }
    }

    pub fn early_power(&self) -> f64 {
        self.ie * self.ie + self.qe * self.qe
    }

    pub fn late_power(&self) -> f64 {
        self.il * self.il + self.ql * self.ql
    }

    pub fn prompt_power(&self) -> f64 {
        self.ip * self.ip + self.qp * self.qp
    }
}

/// ±1 chips of one PRN, replicated for index arithmetic without modulo.
#[derive(Debug, Clone)]
pub struct CodeReplica {
    pub prn: u8,
    table: Vec<f64>,
}

impl CodeReplica {
    pub fn new(prn: u8) -> Result<Self> {
        let code = prn_code(prn)?;
        let table = (0..CODE_LENGTH * TABLE_PERIODS).map(|k| code[k % CODE_LENGTH] as f64).collect();
        Ok(Self { prn, table })
    }

    /// Chip at code phase `x` (any real value).
    pub fn chip(&self, x: f64) -> f64 {
        self.table[x.rem_euclid(CODE_LENGTH as f64) as usize]
    }
}

/// Correlates `n` samples starting at the NCO's `t_rx` against early,
/// prompt and late replicas spaced `spacing` chips apart.
///
/// Replica code phase at sample `k` is `tau + k·f_code/fs ± d/2` and carrier
/// phase `phi + k·f_carr/fs`, the same law [`super::nco_advance`] applies.
pub fn correlate<S: Sample>(
    block: &IfBlock<S>,
    state: &ChannelNcoState,
    replica: &CodeReplica,
    spacing: f64,
    n: usize,
) -> Result<CorrelatorOutputs> {
    if !(spacing > 0.0 && spacing <= 1.0) {
        return Err(Error::InvalidParameter(format!("correlator spacing {spacing} outside (0, 1]")));
    }
    let fs = block.fs;
    let pos = state.t_rx * fs;
    let start = pos.round();
    if (pos - start).abs() > 1e-3 || start < 0.0 {
        return Err(Error::Misalignment(format!("t_rx {} s is not on the sample grid", state.t_rx)));
    }
    let samples = block.span(start as u64, n).ok_or_else(|| {
        Error::Misalignment(format!(
            "block [{}, {}) does not cover samples [{start}, {})",
            block.start_index,
            block.end_index(),
            start as u64 + n as u64
        ))
    })?;
    let step = state.f_code / fs;
    let base = state.tau_nco + CODE_LENGTH as f64;
    let half = 0.5 * spacing;
    let last = base + half + n as f64 * step;
    if !(state.tau_nco >= 0.0) || last >= replica.table.len() as f64 - 1.0 {
        return Err(Error::InvalidParameter(format!("integration of {n} samples spans too many code periods")));
    }
    let (e0, p0, l0) = (base + half, base, base - half);
    let ph = state.phi_nco * std::f64::consts::TAU;
    let mut z = num_complex::Complex::new(ph.cos(), -ph.sin());
    let w = num_complex::Complex::from_polar(1.0, -std::f64::consts::TAU * state.f_carr / fs);
    let t = &replica.table;
    let mut acc = [0.0f64; 6];
    for (k, s) in samples.iter().enumerate() {
        let x = k as f64 * step;
        let (sr, si) = (s.re(), s.im());
        let mr = sr * z.re - si * z.im;
        let mi = sr * z.im + si * z.re;
        let ce = t[(e0 + x) as usize];
        let cp = t[(p0 + x) as usize];
        let cl = t[(l0 + x) as usize];
        acc[0] += ce * mr;
        acc[1] += ce * mi;
        acc[2] += cp * mr;
        acc[3] += cp * mi;
        acc[4] += cl * mr;
        acc[5] += cl * mi;
        z *= w;
    }
    Ok(CorrelatorOutputs {
        ie: acc[0],
        qe: acc[1],
        ip: acc[2],
        qp: acc[3],
        il: acc[4],
        ql: acc[5],
        t_i: n as f64 / fs,
        n_samples: n,
    })
}
