//! Narrowband/wideband power-ratio C/N0 estimator.
//!
//! Over blocks of `M` one-ms prompts inside one data bit,
//! `NP = |Σ P|² / Σ |P|²`; with `μ` the mean of NP over the smoothing window,
//! `C/N0 = 10·log10((μ − 1) / ((M − μ)·T_I))`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// Reported when the power ratio carries no signal evidence.
pub const CN0_NO_SIGNAL: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cn0Estimate {
    pub dbhz: f64,
    /// At least one full block contributed.
    pub valid: bool,
}

/// Estimate from a prompt history of `m`-sample blocks (remainder ignored).
pub fn estimate_cn0(prompts: &[(f64, f64)], m: usize, t_i: f64) -> Cn0Estimate {
    let nps: Vec<f64> = prompts.chunks_exact(m).map(|b| block_np(b.iter().copied())).collect();
    from_mean_np(mean(nps.iter()), m, t_i)
}

fn block_np(it: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut si, mut sq, mut w) = (0.0, 0.0, 0.0);
    for (i, q) in it {
        si += i;
        sq += q;
        w += i * i + q * q;
    }
    if w > 0.0 { (si * si + sq * sq) / w } else { 1.0 }
}

fn mean<'a>(it: impl ExactSizeIterator<Item = &'a f64>) -> Option<f64> {
    let n = it.len();
    (n > 0).then(|| it.sum::<f64>() / n as f64)
}

fn from_mean_np(mu: Option<f64>, m: usize, t_i: f64) -> Cn0Estimate {
    let Some(mu) = mu else {
        return Cn0Estimate { dbhz: CN0_NO_SIGNAL, valid: false };
    };
    let m = m as f64;
    let dbhz = if mu <= 1.0 || mu >= m {
        if mu >= m { 10.0 * (1.0 / (1e-12 * t_i)).log10() } else { CN0_NO_SIGNAL }
    } else {
        (10.0 * ((mu - 1.0) / ((m - mu) * t_i)).log10()).max(CN0_NO_SIGNAL)
    };
    Cn0Estimate { dbhz, valid: true }
}

/// Streaming form: prompts are pushed per epoch, blocks restart at data-bit
/// boundaries and the last `window` blocks are averaged.
#[derive(Debug, Clone)]
pub struct Cn0Estimator {
    m: usize,
    window: usize,
    t_i: f64,
    cur: Vec<(f64, f64)>,
    nps: VecDeque<f64>,
}

impl Cn0Estimator {
    /// `m` prompts per block, smoothing over `smoothing` seconds.
    pub fn new(m: usize, t_i: f64, smoothing: f64) -> Self {
        let window = ((smoothing / (m as f64 * t_i)).round() as usize).max(1);
        Self { m, window, t_i, cur: Vec::with_capacity(m), nps: VecDeque::with_capacity(window) }
    }

    pub fn push(&mut self, ip: f64, qp: f64, bit_start: bool) {
        if bit_start {
            self.cur.clear();
        }
        self.cur.push((ip, qp));
        if self.cur.len() == self.m {
            if self.nps.len() == self.window {
                self.nps.pop_front();
            }
            self.nps.push_back(block_np(self.cur.drain(..)));
        }
    }

    pub fn estimate(&self) -> Cn0Estimate {
        from_mean_np(mean(self.nps.iter()), self.m, self.t_i)
    }
}
