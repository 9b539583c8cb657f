//! Lock detector: C/N0 threshold plus a phase-lock indicator over 20 ms
//! coherent prompt sums, with a minimum dwell between state changes.
//!
//! The indicator is the ratio of window-averaged powers, which keeps its
//! spread small near 25 dB·Hz where per-sum ratios scatter widely.

use std::collections::VecDeque;

use crate::consts::CODES_PER_BIT;
use crate::loops::{LockConfig, LOCK_MIN_WINDOW};

#[derive(Debug, Clone)]
pub struct LockDetector {
    cfg: LockConfig,
    window: usize,
    min_len: usize,
    acc: (f64, f64),
    acc_len: u64,
    /// (I², Q²) per completed coherent sum
    powers: VecDeque<(f64, f64)>,
    locked: bool,
    last_change: f64,
}

/// `(I² − Q²)/(I² + Q²)`; zero for a zero prompt.
pub fn pli(i: f64, q: f64) -> f64 {
    let p = i * i + q * q;
    if p > 0.0 { (i * i - q * q) / p } else { 0.0 }
}

impl LockDetector {
    /// `t_i` is the nominal epoch length used to size the PLI window.
    pub fn new(cfg: LockConfig, t_i: f64, initially_locked: bool) -> Self {
        let bit = CODES_PER_BIT as f64 * t_i;
        let min_len = ((LOCK_MIN_WINDOW / bit).round() as usize).max(1);
        let window = ((cfg.window / bit).round() as usize).max(min_len);
        Self {
            cfg,
            window,
            min_len,
            acc: (0.0, 0.0),
            acc_len: 0,
            powers: VecDeque::with_capacity(window),
            locked: initially_locked,
            last_change: f64::NEG_INFINITY,
        }
    }

    pub fn locked(&self) -> bool {
        self.locked
    }

    /// Window PLI; `None` until the minimum span is available.
    pub fn pli(&self) -> Option<f64> {
        (self.powers.len() >= self.min_len).then(|| {
            let (i2, q2) = self.powers.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
            if i2 + q2 > 0.0 { (i2 - q2) / (i2 + q2) } else { 0.0 }
        })
    }

    /// Feeds one epoch's prompt. A completed bit-long coherent sum refreshes
    /// the window and, once it is full, the lock decision.
    pub fn push(&mut self, t: f64, ip: f64, qp: f64, bit_start: bool, cn0: Option<f64>) -> bool {
        if bit_start {
            if self.acc_len == CODES_PER_BIT {
                if self.powers.len() == self.window {
                    self.powers.pop_front();
                }
                self.powers.push_back((self.acc.0 * self.acc.0, self.acc.1 * self.acc.1));
                self.decide(t, cn0);
            }
            self.acc = (0.0, 0.0);
            self.acc_len = 0;
        }
        self.acc.0 += ip;
        self.acc.1 += qp;
        self.acc_len += 1;
        self.locked
    }

    fn decide(&mut self, t: f64, cn0: Option<f64>) {
        let (Some(p), Some(c)) = (self.pli(), cn0) else { return };
        let want = c > self.cfg.cn0_threshold && p > self.cfg.pli_threshold;
        if want != self.locked && t - self.last_change >= self.cfg.hold {
            self.locked = want;
            self.last_change = t;
        }
    }
}
