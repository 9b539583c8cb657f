//! Scalar/vector tracking mode switch with fallback hysteresis.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Stl,
    Vtl,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSwitch {
    pub mode: Mode,
    pub min_sats: usize,
    /// m²
    pub pos_trace_threshold: f64,
    /// s
    pub fallback_time: f64,
    below_since: Option<f64>,
}

impl ModeSwitch {
    pub fn new(min_sats: usize, pos_trace_threshold: f64, fallback_time: f64) -> Self {
        Self { mode: Mode::Stl, min_sats, pos_trace_threshold, fallback_time, below_since: None }
    }

    /// `usable` counts satellites that are both tracked in lock and have
    /// valid ephemeris at time `t`.
    pub fn update(&mut self, t: f64, usable: usize, pos_trace: f64) -> Mode {
        match self.mode {
            Mode::Stl => {
                if usable >= self.min_sats && pos_trace < self.pos_trace_threshold {
                    self.mode = Mode::Vtl;
                    self.below_since = None;
                }
            }
            Mode::Vtl => {
                if usable >= self.min_sats {
                    self.below_since = None;
                } else {
                    let since = *self.below_since.get_or_insert(t);
                    if t - since > self.fallback_time {
                        self.mode = Mode::Stl;
                        self.below_since = None;
                    }
                }
            }
        }
        self.mode
    }
}
