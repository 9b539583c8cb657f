use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear ramp from `start` to `end` dB·Hz over `[t_start, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cn0Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub start: f64,
    pub end: f64,
}

/// Piecewise-linear C/N0 profile shared by all satellites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cn0Schedule {
    pub segments: Vec<Cn0Segment>,
}

const CONTIGUITY_TOL: f64 = 1e-9;

impl Cn0Schedule {
    pub fn new(segments: Vec<Cn0Segment>) -> Result<Self> {
        let s = Self { segments };
        s.validate()?;
        Ok(s)
    }

    pub fn constant(cn0: f64, duration: f64) -> Self {
        Self {
            segments: vec![Cn0Segment {
                t_start: 0.0,
                t_end: duration,
                start: cn0,
                end: cn0,
            }],
        }
    }

    /// Holds `initial` until `t_ramp`, ramps linearly to `target` over
    /// `ramp_len` seconds and then holds `target` until `duration`.
    pub fn degrade(initial: f64, target: f64, t_ramp: f64, ramp_len: f64, duration: f64) -> Self {
        Self {
            segments: vec![
                Cn0Segment { t_start: 0.0, t_end: t_ramp, start: initial, end: initial },
                Cn0Segment { t_start: t_ramp, t_end: t_ramp + ramp_len, start: initial, end: target },
                Cn0Segment { t_start: t_ramp + ramp_len, t_end: duration, start: target, end: target },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidParameter("empty C/N0 schedule".into()));
        }
        for s in &self.segments {
            if !(s.t_end > s.t_start) || !s.start.is_finite() || !s.end.is_finite() {
                return Err(Error::InvalidParameter(format!("bad C/N0 segment {s:?}")));
            }
        }
        for w in self.segments.windows(2) {
            if (w[1].t_start - w[0].t_end).abs() > CONTIGUITY_TOL {
                return Err(Error::InvalidParameter(format!(
                    "C/N0 segments not contiguous at {} / {}",
                    w[0].t_end, w[1].t_start
                )));
            }
        }
        Ok(())
    }

    pub fn span(&self) -> (f64, f64) {
        (self.segments[0].t_start, self.segments[self.segments.len() - 1].t_end)
    }

    /// Plateau levels (segments with equal start and end), in order of first
    /// appearance.
    pub fn levels(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for s in &self.segments {
            if s.start == s.end && !out.contains(&s.start) {
                out.push(s.start);
            }
        }
        out
    }

    /// Plateau level in force at `t`, if `t` is not on a ramp.
    pub fn plateau_at(&self, t: f64) -> Option<f64> {
        self.segments
            .iter()
            .find(|s| t >= s.t_start && t <= s.t_end)
            .filter(|s| s.start == s.end)
            .map(|s| s.start)
    }
}

/// Scheduled C/N0 at `t`, dB·Hz.
pub fn cn0_at(schedule: &Cn0Schedule, t: f64) -> Result<f64> {
    let (start, end) = schedule.span();
    if !(t >= start - CONTIGUITY_TOL && t <= end + CONTIGUITY_TOL) {
        return Err(Error::OutOfSpan { t, start, end });
    }
    let seg = schedule
        .segments
        .iter()
        .find(|s| t <= s.t_end + CONTIGUITY_TOL)
        .unwrap_or(&schedule.segments[schedule.segments.len() - 1]);
    let x = ((t - seg.t_start) / (seg.t_end - seg.t_start)).clamp(0.0, 1.0);
    Ok(seg.start + x * (seg.end - seg.start))
}
