//! Telemetry sinks: one CSV row per channel per navigation epoch and one
//! JSON line per navigation epoch.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelTelemetry;
use crate::error::Result;
use crate::navfilter::Mode;

pub const CHANNELS_FILE: &str = "channels.csv";
pub const NAV_FILE: &str = "nav.jsonl";

/// Navigation-filter state at one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavRecord {
    pub t: f64,
    pub mode: Mode,
    pub p: [f64; 3],
    pub v: [f64; 3],
    /// m
    pub clk_b: f64,
    /// m/s
    pub clk_d: f64,
    /// Distance to the true position, m.
    pub pos_err: f64,
    /// m²
    pub pos_trace: f64,
    pub usable: usize,
    pub accepted: usize,
    pub rejected: usize,
}

pub struct TelemetryWriter {
    channels: BufWriter<File>,
    nav: BufWriter<File>,
}

impl TelemetryWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        let mut channels = BufWriter::new(File::create(dir.join(CHANNELS_FILE))?);
        writeln!(channels, "{}", ChannelTelemetry::CSV_HEADER)?;
        let nav = BufWriter::new(File::create(dir.join(NAV_FILE))?);
        Ok(Self { channels, nav })
    }

    pub fn write_epoch(&mut self, nav: &NavRecord, channels: &[ChannelTelemetry]) -> Result<()> {
        for c in channels {
            writeln!(self.channels, "{}", c.csv_row())?;
        }
        let line = serde_json::to_string(nav).expect("nav record serializes");
        writeln!(self.nav, "{line}")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.channels.flush()?;
        self.nav.flush()?;
        Ok(())
    }
}
