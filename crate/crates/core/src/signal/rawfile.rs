//! Raw sample export: interleaved signed 8-bit I/Q (`ci8`) plus a JSON
//! sidecar naming the sampling rate, start time and scenario hash.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::synth::IfBlock;
use crate::error::{Error, Result};

pub const FORMAT_CI8: &str = "ci8";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSidecar {
    pub format: String,
    /// Hz
    pub fs: f64,
    /// Receiver time of the first sample, s.
    pub t_start: f64,
    pub n_samples: u64,
    pub scenario_hash: String,
}

impl RawSidecar {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: RawSidecar = serde_json::from_str(text).map_err(|e| Error::Malformed(format!("sidecar: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sidecar serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != FORMAT_CI8 {
            return Err(Error::Malformed(format!("unsupported sample format {:?}", self.format)));
        }
        if !(self.fs > 0.0) || !self.fs.is_finite() {
            return Err(Error::Malformed("sidecar fs must be positive".into()));
        }
        if !(self.t_start >= 0.0) || !self.t_start.is_finite() {
            return Err(Error::Malformed("sidecar t_start must be non-negative".into()));
        }
        if self.scenario_hash.len() != 64 || !self.scenario_hash.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(Error::Malformed("scenario_hash must be 64 hex digits".into()));
        }
        Ok(())
    }
}

pub fn encode_ci8(samples: &[Complex<i8>]) -> Vec<u8> {
    samples.iter().flat_map(|z| [z.re as u8, z.im as u8]).collect()
}

pub fn decode_ci8(bytes: &[u8]) -> Result<Vec<Complex<i8>>> {
    if bytes.len() % 2 != 0 {
        return Err(Error::Malformed(format!("odd byte count {} for interleaved I/Q", bytes.len())));
    }
    Ok(bytes.chunks_exact(2).map(|p| Complex::new(p[0] as i8, p[1] as i8)).collect())
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Streams consecutive blocks to `path`; the sidecar is written by
/// [`RawWriter::finish`].
pub struct RawWriter {
    path: PathBuf,
    out: BufWriter<File>,
    fs: f64,
    t_start: f64,
    next_index: Option<u64>,
    n: u64,
    scenario_hash: String,
}

impl RawWriter {
    pub fn create(path: &Path, fs: f64, scenario_hash: &str) -> Result<Self> {
        Ok(Self {
            path: path.to_owned(),
            out: BufWriter::new(File::create(path)?),
            fs,
            t_start: 0.0,
            next_index: None,
            n: 0,
            scenario_hash: scenario_hash.to_owned(),
        })
    }

    /// Appends the part of `block` beyond what was already written; blocks
    /// must overlap or abut the previous one.
    pub fn append(&mut self, block: &IfBlock) -> Result<()> {
        let from = match self.next_index {
            None => {
                self.t_start = block.t_start;
                block.start_index
            }
            Some(next) => {
                if block.start_index > next {
                    return Err(Error::Misalignment(format!("gap in raw export at sample {next}")));
                }
                next
            }
        };
        if block.end_index() <= from {
            return Ok(());
        }
        let part = block.span(from, (block.end_index() - from) as usize).expect("inside block");
        self.out.write_all(&encode_ci8(part))?;
        self.n += part.len() as u64;
        self.next_index = Some(block.end_index());
        Ok(())
    }

    /// Appends at most up to absolute sample `limit` (exclusive).
    pub fn append_until(&mut self, block: &IfBlock, limit: u64) -> Result<()> {
        if block.start_index >= limit {
            return Ok(());
        }
        let end = block.end_index().min(limit);
        let clipped = IfBlock {
            t_start: block.t_start,
            fs: block.fs,
            start_index: block.start_index,
            samples: block.samples[..(end - block.start_index) as usize].to_vec(),
        };
        self.append(&clipped)
    }

    pub fn finish(mut self) -> Result<RawSidecar> {
        self.out.flush()?;
        let side = RawSidecar {
            format: FORMAT_CI8.into(),
            fs: self.fs,
            t_start: self.t_start,
            n_samples: self.n,
            scenario_hash: self.scenario_hash,
        };
        std::fs::write(sidecar_path(&self.path), side.to_json())?;
        Ok(side)
    }
}

/// Reads a `ci8` file and its sidecar, checking the sample count.
pub fn read_raw(path: &Path) -> Result<(IfBlock, RawSidecar)> {
    let side = RawSidecar::from_json(&std::fs::read_to_string(sidecar_path(path))?)?;
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let samples = decode_ci8(&bytes)?;
    if samples.len() as u64 != side.n_samples {
        return Err(Error::Malformed(format!(
            "sidecar announces {} samples, file holds {}",
            side.n_samples,
            samples.len()
        )));
    }
    let start = (side.t_start * side.fs).round() as u64;
    Ok((IfBlock { t_start: side.t_start, fs: side.fs, start_index: start, samples }, side))
}
