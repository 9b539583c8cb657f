//! Sample-level synthesis, chunked on a fixed absolute sample grid.
//!
//! Samples are generated in chunks of [`CHUNK`] samples aligned to absolute
//! sample index 0. Within a chunk code and carrier phase are interpolated
//! linearly between exact truth evaluations at the chunk edges, and noise
//! comes from a ChaCha stream selected by the chunk index. Any sample is
//! therefore a pure function of (truth, seed, index): overlapping or
//! disjoint spans generated in any order or on any thread agree bit for bit.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::prn::code_table;
use super::truth::SignalTruth;
use crate::consts::{CODES_PER_BIT, CODE_LENGTH};
use crate::error::{Error, Result};

pub const CHUNK: usize = 4096;

/// Code periods replicated in the lookup table; bounds the chips a chunk may
/// span.
const TABLE_PERIODS: usize = 6;

/// Anything a correlator can read as a complex sample.
pub trait Sample: Copy + Send + Sync {
    fn re(&self) -> f64;
    fn im(&self) -> f64;
}

impl Sample for Complex<i8> {
    #[inline(always)]
    fn re(&self) -> f64 {
        self.re as f64
    }
    #[inline(always)]
    fn im(&self) -> f64 {
        self.im as f64
    }
}

impl Sample for Complex<f32> {
    #[inline(always)]
    fn re(&self) -> f64 {
        self.re as f64
    }
    #[inline(always)]
    fn im(&self) -> f64 {
        self.im as f64
    }
}

impl Sample for Complex<f64> {
    #[inline(always)]
    fn re(&self) -> f64 {
        self.re
    }
    #[inline(always)]
    fn im(&self) -> f64 {
        self.im
    }
}

/// A contiguous span of samples on the absolute grid `t = index / fs`.
#[derive(Debug, Clone, PartialEq)]
pub struct IfBlock<S = Complex<i8>> {
    pub t_start: f64,
    pub fs: f64,
    /// Absolute index of `samples[0]`.
    pub start_index: u64,
    pub samples: Vec<S>,
}

impl<S> IfBlock<S> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn end_index(&self) -> u64 {
        self.start_index + self.samples.len() as u64
    }

    /// Samples `[index, index + n)`, if covered.
    pub fn span(&self, index: u64, n: usize) -> Option<&[S]> {
        if index < self.start_index || index + n as u64 > self.end_index() {
            return None;
        }
        let off = (index - self.start_index) as usize;
        Some(&self.samples[off..off + n])
    }
}

/// Fixed AGC gain mapping ±4σ of the analog signal onto the 8-bit range,
/// with σ evaluated at the strongest point of the C/N0 schedule.
pub fn agc_scale(truth: &SignalTruth) -> f64 {
    let peak_cn0 = truth.scenario.config.cn0.levels().into_iter().fold(f64::NEG_INFINITY, f64::max);
    let a = super::truth::amplitude_from_cn0(peak_cn0, truth.sigma, truth.fs);
    let var = truth.sigma * truth.sigma + truth.n_sats() as f64 * a * a / 2.0;
    127.0 / (4.0 * var.sqrt())
}

#[inline]
pub fn quantize(x: f64, scale: f64) -> i8 {
    (x * scale).round().clamp(-128.0, 127.0) as i8
}

struct Tables {
    codes: Vec<Vec<f64>>,
}

impl Tables {
    fn new(truth: &SignalTruth) -> Self {
        let all = code_table();
        let codes = (0..truth.n_sats())
            .map(|i| {
                let c = &all[truth.prn(i) as usize - 1];
                (0..CODE_LENGTH * TABLE_PERIODS).map(|k| c[k % CODE_LENGTH] as f64).collect()
            })
            .collect();
        Self { codes }
    }
}

/// Adds chunk `chunk` of the noiseless signal into `re`/`im` (σ units).
fn add_signal(truth: &SignalTruth, tables: &Tables, chunk: u64, re: &mut [f64], im: &mut [f64]) {
    let fs = truth.fs;
    let i0 = chunk * CHUNK as u64;
    let t0 = i0 as f64 / fs;
    let t1 = (i0 + CHUNK as u64) as f64 / fs;
    let amp = truth.amplitude(0.5 * (t0 + t1));
    let bit_len = (CODES_PER_BIT as usize * CODE_LENGTH) as f64;
    for i in 0..truth.n_sats() {
        let a = truth.eval(i, t0);
        let psi1 = truth.code_phase(i, t1);
        let phi1 = truth.phi(i, t1);
        let code_step = (psi1 - a.code_phase) / CHUNK as f64;
        let phase_step = (phi1 - a.phi) / CHUNK as f64;
        let base = a.code_phase.rem_euclid(CODE_LENGTH as f64);
        let bit0 = (a.code_phase / bit_len).floor();
        let flip_at = (((bit0 + 1.0) * bit_len - a.code_phase) / code_step).ceil().max(0.0);
        let flip_at = if flip_at < CHUNK as f64 { flip_at as usize } else { CHUNK };
        let b0 = truth.bit(i, bit0 as i64) as f64 * amp;
        let b1 = truth.bit(i, bit0 as i64 + 1) as f64 * amp;
        let code = &tables.codes[i];
        let ph = (a.phi.rem_euclid(1.0)) * std::f64::consts::TAU;
        let mut z = Complex::new(ph.cos(), ph.sin());
        let w = Complex::from_polar(1.0, phase_step * std::f64::consts::TAU);
        for k in 0..CHUNK {
            let chip = code[(base + k as f64 * code_step) as usize];
            let s = chip * if k < flip_at { b0 } else { b1 };
            re[k] += s * z.re;
            im[k] += s * z.im;
            z *= w;
        }
    }
}

fn chunk_analog(truth: &SignalTruth, tables: &Tables, chunk: u64, seed: u64, noise: bool) -> (Vec<f64>, Vec<f64>) {
    let mut re = vec![0.0; CHUNK];
    let mut im = vec![0.0; CHUNK];
    if noise {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        for k in 0..CHUNK {
            re[k] = truth.sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
            im[k] = truth.sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
        }
    }
    add_signal(truth, tables, chunk, &mut re, &mut im);
    (re, im)
}

fn generate<S, F>(truth: &SignalTruth, start_index: u64, n: usize, seed: u64, noise: bool, map: F) -> Vec<S>
where
    S: Send + Copy + Default,
    F: Fn(f64, f64) -> S + Sync,
{
    let tables = Tables::new(truth);
    let first = start_index / CHUNK as u64;
    let last = (start_index + n as u64).div_ceil(CHUNK as u64);
    let chunks: Vec<Vec<S>> = (first..last)
        .into_par_iter()
        .map(|c| {
            let (re, im) = chunk_analog(truth, &tables, c, seed, noise);
            re.iter().zip(&im).map(|(&r, &i)| map(r, i)).collect()
        })
        .collect();
    let skip = (start_index - first * CHUNK as u64) as usize;
    chunks.into_iter().flatten().skip(skip).take(n).collect()
}

/// Unquantized samples `[start_index, start_index + n)` in analog units.
pub fn synthesize_analog(truth: &SignalTruth, start_index: u64, n: usize, seed: u64, noise: bool) -> Vec<Complex<f64>> {
    generate(truth, start_index, n, seed, noise, Complex::new)
}

/// Quantized samples `[start_index, start_index + n)`.
pub fn synthesize_span(truth: &SignalTruth, start_index: u64, n: usize, seed: u64) -> IfBlock {
    let scale = agc_scale(truth);
    let samples = generate(truth, start_index, n, seed, true, |r, i| Complex::new(quantize(r, scale), quantize(i, scale)));
    IfBlock { t_start: start_index as f64 / truth.fs, fs: truth.fs, start_index, samples }
}

/// Same span scaled by the AGC gain but without rounding or clipping.
pub fn synthesize_span_unquantized(truth: &SignalTruth, start_index: u64, n: usize, seed: u64) -> IfBlock<Complex<f32>> {
    let scale = agc_scale(truth);
    let samples = generate(truth, start_index, n, seed, true, |r, i| Complex::new((r * scale) as f32, (i * scale) as f32));
    IfBlock { t_start: start_index as f64 / truth.fs, fs: truth.fs, start_index, samples }
}

fn grid_index(x: f64, what: &str) -> Result<u64> {
    let r = x.round();
    if !(x >= -1e-9) || (x - r).abs() > 1e-6 {
        return Err(Error::Misalignment(format!("{what} is not on the sample grid ({x} samples)")));
    }
    Ok(r as u64)
}

/// Block starting at `t_start` lasting `duration`; both must sit on the
/// `1/fs` grid and `fs` must match the truth's sampling rate.
pub fn synthesize_block(truth: &SignalTruth, t_start: f64, duration: f64, fs: f64, seed: u64) -> Result<IfBlock> {
    if fs != truth.fs {
        return Err(Error::InvalidParameter(format!("fs {fs} differs from the scenario's {}", truth.fs)));
    }
    let start = grid_index(t_start * fs, "t_start")?;
    let n = grid_index(duration * fs, "duration")? as usize;
    Ok(synthesize_span(truth, start, n, seed))
}
