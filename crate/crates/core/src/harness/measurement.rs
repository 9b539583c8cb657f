//! Measurement-fidelity correlator: E/P/L outputs evaluated from signal
//! truth and the replica state, with Gaussian noise at the level the
//! sample-level chain would produce.
//!
//! `X = A·n·R(ε ∓ d/2)·sinc(π δf T)·e^{j2π δφ}·b + w`, with `ε`, `δφ`, `δf` the
//! signal-minus-replica code phase, carrier phase and Doppler at mid-epoch,
//! `R` the unit triangle and `w` zero-mean noise of variance `n·σ²` per
//! component, correlated across E/P/L as the replicas overlap.

use nalgebra::{Matrix3, Vector3};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::{ChannelNcoState, CorrelatorOutputs};
use crate::consts::{CODES_PER_BIT, CODE_LENGTH, F_CHIP};
use crate::signal::SignalTruth;

pub struct AnalyticCorrelator {
    spacing: f64,
    chol: Matrix3<f64>,
    noise: bool,
}

fn triangle(x: f64) -> f64 {
    (1.0 - x.abs()).max(0.0)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-9 { 1.0 } else { x.sin() / x }
}

impl AnalyticCorrelator {
    pub fn new(spacing: f64) -> Self {
        let h = 1.0 - 0.5 * spacing;
        let f = 1.0 - spacing;
        let cov = Matrix3::new(1.0, h, f, h, 1.0, h, f, h, 1.0);
        let chol = cov.cholesky().expect("E/P/L covariance is positive definite for d in (0, 1]").l();
        Self { spacing, chol, noise: true }
    }

    /// Deterministic mean outputs only.
    pub fn noiseless(spacing: f64) -> Self {
        Self { noise: false, ..Self::new(spacing) }
    }

    /// Outputs for `n` samples of satellite `i` starting at `nco.t_rx`.
    pub fn correlate(&self, truth: &SignalTruth, i: usize, nco: &ChannelNcoState, n: usize, rng: &mut ChaCha8Rng) -> CorrelatorOutputs {
        let fs = truth.fs;
        let t_i = n as f64 / fs;
        let t_mid = nco.t_rx + 0.5 * t_i;
        let s = truth.eval(i, t_mid);
        let replica_code = nco.code_phase() + nco.f_code * 0.5 * t_i;
        let replica_phase = nco.phase() + nco.f_carr * 0.5 * t_i;
        let eps = s.code_phase - replica_code;
        let dphi = s.phi - replica_phase;
        let dfd = s.fd - nco.f_carr;

        // data bit, weighted when a bit edge falls inside the epoch
        let bit_len = (CODES_PER_BIT as usize * CODE_LENGTH) as f64;
        let span = F_CHIP * t_i;
        let (c0, c1) = (s.code_phase - 0.5 * span, s.code_phase + 0.5 * span);
        let (k0, k1) = ((c0 / bit_len).floor(), (c1 / bit_len).floor());
        let b0 = truth.bit(i, k0 as i64) as f64;
        let bit = if k0 == k1 {
            b0
        } else {
            let w = (k1 * bit_len - c0) / span;
            w * b0 + (1.0 - w) * truth.bit(i, k1 as i64) as f64
        };

        let g = s.amplitude * n as f64 * bit * sinc(std::f64::consts::PI * dfd * t_i);
        let (sn, cs) = (std::f64::consts::TAU * dphi).sin_cos();
        let half = 0.5 * self.spacing;
        let r = [triangle(eps - half), triangle(eps), triangle(eps + half)];
        let sd = if self.noise { truth.sigma * (n as f64).sqrt() } else { 0.0 };
        let (ni, nq) = if self.noise {
            let mut draw = || Vector3::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng));
            (self.chol * draw() * sd, self.chol * draw() * sd)
        } else {
            (Vector3::zeros(), Vector3::zeros())
        };
        CorrelatorOutputs {
            ie: g * r[0] * cs + ni[0],
            qe: g * r[0] * sn + nq[0],
            ip: g * r[1] * cs + ni[1],
            qp: g * r[1] * sn + nq[1],
            il: g * r[2] * cs + ni[2],
            ql: g * r[2] * sn + nq[2],
            t_i,
            n_samples: n,
        }
    }
}
