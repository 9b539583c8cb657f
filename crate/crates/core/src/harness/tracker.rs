//! One satellite channel: correlate → discriminate → C/N0 and lock →
//! loop filter or local KF → NCO, once per replica code period.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::lock::{pli, LockDetector};
use super::measurement::AnalyticCorrelator;
use crate::channel::{
    correlate, discriminate, nco_advance, ChannelNcoState, ChannelTelemetry, Cn0Estimator, CodeReplica, CorrelatorOutputs,
};
use crate::consts::{CODES_PER_BIT, CODE_LENGTH, F_CHIP, F_L1};
use crate::error::{Error, Result};
use crate::loops::{
    alfa_update_fed, cpg, gains_from_bandwidth, kf_channel_update, kf_predict, kf_shift_frame, og_generate, stl_update,
    variance_from_cn0_clamped, AidStatus, AlfaFilterState, Architecture, ChannelFeedback, ChannelObservation, ControlParams,
    KfChannelState, LoopConfig, LoopGains, OgInput,
};
use crate::signal::{IfBlock, SignalTruth};

/// C/N0 assumed for the KF measurement noise until the estimator has data.
const CN0_PRIOR: f64 = 40.0;
/// Stand-in variance for an invalid discriminator.
const R_INVALID: f64 = 1e12;

/// Where correlator outputs come from.
pub enum Source<'a> {
    Samples(&'a IfBlock),
    Analytic(&'a AnalyticCorrelator, &'a SignalTruth),
}

#[derive(Debug, Clone)]
pub struct ChannelTracker {
    pub index: usize,
    pub prn: u8,
    arch: Architecture,
    cfg: LoopConfig,
    fs: f64,
    replica: CodeReplica,
    pub nco: ChannelNcoState,
    theta: ControlParams,
    filter: AlfaFilterState,
    gains_stl: LoopGains,
    gains_aided: LoopGains,
    kf: KfChannelState,
    prev: Option<CorrelatorOutputs>,
    cn0: Cn0Estimator,
    lock: LockDetector,
    aided: bool,
    next_index: u64,
    epochs: u64,
    rng: ChaCha8Rng,
    pub last: Option<ChannelTelemetry>,
}

fn alpha() -> f64 {
    -F_CHIP / F_L1
}

impl ChannelTracker {
    /// Channel handed over from acquisition at `t = 0`: replica offset from
    /// truth by the configured code and Doppler sigmas.
    pub fn new(index: usize, truth: &SignalTruth, arch: Architecture, cfg: &LoopConfig, seed: u64) -> Result<Self> {
        let prn = truth.prn(index);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = truth.eval(index, 0.0);
        let gauss = |sigma: f64, rng: &mut ChaCha8Rng| {
            if sigma > 0.0 { Normal::new(0.0, sigma).expect("finite sigma").sample(rng) } else { 0.0 }
        };
        let code = s.code_phase + gauss(cfg.init_code_sigma, &mut rng);
        let fd = s.fd + gauss(cfg.init_doppler_sigma, &mut rng);
        let phase = s.phi + rng.random_range(-0.1..0.1);
        let theta = ControlParams { f_dll: -alpha() * fd, f_pll: fd };
        let gains_stl = gains_from_bandwidth(cfg.b_pll_stl, cfg.b_dll, cfg.t_i)?;
        let gains_aided = gains_from_bandwidth(cfg.b_pll_alfa, cfg.b_dll, cfg.t_i)?;
        let (r, _) = variance_from_cn0_clamped(CN0_PRIOR);
        let kf = KfChannelState::new(
            [cfg.init_code_sigma.powi(2).max(1e-6), 0.01, cfg.init_doppler_sigma.powi(2).max(1e-4)],
            [cfg.kf_q_tau, cfg.kf_q_phi, cfg.kf_q_fd(arch)],
            &r,
        );
        Ok(Self {
            index,
            prn,
            arch,
            cfg: *cfg,
            fs: truth.fs,
            replica: CodeReplica::new(prn)?,
            nco: ChannelNcoState::new(code, phase, &theta, 0.0),
            theta,
            filter: AlfaFilterState::new(fd, &gains_stl, cfg.t_i),
            gains_stl,
            gains_aided,
            kf,
            prev: None,
            cn0: Cn0Estimator::new(CODES_PER_BIT as usize, cfg.t_i, 1.0),
            lock: LockDetector::new(cfg.lock, cfg.t_i, false),
            aided: false,
            next_index: 0,
            epochs: 0,
            rng,
            last: None,
        })
    }

    pub fn locked(&self) -> bool {
        self.lock.locked()
    }

    pub fn aided(&self) -> bool {
        self.aided
    }

    /// Absolute index of the first sample the next epoch reads.
    pub fn next_index(&self) -> u64 {
        self.next_index
    }

    pub fn cn0(&self) -> f64 {
        self.cn0.estimate().dbhz
    }

    /// Runs epochs until the replica boundary reaches `t_k − T_I/2`.
    pub fn run_until(&mut self, t_k: f64, src: &Source<'_>, fb: Option<&ChannelFeedback>, vtl: bool) -> Result<()> {
        while self.nco.t_rx < t_k - 0.5 * self.cfg.t_i {
            self.epoch(src, fb, vtl)?;
        }
        Ok(())
    }

    fn fresh(&self, fb: Option<&ChannelFeedback>) -> Option<ChannelFeedback> {
        fb.filter(|f| {
            let age = self.nco.t_rx - f.t;
            age <= self.cfg.staleness && f.rho.is_finite() && f.rho_dot.is_finite() && f.fd_dot.is_finite()
        })
        .copied()
    }

    fn epoch(&mut self, src: &Source<'_>, fb: Option<&ChannelFeedback>, vtl: bool) -> Result<()> {
        let n = self.nco.samples_to_period_end(self.fs);
        let corr = match src {
            Source::Samples(block) => correlate(block, &self.nco, &self.replica, self.cfg.spacing, n)
                .map_err(|e| self.abort(format!("correlator: {e}")))?,
            Source::Analytic(a, truth) => a.correlate(truth, self.index, &self.nco, n, &mut self.rng),
        };
        let t_i = n as f64 / self.fs;
        let bit_start = self.epochs == 0 || self.nco.code_periods.rem_euclid(CODES_PER_BIT as i64) == 0;
        let prev = self.prev.as_ref().filter(|p| !bit_start && p.n_samples.abs_diff(n) <= 1);
        let d = discriminate(prev, &corr, self.cfg.spacing);

        let mut next = nco_advance(&self.nco, &self.theta, t_i);
        self.next_index += n as u64;
        next.t_rx = self.next_index as f64 / self.fs;
        // the epoch ends on a period boundary; absorb rounding just short of it
        if next.tau_nco > CODE_LENGTH as f64 - 1e-6 {
            next.tau_nco = (next.tau_nco - CODE_LENGTH as f64).max(0.0);
            next.code_periods += 1;
        }

        let feedback = if vtl { self.fresh(fb) } else { None };
        let est = self.cn0.estimate();
        let (theta, derot) = match self.arch {
            Architecture::Stl | Architecture::Alfa => {
                let aided = match (self.arch, feedback) {
                    (Architecture::Alfa, Some(f)) => {
                        let st = self.filter.with_gains(&self.gains_aided);
                        let (c, s, status) = alfa_update_fed(&st, &d, Some((f.fd_dot, f.t)), self.nco.t_rx, self.cfg.staleness);
                        (status == AidStatus::Fresh).then_some((c, s))
                    }
                    _ => None,
                };
                self.aided = aided.is_some();
                let (c, s) = aided.unwrap_or_else(|| stl_update(&self.filter.with_gains(&self.gains_stl), &d, self.cfg.k_f()));
                self.filter = s;
                (c, 0.0)
            }
            Architecture::Vdfll1 | Architecture::Vdfll2 => {
                let cn0 = if est.valid { est.dbhz } else { CN0_PRIOR };
                let mut st = self.kf.with_r(&variance_from_cn0_clamped(cn0).0);
                if !d.tau_valid {
                    st.r[(0, 0)] = R_INVALID;
                }
                if !d.phi_valid {
                    st.r[(1, 1)] = R_INVALID;
                }
                if !d.fd_valid {
                    st.r[(2, 2)] = R_INVALID;
                }
                let z = Vector3::new(-d.d_tau, d.d_phi, d.d_fd);
                let (upd, theta_kf, _) = kf_channel_update(&st, &z, &self.theta, t_i, alpha());
                let (theta, derot) = match feedback {
                    Some(f) => {
                        let mut c = cpg(&f, &next, self.cfg.t_i, self.cfg.k_cpg);
                        if self.cfg.vdfll_code_kf_term {
                            c.f_dll -= upd.x_hat[0] / t_i;
                        }
                        self.filter = AlfaFilterState::new(c.f_pll, &self.gains_stl, self.cfg.t_i);
                        (c, kf_predict(&st, &self.theta, t_i, alpha()).x_hat[1])
                    }
                    None => {
                        let (c, s) = stl_update(&self.filter.with_gains(&self.gains_stl), &d, self.cfg.k_f());
                        self.filter = s;
                        (c, 0.0)
                    }
                };
                let mut upd = kf_shift_frame(&upd, &theta_kf, &theta);
                // the aided command follows the predicted Doppler ramp, so the
                // residual only moves by what the ramp does not explain
                if let Some(f) = feedback {
                    upd.x_hat[2] += f.fd_dot * t_i;
                }
                self.aided = feedback.is_some();
                self.kf = upd;
                (theta, derot)
            }
        };
        if !theta.is_sane() {
            return Err(self.abort(format!("NCO command out of range: f_dll {} f_pll {}", theta.f_dll, theta.f_pll)));
        }

        let (sn, cs) = (-std::f64::consts::TAU * derot).sin_cos();
        let ip = corr.ip * cs - corr.qp * sn;
        let qp = corr.ip * sn + corr.qp * cs;
        self.cn0.push(ip, qp, bit_start);
        let est = self.cn0.estimate();
        self.lock.push(next.t_rx, ip, qp, bit_start, est.valid.then_some(est.dbhz));

        next.f_code = F_CHIP + theta.f_dll;
        next.f_carr = theta.f_pll;
        self.theta = theta;
        self.nco = next;
        self.prev = Some(corr);
        self.epochs += 1;
        self.last = Some(ChannelTelemetry {
            t_rx: next.t_rx,
            prn: self.prn,
            ip: corr.ip,
            qp: corr.qp,
            d_tau: d.d_tau,
            d_phi: d.d_phi,
            d_fd: d.d_fd,
            cn0: est.dbhz,
            pli: self.lock.pli().unwrap_or_else(|| pli(ip, qp)),
            locked: self.lock.locked(),
            vtl: self.aided,
            f_carr: theta.f_pll,
            doppler: self.doppler(),
        });
        Ok(())
    }

    fn abort(&self, reason: String) -> Error {
        Error::Runtime { t: self.nco.t_rx, prn: Some(self.prn), reason }
    }

    /// Loop Doppler estimate, Hz.
    pub fn doppler(&self) -> f64 {
        if self.arch.is_vdfll() { self.nco.f_carr + self.kf.x_hat[2] } else { self.filter.acc }
    }

    /// Observables referred to `t_k`; `None` while unlocked.
    pub fn observation(&self, t_k: f64) -> Option<ChannelObservation> {
        let input = OgInput {
            prn: self.prn,
            doppler: self.doppler(),
            delta_tau: if self.arch.is_vdfll() { self.kf.x_hat[0] } else { 0.0 },
            cn0: self.cn0(),
            locked: self.locked(),
        };
        og_generate(&self.nco, &input, t_k)
    }
}
