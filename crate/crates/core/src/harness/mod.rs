//! Experiment orchestration: scenario → signal → channels → loops →
//! navigation filter, one architecture per run.
//!
//! Time base: samples sit on `t = index / fs`, channel epochs end on replica
//! code-period boundaries, navigation epochs fall on `k / nav.rate` and the
//! IMU runs at an integer multiple of the navigation rate. Channels advance
//! concurrently between navigation epochs; feedback published at epoch `k`
//! is read no earlier than the interval leading to `k + 1`.

pub mod compare;
pub mod lock;
pub mod measurement;
pub mod metrics;
pub mod telemetry;
pub mod tracker;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use compare::{compare, Comparison, PlotData};
pub use lock::{pli, LockDetector};
pub use measurement::AnalyticCorrelator;
pub use metrics::{rmse, LoopSettings, MetricsAccumulator, MetricsReport, SatMetrics};
pub use telemetry::{NavRecord, TelemetryWriter, CHANNELS_FILE, NAV_FILE};
pub use tracker::{ChannelTracker, Source};

use crate::channel::ChannelTelemetry;
use crate::error::{Error, Result};
use crate::loops::{Architecture, ChannelObservation, FeedbackBus};
use crate::navfilter::{lead_doppler_rate, make_feedback, AidingSet, Mode, ModeSwitch, NavFilter};
use crate::scenario::{geometry, Cn0Schedule, SatPva, ScenarioConfig};
use crate::signal::{signal_truth_from_scenario, synthesize_span, IfBlock, RawSidecar, RawWriter};

/// RMSE excludes this long after the first switch to vector tracking, s.
pub const CONVERGENCE_WINDOW: f64 = 5.0;

pub const METRICS_JSON: &str = "metrics.json";
pub const METRICS_CSV: &str = "metrics.csv";
pub const RAW_IQ_FILE: &str = "iq.ci8";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fidelity {
    /// Correlators run over synthesized, quantized IF samples.
    #[default]
    Sample,
    /// Correlator outputs drawn from their analytic distribution.
    Measurement,
}

impl fmt::Display for Fidelity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fidelity::Sample => "sample",
            Fidelity::Measurement => "measurement",
        })
    }
}

impl FromStr for Fidelity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sample" => Ok(Fidelity::Sample),
            "measurement" => Ok(Fidelity::Measurement),
            _ => Err(Error::Config(format!("unknown fidelity {s:?} (sample|measurement)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub arch: Architecture,
    pub seed: u64,
    /// Telemetry, metrics and raw IQ land here; nothing is written if unset.
    pub out_dir: Option<PathBuf>,
    pub fidelity: Fidelity,
    /// Export the synthesized IF stream (sample fidelity only).
    pub raw_iq: bool,
}

impl RunConfig {
    pub fn new(scenario: ScenarioConfig, arch: Architecture, seed: u64) -> Self {
        Self { scenario, arch, seed, out_dir: None, fidelity: Fidelity::Sample, raw_iq: false }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.raw_iq && self.fidelity != Fidelity::Sample {
            return Err(Error::Config("raw IQ export needs sample fidelity".into()));
        }
        if self.raw_iq && self.out_dir.is_none() {
            return Err(Error::Config("raw IQ export needs an output directory".into()));
        }
        Ok(())
    }
}

/// Hash of the scenario with its name and C/N0 schedule removed.
pub fn geometry_hash(cfg: &ScenarioConfig) -> String {
    let mut c = cfg.clone();
    c.name.clear();
    c.cn0 = Cn0Schedule { segments: Vec::new() };
    c.hash()
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: MetricsReport,
    /// One record per navigation epoch.
    pub nav: Vec<NavRecord>,
    /// Latest telemetry of every channel at each navigation epoch.
    pub channels: Vec<Vec<ChannelTelemetry>>,
    pub raw: Option<RawSidecar>,
    pub health: FilterHealth,
}

/// Worst navigation-filter conditioning seen over a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FilterHealth {
    /// Largest |P − Pᵀ| relative to the largest entry of P.
    pub max_asymmetry: f64,
    /// Smallest eigenvalue of P relative to its largest entry.
    pub min_eigen_ratio: f64,
    /// Largest | |q| − 1 | of the attitude quaternion.
    pub max_quat_norm_error: f64,
}

impl FilterHealth {
    fn observe(&mut self, f: &NavFilter) {
        let (asym, eig) = f.err.covariance_health();
        self.max_asymmetry = self.max_asymmetry.max(asym);
        self.min_eigen_ratio = self.min_eigen_ratio.min(eig);
        self.max_quat_norm_error = self.max_quat_norm_error.max((f.nav.q.quaternion().norm() - 1.0).abs());
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let sc = &cfg.scenario;
    let scenario = sc.build()?;
    let seeds = sc.seeds.mixed(cfg.seed);
    let truth = signal_truth_from_scenario(&scenario, &seeds);
    let imu = scenario.imu_samples(seeds.imu)?;
    let earth = *scenario.earth();
    let loops = sc.tracking;
    let fs = sc.signal.fs;
    let t_i = loops.t_i;
    let n_sats = truth.n_sats();
    let runtime = |t: f64, prn: Option<u8>, reason: String| Error::Runtime { t, prn, reason };

    let mut trackers = (0..n_sats)
        .map(|i| ChannelTracker::new(i, &truth, cfg.arch, &loops, seeds.init ^ truth.prn(i) as u64))
        .collect::<Result<Vec<_>>>()?;
    let mut filter = NavFilter::from_truth(&scenario.vehicle(0.0), scenario.receiver_clock(0.0), sc.nav, earth, seeds.init);
    filter.propagate(&imu[0]);
    let mut mode = ModeSwitch::new(sc.nav.min_sats, sc.nav.switch_pos_trace, sc.nav.fallback_time);
    let bus: FeedbackBus<AidingSet> = FeedbackBus::new();
    // last unshifted set, the slope reference for the Doppler-rate lead
    let mut last_set: Option<AidingSet> = None;
    let analytic = AnalyticCorrelator::new(loops.spacing);

    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut telemetry = cfg.out_dir.as_deref().map(TelemetryWriter::create).transpose()?;
    let mut raw = match &cfg.out_dir {
        Some(dir) if cfg.raw_iq => Some(RawWriter::create(&dir.join(RAW_IQ_FILE), fs, &sc.hash())?),
        _ => None,
    };
    let raw_limit = (sc.duration * fs).round() as u64;

    let imu_per_epoch = (sc.imu.rate / sc.nav.rate).round() as usize;
    let n_epochs = (sc.duration * sc.nav.rate + 1e-9).floor() as usize;
    let mut acc = MetricsAccumulator::default();
    let mut switch_time = None;
    // channels that have reached lock at least once form the vector-tracking set
    let mut tracking = vec![false; n_sats];
    let mut nav_log = Vec::with_capacity(n_epochs);
    let mut health = FilterHealth { min_eigen_ratio: f64::INFINITY, ..FilterHealth::default() };
    let mut chan_log = Vec::with_capacity(n_epochs);

    for k in 1..=n_epochs {
        let t_k = k as f64 / sc.nav.rate;

        let block: Option<IfBlock> = (cfg.fidelity == Fidelity::Sample).then(|| {
            let start = trackers.iter().map(|t| t.next_index()).min().unwrap_or(0);
            let end = ((t_k + 1.5 * t_i) * fs).ceil() as u64 + 16;
            synthesize_span(&truth, start, (end - start) as usize, seeds.noise)
        });
        if let (Some(w), Some(b)) = (raw.as_mut(), block.as_ref()) {
            w.append_until(b, raw_limit)?;
        }
        let src = match &block {
            Some(b) => Source::Samples(b),
            None => Source::Analytic(&analytic, &truth),
        };
        let aiding = bus.latest();
        let vtl = mode.mode == Mode::Vtl && cfg.arch != Architecture::Stl;
        trackers.par_iter_mut().try_for_each(|tr| {
            let fb = aiding.as_deref().and_then(|a| a.feedback(tr.prn));
            tr.run_until(t_k, &src, fb.as_ref(), vtl)
        })?;

        for tr in &trackers {
            if (tr.nco.t_rx - t_k).abs() > 0.5 * t_i + 1.0 / fs {
                return Err(runtime(t_k, Some(tr.prn), format!("channel epoch at {} s misaligned", tr.nco.t_rx)));
            }
        }

        let first = (k - 1) * imu_per_epoch + 1;
        for j in first..=k * imu_per_epoch {
            let s = imu.get(j).ok_or_else(|| runtime(t_k, None, format!("IMU sample {j} missing")))?;
            filter.propagate(s);
        }

        let sats: Vec<SatPva> = (0..n_sats).map(|i| scenario.sat(i, t_k)).collect();
        let raw_obs: Vec<Option<ChannelObservation>> = trackers.iter().map(|t| t.observation(t_k)).collect();
        let eph_ok = t_k >= sc.signal.ephemeris_warmup;
        let obs: Vec<ChannelObservation> = if eph_ok {
            raw_obs.iter().flatten().filter(|o| o.plausible(filter.nav.clk_b)).copied().collect()
        } else {
            Vec::new()
        };
        let obs_sats: Vec<SatPva> =
            obs.iter().map(|o| *sats.iter().find(|s| s.prn == o.prn).expect("observation of a scenario satellite")).collect();
        let update = filter.update(&obs, &obs_sats);
        if !(filter.nav.p.iter().chain(filter.nav.v.iter()).all(|x| x.is_finite()) && filter.nav.clk_b.is_finite()) {
            return Err(runtime(t_k, None, "navigation state diverged".into()));
        }

        for (flag, tr) in tracking.iter_mut().zip(&trackers) {
            *flag |= tr.locked();
        }
        let usable = if eph_ok { trackers.iter().filter(|t| t.locked()).count() } else { 0 };
        let m = mode.update(t_k, usable, filter.err.pos_trace());
        if m == Mode::Vtl && switch_time.is_none() {
            switch_time = Some(t_k);
        }
        if m == Mode::Vtl && cfg.arch != Architecture::Stl {
            let aided: Vec<u8> = trackers.iter().zip(&tracking).filter(|(_, &on)| on).map(|(t, _)| t.prn).collect();
            let set = make_feedback(&filter.nav, &sats, &aided, &filter.acceleration(), sc.nav.clock_jerk)
                .map_err(|e| runtime(t_k, None, format!("feedback: {e}")))?;
            let mut held = set.clone();
            if let Some(prev) = &last_set {
                lead_doppler_rate(&mut held, prev, 0.5 / sc.nav.rate);
            }
            last_set = Some(set);
            bus.publish(held);
        } else {
            last_set = None;
            bus.clear();
        }

        health.observe(&filter);

        let truth_state = scenario.vehicle(t_k);
        let pos_err = (filter.nav.p - truth_state.p_u).norm();
        acc.record_position(t_k, pos_err);
        if let Some(level) = sc.cn0.plateau_at(t_k) {
            for (i, tr) in trackers.iter().enumerate() {
                let errors = raw_obs[i].map(|o| (o.rho_tilde - truth.pseudorange(i, t_k), o.fd_tilde - truth.fd(i, t_k)));
                let el = geometry(&truth_state.p_u, &truth_state.v_u, &sats[i])?.elevation.to_degrees();
                acc.record(t_k, i, tr.prn, level, tr.locked(), errors, el);
            }
        }

        let record = NavRecord {
            t: t_k,
            mode: m,
            p: filter.nav.p.into(),
            v: filter.nav.v.into(),
            clk_b: filter.nav.clk_b,
            clk_d: filter.nav.clk_d,
            pos_err,
            pos_trace: filter.err.pos_trace(),
            usable,
            accepted: update.accepted,
            rejected: update.rejected,
        };
        let chans: Vec<ChannelTelemetry> = trackers.iter().filter_map(|t| t.last).collect();
        if let Some(w) = telemetry.as_mut() {
            w.write_epoch(&record, &chans)?;
        }
        nav_log.push(record);
        chan_log.push(chans);
    }

    let (satellites, position_rmse, position_samples) = acc.finish(switch_time.map(|t| t + CONVERGENCE_WINDOW));
    let report = MetricsReport {
        scenario: sc.name.clone(),
        scenario_hash: sc.hash(),
        geometry_hash: geometry_hash(sc),
        architecture: cfg.arch,
        seed: cfg.seed,
        fidelity: cfg.fidelity,
        switch_time,
        convergence_window: CONVERGENCE_WINDOW,
        position_rmse,
        position_samples,
        loop_settings: LoopSettings::new(&loops, cfg.arch),
        satellites,
    };
    if let Some(dir) = &cfg.out_dir {
        std::fs::write(dir.join(METRICS_JSON), report.to_json())?;
        std::fs::write(dir.join(METRICS_CSV), report.to_csv())?;
    }
    if let Some(w) = telemetry {
        w.finish()?;
    }
    let raw = raw.map(RawWriter::finish).transpose()?;
    Ok(RunOutput { report, nav: nav_log, channels: chan_log, raw, health })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::preset::static_desk;

    #[test]
    fn fidelity_names_round_trip() {
        for f in [Fidelity::Sample, Fidelity::Measurement] {
            assert_eq!(f.to_string().parse::<Fidelity>().unwrap(), f);
        }
        assert!(matches!("fast".parse::<Fidelity>(), Err(Error::Config(_))));
    }

    #[test]
    fn geometry_hash_ignores_signal_strength() {
        let a = static_desk(30.0);
        let b = static_desk(25.0);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(geometry_hash(&a), geometry_hash(&b));
    }

    #[test]
    fn raw_export_requires_samples() {
        let mut cfg = RunConfig::new(static_desk(40.0), Architecture::Stl, 1);
        cfg.raw_iq = true;
        cfg.fidelity = Fidelity::Measurement;
        assert!(matches!(run(&cfg), Err(Error::Config(_))));
    }
}
