//! Error-state EKF: 17 states `[δp, δv, δψ, δb_a, δb_g, δclk_b, δclk_d]`,
//! errors defined as truth minus estimate with `C_true = (I + [δψ×])·Ĉ`.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::doppler::doppler_predict;
use super::ins::{ins_mechanize, NavState};
use super::NavConfig;
use crate::consts::{F_CHIP, F_L1, SPEED_OF_LIGHT};
use crate::earth::{quat_from_rotvec, skew, EarthModel};
use crate::loops::{variance_from_cn0_clamped, ChannelObservation};
use crate::scenario::{ImuSample, SatPva, TrajectoryState};

pub const N_ERR: usize = 17;
pub const IP: usize = 0;
pub const IV: usize = 3;
pub const IPSI: usize = 6;
pub const IBA: usize = 9;
pub const IBG: usize = 12;
pub const ICB: usize = 15;
pub const ICD: usize = 16;

pub type ErrVec = SVector<f64, N_ERR>;
pub type ErrMat = SMatrix<f64, N_ERR, N_ERR>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EkfErrorState {
    pub x: ErrVec,
    pub p: ErrMat,
}

impl EkfErrorState {
    pub fn from_config(cfg: &NavConfig) -> Self {
        let mut d = ErrVec::zeros();
        let att = cfg.init_att_sigma.to_radians();
        for k in 0..3 {
            d[IP + k] = cfg.init_pos_sigma.powi(2);
            d[IV + k] = cfg.init_vel_sigma.powi(2);
            d[IPSI + k] = att * att;
            d[IBA + k] = cfg.init_accel_bias_sigma.powi(2);
            d[IBG + k] = cfg.init_gyro_bias_sigma.powi(2);
        }
        d[ICB] = cfg.init_clk_bias_sigma.powi(2);
        d[ICD] = cfg.init_clk_drift_sigma.powi(2);
        Self { x: ErrVec::zeros(), p: ErrMat::from_diagonal(&d) }
    }

    /// Trace of the position block, m².
    pub fn pos_trace(&self) -> f64 {
        self.p[(IP, IP)] + self.p[(IP + 1, IP + 1)] + self.p[(IP + 2, IP + 2)]
    }

    /// Largest asymmetry and smallest eigenvalue of `p`, both relative to
    /// its largest entry.
    pub fn covariance_health(&self) -> (f64, f64) {
        let scale = self.p.abs().max();
        if !(scale > 0.0) {
            return (0.0, 0.0);
        }
        let asym = (self.p - self.p.transpose()).abs().max() / scale;
        let sym = 0.5 * (self.p + self.p.transpose());
        let min = sym.symmetric_eigenvalues().min();
        (asym, min / scale)
    }
}

fn block(m: &mut ErrMat, r: usize, c: usize, b: &Matrix3<f64>) {
    m.fixed_view_mut::<3, 3>(r, c).copy_from(b);
}

/// First-order transition `Φ = I + A·dt` linearized about `nav` with the
/// bias-corrected specific force `f_b` (body), plus the discrete process
/// noise. The clock block is exact.
pub fn transition(nav: &NavState, f_b: &Vector3<f64>, dt: f64, earth: &EarthModel, cfg: &NavConfig) -> (ErrMat, ErrMat) {
    let c = nav.q.to_rotation_matrix().into_inner();
    let w = skew(&earth.omega_ie());
    let f_e = c * (f_b - nav.b_a);
    let mut a = ErrMat::zeros();
    block(&mut a, IP, IV, &Matrix3::identity());
    block(&mut a, IV, IP, &earth.gravity_gradient(&nav.p));
    block(&mut a, IV, IV, &(-2.0 * w));
    block(&mut a, IV, IPSI, &(-skew(&f_e)));
    block(&mut a, IV, IBA, &(-c));
    block(&mut a, IPSI, IPSI, &(-w));
    block(&mut a, IPSI, IBG, &(-c));
    let mut phi = ErrMat::identity() + a * dt;
    phi[(ICB, ICD)] = dt;
    phi[(ICD, ICD)] = 1.0;

    let mut q = ErrMat::zeros();
    let (sa, sg) = (cfg.accel_noise_psd, cfg.gyro_noise_psd);
    let (dt2, dt3) = (dt * dt, dt * dt * dt);
    let i3 = Matrix3::identity();
    block(&mut q, IP, IP, &(i3 * sa * dt3 / 3.0));
    block(&mut q, IP, IV, &(i3 * sa * dt2 / 2.0));
    block(&mut q, IV, IP, &(i3 * sa * dt2 / 2.0));
    block(&mut q, IV, IV, &(i3 * sa * dt));
    block(&mut q, IPSI, IPSI, &(i3 * sg * dt));
    block(&mut q, IBA, IBA, &(i3 * cfg.accel_bias_psd * dt));
    block(&mut q, IBG, IBG, &(i3 * cfg.gyro_bias_psd * dt));
    let (sb, sd) = (cfg.clock_bias_psd, cfg.clock_drift_psd);
    q[(ICB, ICB)] = sb * dt + sd * dt3 / 3.0;
    q[(ICB, ICD)] = sd * dt2 / 2.0;
    q[(ICD, ICB)] = sd * dt2 / 2.0;
    q[(ICD, ICD)] = sd * dt;
    (phi, q)
}

/// `P ← Φ P Φᵀ + Q_d`, `x ← Φ x`.
pub fn ekf_propagate(err: &EkfErrorState, nav: &NavState, imu: &ImuSample, dt: f64, earth: &EarthModel, cfg: &NavConfig) -> EkfErrorState {
    let (phi, q) = transition(nav, &imu.f_b, dt, earth, cfg);
    let p = phi * err.p * phi.transpose() + q;
    EkfErrorState { x: phi * err.x, p: (p + p.transpose()) * 0.5 }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateReport {
    pub accepted: usize,
    pub rejected: usize,
    /// Sum of normalized innovations squared over accepted measurements.
    pub nis: f64,
    /// Every measurement was gated out; the state is unchanged.
    pub skipped: bool,
}

const K_FD: f64 = F_L1 / SPEED_OF_LIGHT;

/// Sequential scalar updates with pseudorange and Doppler of every
/// observation, gated at `cfg.gate_sigma`, Joseph form. `sats[i]` holds the
/// satellite state for `obs[i]`. The error state is folded into the nominal
/// state and reset afterwards.
pub fn ekf_update(
    err: &EkfErrorState,
    nav: &NavState,
    obs: &[ChannelObservation],
    sats: &[SatPva],
    cfg: &NavConfig,
) -> (EkfErrorState, NavState, UpdateReport) {
    assert_eq!(obs.len(), sats.len(), "one satellite state per observation");
    let mut e = *err;
    let mut report = UpdateReport::default();
    for (o, s) in obs.iter().zip(sats) {
        let d = s.p - nav.p;
        let range = d.norm();
        let u = d / range;
        let (vars, _) = variance_from_cn0_clamped(o.cn0);
        let m_per_chip = SPEED_OF_LIGHT / F_CHIP;

        let mut h_rho = SVector::<f64, N_ERR>::zeros();
        h_rho.fixed_rows_mut::<3>(IP).copy_from(&(-u));
        h_rho[ICB] = 1.0;
        let rho_hat = range + nav.clk_b - s.clock_bias;
        let r_rho = m_per_chip * m_per_chip * vars.tau * cfg.obs_variance_scale;

        let mut h_fd = SVector::<f64, N_ERR>::zeros();
        h_fd.fixed_rows_mut::<3>(IV).copy_from(&(K_FD * u));
        h_fd[ICD] = -K_FD;
        let fd_hat = doppler_predict(nav, s);
        let r_fd = vars.fd * cfg.obs_variance_scale;

        for (h, y, r) in [(h_rho, o.rho_tilde - rho_hat, r_rho), (h_fd, o.fd_tilde - fd_hat, r_fd)] {
            let innov = y - h.dot(&e.x);
            let ph = e.p * h;
            let s_var = h.dot(&ph) + r;
            if !innov.is_finite() || innov.abs() > cfg.gate_sigma * s_var.sqrt() {
                report.rejected += 1;
                continue;
            }
            let k = ph / s_var;
            e.x += k * innov;
            let ikh = ErrMat::identity() - k * h.transpose();
            let p = ikh * e.p * ikh.transpose() + k * k.transpose() * r;
            e.p = (p + p.transpose()) * 0.5;
            report.accepted += 1;
            report.nis += innov * innov / s_var;
        }
    }
    report.skipped = report.accepted == 0;
    let nav = fold(nav, &e.x);
    e.x = ErrVec::zeros();
    (e, nav, report)
}

/// Applies an error estimate to the nominal state.
pub fn fold(nav: &NavState, x: &ErrVec) -> NavState {
    let v3 = |i: usize| Vector3::new(x[i], x[i + 1], x[i + 2]);
    NavState {
        p: nav.p + v3(IP),
        v: nav.v + v3(IV),
        q: quat_from_rotvec(&v3(IPSI)) * nav.q,
        b_a: nav.b_a + v3(IBA),
        b_g: nav.b_g + v3(IBG),
        clk_b: nav.clk_b + x[ICB],
        clk_d: nav.clk_d + x[ICD],
        ..*nav
    }
}

/// INS plus error-state filter, driven by consecutive IMU samples.
#[derive(Debug, Clone)]
pub struct NavFilter {
    pub nav: NavState,
    pub err: EkfErrorState,
    pub earth: EarthModel,
    pub cfg: NavConfig,
    last_imu: Option<ImuSample>,
}

impl NavFilter {
    pub fn new(nav: NavState, cfg: NavConfig, earth: EarthModel) -> Self {
        Self { nav, err: EkfErrorState::from_config(&cfg), earth, cfg, last_imu: None }
    }

    /// Filter seeded from truth perturbed by the configured sigmas.
    pub fn from_truth(truth: &TrajectoryState, clock: (f64, f64), cfg: NavConfig, earth: EarthModel, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut n = || -> f64 { StandardNormal.sample(&mut rng) };
        let mut v3 = |s: f64| Vector3::new(n(), n(), n()) * s;
        let dp = v3(cfg.init_pos_sigma);
        let dv = v3(cfg.init_vel_sigma);
        let dpsi = v3(cfg.init_att_sigma.to_radians());
        let dcb = v3(cfg.init_clk_bias_sigma).x;
        let dcd = v3(cfg.init_clk_drift_sigma).x;
        let nav = NavState {
            t: truth.t,
            p: truth.p_u + dp,
            v: truth.v_u + dv,
            q: quat_from_rotvec(&dpsi) * truth.q,
            b_a: Vector3::zeros(),
            b_g: Vector3::zeros(),
            clk_b: clock.0 + dcb,
            clk_d: clock.1 + dcd,
        };
        Self::new(nav, cfg, earth)
    }

    /// Mechanizes to `imu.t` and propagates the covariance.
    pub fn propagate(&mut self, imu: &ImuSample) {
        if let Some(prev) = self.last_imu {
            let dt = imu.t - prev.t;
            if dt > 0.0 {
                let mid = ImuSample { t: prev.t, f_b: 0.5 * (prev.f_b + imu.f_b), omega_b: prev.omega_b };
                self.err = ekf_propagate(&self.err, &self.nav, &mid, dt, &self.earth, &self.cfg);
                self.nav = ins_mechanize(&self.nav, &prev, imu, &self.earth);
            }
        } else {
            self.nav.t = imu.t;
        }
        self.last_imu = Some(*imu);
    }

    pub fn update(&mut self, obs: &[ChannelObservation], sats: &[SatPva]) -> UpdateReport {
        let (err, nav, report) = ekf_update(&self.err, &self.nav, obs, sats, &self.cfg);
        self.err = err;
        self.nav = nav;
        report
    }

    pub fn last_imu(&self) -> Option<&ImuSample> {
        self.last_imu.as_ref()
    }

    /// ECEF acceleration from the latest IMU sample.
    pub fn acceleration(&self) -> Vector3<f64> {
        match &self.last_imu {
            Some(imu) => self.nav.acceleration(imu, &self.earth),
            None => self.earth.gravity(&self.nav.p),
        }
    }
}
