//! Per-channel Kalman local estimator for the VDFLL.
//!
//! State `x = [δτ, δφ, δf]`: code delay of the replica relative to the signal
//! (chips), signal carrier phase lead (cycles) and signal Doppler excess over
//! the carrier NCO (Hz). Controls `u = [−f_DLL, f_PLL]` in NCO terms.
//!
//! ```text
//!   x⁻ = F x + G u + w,   F = | 1 0 αT |   G = | −T αT |
//!                             | 0 1  T |       |  0  0 |
//!                             | 0 0  1 |       |  0  0 |
//!   z  = x + n
//! ```
//!
//! A change of carrier NCO frequency by Δ moves the Doppler state to the new
//! frame, `δf ← δf − Δ`.

use nalgebra::{Matrix3, Matrix3x2, SymmetricEigen, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::ControlParams;

/// Per-unit variances at 0 dB·Hz: chips², cycles², Hz².
pub const SIGMA2_0: (f64, f64, f64) = (62.5, 7.124, 4.45e5);
/// C/N0 range the variance mapping is trusted over, dB·Hz.
pub const CN0_RANGE: (f64, f64) = (10.0, 60.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementVariances {
    /// chips²
    pub tau: f64,
    /// cycles²
    pub phi: f64,
    /// Hz²
    pub fd: f64,
}

impl MeasurementVariances {
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::new(self.tau, self.phi, self.fd))
    }
}

/// σ² = σ²₀·10^(−C/N0/10), evaluated for any C/N0.
pub fn variance_from_cn0(cn0: f64) -> MeasurementVariances {
    let s = 10f64.powf(-cn0 / 10.0);
    MeasurementVariances { tau: SIGMA2_0.0 * s, phi: SIGMA2_0.1 * s, fd: SIGMA2_0.2 * s }
}

/// [`variance_from_cn0`] with C/N0 clamped to [`CN0_RANGE`]; the flag is set
/// when clamping happened.
pub fn variance_from_cn0_clamped(cn0: f64) -> (MeasurementVariances, bool) {
    let c = if cn0.is_nan() { CN0_RANGE.0 } else { cn0.clamp(CN0_RANGE.0, CN0_RANGE.1) };
    (variance_from_cn0(c), c != cn0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KfChannelState {
    pub x_hat: Vector3<f64>,
    pub p: Matrix3<f64>,
    pub q: Matrix3<f64>,
    pub r: Matrix3<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KfDiagnostics {
    /// z − x⁻ with the phase component wrapped to the Costas period.
    pub innovation: [f64; 3],
    /// Normalized innovation squared.
    pub nis: f64,
    /// P was not PSD after the update and had to be repaired.
    pub psd_repaired: bool,
}

impl KfChannelState {
    pub fn new(p0: [f64; 3], q: [f64; 3], r: &MeasurementVariances) -> Self {
        Self {
            x_hat: Vector3::zeros(),
            p: Matrix3::from_diagonal(&Vector3::from(p0)),
            q: Matrix3::from_diagonal(&Vector3::from(q)),
            r: r.matrix(),
        }
    }

    pub fn with_r(mut self, r: &MeasurementVariances) -> Self {
        self.r = r.matrix();
        self
    }
}

pub fn transition(t_i: f64, alpha: f64) -> (Matrix3<f64>, Matrix3x2<f64>) {
    let f = Matrix3::new(1.0, 0.0, alpha * t_i, 0.0, 1.0, t_i, 0.0, 0.0, 1.0);
    let g = Matrix3x2::new(-t_i, alpha * t_i, 0.0, 0.0, 0.0, 0.0);
    (f, g)
}

fn control_vector(u: &ControlParams) -> Vector2<f64> {
    Vector2::new(-u.f_dll, u.f_pll)
}

/// Time update over one epoch flown with controls `u`.
pub fn kf_predict(state: &KfChannelState, u: &ControlParams, t_i: f64, alpha: f64) -> KfChannelState {
    let (f, g) = transition(t_i, alpha);
    KfChannelState {
        x_hat: f * state.x_hat + g * control_vector(u),
        p: f * state.p * f.transpose() + state.q,
        ..*state
    }
}

/// Re-expresses the state after the carrier NCO moves from `old` to `new`.
pub fn kf_shift_frame(state: &KfChannelState, old: &ControlParams, new: &ControlParams) -> KfChannelState {
    let mut s = *state;
    s.x_hat[2] -= new.f_pll - old.f_pll;
    s
}

/// Symmetrizes `p` and clamps negative eigenvalues; returns whether the
/// input was outside the PSD cone by more than 1e-9 (relative).
pub fn repair_covariance(p: &Matrix3<f64>) -> (Matrix3<f64>, bool) {
    let sym = (p + p.transpose()) * 0.5;
    let asym = (p - p.transpose()).abs().max();
    let eig = SymmetricEigen::new(sym);
    let scale = eig.eigenvalues.abs().max().max(f64::MIN_POSITIVE);
    let min = eig.eigenvalues.min();
    if min >= 0.0 && asym <= 1e-9 * scale {
        return (sym, false);
    }
    let clamped = eig.eigenvalues.map(|v| v.max(0.0));
    let fixed = eig.eigenvectors * Matrix3::from_diagonal(&clamped) * eig.eigenvectors.transpose();
    let fixed = (fixed + fixed.transpose()) * 0.5;
    (fixed, min < -1e-9 * scale || asym > 1e-9 * scale)
}

/// Predict with the controls flown during the epoch, update with the
/// discriminators `z` (delay convention), then extract the next controls:
///
/// ```text
///   f_PLL' = f_PLL + δf̂ + δφ̂/T_I
///   f_DLL' = SF·f_PLL' − δτ̂/T_I        SF = −α
/// ```
///
/// The returned state is already expressed in the frame of the new carrier
/// command.
pub fn kf_channel_update(
    state: &KfChannelState,
    z: &Vector3<f64>,
    u_prev: &ControlParams,
    t_i: f64,
    alpha: f64,
) -> (KfChannelState, ControlParams, KfDiagnostics) {
    let pred = kf_predict(state, u_prev, t_i, alpha);
    let mut y = z - pred.x_hat;
    y[1] -= (y[1] / 0.5).round() * 0.5;
    let s = pred.p + pred.r;
    let s_inv = s.try_inverse().unwrap_or_else(|| Matrix3::from_diagonal(&s.diagonal().map(|v| 1.0 / v.max(f64::MIN_POSITIVE))));
    let k = pred.p * s_inv;
    let x = pred.x_hat + k * y;
    let ikh = Matrix3::identity() - k;
    let p = ikh * pred.p * ikh.transpose() + k * pred.r * k.transpose();
    let (p, psd_repaired) = repair_covariance(&p);
    let diag = KfDiagnostics { innovation: [y[0], y[1], y[2]], nis: (y.transpose() * s_inv * y)[0], psd_repaired };

    let f_pll = u_prev.f_pll + x[2] + x[1] / t_i;
    let theta = ControlParams { f_dll: -alpha * f_pll - x[0] / t_i, f_pll };
    let updated = KfChannelState { x_hat: x, p, ..pred };
    (kf_shift_frame(&updated, u_prev, &theta), theta, diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::{F_CHIP, F_L1};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    const T: f64 = 1e-3;
    fn alpha() -> f64 {
        -F_CHIP / F_L1
    }

    fn is_psd(p: &Matrix3<f64>) -> bool {
        let sym = (p - p.transpose()).abs().max() <= 1e-9 * p.abs().max().max(1e-300);
        sym && SymmetricEigen::new(*p).eigenvalues.min() >= -1e-9 * p.abs().max()
    }

    #[test]
    fn variance_table() {
        let v = variance_from_cn0(0.0);
        assert_eq!((v.tau, v.phi, v.fd), (62.5, 7.124, 4.45e5));
        let v = variance_from_cn0(40.0);
        assert!((v.tau - 6.25e-3).abs() < 1e-15);
        assert!((v.phi - 7.124e-4).abs() < 1e-16);
        assert!((v.fd - 44.5).abs() < 1e-10);
        let w = variance_from_cn0(50.0);
        for (a, b) in [(w.tau, v.tau), (w.phi, v.phi), (w.fd, v.fd)] {
            assert!((a / b - 0.1).abs() < 1e-14);
        }
        let (c, clamped) = variance_from_cn0_clamped(70.0);
        assert!(clamped);
        assert_eq!(c, variance_from_cn0(60.0));
        assert!(!variance_from_cn0_clamped(45.0).1);
    }

    #[test]
    fn transition_structure() {
        let s = KfChannelState {
            x_hat: Vector3::new(0.0, 0.0, 1.0),
            p: Matrix3::zeros(),
            q: Matrix3::zeros(),
            r: Matrix3::identity(),
        };
        let n = kf_predict(&s, &ControlParams::default(), T, alpha());
        assert!((n.x_hat[0] - alpha() * 1e-3).abs() < 1e-18);
        assert!((n.x_hat[1] - 1e-3).abs() < 1e-18);
        assert_eq!(n.x_hat[2], 1.0);
    }

    #[test]
    fn zero_input_keeps_zero_state() {
        let s = KfChannelState::new([0.01, 0.01, 4.0], [1e-6, 1e-4, 6.4e-3], &variance_from_cn0(45.0));
        let (n, theta, _) = kf_channel_update(&s, &Vector3::zeros(), &ControlParams::default(), T, alpha());
        assert_eq!(n.x_hat, Vector3::zeros());
        assert_eq!(theta, ControlParams::default());
        let (f, _) = transition(T, alpha());
        let p_pred = f * s.p * f.transpose() + s.q;
        let k = p_pred * (p_pred + s.r).try_inverse().unwrap();
        let p_oracle = (Matrix3::identity() - k) * p_pred;
        assert!((n.p - p_oracle).abs().max() < 1e-12);
    }

    #[test]
    fn gain_reaches_riccati_fixed_point() {
        // slowest mode is the code state; at 60 dB·Hz its gain settles in ~150 steps
        let s0 = KfChannelState::new([0.01, 0.01, 4.0], [1e-6, 1e-4, 6.4e-3], &variance_from_cn0(60.0));
        let (f, _) = transition(T, alpha());
        let gain = |p: &Matrix3<f64>| {
            let pp = f * p * f.transpose() + s0.q;
            pp * (pp + s0.r).try_inverse().unwrap()
        };
        // oracle: iterate the Riccati map in isolation far past convergence
        let mut p = s0.p;
        for _ in 0..20_000 {
            let pp = f * p * f.transpose() + s0.q;
            let k = pp * (pp + s0.r).try_inverse().unwrap();
            p = (Matrix3::identity() - k) * pp;
        }
        let k_inf = gain(&p);
        let mut s = s0;
        for _ in 0..200 {
            s = kf_channel_update(&s, &Vector3::zeros(), &ControlParams::default(), T, alpha()).0;
        }
        assert!((gain(&s.p) - k_inf).abs().max() < 1e-9, "{}", (gain(&s.p) - k_inf).abs().max());
    }

    /// Truth generated by the same evolution and observation model, with
    /// the controls extracted by the filter applied to it.
    #[test]
    fn normalized_innovations_are_chi_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = [1e-6, 1e-4, 6.4e-3];
        let r = variance_from_cn0(45.0);
        let mut s = KfChannelState::new([0.01, 0.01, 4.0], q, &r);
        let mut truth = Vector3::new(0.05, 0.02, 1.5);
        let mut u = ControlParams { f_dll: 0.0, f_pll: 1000.0 };
        let (f, g) = transition(T, alpha());
        let mut nis = 0.0;
        let n = 10_000;
        let mut noise = |v: f64| v.sqrt() * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
        for _ in 0..n {
            truth = f * truth + g * control_vector(&u) + Vector3::new(noise(q[0]), noise(q[1]), noise(q[2]));
            let z = truth + Vector3::new(noise(r.tau), noise(r.phi), noise(r.fd));
            let (next, theta, d) = kf_channel_update(&s, &z, &u, T, alpha());
            nis += d.nis;
            truth[2] -= theta.f_pll - u.f_pll;
            s = next;
            u = theta;
        }
        let mean = nis / n as f64;
        // chi-square(3): mean 3, variance 6 per sample
        let band = 1.96 * (6.0 / n as f64).sqrt();
        assert!((mean - 3.0).abs() < band, "mean NIS {mean}");
    }

    #[test]
    fn covariance_repair() {
        let bad = Matrix3::new(1.0, 2.0, 0.0, 2.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        let (fixed, flag) = repair_covariance(&bad);
        assert!(flag);
        assert!(is_psd(&fixed));
        let (same, flag) = repair_covariance(&Matrix3::identity());
        assert!(!flag);
        assert_eq!(same, Matrix3::identity());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn covariance_stays_psd(seed in any::<u64>(), cn0 in 15.0f64..55.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = KfChannelState::new([0.01, 0.01, 4.0], [1e-6, 1e-4, 6.4e-5], &variance_from_cn0(cn0));
            let mut u = ControlParams::default();
            for k in 0..10_000 {
                let z: [f64; 3] = std::array::from_fn(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng));
                let z = Vector3::new(0.3 * z[0], 0.1 * z[1], 20.0 * z[2]);
                if k % 1000 == 0 {
                    s = s.with_r(&variance_from_cn0(cn0 + (k / 1000) as f64 - 5.0));
                }
                let (n, theta, d) = kf_channel_update(&s, &z, &u, T, alpha());
                prop_assert!(!d.psd_repaired);
                prop_assert!(is_psd(&n.p));
                s = n;
                u = theta;
            }
        }
    }
}
