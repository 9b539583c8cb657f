//! Per-satellite signal parameters as closed-form functions of receiver time.
//!
//! Everything derives from the true pseudorange `ρ(t) = |p_s − p_u| + cδt_u − cδt_s`:
//! code phase `ψ = f_chip·(t − ρ/c)` (absolute chips, transmit time in chips),
//! carrier phase `φ = φ0 − ρ·f_c/c` (cycles) and Doppler `f_d = dφ/dt`.
//! No running integrators, so any `t` can be evaluated from any thread.

use crate::consts::{CODES_PER_BIT, CODE_LENGTH, F_CHIP, F_L1, SPEED_OF_LIGHT};
use crate::navfilter::doppler::doppler_from_kinematics;
use crate::scenario::{splitmix64, Scenario, Seeds};

/// Carrier amplitude for a given C/N0 and per-component noise σ.
pub fn amplitude_from_cn0(cn0_dbhz: f64, sigma: f64, fs: f64) -> f64 {
    sigma * (2.0 * 10f64.powf(cn0_dbhz / 10.0) / fs).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatSignal {
    /// Code delay `ρ/c`, s.
    pub tau: f64,
    /// Absolute code phase, chips; its floor divided by 1023 counts code periods.
    pub code_phase: f64,
    /// Carrier phase, cycles.
    pub phi: f64,
    /// Hz
    pub fd: f64,
    pub nav_bit: i8,
    pub amplitude: f64,
    pub cn0: f64,
    /// Pseudorange, m.
    pub rho: f64,
}

#[derive(Debug, Clone)]
pub struct SignalTruth {
    pub scenario: Scenario,
    /// Carrier phase offsets φ0, cycles.
    pub phase0: Vec<f64>,
    pub bit_seed: u64,
    pub sigma: f64,
    pub fs: f64,
}

pub fn signal_truth_from_scenario(scenario: &Scenario, seeds: &Seeds) -> SignalTruth {
    let n = scenario.satellites().len();
    let phase0 = (0..n)
        .map(|i| (splitmix64(seeds.nav_bits ^ 0x7068_6173 ^ i as u64) >> 11) as f64 / (1u64 << 53) as f64)
        .collect();
    SignalTruth {
        scenario: scenario.clone(),
        phase0,
        bit_seed: seeds.nav_bits,
        sigma: scenario.config.signal.noise_sigma,
        fs: scenario.config.signal.fs,
    }
}

impl SignalTruth {
    pub fn n_sats(&self) -> usize {
        self.scenario.satellites().len()
    }

    pub fn prn(&self, i: usize) -> u8 {
        self.scenario.satellites()[i].prn
    }

    pub fn pseudorange(&self, i: usize, t: f64) -> f64 {
        self.scenario.pseudorange(i, t)
    }

    pub fn tau(&self, i: usize, t: f64) -> f64 {
        self.pseudorange(i, t) / SPEED_OF_LIGHT
    }

    pub fn code_phase(&self, i: usize, t: f64) -> f64 {
        F_CHIP * (t - self.tau(i, t))
    }

    pub fn phi(&self, i: usize, t: f64) -> f64 {
        self.phase0[i] - self.pseudorange(i, t) * F_L1 / SPEED_OF_LIGHT
    }

    pub fn fd(&self, i: usize, t: f64) -> f64 {
        let v = self.scenario.vehicle(t);
        let s = self.scenario.sat(i, t);
        let (_, drift) = self.scenario.receiver_clock(t);
        doppler_from_kinematics(&v.p_u, &v.v_u, drift, &s)
    }

    /// Nav bit for the bit period containing absolute code phase `code_phase`.
    pub fn bit_at_code_phase(&self, i: usize, code_phase: f64) -> i8 {
        let k = (code_phase / (CODES_PER_BIT as f64 * CODE_LENGTH as f64)).floor() as i64;
        self.bit(i, k)
    }

    /// Bit number `k` (counted in 20-code-period units of transmit time).
    pub fn bit(&self, i: usize, k: i64) -> i8 {
        let h = splitmix64(self.bit_seed ^ ((self.prn(i) as u64) << 48) ^ (k as u64));
        if h & 1 == 0 { 1 } else { -1 }
    }

    pub fn nav_bit(&self, i: usize, t: f64) -> i8 {
        self.bit_at_code_phase(i, self.code_phase(i, t))
    }

    pub fn cn0(&self, t: f64) -> f64 {
        let (t0, t1) = self.scenario.config.cn0.span();
        self.scenario.cn0(t.clamp(t0, t1)).expect("clamped into span")
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        amplitude_from_cn0(self.cn0(t), self.sigma, self.fs)
    }

    pub fn eval(&self, i: usize, t: f64) -> SatSignal {
        let v = self.scenario.vehicle(t);
        let s = self.scenario.sat(i, t);
        let (bias, drift) = self.scenario.receiver_clock(t);
        let rho = (s.p - v.p_u).norm() + bias - s.clock_bias;
        let tau = rho / SPEED_OF_LIGHT;
        let code_phase = F_CHIP * (t - tau);
        let cn0 = self.cn0(t);
        SatSignal {
            tau,
            code_phase,
            phi: self.phase0[i] - rho * F_L1 / SPEED_OF_LIGHT,
            fd: doppler_from_kinematics(&v.p_u, &v.v_u, drift, &s),
            nav_bit: self.bit_at_code_phase(i, code_phase),
            amplitude: amplitude_from_cn0(cn0, self.sigma, self.fs),
            cn0,
            rho,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::CODE_CARRIER_RATIO;
    use crate::scenario::preset;

    fn truth() -> SignalTruth {
        let sc = preset::figure_eight_desk(40.0).build().unwrap();
        signal_truth_from_scenario(&sc, &Seeds::default())
    }

    #[test]
    fn doppler_is_phase_derivative() {
        let tr = truth();
        let dt = 1e-3;
        for i in 0..tr.n_sats() {
            for &t in &[3.0, 14.2, 27.7, 41.0] {
                let fd_num = (tr.phi(i, t + dt) - tr.phi(i, t - dt)) / (2.0 * dt);
                assert!((fd_num - tr.fd(i, t)).abs() < 1e-3, "sat {i} t {t}: {fd_num} vs {}", tr.fd(i, t));
            }
        }
    }

    #[test]
    fn code_rate_follows_doppler() {
        let tr = truth();
        let dt = 1e-3;
        for i in 0..tr.n_sats() {
            let t = 25.0;
            let rate = (tr.code_phase(i, t + dt) - tr.code_phase(i, t - dt)) / (2.0 * dt);
            let expected = F_CHIP * (1.0 + tr.fd(i, t) / F_L1);
            assert!(((rate - expected) / expected).abs() < 1e-9);
            // code/carrier phase rates stay locked together
            let carrier = tr.fd(i, t) * CODE_CARRIER_RATIO;
            assert!(((rate - F_CHIP) - carrier).abs() < 1e-5);
        }
    }

    #[test]
    fn amplitude_law() {
        let a = amplitude_from_cn0(45.0, 1.0, 4e6);
        let cn0 = 10.0 * (a * a * 4e6 / 2.0).log10();
        assert!((cn0 - 45.0).abs() < 1e-12);
    }

    #[test]
    fn bits_are_constant_within_a_bit_period() {
        let tr = truth();
        let base = 20.0 * 1023.0 * 1_000.0;
        let b = tr.bit_at_code_phase(0, base + 1.0);
        assert_eq!(tr.bit_at_code_phase(0, base + 20.0 * 1023.0 - 1.0), b);
        let flips = (0..200)
            .filter(|&k| tr.bit(0, k) != tr.bit(0, k + 1))
            .count();
        assert!(flips > 60 && flips < 140, "pseudo-random stream, {flips} transitions");
    }
}
