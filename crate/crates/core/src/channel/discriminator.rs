//! Code, carrier-phase and frequency discriminators.
//!
//! Signs follow the residuals of the incoming signal relative to the replica:
//! `d_tau` is the code-phase lead of the signal (positive when early power
//! exceeds late power), `d_phi` the carrier phase lead in cycles and `d_fd`
//! the frequency excess in Hz.

use serde::{Deserialize, Serialize};

use super::correlator::CorrelatorOutputs;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DiscriminatorOutputs {
    /// chips
    pub d_tau: f64,
    /// cycles, in (−0.25, 0.25]
    pub d_phi: f64,
    /// Hz
    pub d_fd: f64,
    pub tau_valid: bool,
    pub phi_valid: bool,
    pub fd_valid: bool,
}

impl DiscriminatorOutputs {
    /// Discriminator values with invalid entries replaced by zero.
    pub fn effective(&self) -> (f64, f64, f64) {
        (
            if self.tau_valid { self.d_tau } else { 0.0 },
            if self.phi_valid { self.d_phi } else { 0.0 },
            if self.fd_valid { self.d_fd } else { 0.0 },
        )
    }
}

/// Normalized non-coherent early-minus-late power, scaled for unit slope at
/// the origin of the triangular correlation: `(1 − d/2)/2 · (E − L)/(E + L)`.
pub fn dll_disc(c: &CorrelatorOutputs, spacing: f64) -> Option<f64> {
    let e = c.early_power();
    let l = c.late_power();
    if !(e + l > 0.0) {
        return None;
    }
    Some(0.5 * (1.0 - 0.5 * spacing) * (e - l) / (e + l))
}

/// Two-quadrant Costas discriminator, cycles.
pub fn pll_disc(c: &CorrelatorOutputs) -> Option<f64> {
    if c.ip == 0.0 && c.qp == 0.0 {
        return None;
    }
    if c.ip == 0.0 {
        return Some(0.25);
    }
    let v = (c.qp / c.ip).atan() / std::f64::consts::TAU;
    Some(if v == -0.25 { 0.25 } else { v })
}

/// Cross/dot four-quadrant frequency discriminator over two consecutive
/// integrations of equal length within one data bit.
pub fn fll_disc(prev: &CorrelatorOutputs, curr: &CorrelatorOutputs) -> Option<f64> {
    let cross = prev.ip * curr.qp - curr.ip * prev.qp;
    let dot = prev.ip * curr.ip + prev.qp * curr.qp;
    if (cross == 0.0 && dot == 0.0) || !(curr.t_i > 0.0) {
        return None;
    }
    Some(cross.atan2(dot) / (std::f64::consts::TAU * curr.t_i))
}

/// All three discriminators for one epoch. The FLL runs only when `prev`
/// belongs to the same data bit.
pub fn discriminate(prev: Option<&CorrelatorOutputs>, curr: &CorrelatorOutputs, spacing: f64) -> DiscriminatorOutputs {
    let tau = dll_disc(curr, spacing);
    let phi = pll_disc(curr);
    let fd = prev.and_then(|p| fll_disc(p, curr));
    DiscriminatorOutputs {
        d_tau: tau.unwrap_or(0.0),
        d_phi: phi.unwrap_or(0.0),
        d_fd: fd.unwrap_or(0.0),
        tau_valid: tau.is_some(),
        phi_valid: phi.is_some(),
        fd_valid: fd.is_some(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn prompt(ip: f64, qp: f64) -> CorrelatorOutputs {
        CorrelatorOutputs { ip, qp, t_i: 1e-3, n_samples: 4000, ..Default::default() }
    }

    /// Noiseless correlator outputs for a triangle correlation with the
    /// signal leading the replica by `eps` chips.
    fn triangle(eps: f64, d: f64) -> CorrelatorOutputs {
        let r = |x: f64| (1.0 - x.abs()).max(0.0);
        CorrelatorOutputs { ie: r(eps - d / 2.0), il: r(eps + d / 2.0), ip: r(eps), t_i: 1e-3, ..Default::default() }
    }

    #[test]
    fn dll_gain_and_symmetry() {
        assert_eq!(dll_disc(&triangle(0.0, 0.5), 0.5), Some(0.0));
        let up = dll_disc(&triangle(0.1, 0.5), 0.5).unwrap();
        let down = dll_disc(&triangle(-0.1, 0.5), 0.5).unwrap();
        assert!((up - 0.1).abs() < 0.005, "{up}");
        assert!((up + down).abs() < 1e-12);
        assert_eq!(dll_disc(&CorrelatorOutputs::default(), 0.5), None);
    }

    #[test]
    fn pll_values() {
        assert_eq!(pll_disc(&prompt(3.0, 0.0)), Some(0.0));
        assert!((pll_disc(&prompt(2.0, 2.0)).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(pll_disc(&prompt(2.0, 1.0)), pll_disc(&prompt(-2.0, -1.0)));
        assert_eq!(pll_disc(&prompt(0.0, 0.0)), None);
        let v = pll_disc(&prompt(0.0, -1.0)).unwrap();
        assert!(v > -0.25 && v <= 0.25);
    }

    #[test]
    fn fll_values() {
        let a = prompt(1.0, 0.5);
        assert_eq!(fll_disc(&a, &a), Some(0.0));
        let rot = |c: &CorrelatorOutputs, cyc: f64| {
            let (s, co) = (TAU * cyc).sin_cos();
            prompt(c.ip * co - c.qp * s, c.ip * s + c.qp * co)
        };
        let up = fll_disc(&a, &rot(&a, 0.25)).unwrap();
        let down = fll_disc(&a, &rot(&a, -0.25)).unwrap();
        assert!((up - 250.0).abs() < 1e-9, "{up}");
        assert!((down + 250.0).abs() < 1e-9);
        assert_eq!(fll_disc(&prompt(0.0, 0.0), &a), None);
    }

    #[test]
    fn invalid_entries_contribute_zero() {
        let d = discriminate(None, &CorrelatorOutputs { t_i: 1e-3, ..Default::default() }, 0.5);
        assert!(!d.tau_valid && !d.phi_valid && !d.fd_valid);
        assert_eq!(d.effective(), (0.0, 0.0, 0.0));
    }
}
