//! Monte-Carlo forward simulation of sensing, over-the-air aggregation,
//! fronthaul quantization and receive beamforming.
//!
//! Class labels are 0-based indices into the rows of the class-mean matrix.

use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::metrics::fronthaul_matrix;
use crate::model::{ChannelSet, DesignSolution, FeatureStatistics, SystemConfig};
use crate::scenario::complex_normal;
use crate::solver::logdet_ratio;

/// Relative slack used by the feasibility audits.
pub const AUDIT_TOLERANCE: f64 = 1e-7;

/// One pass through the chain for a single sensing event.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardSample {
    pub true_class: usize,
    /// Noise-free feature `x~` shared by all devices.
    pub ground_truth: Vec<f64>,
    /// `s_hat(d)` at the CP.
    pub received: Vec<f64>,
}

/// Per-device local features: `x~ + N(0, eps_k^2 I)` with `x~ ~ N(mu_l, diag sigma^2)`.
///
/// Returns the ground truth and a `K x D` list of device observations.
pub fn sample_local_features<R: Rng + ?Sized>(
    stats: &FeatureStatistics,
    sensing_noise: &[f64],
    class: usize,
    rng: &mut R,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let truth: Vec<f64> = (0..stats.dims())
        .map(|d| {
            let z: f64 = StandardNormal.sample(rng);
            stats.mean(class, d) + stats.feature_variances()[d].sqrt() * z
        })
        .collect();
    let local = sensing_noise
        .iter()
        .map(|&eps2| {
            let sd = eps2.sqrt();
            truth
                .iter()
                .map(|&x| {
                    let z: f64 = StandardNormal.sample(rng);
                    x + sd * z
                })
                .collect()
        })
        .collect();
    (truth, local)
}

/// Transmit scalars and receive filters of a fixed design, reusable across passes.
#[derive(Debug, Clone)]
pub struct ForwardChain<'a> {
    channels: &'a ChannelSet,
    sol: &'a DesignSolution,
    awgn_sd: f64,
    quant_sd: Vec<f64>,
    scalars: Vec<Vec<Complex64>>,
}

impl<'a> ForwardChain<'a> {
    pub fn new(sol: &'a DesignSolution, channels: &'a ChannelSet, cfg: &SystemConfig) -> Result<Self> {
        sol.check_shapes(cfg)?;
        let scalars = sol.transmit_scalars(channels)?;
        Ok(Self {
            channels,
            sol,
            awgn_sd: cfg.awgn_power.sqrt(),
            quant_sd: sol.quantization.iter().map(|q| q.max(0.0).sqrt()).collect(),
            scalars,
        })
    }

    /// `b_k(d)`, `K x D`.
    pub fn transmit_scalars(&self) -> &[Vec<Complex64>] {
        &self.scalars
    }

    /// Received aggregate for one set of device observations.
    pub fn propagate<R: Rng + ?Sized>(&self, local: &[Vec<f64>], rng: &mut R) -> Vec<f64> {
        let mn = self.channels.mn();
        let mut y = Vec::with_capacity(mn);
        (0..self.sol.dims())
            .map(|d| {
                y.clear();
                for i in 0..mn {
                    let mut acc = self.awgn_sd * complex_normal(rng) + self.quant_sd[i] * complex_normal(rng);
                    for (k, obs) in local.iter().enumerate() {
                        let b = self.scalars[k][d];
                        if b.re != 0.0 || b.im != 0.0 {
                            acc += self.channels.device(k)[i] * b * obs[d];
                        }
                    }
                    y.push(acc);
                }
                self.sol.beamformers[d].iter().zip(&y).map(|(m, v)| m.conj() * v).sum::<Complex64>().re
            })
            .collect()
    }

    /// Draws a class-conditional sample and pushes it through the chain.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        stats: &FeatureStatistics,
        sensing_noise: &[f64],
        class: usize,
        rng: &mut R,
    ) -> ForwardSample {
        let (truth, local) = sample_local_features(stats, sensing_noise, class, rng);
        let received = self.propagate(&local, rng);
        ForwardSample { true_class: class, ground_truth: truth, received }
    }
}

/// A single pass of `local` through the chain defined by `sol`.
pub fn forward_pass<R: Rng + ?Sized>(
    sol: &DesignSolution,
    true_class: usize,
    ground_truth: Vec<f64>,
    local: &[Vec<f64>],
    channels: &ChannelSet,
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<ForwardSample> {
    let chain = ForwardChain::new(sol, channels, cfg)?;
    if local.len() != cfg.devices {
        return Err(Error::DimensionMismatch { what: "local feature devices", expected: cfg.devices, found: local.len() });
    }
    let received = chain.propagate(local, rng);
    Ok(ForwardSample { true_class, ground_truth, received })
}

/// `|b_k(d)|^2` for one device and slot, and whether it exceeds the peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEntry {
    pub device: usize,
    pub dim: usize,
    pub power: f64,
    pub exceeds: bool,
}

/// Instantaneous precoding power of every `(k, d)`.
pub fn transmit_power_audit(sol: &DesignSolution, channels: &ChannelSet, cfg: &SystemConfig) -> Result<Vec<PowerEntry>> {
    let scalars = sol.transmit_scalars(channels)?;
    let mut out = Vec::with_capacity(cfg.devices * cfg.dims);
    for (k, row) in scalars.iter().enumerate() {
        let peak = cfg.max_precoding_power[k];
        for (d, b) in row.iter().enumerate() {
            let power = b.norm_sqr();
            out.push(PowerEntry { device: k, dim: d, power, exceeds: power > peak * (1.0 + AUDIT_TOLERANCE) });
        }
    }
    Ok(out)
}

/// `sum_{k,d} |b_k(d)|^2 w_k T`.
pub fn energy_consumption(sol: &DesignSolution, channels: &ChannelSet, cfg: &SystemConfig) -> Result<f64> {
    let scalars = sol.transmit_scalars(channels)?;
    Ok(scalars
        .iter()
        .enumerate()
        .map(|(k, row)| row.iter().map(|b| b.norm_sqr()).sum::<f64>() * cfg.signal_second_moment[k] * cfg.slot_duration)
        .sum())
}

/// Outcome of checking a design against every physical budget.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityAudit {
    pub power_flags: usize,
    pub max_power_ratio: f64,
    pub energy: f64,
    pub energy_ok: bool,
    pub fronthaul_rate: f64,
    pub fronthaul_ok: bool,
    pub nonnegative: bool,
}

impl FeasibilityAudit {
    pub fn feasible(&self) -> bool {
        self.power_flags == 0 && self.energy_ok && self.fronthaul_ok && self.nonnegative
    }
}

/// Power, energy, fronthaul and sign audit of a design.
pub fn audit_solution(sol: &DesignSolution, channels: &ChannelSet, cfg: &SystemConfig) -> Result<FeasibilityAudit> {
    sol.check_shapes(cfg)?;
    let powers = transmit_power_audit(sol, channels, cfg)?;
    let power_flags = powers.iter().filter(|p| p.exceeds).count();
    let max_power_ratio =
        powers.iter().map(|p| p.power / cfg.max_precoding_power[p.device]).fold(0.0, f64::max);
    let energy = energy_consumption(sol, channels, cfg)?;
    let a = fronthaul_matrix(channels, cfg.peak_precoding_power(), cfg.awgn_power);
    let fronthaul_rate = logdet_ratio(&a, &sol.quantization)?;
    let nonnegative = sol.receive_strength.as_slice().iter().all(|&c| c >= 0.0);
    Ok(FeasibilityAudit {
        power_flags,
        max_power_ratio,
        energy,
        energy_ok: energy <= cfg.energy_budget * (1.0 + AUDIT_TOLERANCE),
        fronthaul_rate,
        fronthaul_ok: fronthaul_rate <= cfg.fronthaul_capacity * (1.0 + AUDIT_TOLERANCE),
        nonnegative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_link() -> (SystemConfig, ChannelSet) {
        let mut cfg = SystemConfig::desk();
        cfg.devices = 2;
        cfg.rrhs = 1;
        cfg.antennas = 1;
        cfg.dims = 1;
        cfg.classes = 2;
        cfg.max_precoding_power = vec![1.0; 2];
        cfg.signal_second_moment = vec![1.0; 2];
        cfg.sensing_noise_power = vec![0.0; 2];
        cfg.awgn_power = 0.0;
        let h = vec![vec![Complex64::new(0.0, 2.0)], vec![Complex64::new(1.0, -1.0)]];
        (cfg, ChannelSet::new(1, 1, h).unwrap())
    }

    fn design(c: [f64; 2]) -> DesignSolution {
        DesignSolution {
            receive_strength: Matrix::from_fn(2, 1, |k, _| c[k]),
            beamformers: vec![vec![Complex64::new(1.0, 0.0)]],
            quantization: vec![0.0],
            aux_gain: vec![1.0],
            aux_energy: Matrix::zeros(2, 1),
        }
    }

    #[test]
    fn noiseless_chain_sums_features() {
        let (cfg, ch) = single_link();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let local = vec![vec![0.7], vec![0.7]];
        let s = forward_pass(&design([1.0, 1.0]), 0, vec![0.7], &local, &ch, &cfg, &mut rng).unwrap();
        assert!((s.received[0] - 1.4).abs() < 1e-12);
        let s = forward_pass(&design([1.0, 0.0]), 0, vec![0.7], &local, &ch, &cfg, &mut rng).unwrap();
        assert!((s.received[0] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn power_audit_hand_values() {
        let (cfg, ch) = single_link();
        let audit = transmit_power_audit(&design([1.0, 0.0]), &ch, &cfg).unwrap();
        assert!((audit[0].power - 0.25).abs() < 1e-15);
        assert_eq!(audit[1].power, 0.0);
        assert!(!audit[0].exceeds);
    }

    #[test]
    fn vanishing_channel_rejected() {
        let (cfg, mut ch) = single_link();
        ch = ChannelSet::new(1, 1, vec![vec![Complex64::new(0.0, 0.0)], ch.device(1).to_vec()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = forward_pass(&design([1.0, 1.0]), 0, vec![0.0], &[vec![0.0], vec![0.0]], &ch, &cfg, &mut rng);
        assert!(matches!(r, Err(Error::VanishingEffectiveChannel { device: 0, dim: 0 })));
    }

    #[test]
    fn zero_sensing_noise_copies_truth() {
        let stats = FeatureStatistics::new(Matrix::from_fn(2, 3, |l, d| (l + d) as f64), vec![1.0; 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (truth, local) = sample_local_features(&stats, &[0.0, 0.0], 1, &mut rng);
        assert_eq!(local, vec![truth.clone(), truth]);
    }
}
