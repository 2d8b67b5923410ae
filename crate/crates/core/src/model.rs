//! Shared domain types.
//!
//! Symbols used throughout the crate:
//! `K` devices, `M` RRHs with `N` antennas each, `D` feature dimensions (one
//! AirComp slot per dimension) and `L` classes. Concatenated channel and
//! beamformer vectors have length `MN` and are RRH-major: entry `m * N + n`
//! belongs to antenna `n` of RRH `m` (zero-based).

use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Scalar network and resource parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// `K`.
    pub devices: usize,
    /// `M`.
    pub rrhs: usize,
    /// `N`.
    pub antennas: usize,
    /// `D`.
    pub dims: usize,
    /// `L`.
    pub classes: usize,
    /// Total fronthaul capacity `C` in bits per channel use.
    pub fronthaul_capacity: f64,
    /// Per-device bound on `|b_k(d)|^2`, i.e. transmit power over signal second moment.
    pub max_precoding_power: Vec<f64>,
    /// Total uplink energy `E` in joules.
    pub energy_budget: f64,
    /// AirComp slot duration `T` in seconds.
    pub slot_duration: f64,
    /// `E[s_k(d)^2]` per device.
    pub signal_second_moment: Vec<f64>,
    /// AWGN power per receive antenna.
    pub awgn_power: f64,
    /// Per-device sensing noise variance.
    pub sensing_noise_power: Vec<f64>,
    pub rng_seed: u64,
}

/// Noise power of a receiver with the given noise PSD, noise figure and bandwidth, in watts.
pub fn noise_power_watts(psd_dbm_per_hz: f64, noise_figure_db: f64, bandwidth_hz: f64) -> f64 {
    10f64.powf((psd_dbm_per_hz + noise_figure_db) / 10.0) * bandwidth_hz * 1e-3
}

impl SystemConfig {
    /// Desk-scale defaults: `K=5, M=2, N=2, D=4, L=3`.
    pub fn desk() -> Self {
        Self::uniform(5, 2, 2, 4, 3)
    }

    /// The network size of the reference experiments: `K=20, M=4, N=4, D=12, L=4`.
    pub fn paper_scale() -> Self {
        Self::uniform(20, 4, 4, 12, 4)
    }

    /// Default budgets and noise levels for the given network size.
    pub fn uniform(devices: usize, rrhs: usize, antennas: usize, dims: usize, classes: usize) -> Self {
        Self {
            devices,
            rrhs,
            antennas,
            dims,
            classes,
            fronthaul_capacity: 8.0,
            // 23 dBm transmit power with unit-variance features.
            max_precoding_power: alloc::vec![0.2; devices],
            energy_budget: 2e-3,
            slot_duration: 1e-3,
            signal_second_moment: alloc::vec![1.0; devices],
            awgn_power: noise_power_watts(-169.0, 7.0, 1e6),
            sensing_noise_power: alloc::vec![0.2; devices],
            rng_seed: 1,
        }
    }

    /// Length of concatenated channel and beamforming vectors.
    pub fn mn(&self) -> usize {
        self.rrhs * self.antennas
    }

    /// Checks every field invariant, returning the config unchanged on success.
    pub fn validate(self) -> Result<Self> {
        let bad = |field: &'static str, reason: &str| Err(Error::InvalidConfig { field, reason: reason.into() });
        for (field, v) in [("K", self.devices), ("M", self.rrhs), ("N", self.antennas), ("D", self.dims)] {
            if v < 1 {
                return bad(field, "must be at least 1");
            }
        }
        if self.classes < 2 {
            return bad("L", "at least two classes are required");
        }
        let positive = |field: &'static str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig { field, reason: format!("must be finite and positive, got {v}") })
            }
        };
        positive("fronthaul_capacity", self.fronthaul_capacity)?;
        positive("energy_budget", self.energy_budget)?;
        positive("slot_duration", self.slot_duration)?;
        positive("awgn_power", self.awgn_power)?;
        for (field, v) in [
            ("max_precoding_power", &self.max_precoding_power),
            ("signal_second_moment", &self.signal_second_moment),
            ("sensing_noise_power", &self.sensing_noise_power),
        ] {
            if v.len() != self.devices {
                return Err(Error::InvalidConfig {
                    field,
                    reason: format!("expected {} per-device entries, got {}", self.devices, v.len()),
                });
            }
        }
        for &p in &self.max_precoding_power {
            positive("max_precoding_power", p)?;
        }
        for &w in &self.signal_second_moment {
            positive("signal_second_moment", w)?;
        }
        for &e in &self.sensing_noise_power {
            if !(e.is_finite() && e >= 0.0) {
                return bad("sensing_noise_power", "must be finite and non-negative");
            }
        }
        let e = self.normalized_energy();
        if !(e.is_finite() && e > 0.0) {
            return bad("energy_budget", "normalized energy E/T must be finite and positive");
        }
        Ok(self)
    }

    /// Energy budget per unit slot time, `E / T`.
    ///
    /// The per-device second moments `E[s_k^2]` are carried on the left-hand
    /// side, so the implemented constraint reads
    /// `sum_{k,d} c_k(d)^2 E[s_k^2] / |m_d^H h_k|^2 <= E / T`.
    pub fn normalized_energy(&self) -> f64 {
        self.energy_budget / self.slot_duration
    }

    /// `max_k P_k`, the single power level used in the fronthaul rate bound.
    pub fn peak_precoding_power(&self) -> f64 {
        self.max_precoding_power.iter().copied().fold(0.0, f64::max)
    }
}

/// Gaussian-mixture statistics of the ground-truth feature vector: equal-weight
/// classes with means `mu_l` and a shared diagonal covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStatistics {
    class_means: Matrix,
    feature_variances: Vec<f64>,
}

/// Lower clamp applied to fitted per-dimension variances.
pub const VARIANCE_FLOOR: f64 = 1e-9;

impl FeatureStatistics {
    /// `class_means` is `L x D`; variances must be positive and finite.
    pub fn new(class_means: Matrix, feature_variances: Vec<f64>) -> Result<Self> {
        if class_means.cols() != feature_variances.len() {
            return Err(Error::DimensionMismatch {
                what: "feature variances",
                expected: class_means.cols(),
                found: feature_variances.len(),
            });
        }
        if class_means.rows() < 2 {
            return Err(Error::InvalidConfig { field: "L", reason: "at least two classes are required".into() });
        }
        if class_means.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig { field: "class_means", reason: "must be finite".into() });
        }
        if feature_variances.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidConfig {
                field: "feature_variances",
                reason: "must be finite and positive".into(),
            });
        }
        Ok(Self { class_means, feature_variances })
    }

    pub fn classes(&self) -> usize {
        self.class_means.rows()
    }

    pub fn dims(&self) -> usize {
        self.class_means.cols()
    }

    pub fn class_means(&self) -> &Matrix {
        &self.class_means
    }

    pub fn mean(&self, class: usize, dim: usize) -> f64 {
        self.class_means.get(class, dim)
    }

    pub fn feature_variances(&self) -> &[f64] {
        &self.feature_variances
    }

    /// Average pairwise squared distance of class means in dimension `d`.
    pub fn mean_separation(&self, d: usize) -> f64 {
        let l = self.classes();
        let mut s = 0.0;
        for a in 0..l {
            for b in a + 1..l {
                let diff = self.mean(a, d) - self.mean(b, d);
                s += diff * diff;
            }
        }
        2.0 * s / (l * (l - 1)) as f64
    }

    /// Same statistics with all class means multiplied by `t`.
    pub fn scaled_means(&self, t: f64) -> Self {
        Self { class_means: self.class_means.map(|v| v * t), feature_variances: self.feature_variances.clone() }
    }
}

/// Uplink channels `h_k` (concatenated over RRHs) for all devices.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    rrhs: usize,
    antennas: usize,
    h: Vec<Vec<Complex64>>,
}

impl ChannelSet {
    /// `h[k]` is the concatenated length-`MN` channel of device `k`.
    pub fn new(rrhs: usize, antennas: usize, h: Vec<Vec<Complex64>>) -> Result<Self> {
        let mn = rrhs * antennas;
        for v in &h {
            if v.len() != mn {
                return Err(Error::DimensionMismatch { what: "channel vector", expected: mn, found: v.len() });
            }
            if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::InvalidConfig { field: "channels", reason: "non-finite coefficient".into() });
            }
        }
        Ok(Self { rrhs, antennas, h })
    }

    pub fn devices(&self) -> usize {
        self.h.len()
    }

    pub fn rrhs(&self) -> usize {
        self.rrhs
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn mn(&self) -> usize {
        self.rrhs * self.antennas
    }

    /// Concatenated channel of device `k`.
    pub fn device(&self, k: usize) -> &[Complex64] {
        &self.h[k]
    }

    /// Channel between device `k` and RRH `m`.
    pub fn link(&self, k: usize, m: usize) -> &[Complex64] {
        &self.h[k][m * self.antennas..(m + 1) * self.antennas]
    }

    /// Index of antenna `n` of RRH `m` in concatenated vectors.
    pub fn concat_index(&self, m: usize, n: usize) -> usize {
        m * self.antennas + n
    }

    /// `m^H h_k`.
    pub fn effective(&self, m: &[Complex64], k: usize) -> Complex64 {
        m.iter().zip(&self.h[k]).map(|(a, b)| a.conj() * b).sum()
    }

    /// Same channels divided by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rrhs: self.rrhs,
            antennas: self.antennas,
            h: self.h.iter().map(|v| v.iter().map(|z| z / s).collect()).collect(),
        }
    }
}

/// The design variables of the transceiver.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSolution {
    /// `c_k(d) >= 0`, `K x D`.
    pub receive_strength: Matrix,
    /// `m_d`, one length-`MN` vector per dimension.
    pub beamformers: Vec<Vec<Complex64>>,
    /// Diagonal of the quantization-noise covariance, length `MN`.
    pub quantization: Vec<f64>,
    /// Per-dimension discriminant gain bound `alpha(d)`.
    pub aux_gain: Vec<f64>,
    /// Per-(device, slot) energy bound `beta_{k,d}`, `K x D`.
    pub aux_energy: Matrix,
}

impl DesignSolution {
    pub fn devices(&self) -> usize {
        self.receive_strength.rows()
    }

    pub fn dims(&self) -> usize {
        self.receive_strength.cols()
    }

    pub fn mn(&self) -> usize {
        self.quantization.len()
    }

    /// `sum_k c_k(d)`.
    pub fn aggregate_scale(&self, d: usize) -> f64 {
        (0..self.devices()).map(|k| self.receive_strength.get(k, d)).sum()
    }

    /// Zero-forcing transmit scalars `b_k(d) = c_k(d) (m_d^H h_k)^* / |m_d^H h_k|^2`.
    pub fn transmit_scalars(&self, channels: &ChannelSet) -> Result<Vec<Vec<Complex64>>> {
        let mut out = Vec::with_capacity(self.devices());
        for k in 0..self.devices() {
            let mut row = Vec::with_capacity(self.dims());
            for d in 0..self.dims() {
                let c = self.receive_strength.get(k, d);
                if c == 0.0 {
                    row.push(Complex64::new(0.0, 0.0));
                    continue;
                }
                let g = channels.effective(&self.beamformers[d], k);
                let g2 = g.norm_sqr();
                if g2 == 0.0 {
                    return Err(Error::VanishingEffectiveChannel { device: k, dim: d });
                }
                row.push(g.conj() * (c / g2));
            }
            out.push(row);
        }
        Ok(out)
    }

    pub fn check_shapes(&self, cfg: &SystemConfig) -> Result<()> {
        let mn = cfg.mn();
        let check = |what: &'static str, expected: usize, found: usize| {
            if expected == found {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { what, expected, found })
            }
        };
        check("receive_strength rows", cfg.devices, self.receive_strength.rows())?;
        check("receive_strength cols", cfg.dims, self.receive_strength.cols())?;
        check("aux_energy rows", cfg.devices, self.aux_energy.rows())?;
        check("aux_energy cols", cfg.dims, self.aux_energy.cols())?;
        check("beamformer count", cfg.dims, self.beamformers.len())?;
        for m in &self.beamformers {
            check("beamformer length", mn, m.len())?;
        }
        check("quantization length", mn, self.quantization.len())?;
        check("aux_gain length", cfg.dims, self.aux_gain.len())
    }
}

/// Per-dimension mixture parameters of the aggregate received at the CP.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateStatistics {
    /// `L x D` post-aggregation class means.
    pub post_means: Matrix,
    /// Post-aggregation variance per dimension.
    pub post_variances: Vec<f64>,
    /// Equivalent uplink noise variance per dimension.
    pub equivalent_noise: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_and_paper_configs_validate() {
        assert!(SystemConfig::desk().validate().is_ok());
        let paper = SystemConfig::paper_scale().validate().unwrap();
        assert_eq!((paper.devices, paper.rrhs, paper.antennas, paper.dims, paper.classes), (20, 4, 4, 12, 4));
    }

    #[test]
    fn zero_energy_rejected() {
        let mut cfg = SystemConfig::desk();
        cfg.energy_budget = 0.0;
        match cfg.validate() {
            Err(Error::InvalidConfig { field, .. }) => assert_eq!(field, "energy_budget"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn noiseless_sensing_accepted() {
        let mut cfg = SystemConfig::desk();
        cfg.sensing_noise_power = alloc::vec![0.0; cfg.devices];
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn per_device_length_checked() {
        let mut cfg = SystemConfig::desk();
        cfg.signal_second_moment.pop();
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig { field: "signal_second_moment", .. })));
    }

    #[test]
    fn normalized_energy_examples() {
        let mut cfg = SystemConfig::desk();
        cfg.slot_duration = 1.0;
        cfg.energy_budget = 2.0;
        assert_eq!(cfg.normalized_energy(), 2.0);
        cfg.slot_duration = 0.5;
        assert_eq!(cfg.normalized_energy(), 4.0);
    }

    #[test]
    fn weighted_energy_matches_unweighted_budget() {
        // 1x1x1: c^2 * w / g <= E/T with w = 2, E/T = 2 is the same set as c^2 / g <= 1.
        let mut cfg = SystemConfig::desk();
        cfg.slot_duration = 1.0;
        cfg.energy_budget = 2.0;
        let w = 2.0;
        for i in 0..200 {
            for j in 1..200 {
                let c = i as f64 * 0.01;
                let g = j as f64 * 0.01;
                let weighted = c * c * w / g <= cfg.normalized_energy();
                let unweighted = c * c / g <= 1.0;
                assert_eq!(weighted, unweighted, "c={c} g={g}");
            }
        }
    }

    #[test]
    fn concat_index_matches_per_rrh_view() {
        let mn = 6;
        let h: Vec<Vec<Complex64>> =
            (0..2).map(|k| (0..mn).map(|i| Complex64::new((10 * k + i) as f64, 0.0)).collect()).collect();
        let ch = ChannelSet::new(3, 2, h).unwrap();
        for k in 0..2 {
            for m in 0..3 {
                for n in 0..2 {
                    assert_eq!(ch.link(k, m)[n], ch.device(k)[ch.concat_index(m, n)]);
                }
            }
        }
    }

    #[test]
    fn noise_power_from_psd() {
        // -169 dBm/Hz + 7 dB over 1 MHz = -102 dBm
        let p = noise_power_watts(-169.0, 7.0, 1e6);
        assert!((p / 10f64.powf(-13.2) - 1.0).abs() < 1e-12);
    }
}
