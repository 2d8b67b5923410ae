//! Discriminant gain, post-aggregation statistics, the fronthaul rate and the
//! `Lambda`, `Gamma1`, `Gamma2` functions that shape the constraints.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Matrix};
use crate::model::{AggregateStatistics, ChannelSet, DesignSolution, FeatureStatistics, SystemConfig};
use crate::solver::logdet::logdet_ratio;

/// `sum_d (mu_l(d) - mu_l'(d))^2 / sigma_d^2`.
pub fn pairwise_discriminant_gain(stats: &FeatureStatistics, l: usize, lp: usize) -> f64 {
    let v = stats.feature_variances();
    (0..stats.dims())
        .map(|d| {
            let diff = stats.mean(l, d) - stats.mean(lp, d);
            diff * diff / v[d]
        })
        .sum()
}

/// Average of the pairwise gains over all unordered class pairs.
pub fn overall_discriminant_gain(stats: &FeatureStatistics) -> f64 {
    let l = stats.classes();
    let mut s = 0.0;
    for a in 0..l {
        for b in a + 1..l {
            s += pairwise_discriminant_gain(stats, a, b);
        }
    }
    2.0 * s / (l * (l - 1)) as f64
}

/// Contribution of dimension `d` to the overall gain, `kappa_d / sigma_d^2`.
pub fn dimension_gain(stats: &FeatureStatistics, d: usize) -> f64 {
    stats.mean_separation(d) / stats.feature_variances()[d]
}

/// `1/2 m^H (sigma_z^2 I + diag q) m`.
pub fn equivalent_noise(m: &[Complex64], q: &[f64], awgn: f64) -> f64 {
    0.5 * m.iter().zip(q).map(|(z, qi)| z.norm_sqr() * (awgn + qi)).sum::<f64>()
}

/// Numerator of `Lambda`: `(sum c)^2 sigma_d^2 + sum c_k^2 eps_k^2 + sigma^2(d)`.
pub fn aggregate_variance(c_col: &[f64], sigma2: f64, sensing: &[f64], noise: f64) -> f64 {
    let s: f64 = c_col.iter().sum();
    let sens: f64 = c_col.iter().zip(sensing).map(|(c, e)| c * c * e).sum();
    s * s * sigma2 + sens + noise
}

/// Mixture parameters of `s_hat(d)` at the CP.
pub fn aggregate_statistics(sol: &DesignSolution, stats: &FeatureStatistics, cfg: &SystemConfig) -> AggregateStatistics {
    let dims = stats.dims();
    let mut equivalent = Vec::with_capacity(dims);
    let mut variances = Vec::with_capacity(dims);
    for d in 0..dims {
        let noise = equivalent_noise(&sol.beamformers[d], &sol.quantization, cfg.awgn_power);
        let col = sol.receive_strength.column(d);
        variances.push(aggregate_variance(&col, stats.feature_variances()[d], &cfg.sensing_noise_power, noise));
        equivalent.push(noise);
    }
    let post_means = Matrix::from_fn(stats.classes(), dims, |l, d| sol.aggregate_scale(d) * stats.mean(l, d));
    AggregateStatistics { post_means, post_variances: variances, equivalent_noise: equivalent }
}

/// Per-dimension discriminant gain of an aggregate mixture; dimensions with
/// zero variance carry no signal and contribute 0.
pub fn aggregate_dimension_gains(agg: &AggregateStatistics) -> Vec<f64> {
    let l = agg.post_means.rows();
    (0..agg.post_variances.len())
        .map(|d| {
            let v = agg.post_variances[d];
            if v <= 0.0 {
                return 0.0;
            }
            let mut s = 0.0;
            for a in 0..l {
                for b in a + 1..l {
                    let diff = agg.post_means.get(a, d) - agg.post_means.get(b, d);
                    s += diff * diff;
                }
            }
            2.0 * s / (l * (l - 1)) as f64 / v
        })
        .collect()
}

/// Overall discriminant gain of the received feature vector.
pub fn received_discriminant_gain(sol: &DesignSolution, stats: &FeatureStatistics, cfg: &SystemConfig) -> f64 {
    aggregate_dimension_gains(&aggregate_statistics(sol, stats, cfg)).iter().sum()
}

/// Fixed data of the constraint functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintConstants {
    /// Average pairwise squared mean distance per dimension.
    pub kappa: Vec<f64>,
    /// `P h h^H` summed over devices plus `sigma_z^2 I`, Hermitian.
    pub a: CMatrix,
}

impl ConstraintConstants {
    pub fn new(cfg: &SystemConfig, stats: &FeatureStatistics, channels: &ChannelSet) -> Self {
        let kappa = (0..stats.dims()).map(|d| stats.mean_separation(d)).collect();
        Self { kappa, a: fronthaul_matrix(channels, cfg.peak_precoding_power(), cfg.awgn_power) }
    }

    /// Dimensions with `kappa_d > 0`.
    pub fn active_dims(&self) -> Vec<usize> {
        (0..self.kappa.len()).filter(|&d| self.kappa[d] > 0.0).collect()
    }
}

/// `P sum_k h_k h_k^H + awgn I`, symmetrized.
pub fn fronthaul_matrix(channels: &ChannelSet, power: f64, awgn: f64) -> CMatrix {
    let mut a = CMatrix::zeros(channels.mn());
    for k in 0..channels.devices() {
        a.add_outer(channels.device(k), power);
    }
    a.add_diagonal(awgn);
    a.hermitize();
    a
}

/// Total fronthaul rate in bits per channel use.
pub fn fronthaul_rate(q: &[f64], constants: &ConstraintConstants) -> Result<f64> {
    logdet_ratio(&constants.a, q)
}

/// `Lambda = aggregate variance / kappa_d`.
pub fn lambda_value(
    c_col: &[f64],
    m: &[Complex64],
    q: &[f64],
    stats: &FeatureStatistics,
    cfg: &SystemConfig,
    d: usize,
) -> Result<f64> {
    let kappa = stats.mean_separation(d);
    if !(kappa > 0.0) {
        return Err(Error::InactiveDimension { dim: d });
    }
    let noise = equivalent_noise(m, q, cfg.awgn_power);
    Ok(aggregate_variance(c_col, stats.feature_variances()[d], &cfg.sensing_noise_power, noise) / kappa)
}

/// `(sum c)^2 / alpha`.
pub fn gamma1(alpha: f64, c_col: &[f64]) -> f64 {
    let s: f64 = c_col.iter().sum();
    if s == 0.0 {
        0.0
    } else {
        s * s / alpha
    }
}

/// `m~^T H~ m~` for a lifted beamformer and lifted channel matrix.
pub fn gamma2(m_tilde: &[f64], h_tilde: &Matrix) -> f64 {
    let n = m_tilde.len();
    let mut s = 0.0;
    for r in 0..n {
        let row = h_tilde.row(r);
        s += m_tilde[r] * row.iter().zip(m_tilde).map(|(a, b)| a * b).sum::<f64>();
    }
    s
}

/// The `alpha` that makes `Lambda = Gamma1` hold with equality:
/// `kappa_d (sum c)^2 / aggregate variance`, i.e. the received gain of dimension `d`.
pub fn alpha_equality(
    c_col: &[f64],
    m: &[Complex64],
    q: &[f64],
    stats: &FeatureStatistics,
    cfg: &SystemConfig,
    d: usize,
) -> Result<f64> {
    let lambda = lambda_value(c_col, m, q, stats, cfg, d)?;
    let s: f64 = c_col.iter().sum();
    Ok(if lambda > 0.0 { s * s / lambda } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_class(mu: [f64; 2], var: f64) -> FeatureStatistics {
        FeatureStatistics::new(Matrix::from_row_major(2, 1, mu.to_vec()).unwrap(), vec![var]).unwrap()
    }

    #[test]
    fn hand_gains() {
        let s = two_class([0.0, 2.0], 1.0);
        assert_eq!(pairwise_discriminant_gain(&s, 0, 1), 4.0);
        assert_eq!(overall_discriminant_gain(&s), 4.0);
        assert_eq!(pairwise_discriminant_gain(&two_class([1.5, 1.5], 1.0), 0, 1), 0.0);
    }

    #[test]
    fn equilateral_three_class_average() {
        // three classes on a triangle with unit-variance pairwise gains of 3
        let h = 3f64.sqrt();
        let means = Matrix::from_row_major(3, 2, vec![0.0, 0.0, h, 0.0, h / 2.0, 1.5]).unwrap();
        let s = FeatureStatistics::new(means, vec![1.0, 1.0]).unwrap();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            assert!((pairwise_discriminant_gain(&s, a, b) - 3.0).abs() < 1e-12);
        }
        assert!((overall_discriminant_gain(&s) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_fronthaul_rate() {
        let cfg = SystemConfig { devices: 1, rrhs: 1, antennas: 1, ..SystemConfig::desk() };
        let ch = ChannelSet::new(1, 1, vec![vec![Complex64::new(1.0, 0.0)]]).unwrap();
        let a = fronthaul_matrix(&ch, 1.0, 0.0);
        let k = ConstraintConstants { kappa: vec![1.0], a };
        assert!((fronthaul_rate(&[1.0], &k).unwrap() - 1.0).abs() < 1e-15);
        let _ = cfg;
    }

    #[test]
    fn zero_inputs() {
        assert_eq!(gamma1(1.0, &[0.0, 0.0]), 0.0);
        assert_eq!(aggregate_variance(&[0.0, 0.0], 1.0, &[0.5, 0.5], 0.0), 0.0);
    }
}
