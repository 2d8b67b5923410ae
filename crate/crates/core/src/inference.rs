//! Class decisions on received aggregates and Monte-Carlo accuracy.

use alloc::vec::Vec;
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metrics::aggregate_statistics;
use crate::model::{AggregateStatistics, ChannelSet, DesignSolution, FeatureStatistics, SystemConfig};
use crate::simulate::ForwardChain;

/// Equal-prior Gaussian MAP decision; dimensions with zero variance are skipped
/// and ties go to the smallest class index.
pub fn map_classify(s_hat: &[f64], agg: &AggregateStatistics) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for l in 0..agg.post_means.rows() {
        let score: f64 = s_hat
            .iter()
            .enumerate()
            .filter(|&(d, _)| agg.post_variances[d] > 0.0)
            .map(|(d, &s)| {
                let e = s - agg.post_means.get(l, d);
                -e * e / agg.post_variances[d]
            })
            .sum();
        if score > best.1 {
            best = (l, score);
        }
    }
    best.0
}

/// Divides each active dimension by `sum_k c_k(d)`; dimensions without mean
/// separation are set to 0.
pub fn rescale_to_clean(s_hat: &[f64], sol: &DesignSolution, stats: &FeatureStatistics) -> Result<Vec<f64>> {
    s_hat
        .iter()
        .enumerate()
        .map(|(d, &s)| {
            if !(stats.mean_separation(d) > 0.0) {
                return Ok(0.0);
            }
            let scale = sol.aggregate_scale(d);
            if scale > 0.0 {
                Ok(s / scale)
            } else {
                Err(Error::ZeroScale { dim: d })
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    /// Bayes rule under the aggregate mixture.
    MapAggregate(AggregateStatistics),
    /// Linear discriminant trained on clean features, applied after rescaling.
    LinearOnClean { weights: Matrix, bias: Vec<f64> },
}

impl Classifier {
    pub fn map_aggregate(sol: &DesignSolution, stats: &FeatureStatistics, cfg: &SystemConfig) -> Self {
        Self::MapAggregate(aggregate_statistics(sol, stats, cfg))
    }

    /// Scores `mu_l . x / sigma^2 - |mu_l|^2 / (2 sigma^2)` from the clean mixture.
    pub fn linear_on_clean(stats: &FeatureStatistics) -> Self {
        let v = stats.feature_variances();
        let weights = Matrix::from_fn(stats.classes(), stats.dims(), |l, d| stats.mean(l, d) / v[d]);
        let bias = (0..stats.classes())
            .map(|l| -(0..stats.dims()).map(|d| stats.mean(l, d).powi(2) / (2.0 * v[d])).sum::<f64>())
            .collect();
        Self::LinearOnClean { weights, bias }
    }

    pub fn classify(&self, s_hat: &[f64], sol: &DesignSolution, stats: &FeatureStatistics) -> Result<usize> {
        match self {
            Self::MapAggregate(agg) => Ok(map_classify(s_hat, agg)),
            Self::LinearOnClean { weights, bias } => {
                let x = rescale_to_clean(s_hat, sol, stats)?;
                let mut best = (0, f64::NEG_INFINITY);
                for (l, b) in bias.iter().enumerate() {
                    let score = b + weights.row(l).iter().zip(&x).map(|(w, v)| w * v).sum::<f64>();
                    if score > best.1 {
                        best = (l, score);
                    }
                }
                Ok(best.0)
            }
        }
    }
}

/// Accuracy with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyEstimate {
    pub accuracy: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Monte-Carlo accuracy over balanced classes: sample `i` has class `i mod L`.
pub fn estimate_accuracy<R: Rng + ?Sized>(
    classifier: &Classifier,
    sol: &DesignSolution,
    stats: &FeatureStatistics,
    channels: &ChannelSet,
    cfg: &SystemConfig,
    n_samples: usize,
    rng: &mut R,
) -> Result<AccuracyEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidConfig { field: "n_samples", reason: "must be at least 1".into() });
    }
    let chain = ForwardChain::new(sol, channels, cfg)?;
    let mut correct = 0usize;
    for i in 0..n_samples {
        let class = i % stats.classes();
        let sample = chain.sample(stats, &cfg.sensing_noise_power, class, rng);
        if classifier.classify(&sample.received, sol, stats)? == class {
            correct += 1;
        }
    }
    let n = n_samples as f64;
    let p = correct as f64 / n;
    Ok(AccuracyEstimate { accuracy: p, stderr: (p * (1.0 - p) / n).sqrt(), samples: n_samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_class() -> AggregateStatistics {
        AggregateStatistics {
            post_means: Matrix::from_fn(2, 1, |l, _| 2.0 * l as f64),
            post_variances: vec![1.0],
            equivalent_noise: vec![0.0],
        }
    }

    #[test]
    fn map_hand_cases() {
        let agg = two_class();
        assert_eq!(map_classify(&[0.9], &agg), 0);
        assert_eq!(map_classify(&[1.0], &agg), 0);
        assert_eq!(map_classify(&[1.1], &agg), 1);
        assert_eq!(map_classify(&[2.0], &agg), 1);
    }

    #[test]
    fn zero_variance_dimension_ignored() {
        let agg = AggregateStatistics {
            post_means: Matrix::from_fn(2, 2, |l, d| if d == 0 { 2.0 * l as f64 } else { 5.0 * (1 - l) as f64 }),
            post_variances: vec![1.0, 0.0],
            equivalent_noise: vec![0.0; 2],
        };
        assert_eq!(map_classify(&[1.8, 5.0], &agg), 1);
    }

    #[test]
    fn rescale_halves_and_zeroes_inactive() {
        let stats = FeatureStatistics::new(Matrix::from_fn(2, 2, |l, d| if d == 0 { l as f64 } else { 1.0 }), vec![1.0; 2])
            .unwrap();
        let sol = DesignSolution {
            receive_strength: Matrix::from_fn(2, 2, |_, _| 1.0),
            beamformers: vec![vec![]; 2],
            quantization: vec![],
            aux_gain: vec![0.0; 2],
            aux_energy: Matrix::zeros(2, 2),
        };
        assert_eq!(rescale_to_clean(&[3.0, 7.0], &sol, &stats).unwrap(), vec![1.5, 0.0]);
        let mut zero = sol.clone();
        zero.receive_strength = Matrix::zeros(2, 2);
        assert!(matches!(rescale_to_clean(&[3.0, 7.0], &zero, &stats), Err(Error::ZeroScale { dim: 0 })));
    }
}
