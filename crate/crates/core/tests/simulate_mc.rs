mod common;

use common::{desk_instance, ks_critical_001, ks_normal, mean_var, rng, std_normal_cdf};
use crane_core::inference::{estimate_accuracy, map_classify, rescale_to_clean, Classifier};
use crane_core::linalg::Matrix;
use crane_core::metrics::{aggregate_statistics, received_discriminant_gain};
use crane_core::sca::{run_algorithm1, ScaOptions};
use crane_core::simulate::{forward_pass, sample_local_features, ForwardChain};
use crane_core::{ChannelSet, DesignSolution, FeatureStatistics, SystemConfig};
use num_complex::Complex64;

fn stats_2x3() -> FeatureStatistics {
    FeatureStatistics::new(Matrix::from_row_major(2, 3, vec![0.0, 1.0, -2.0, 1.5, -0.5, 0.5]).unwrap(), vec![1.0, 0.5, 2.0])
        .unwrap()
}

#[test]
fn local_features_have_shared_truth_and_private_noise() {
    let stats = stats_2x3();
    let eps2 = [0.2, 0.6];
    let n = 100_000;
    let mut r = rng(51);
    let mut obs = vec![vec![Vec::with_capacity(n); 3]; 2];
    for _ in 0..n {
        let (_, local) = sample_local_features(&stats, &eps2, 1, &mut r);
        for k in 0..2 {
            for d in 0..3 {
                obs[k][d].push(local[k][d]);
            }
        }
    }
    for d in 0..3 {
        let sigma2 = stats.feature_variances()[d];
        for k in 0..2 {
            let (m, v) = mean_var(&obs[k][d]);
            assert!((m - stats.mean(1, d)).abs() < 4.0 * ((sigma2 + eps2[k]) / n as f64).sqrt());
            assert!((v / (sigma2 + eps2[k]) - 1.0).abs() < 0.02, "{v}");
        }
        let (m0, _) = mean_var(&obs[0][d]);
        let (m1, _) = mean_var(&obs[1][d]);
        let cov: f64 =
            obs[0][d].iter().zip(&obs[1][d]).map(|(a, b)| (a - m0) * (b - m1)).sum::<f64>() / (n - 1) as f64;
        assert!((cov / sigma2 - 1.0).abs() < 0.03, "{cov}");
    }
}

#[test]
fn received_aggregate_matches_gaussian_mixture() {
    let (cfg, inst) = desk_instance(61);
    let (sol, _) = run_algorithm1(&cfg, &inst.channels, &inst.stats, &ScaOptions::default()).unwrap();
    let agg = aggregate_statistics(&sol, &inst.stats, &cfg);
    let chain = ForwardChain::new(&sol, &inst.channels, &cfg).unwrap();
    let n = 20_000;
    let mut r = rng(62);
    for l in 0..cfg.classes {
        let draws: Vec<Vec<f64>> =
            (0..n).map(|_| chain.sample(&inst.stats, &cfg.sensing_noise_power, l, &mut r).received).collect();
        for d in 0..cfg.dims {
            let col: Vec<f64> = draws.iter().map(|s| s[d]).collect();
            let (m, v) = mean_var(&col);
            let (mu, var) = (agg.post_means.get(l, d), agg.post_variances[d]);
            assert!((m - mu).abs() < 4.0 * (var / n as f64).sqrt(), "class {l} dim {d}: {m} vs {mu}");
            assert!((v / var - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt(), "class {l} dim {d}: {v} vs {var}");
            assert!(ks_normal(&col, mu, var) < ks_critical_001(n), "class {l} dim {d}");
        }
    }
}

fn noiseless(devices: usize) -> (SystemConfig, ChannelSet, DesignSolution) {
    let mut cfg = SystemConfig::uniform(devices, 1, 2, 3, 2);
    cfg.sensing_noise_power = vec![0.0; devices];
    cfg.awgn_power = 0.0;
    let h = (0..devices)
        .map(|k| vec![Complex64::new(0.3 + k as f64, -0.7), Complex64::new(-1.1, 0.4 * k as f64)])
        .collect();
    let ch = ChannelSet::new(1, 2, h).unwrap();
    let sol = DesignSolution {
        receive_strength: Matrix::from_fn(devices, 3, |_, _| 1.0),
        beamformers: vec![vec![Complex64::new(0.5, 0.5), Complex64::new(-0.2, 1.0)]; 3],
        quantization: vec![0.0; 2],
        aux_gain: vec![0.0; 3],
        aux_energy: Matrix::zeros(devices, 3),
    };
    (cfg, ch, sol)
}

#[test]
fn noiseless_chain_reproduces_ground_truth() {
    let stats = stats_2x3();
    for devices in [1usize, 2] {
        let (cfg, ch, sol) = noiseless(devices);
        let mut r = rng(70);
        for class in 0..2 {
            let (truth, local) = sample_local_features(&stats, &cfg.sensing_noise_power, class, &mut r);
            let s = forward_pass(&sol, class, truth.clone(), &local, &ch, &cfg, &mut r).unwrap();
            for d in 0..3 {
                assert!((s.received[d] - devices as f64 * truth[d]).abs() < 1e-12 * (1.0 + truth[d].abs()));
            }
            let x = rescale_to_clean(&s.received, &sol, &stats).unwrap();
            for d in 0..3 {
                assert!((x[d] - truth[d]).abs() < 1e-12 * (1.0 + truth[d].abs()));
            }
        }
    }
}

#[test]
fn noiseless_map_agrees_with_clean_map() {
    let stats = stats_2x3();
    let (cfg, ch, sol) = noiseless(2);
    let agg = aggregate_statistics(&sol, &stats, &cfg);
    let clean = Classifier::linear_on_clean(&stats);
    let chain = ForwardChain::new(&sol, &ch, &cfg).unwrap();
    let mut r = rng(71);
    for i in 0..2000 {
        let s = chain.sample(&stats, &cfg.sensing_noise_power, i % 2, &mut r);
        assert_eq!(map_classify(&s.received, &agg), clean.classify(&s.received, &sol, &stats).unwrap());
    }
}

/// Two devices, one antenna, one feature dimension, two classes.
fn two_class_design(separation: f64, c: f64) -> (SystemConfig, ChannelSet, FeatureStatistics, DesignSolution) {
    let mut cfg = SystemConfig::uniform(2, 1, 1, 1, 2);
    cfg.awgn_power = 0.5;
    cfg.sensing_noise_power = vec![0.3, 0.1];
    let ch = ChannelSet::new(1, 1, vec![vec![Complex64::new(0.8, 0.6)], vec![Complex64::new(-0.4, 1.2)]]).unwrap();
    let stats = FeatureStatistics::new(Matrix::from_row_major(2, 1, vec![0.0, separation]).unwrap(), vec![1.0]).unwrap();
    let sol = DesignSolution {
        receive_strength: Matrix::from_fn(2, 1, |k, _| c * (1.0 + k as f64)),
        beamformers: vec![vec![Complex64::new(0.6, -0.3)]],
        quantization: vec![0.4],
        aux_gain: vec![0.0],
        aux_energy: Matrix::zeros(2, 1),
    };
    (cfg, ch, stats, sol)
}

#[test]
fn two_class_accuracy_follows_closed_form() {
    for (sep, seed) in [(1.0, 80), (2.5, 81)] {
        let (cfg, ch, stats, sol) = two_class_design(sep, 1.0);
        let g = received_discriminant_gain(&sol, &stats, &cfg);
        let expected = std_normal_cdf(g.sqrt() / 2.0);
        let clf = Classifier::map_aggregate(&sol, &stats, &cfg);
        let acc = estimate_accuracy(&clf, &sol, &stats, &ch, &cfg, 100_000, &mut rng(seed)).unwrap();
        assert!((acc.accuracy / expected - 1.0).abs() < 0.02, "{} vs {expected}", acc.accuracy);
    }
}

#[test]
fn accuracy_extremes() {
    let (cfg, ch, stats, sol) = two_class_design(40.0, 1.0);
    let clf = Classifier::map_aggregate(&sol, &stats, &cfg);
    let acc = estimate_accuracy(&clf, &sol, &stats, &ch, &cfg, 10_000, &mut rng(90)).unwrap();
    assert!(acc.accuracy >= 0.99, "{}", acc.accuracy);

    // No signal reaches the CP: every aggregate mean is zero and the rule is constant.
    let (cfg, ch, stats, sol) = two_class_design(2.0, 0.0);
    let clf = Classifier::map_aggregate(&sol, &stats, &cfg);
    let acc = estimate_accuracy(&clf, &sol, &stats, &ch, &cfg, 10_000, &mut rng(91)).unwrap();
    assert_eq!(acc.accuracy, 0.5);

    assert!(estimate_accuracy(&clf, &sol, &stats, &ch, &cfg, 0, &mut rng(92)).is_err());
}

#[test]
fn map_is_not_worse_than_linear_on_clean() {
    let (cfg, inst) = desk_instance(95);
    let (sol, _) = run_algorithm1(&cfg, &inst.channels, &inst.stats, &ScaOptions::default()).unwrap();
    let n = 20_000;
    let map = Classifier::map_aggregate(&sol, &inst.stats, &cfg);
    let lin = Classifier::linear_on_clean(&inst.stats);
    let a = estimate_accuracy(&map, &sol, &inst.stats, &inst.channels, &cfg, n, &mut rng(96)).unwrap();
    let b = estimate_accuracy(&lin, &sol, &inst.stats, &inst.channels, &cfg, n, &mut rng(96)).unwrap();
    assert!(a.accuracy >= b.accuracy - 3.0 * a.stderr.max(b.stderr), "{} vs {}", a.accuracy, b.accuracy);
}
