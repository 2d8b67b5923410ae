mod common;

use common::{mean_var, rng};
use crane_core::linalg::Matrix;
use crane_core::metrics::overall_discriminant_gain;
use crane_core::scenario::{
    fit_mixture, fit_pca, generate_channels, path_loss_db, random_instance, sample_geometry,
    synthesize_feature_statistics, GeometryParams, Placements,
};
use crane_core::SystemConfig;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn annulus_second_moment() {
    let mut cfg = SystemConfig::desk();
    cfg.devices = 100_000;
    cfg.max_precoding_power = vec![0.2; cfg.devices];
    cfg.signal_second_moment = vec![1.0; cfg.devices];
    cfg.sensing_noise_power = vec![0.2; cfg.devices];
    let g = GeometryParams::default();
    let p = sample_geometry(&cfg, &g, &mut rng(1)).unwrap();
    let r2: Vec<f64> = p.devices.iter().map(|d| d[0] * d[0] + d[1] * d[1]).collect();
    let (m, _) = mean_var(&r2);
    let expected = (100f64.powi(2) + 500f64.powi(2)) / 2.0;
    assert!((m / expected - 1.0).abs() < 0.01, "{m} vs {expected}");
    assert!(r2.iter().all(|&v| (100.0f64.powi(2) - 1e-6..=500.0f64.powi(2) + 1e-6).contains(&v)));
}

#[test]
fn fading_second_moment_matches_path_loss() {
    let cfg = SystemConfig::uniform(1, 1, 10, 1, 2);
    let dist = 250.0;
    let p = Placements { devices: vec![[dist, 0.0]], rrhs: vec![[0.0, 0.0]] };
    let mut r = rng(2);
    let mut acc = Vec::with_capacity(100_000);
    for _ in 0..10_000 {
        let ch = generate_channels(&p, &cfg, &mut r).unwrap();
        acc.extend(ch.device(0).iter().map(|z| z.norm_sqr()));
    }
    let (m, _) = mean_var(&acc);
    let expected = 10f64.powf(-path_loss_db(dist) / 10.0);
    assert!((m / expected - 1.0).abs() < 0.02, "{m} vs {expected}");
}

#[test]
fn channels_are_seed_reproducible() {
    let cfg = SystemConfig::desk();
    let g = GeometryParams::default();
    let a = random_instance(&cfg, &g, 1.0, &mut rng(77)).unwrap();
    let b = random_instance(&cfg, &g, 1.0, &mut rng(77)).unwrap();
    assert_eq!(a, b);
    let c = random_instance(&cfg, &g, 1.0, &mut rng(78)).unwrap();
    assert_ne!(a.channels, c.channels);
}

#[test]
fn larger_separation_gives_larger_gain() {
    let a = synthesize_feature_statistics(3, 4, 1.0, &mut rng(5)).unwrap();
    let b = synthesize_feature_statistics(3, 4, 2.0, &mut rng(5)).unwrap();
    assert_eq!(a.feature_variances(), b.feature_variances());
    let (ga, gb) = (overall_discriminant_gain(&a), overall_discriminant_gain(&b));
    assert!(gb > ga);
    assert!((gb / ga - 4.0).abs() < 1e-9);
}

fn gaussian_rows(n: usize, sd: &[f64], r: &mut impl Rng) -> Matrix {
    Matrix::from_fn(n, sd.len(), |_, j| {
        let z: f64 = StandardNormal.sample(r);
        sd[j] * z
    })
}

#[test]
fn pca_aligns_with_dominant_axis() {
    let data = gaussian_rows(20_000, &[2.0, 1.0], &mut rng(6));
    let pca = fit_pca(&data, 1).unwrap();
    assert!(pca.basis.get(0, 0).abs() > 0.999, "{:?}", pca.basis);
    assert!((pca.eigenvalues[0] / 4.0 - 1.0).abs() < 0.05);
}

#[test]
fn pca_white_data_is_rotation() {
    let data = gaussian_rows(5_000, &[1.0; 3], &mut rng(7));
    let pca = fit_pca(&data, 3).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let uut: f64 = (0..3).map(|k| pca.basis.get(i, k) * pca.basis.get(j, k)).sum();
            assert!((uut - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8);
        }
    }
    assert!((pca.explained_variance_ratio - 1.0).abs() < 1e-12);
}

#[test]
fn pca_reconstruction_error_equals_discarded_variance() {
    let sd = [3.0, 2.0, 1.5, 1.0, 0.5, 0.25];
    let mut r = rng(8);
    let raw = gaussian_rows(4_000, &sd, &mut r);
    // Mix the axes so the principal directions are not coordinate axes.
    let mix = Matrix::from_fn(6, 6, |i, j| if i == j { 1.0 } else { 0.1 * ((i * 7 + j * 3) % 5) as f64 });
    let data = Matrix::from_fn(4_000, 6, |n, j| (0..6).map(|k| raw.get(n, k) * mix.get(k, j)).sum());
    let full = fit_pca(&data, 6).unwrap();
    let total: f64 = full.eigenvalues.iter().sum();
    for dims in 1..6 {
        let pca = fit_pca(&data, dims).unwrap();
        let mut err = 0.0;
        for n in 0..data.rows() {
            let x = data.row(n);
            let z = pca.project(x);
            for j in 0..6 {
                let recon: f64 = (0..dims).map(|c| pca.basis.get(j, c) * z[c]).sum();
                err += (x[j] - pca.mean[j] - recon).powi(2);
            }
        }
        err /= (data.rows() - 1) as f64;
        let discarded = total - pca.eigenvalues.iter().sum::<f64>();
        assert!((err - discarded).abs() <= 1e-6 * discarded, "{dims}: {err} vs {discarded}");
    }
}

#[test]
fn pca_projection_of_white_noise_keeps_variance() {
    let data = gaussian_rows(3_000, &[3.0, 2.0, 1.0, 0.5, 0.3, 0.2], &mut rng(9));
    let pca = fit_pca(&data, 3).unwrap();
    for a in 0..3 {
        for b in 0..3 {
            let utu: f64 = (0..6).map(|k| pca.basis.get(k, a) * pca.basis.get(k, b)).sum();
            assert!((utu - if a == b { 1.0 } else { 0.0 }).abs() < 1e-8);
        }
    }
    let eps2: f64 = 0.3;
    let n = 100_000;
    let noise = gaussian_rows(n, &[eps2.sqrt(); 6], &mut rng(10));
    for c in 0..3 {
        let proj: Vec<f64> = (0..n).map(|i| (0..6).map(|k| pca.basis.get(k, c) * noise.get(i, k)).sum()).collect();
        let (_, v) = mean_var(&proj);
        let tol = 4.0 * (2.0 / n as f64).sqrt();
        assert!((v / eps2 - 1.0).abs() < tol, "{v}");
    }
}

#[test]
fn mixture_fit_recovers_means() {
    let truth = synthesize_feature_statistics(3, 4, 2.0, &mut rng(11)).unwrap();
    let per = 10_000;
    let mut r = rng(12);
    let n = per * 3;
    let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
    let feats = Matrix::from_fn(n, 4, |i, d| {
        let z: f64 = StandardNormal.sample(&mut r);
        truth.mean(labels[i], d) + truth.feature_variances()[d].sqrt() * z
    });
    let fit = fit_mixture(&feats, &labels, 3).unwrap();
    for l in 0..3 {
        for d in 0..4 {
            let se = (truth.feature_variances()[d] / per as f64).sqrt();
            assert!((fit.mean(l, d) - truth.mean(l, d)).abs() < 3.0 * se);
        }
    }
    for d in 0..4 {
        assert!((fit.feature_variances()[d] / truth.feature_variances()[d] - 1.0).abs() < 0.05);
    }
}

#[test]
fn mixture_fit_ignores_sample_order() {
    let mut r = rng(13);
    let n = 300;
    let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
    let feats = gaussian_rows(n, &[1.0, 2.0], &mut r);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut r);
    let shuffled = Matrix::from_fn(n, 2, |i, d| feats.get(perm[i], d));
    let shuffled_labels: Vec<usize> = perm.iter().map(|&i| labels[i]).collect();
    assert_eq!(fit_mixture(&feats, &labels, 3).unwrap(), fit_mixture(&shuffled, &shuffled_labels, 3).unwrap());
}
