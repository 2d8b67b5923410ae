#![allow(dead_code)]

use crane_core::scenario::{random_instance, GeometryParams, Instance};
use crane_core::solver::ConvexProgram;
use crane_core::linalg::{CMatrix, Matrix};
use crane_core::{ChannelSet, FeatureStatistics, SystemConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn desk_instance(seed: u64) -> (SystemConfig, Instance) {
    let cfg = SystemConfig::desk();
    let inst = random_instance(&cfg, &GeometryParams::default(), 1.0, &mut rng(seed)).unwrap();
    (cfg, inst)
}

/// Best feasible objective on a tensor grid over `bounds`, refined by zooming
/// around the incumbent. Uses only constraint residuals, never the solver.
pub fn grid_maximize(prog: &ConvexProgram, bounds: &[(f64, f64)], points: usize, rounds: usize) -> (f64, Vec<f64>) {
    let n = bounds.len();
    let mut lo: Vec<f64> = bounds.iter().map(|b| b.0).collect();
    let mut hi: Vec<f64> = bounds.iter().map(|b| b.1).collect();
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    for _ in 0..rounds {
        let total = points.pow(n as u32);
        let mut x = vec![0.0; n];
        for idx in 0..total {
            let mut r = idx;
            for j in 0..n {
                let i = r % points;
                r /= points;
                x[j] = lo[j] + (hi[j] - lo[j]) * i as f64 / (points - 1) as f64;
            }
            if prog.max_violation(&x) <= 0.0 {
                let f = prog.objective_value(&x);
                if f > best.0 {
                    best = (f, x.clone());
                }
            }
        }
        assert!(best.0.is_finite(), "grid found no feasible point");
        for j in 0..n {
            let half = ((hi[j] - lo[j]) / 8.0).max(2.0 * (hi[j] - lo[j]) / (points - 1) as f64);
            lo[j] = (best.1[j] - half).max(bounds[j].0);
            hi[j] = (best.1[j] + half).min(bounds[j].1);
        }
    }
    best
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// One-sample Kolmogorov-Smirnov statistic against a normal law.
pub fn ks_normal(samples: &[f64], mean: f64, var: f64) -> f64 {
    let law = Normal::new(mean, var.sqrt()).unwrap();
    ks_statistic(samples, |x| law.cdf(x))
}

/// Kolmogorov-Smirnov distance between the empirical law of `samples` and `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

pub fn ks_critical_001(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

pub fn std_normal_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(x)
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let (mx, _) = mean_var(&rx);
    let (my, _) = mean_var(&ry);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum::<f64>().sqrt();
    let sy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum::<f64>().sqrt();
    cov / (sx * sy)
}

/// One device, one antenna, two classes with means `0` and `2`.
pub fn scalar_setup(h: Complex64) -> (SystemConfig, ChannelSet, FeatureStatistics) {
    let mut cfg = SystemConfig::uniform(1, 1, 1, 1, 2);
    cfg.fronthaul_capacity = 1.0;
    cfg.max_precoding_power = vec![0.2];
    cfg.energy_budget = 1e-4;
    cfg.slot_duration = 1e-3;
    cfg.awgn_power = 0.1;
    cfg.sensing_noise_power = vec![0.2];
    let ch = ChannelSet::new(1, 1, vec![vec![h]]).unwrap();
    let stats = FeatureStatistics::new(Matrix::from_row_major(2, 1, vec![0.0, 2.0]).unwrap(), vec![1.0]).unwrap();
    (cfg, ch, stats)
}

/// Exhaustive search over `(c, phase of m, q)`, evaluating the received gain and
/// the physical budgets directly. The gain is invariant to a common scaling of
/// `(c, m)`, so `|m| = 1` loses nothing. Each phase is searched on a `(c, log q)`
/// grid that zooms in around its incumbent.
pub fn scalar_grid_optimum(cfg: &SystemConfig, h: Complex64, stats: &FeatureStatistics) -> f64 {
    let kappa = 4.0;
    let sigma2 = stats.feature_variances()[0];
    let eps2 = cfg.sensing_noise_power[0];
    let p = cfg.max_precoding_power[0];
    let ebar = cfg.energy_budget / cfg.slot_duration;
    let rate = |q: f64| ((p * h.norm_sqr() + cfg.awgn_power + q) / q).log2();
    let n = 400;
    let mut best = 0.0f64;
    for ip in 0..8 {
        let m = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * ip as f64 / 8.0);
        let g2 = (m.conj() * h).norm_sqr();
        let gain = |c: f64, q: f64| {
            let b2 = c * c / g2;
            if rate(q) > cfg.fronthaul_capacity || b2 > p || b2 * cfg.signal_second_moment[0] > ebar {
                return f64::NEG_INFINITY;
            }
            kappa * c * c / (c * c * (sigma2 + eps2) + 0.5 * (cfg.awgn_power + q))
        };
        let (mut c_lo, mut c_hi) = (0.0, 2.0 * (p * g2).sqrt());
        let (mut lq_lo, mut lq_hi) = (-4.0f64, 2.0f64);
        for _ in 0..12 {
            let (dc, dq) = ((c_hi - c_lo) / n as f64, (lq_hi - lq_lo) / n as f64);
            let mut inc = (f64::NEG_INFINITY, 0.0, 0.0);
            for i in 0..=n {
                for j in 0..=n {
                    let (c, lq) = (c_lo + dc * i as f64, lq_lo + dq * j as f64);
                    let v = gain(c, 10f64.powf(lq));
                    if v > inc.0 {
                        inc = (v, c, lq);
                    }
                }
            }
            best = best.max(inc.0);
            (c_lo, c_hi) = ((inc.1 - 4.0 * dc).max(0.0), inc.1 + 4.0 * dc);
            (lq_lo, lq_hi) = (inc.2 - 4.0 * dq, inc.2 + 4.0 * dq);
        }
    }
    best
}

/// A random `P sum h h^H + s I` of size 1 to 5 and a log-uniform `q` in `q_range`.
pub fn random_logdet(r: &mut ChaCha8Rng, q_range: (f64, f64)) -> (CMatrix, Vec<f64>) {
    let n = r.random_range(1..=5);
    let mut a = CMatrix::zeros(n);
    for _ in 0..r.random_range(1..=4) {
        let h: Vec<Complex64> = (0..n).map(|_| Complex64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5)).collect();
        a.add_outer(&h, r.random_range(0.1..3.0));
    }
    a.add_diagonal(r.random_range(0.01..1.0));
    a.hermitize();
    let (lo, hi) = (q_range.0.ln(), q_range.1.ln());
    let q = (0..n).map(|_| r.random_range(lo..hi).exp()).collect();
    (a, q)
}
