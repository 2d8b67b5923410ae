//! Random network instances: annulus placements, path-loss/Rayleigh channels and
//! Gaussian-mixture feature statistics (synthetic or fitted from labelled data).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Matrix};
use crate::model::{ChannelSet, FeatureStatistics, SystemConfig, VARIANCE_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryParams {
    pub inner_radius: f64,
    pub outer_radius: f64,
}

impl Default for GeometryParams {
    fn default() -> Self {
        Self { inner_radius: 100.0, outer_radius: 500.0 }
    }
}

/// Device and RRH positions in metres.
#[derive(Debug, Clone, PartialEq)]
pub struct Placements {
    pub devices: Vec<[f64; 2]>,
    pub rrhs: Vec<[f64; 2]>,
}

fn sample_annulus<R: Rng + ?Sized>(g: &GeometryParams, rng: &mut R) -> [f64; 2] {
    let (a, b) = (g.inner_radius * g.inner_radius, g.outer_radius * g.outer_radius);
    let u: f64 = rng.random();
    let r = (a + u * (b - a)).sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    [r * theta.cos(), r * theta.sin()]
}

/// Places `K` devices and `M` RRHs independently and uniformly (by area) in the annulus.
pub fn sample_geometry<R: Rng + ?Sized>(cfg: &SystemConfig, g: &GeometryParams, rng: &mut R) -> Result<Placements> {
    if !(g.inner_radius > 0.0 && g.inner_radius < g.outer_radius && g.outer_radius.is_finite()) {
        return Err(Error::InvalidGeometry { inner: g.inner_radius, outer: g.outer_radius });
    }
    let devices = (0..cfg.devices).map(|_| sample_annulus(g, rng)).collect();
    let rrhs = (0..cfg.rrhs).map(|_| sample_annulus(g, rng)).collect();
    Ok(Placements { devices, rrhs })
}

/// Path loss in dB at distance `d` metres: `30.6 + 36.7 log10(d)`.
pub fn path_loss_db(distance: f64) -> f64 {
    30.6 + 36.7 * distance.log10()
}

/// Amplitude scale `10^(-pl(d)/20)` applied to unit-variance fading.
pub fn path_loss_amplitude(distance: f64) -> f64 {
    10f64.powf(-path_loss_db(distance) / 20.0)
}

/// One draw from the standard circularly-symmetric complex Gaussian `CN(0, 1)`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

/// Draws `h_{k,m} = 10^(-pl/20) s_{k,m}` with i.i.d. `CN(0, I)` fading, concatenated RRH-major.
pub fn generate_channels<R: Rng + ?Sized>(p: &Placements, cfg: &SystemConfig, rng: &mut R) -> Result<ChannelSet> {
    let mut h = Vec::with_capacity(p.devices.len());
    for (k, dev) in p.devices.iter().enumerate() {
        let mut v = Vec::with_capacity(cfg.mn());
        for (m, rrh) in p.rrhs.iter().enumerate() {
            let dist = ((dev[0] - rrh[0]).powi(2) + (dev[1] - rrh[1]).powi(2)).sqrt();
            if !(dist > 0.0) {
                return Err(Error::ZeroDistance { device: k, rrh: m });
            }
            let amp = path_loss_amplitude(dist);
            for _ in 0..cfg.antennas {
                v.push(complex_normal(rng) * amp);
            }
        }
        h.push(v);
    }
    ChannelSet::new(cfg.rrhs, cfg.antennas, h)
}

/// Synthetic mixture: standard-normal class means rescaled so that the average
/// pairwise squared distance per dimension equals `separation^2`, and
/// log-uniform variances in `[0.5, 2]`.
pub fn synthesize_feature_statistics<R: Rng + ?Sized>(
    classes: usize,
    dims: usize,
    separation: f64,
    rng: &mut R,
) -> Result<FeatureStatistics> {
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(Error::InvalidConfig { field: "separation", reason: "must be finite and non-negative".into() });
    }
    let raw = Matrix::from_fn(classes, dims, |_, _| StandardNormal.sample(rng));
    let (lo, hi) = (0.5f64.ln(), 2f64.ln());
    let variances: Vec<f64> = (0..dims).map(|_| (lo + (hi - lo) * rng.random::<f64>()).exp()).collect();
    let probe = FeatureStatistics::new(raw, variances)?;
    let avg = (0..dims).map(|d| probe.mean_separation(d)).sum::<f64>() / dims as f64;
    let scale = if avg > 0.0 { separation / avg.sqrt() } else { 0.0 };
    Ok(probe.scaled_means(scale))
}

/// One random network: placements, channels and a synthetic mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub placements: Placements,
    pub channels: ChannelSet,
    pub stats: FeatureStatistics,
}

/// Draws geometry, then channels, then feature statistics from one stream.
pub fn random_instance<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    geometry: &GeometryParams,
    separation: f64,
    rng: &mut R,
) -> Result<Instance> {
    let placements = sample_geometry(cfg, geometry, rng)?;
    let channels = generate_channels(&placements, cfg, rng)?;
    let stats = synthesize_feature_statistics(cfg.classes, cfg.dims, separation, rng)?;
    Ok(Instance { placements, channels, stats })
}

/// Principal subspace of a data set.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaBasis {
    /// `S x D` with orthonormal columns.
    pub basis: Matrix,
    /// Sample mean removed before projection (length `S`).
    pub mean: Vec<f64>,
    /// Leading eigenvalues of the sample covariance, non-increasing.
    pub eigenvalues: Vec<f64>,
    /// Share of total variance captured by the retained components.
    pub explained_variance_ratio: f64,
}

impl PcaBasis {
    /// `U^T (x - mean)`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let (s, d) = (self.basis.rows(), self.basis.cols());
        (0..d).map(|j| (0..s).map(|i| self.basis.get(i, j) * (x[i] - self.mean[i])).sum()).collect()
    }
}

/// Top-`D` eigenvectors of the sample covariance of `data` (`n x S`).
pub fn fit_pca(data: &Matrix, dims: usize) -> Result<PcaBasis> {
    let (n, s) = (data.rows(), data.cols());
    if dims == 0 || dims > s || n < dims || n < 2 {
        return Err(Error::RankDeficient { requested: dims, achievable: s.min(n.saturating_sub(1)) });
    }
    let mean: Vec<f64> = (0..s).map(|j| (0..n).map(|i| data.get(i, j)).sum::<f64>() / n as f64).collect();
    let mut cov = Matrix::zeros(s, s);
    for i in 0..n {
        let row = data.row(i);
        for a in 0..s {
            let da = row[a] - mean[a];
            for b in a..s {
                let v = cov.get(a, b) + da * (row[b] - mean[b]);
                cov.set(a, b, v);
            }
        }
    }
    for a in 0..s {
        for b in a..s {
            let v = cov.get(a, b) / (n - 1) as f64;
            cov.set(a, b, v);
            cov.set(b, a, v);
        }
    }
    let eig = symmetric_eigen(&cov, 1e-10);
    let total: f64 = eig.values.iter().map(|v| v.max(0.0)).sum();
    let lead = eig.values[0].max(0.0);
    let achievable = eig.values.iter().filter(|&&v| v > 1e-12 * lead.max(f64::MIN_POSITIVE)).count();
    if achievable < dims {
        return Err(Error::RankDeficient { requested: dims, achievable });
    }
    let basis = Matrix::from_fn(s, dims, |r, c| eig.vectors.get(r, c));
    let kept: f64 = eig.values[..dims].iter().sum();
    Ok(PcaBasis {
        basis,
        mean,
        eigenvalues: eig.values[..dims].to_vec(),
        explained_variance_ratio: if total > 0.0 { (kept / total).min(1.0) } else { 1.0 },
    })
}

/// Plug-in mixture fit: per-class sample means and the pooled within-class
/// variance of each dimension (clamped below at [`VARIANCE_FLOOR`]).
///
/// `labels[i]` must lie in `0..classes`. Samples are accumulated in a canonical
/// order (by label, then lexicographically by value) so the result does not
/// depend on the input order.
pub fn fit_mixture(features: &Matrix, labels: &[usize], classes: usize) -> Result<FeatureStatistics> {
    let (n, dims) = (features.rows(), features.cols());
    if labels.len() != n {
        return Err(Error::DimensionMismatch { what: "labels", expected: n, found: labels.len() });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        labels[a].cmp(&labels[b]).then_with(|| {
            features
                .row(a)
                .iter()
                .zip(features.row(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(core::cmp::Ordering::Equal)
        })
    });
    let mut counts = vec![0usize; classes];
    let mut sums = Matrix::zeros(classes, dims);
    for &i in &order {
        let l = labels[i];
        if l >= classes {
            return Err(Error::DimensionMismatch { what: "label value", expected: classes, found: l });
        }
        counts[l] += 1;
        for d in 0..dims {
            sums.set(l, d, sums.get(l, d) + features.get(i, d));
        }
    }
    if let Some((label, &count)) = counts.iter().enumerate().find(|(_, &c)| c < 2) {
        return Err(Error::EmptyClass { label, count });
    }
    let means = Matrix::from_fn(classes, dims, |l, d| sums.get(l, d) / counts[l] as f64);
    let mut ss = vec![0.0; dims];
    for &i in &order {
        let l = labels[i];
        for d in 0..dims {
            let r = features.get(i, d) - means.get(l, d);
            ss[d] += r * r;
        }
    }
    let dof = (n - classes) as f64;
    let variances = ss.iter().map(|v| (v / dof).max(VARIANCE_FLOOR)).collect();
    FeatureStatistics::new(means, variances)
}
