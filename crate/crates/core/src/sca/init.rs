//! Strictly feasible starting points.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use super::{Context, ScaOptions};
use crate::baselines::uniform_quantization_lambda;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{ChannelSet, DesignSolution, FeatureStatistics, SystemConfig};
use crate::solver::{self, Affine, Constraint, ConvexProgram, SolveStatus};

/// Normalized matched filter `sum_k h_k / ||sum_k h_k||`.
pub(crate) fn matched_filter(channels: &ChannelSet) -> Result<Vec<Complex64>> {
    let mut sum = vec![Complex64::new(0.0, 0.0); channels.mn()];
    for k in 0..channels.devices() {
        for (s, h) in sum.iter_mut().zip(channels.device(k)) {
            *s += h;
        }
    }
    let norm = sum.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::DegenerateChannels);
    }
    Ok(sum.into_iter().map(|z| z / norm).collect())
}

/// Uniform transmit level `gamma^2`: half of what the tighter of the power and energy budgets allows.
pub(crate) fn uniform_level(cfg: &SystemConfig, active_dims: usize, margin: f64) -> f64 {
    let pmin = cfg.max_precoding_power.iter().copied().fold(f64::INFINITY, f64::min);
    let wsum: f64 = cfg.signal_second_moment.iter().sum();
    margin * pmin.min(cfg.normalized_energy() / (active_dims as f64 * wsum))
}

/// Collects the parts of a design and sets `alpha` just below its equality value.
pub(crate) fn assemble(ctx: &Context, beamformers: Vec<Vec<Complex64>>, c: Matrix, q: Vec<f64>, beta: Matrix) -> DesignSolution {
    let mut sol = DesignSolution {
        receive_strength: c,
        beamformers,
        quantization: q,
        aux_gain: vec![0.0; ctx.cfg.dims],
        aux_energy: beta,
    };
    for &d in &ctx.active {
        sol.aux_gain[d] = ctx.alpha_eq(&sol, d) * (1.0 - 1e-6);
    }
    sol
}

pub(crate) fn initial_point_in(ctx: &Context) -> Result<DesignSolution> {
    let cfg = &ctx.cfg;
    let m = matched_filter(&ctx.channels)?;
    let lambda = uniform_quantization_lambda(&ctx.constants, cfg.fronthaul_capacity);
    let q = vec![lambda * (1.0 + 1e-6); cfg.mn()];
    let gamma2 = uniform_level(cfg, ctx.active.len(), 0.5);
    let gamma = gamma2.sqrt();
    let mut beamformers = vec![vec![Complex64::new(0.0, 0.0); cfg.mn()]; cfg.dims];
    let mut c = Matrix::zeros(cfg.devices, cfg.dims);
    let mut beta = Matrix::zeros(cfg.devices, cfg.dims);
    for &d in &ctx.active {
        beamformers[d] = m.clone();
        for k in 0..cfg.devices {
            c.set(k, d, gamma * ctx.effective_gain(&m, k).sqrt());
            beta.set(k, d, 1.5 * gamma2 * cfg.signal_second_moment[k]);
        }
    }
    Ok(assemble(ctx, beamformers, c, q, beta))
}

/// The starting point of the proposed algorithm in physical units: matched-filter
/// beamformers, uniform quantization meeting the fronthaul capacity, equal
/// transmit power at half of the binding budget.
pub fn initial_feasible_point(cfg: &SystemConfig, channels: &ChannelSet, stats: &FeatureStatistics) -> Result<DesignSolution> {
    let ctx = Context::new(cfg, channels, stats, &ScaOptions::default(), true)?;
    Ok(ctx.to_physical(&initial_point_in(&ctx)?))
}

/// Lifted unit-norm beamformer maximizing `min_k Re(m^H h_k) / ||h_k||` over the
/// selected devices. Returns the beamformer and the attained minimum.
pub(crate) fn max_min_beamformer(ctx: &Context, devices: &[bool]) -> Result<(Vec<f64>, f64)> {
    let mn2 = 2 * ctx.cfg.mn();
    let mut p = ConvexProgram::new();
    let t = p.add_block("t", 1);
    let m0 = p.add_block("m", mn2);
    p.objective[t] = 1.0;
    p.set_bounds(t, -2.0, f64::INFINITY);
    for k in (0..ctx.cfg.devices).filter(|&k| devices[k]) {
        let g = &ctx.g1[k];
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let mut a = Affine::var(t, 1.0);
        for (i, v) in g.iter().enumerate() {
            a.push(m0 + i, -v / norm);
        }
        p.push(Constraint::AffineLe(a));
    }
    let eye = Matrix::from_fn(mn2, mn2, |r, c| if r == c { 1.0 } else { 0.0 });
    p.push(Constraint::ConvexQuadLe { vars: (m0..m0 + mn2).collect(), p: eye, a: Affine::constant(-1.0) });
    let mut warm = vec![0.0; 1 + mn2];
    warm[t] = -1.5;
    let r = solver::solve(&p, Some(&warm), &ctx.opts.solver)?;
    if r.status == SolveStatus::Infeasible {
        return Err(Error::Solver { status: r.status, context: "max-min beamformer" });
    }
    Ok((r.x[m0..].to_vec(), r.x[t]))
}
