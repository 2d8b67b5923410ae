//! Minorants of `Gamma1`, `Gamma2` and the two convex subproblems built around them.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use super::lift::{lift_vector, unlift_vector};
use super::Context;
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::model::DesignSolution;
use crate::solver::{Affine, Constraint, ConvexProgram};

/// Affine minorant `alpha_coef * alpha + c_coef * sum_k c_k + constant` of `(sum c)^2 / alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gamma1Minorant {
    pub alpha_coef: f64,
    pub c_coef: f64,
    pub constant: f64,
}

impl Gamma1Minorant {
    pub fn eval(&self, alpha: f64, c_sum: f64) -> f64 {
        self.alpha_coef * alpha + self.c_coef * c_sum + self.constant
    }
}

/// First-order expansion of `Gamma1` at `(alpha_t, c_t)`.
pub fn linearize_gamma1(alpha_t: f64, c_t: &[f64], dim: usize) -> Result<Gamma1Minorant> {
    if !(alpha_t > 0.0) {
        return Err(Error::NonPositiveAnchor { dim, value: alpha_t });
    }
    let s: f64 = c_t.iter().sum();
    let r = s / alpha_t;
    let value = s * s / alpha_t;
    Ok(Gamma1Minorant { alpha_coef: -r * r, c_coef: 2.0 * r, constant: value + r * r * alpha_t - 2.0 * r * s })
}

/// Affine minorant `gradient . m~ + constant` of `m~^T H~ m~`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gamma2Minorant {
    pub gradient: Vec<f64>,
    pub constant: f64,
}

impl Gamma2Minorant {
    pub fn eval(&self, m_tilde: &[f64]) -> f64 {
        dot(&self.gradient, m_tilde) + self.constant
    }
}

/// `(2 H~ m~_t)^T m~ - m~_t^T H~ m~_t`.
pub fn linearize_gamma2(m_t: &[f64], h_tilde: &Matrix) -> Gamma2Minorant {
    let n = m_t.len();
    let hm: Vec<f64> = (0..n).map(|r| dot(h_tilde.row(r), m_t)).collect();
    Gamma2Minorant { gradient: hm.iter().map(|v| 2.0 * v).collect(), constant: -dot(&hm, m_t) }
}

/// Same minorant from the rank-two factors `H~ = g1 g1^T + g2 g2^T`.
pub(crate) fn linearize_gamma2_factored(m_t: &[f64], g1: &[f64], g2: &[f64]) -> Gamma2Minorant {
    let (a1, a2) = (dot(g1, m_t), dot(g2, m_t));
    Gamma2Minorant {
        gradient: g1.iter().zip(g2).map(|(x, y)| 2.0 * (a1 * x + a2 * y)).collect(),
        constant: -(a1 * a1 + a2 * a2),
    }
}

/// Which variables subproblem 1 optimizes.
#[derive(Debug, Clone, PartialEq)]
pub enum Sub1Mode {
    /// `(alpha, beta, c, m~)`.
    Full,
    /// `(alpha, beta, c)` with beamformers held fixed.
    FixedBeamformer,
    /// `(alpha, m~)` with transmit scalars fixed at `b0` for the listed devices
    /// (`c_k = b0 Re(m^H h_k)`, zero for the others).
    FixedPrecoding { b0: f64, devices: Vec<bool> },
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// `gen` holds the real channel generators `g1_k`, used to recover `c` under fixed precoding.
    Sub1 { mode: Sub1Mode, stride: usize, beta: usize, c: usize, m: usize, gen: Vec<Vec<f64>> },
    Sub2,
}

/// A convex program plus the bookkeeping to move between it and a [`DesignSolution`].
#[derive(Debug, Clone, PartialEq)]
pub struct Subproblem {
    pub program: ConvexProgram,
    /// The anchor nudged into the strict interior where possible.
    pub warm_start: Vec<f64>,
    kind: Kind,
    active: Vec<usize>,
}

const NUDGE: f64 = 1e-7;

fn alpha_floor(ctx: &Context, alpha_t: f64) -> f64 {
    ctx.opts.alpha_floor.min(0.5 * alpha_t)
}

/// Largest `alpha` keeping `variance < kappa * minorant(alpha)`, backed off slightly.
fn interior_alpha(g: &Gamma1Minorant, c_sum: f64, variance: f64, kappa: f64) -> f64 {
    let a = (g.c_coef * c_sum + g.constant - variance / kappa) / (-g.alpha_coef);
    a - 1e-9 * a.abs()
}

pub(crate) fn build_sub1(ctx: &Context, state: &DesignSolution, mode: &Sub1Mode) -> Result<Subproblem> {
    let k_n = ctx.cfg.devices;
    let mn2 = 2 * ctx.cfg.mn();
    let (beta_len, c_len, m_len) = match mode {
        Sub1Mode::Full => (k_n, k_n, mn2),
        Sub1Mode::FixedBeamformer => (k_n, k_n, 0),
        Sub1Mode::FixedPrecoding { .. } => (0, 0, mn2),
    };
    let stride = 1 + beta_len + c_len + m_len;
    let (beta_off, c_off, m_off) = (1, 1 + beta_len, 1 + beta_len + c_len);
    let mut p = ConvexProgram::new();
    let mut warm = Vec::with_capacity(stride * ctx.active.len());
    let mut energy = Affine::constant(-ctx.cfg.normalized_energy());
    let w = &ctx.cfg.signal_second_moment;
    let eps = &ctx.cfg.sensing_noise_power;
    for (j, &d) in ctx.active.iter().enumerate() {
        let base = p.add_block(&alloc::format!("dim{d}"), stride);
        let (ia, ib, ic, im) = (base, base + beta_off, base + c_off, base + m_off);
        let alpha_t = state.aux_gain[d];
        let c_t = state.receive_strength.column(d);
        let m_t = lift_vector(&state.beamformers[d]);
        let g1m = linearize_gamma1(alpha_t, &c_t, d)?;
        let kappa = ctx.kappa[d];
        let sigma2 = ctx.stats.feature_variances()[d];
        p.objective[ia] = 1.0;
        p.set_bounds(ia, alpha_floor(ctx, alpha_t), f64::INFINITY);
        let noise_diag: Vec<f64> =
            (0..mn2).map(|i| 0.5 * (ctx.cfg.awgn_power + state.quantization[i % (mn2 / 2)])).collect();
        let _ = j;

        // Warm-start values for c and beta.
        let c_w: Vec<f64> = c_t.iter().map(|c| c * (1.0 - NUDGE)).collect();
        match mode {
            Sub1Mode::Full | Sub1Mode::FixedBeamformer => {
                for k in 0..k_n {
                    p.set_bounds(ib + k, ctx.opts.beta_floor, f64::INFINITY);
                    p.set_bounds(ic + k, 0.0, f64::INFINITY);
                    energy.push(ib + k, 1.0);
                    let phat = ctx.cfg.max_precoding_power[k];
                    let one = Matrix::from_row_major(1, 1, vec![1.0 / phat]).unwrap();
                    if let Sub1Mode::Full = mode {
                        let g2m = linearize_gamma2_factored(&m_t, &ctx.g1[k], &ctx.g2[k]);
                        let mut gamma2 = Affine::constant(g2m.constant);
                        for (i, &a) in g2m.gradient.iter().enumerate() {
                            gamma2.push(im + i, a);
                        }
                        p.push(Constraint::ConvexQuadLe { vars: vec![ic + k], p: one, a: gamma2.scaled(-1.0) });
                        p.push(Constraint::QuadOverLinLe {
                            u: Affine::var(ic + k, w[k].sqrt()),
                            v: Affine::var(ib + k, 1.0),
                            l: gamma2,
                        });
                    } else {
                        let gain = ctx.effective_gain(&state.beamformers[d], k);
                        p.push(Constraint::ConvexQuadLe {
                            vars: vec![ic + k],
                            p: one,
                            a: Affine::constant(-gain),
                        });
                        let e = Matrix::from_row_major(1, 1, vec![w[k] / gain]).unwrap();
                        p.push(Constraint::ConvexQuadLe { vars: vec![ic + k], p: e, a: Affine::var(ib + k, -1.0) });
                    }
                }
                // Lambda <= Gamma1 minorant, scaled by kappa.
                let nv = k_n + m_len;
                let mut vars: Vec<usize> = (0..k_n).map(|k| ic + k).collect();
                vars.extend((0..m_len).map(|i| im + i));
                let pm = Matrix::from_fn(nv, nv, |r, c| {
                    if r < k_n && c < k_n {
                        sigma2 + if r == c { eps[r] } else { 0.0 }
                    } else if r == c {
                        noise_diag[r - k_n]
                    } else {
                        0.0
                    }
                });
                let fixed_noise = if m_len == 0 { ctx.equivalent_noise(&state.beamformers[d], &state.quantization) } else { 0.0 };
                let mut a = Affine::constant(fixed_noise - kappa * g1m.constant).with(ia, -kappa * g1m.alpha_coef);
                for k in 0..k_n {
                    a.push(ic + k, -kappa * g1m.c_coef);
                }
                p.push(Constraint::ConvexQuadLe { vars, p: pm, a });

                // warm start
                let beta_w: Vec<f64> = (0..k_n).map(|k| state.aux_energy.get(k, d) * (1.0 - NUDGE)).collect();
                let m_w = &state.beamformers[d];
                let var_w = ctx.aggregate_variance(&c_w, d, ctx.equivalent_noise(m_w, &state.quantization));
                let alpha_w = interior_alpha(&g1m, c_w.iter().sum(), var_w, kappa);
                warm.push(alpha_w);
                warm.extend(beta_w);
                warm.extend(&c_w);
                if m_len > 0 {
                    warm.extend(&m_t);
                }
            }
            Sub1Mode::FixedPrecoding { b0, devices } => {
                // c_k = b0 g1_k . m~ must stay non-negative.
                let mut gsum = vec![0.0; mn2];
                for k in (0..k_n).filter(|&k| devices[k]) {
                    let mut a = Affine::constant(0.0);
                    for (i, &g) in ctx.g1[k].iter().enumerate() {
                        a.push(im + i, -b0 * g);
                        gsum[i] += g;
                    }
                    p.push(Constraint::AffineLe(a));
                }
                let pm = Matrix::from_fn(mn2, mn2, |r, c| {
                    let mut v = sigma2 * b0 * b0 * gsum[r] * gsum[c];
                    for k in (0..k_n).filter(|&k| devices[k]) {
                        v += eps[k] * b0 * b0 * ctx.g1[k][r] * ctx.g1[k][c];
                    }
                    if r == c {
                        v += noise_diag[r];
                    }
                    v
                });
                let mut a = Affine::constant(-kappa * g1m.constant).with(ia, -kappa * g1m.alpha_coef);
                for (i, &g) in gsum.iter().enumerate() {
                    a.push(im + i, -kappa * g1m.c_coef * b0 * g);
                }
                p.push(Constraint::ConvexQuadLe { vars: (0..mn2).map(|i| im + i).collect(), p: pm, a });
                let var_t = ctx.aggregate_variance(&c_t, d, ctx.equivalent_noise(&state.beamformers[d], &state.quantization));
                warm.push(interior_alpha(&g1m, c_t.iter().sum(), var_t, kappa));
                warm.extend(&m_t);
            }
        }
    }
    if beta_len > 0 {
        p.push(Constraint::AffineLe(energy));
    }
    Ok(Subproblem {
        program: p,
        warm_start: warm,
        kind: Kind::Sub1 {
            mode: mode.clone(),
            stride,
            beta: beta_off,
            c: c_off,
            m: m_off,
            gen: if let Sub1Mode::FixedPrecoding { .. } = mode { ctx.g1.clone() } else { Vec::new() },
        },
        active: ctx.active.clone(),
    })
}

pub(crate) fn build_sub2(ctx: &Context, state: &DesignSolution) -> Result<Subproblem> {
    let mn = ctx.cfg.mn();
    let n_act = ctx.active.len();
    let mut p = ConvexProgram::new();
    let a0 = p.add_block("alpha", n_act);
    let q0 = p.add_block("q", mn);
    let cap = ctx.q_cap();
    let q_w: Vec<f64> = state.quantization.iter().map(|q| (q * (1.0 + NUDGE)).min(0.5 * (q + cap))).collect();
    let mut warm = vec![0.0; n_act + mn];
    for i in 0..mn {
        p.set_bounds(q0 + i, (ctx.opts.q_floor * ctx.cfg.awgn_power).min(0.5 * state.quantization[i]), cap);
        warm[q0 + i] = q_w[i];
    }
    p.push(Constraint::LogDetRatioLe {
        a: ctx.constants.a.clone(),
        q: (0..mn).map(|i| q0 + i).collect(),
        bound: ctx.cfg.fronthaul_capacity,
    });
    for (j, &d) in ctx.active.iter().enumerate() {
        let alpha_t = state.aux_gain[d];
        let c = state.receive_strength.column(d);
        let g1m = linearize_gamma1(alpha_t, &c, d)?;
        // Taylor expansion in alpha only: c is fixed, so its terms fold into the constant.
        let s: f64 = c.iter().sum();
        let g1m = Gamma1Minorant { alpha_coef: g1m.alpha_coef, c_coef: 0.0, constant: g1m.constant + g1m.c_coef * s };
        let kappa = ctx.kappa[d];
        let m = &state.beamformers[d];
        let signal = ctx.aggregate_variance(&c, d, 0.0);
        let mut a = Affine::constant(signal + ctx.equivalent_noise(m, &vec![0.0; mn]) - kappa * g1m.constant)
            .with(a0 + j, -kappa * g1m.alpha_coef);
        for i in 0..mn {
            a.push(q0 + i, 0.5 * m[i].norm_sqr());
        }
        p.objective[a0 + j] = 1.0;
        p.set_bounds(a0 + j, alpha_floor(ctx, alpha_t), f64::INFINITY);
        p.push(Constraint::AffineLe(a));
        let var_w = ctx.aggregate_variance(&c, d, ctx.equivalent_noise(m, &q_w));
        warm[a0 + j] = interior_alpha(&g1m, 0.0, var_w, kappa);
    }
    Ok(Subproblem { program: p, warm_start: warm, kind: Kind::Sub2, active: ctx.active.clone() })
}

impl Subproblem {
    /// Writes the optimized variables into a copy of `state`. `alpha` and `beta`
    /// are copied verbatim; the caller re-derives them from the other variables.
    pub fn apply(&self, x: &[f64], state: &DesignSolution) -> DesignSolution {
        let mut out = state.clone();
        match &self.kind {
            Kind::Sub1 { mode, stride, beta, c, m, gen } => {
                let k_n = out.devices();
                for (j, &d) in self.active.iter().enumerate() {
                    let base = j * stride;
                    out.aux_gain[d] = x[base];
                    match mode {
                        Sub1Mode::Full | Sub1Mode::FixedBeamformer => {
                            for k in 0..k_n {
                                out.aux_energy.set(k, d, x[base + beta + k]);
                                out.receive_strength.set(k, d, x[base + c + k].max(0.0));
                            }
                            if let Sub1Mode::Full = mode {
                                let mn2 = 2 * out.mn();
                                out.beamformers[d] = unlift_vector(&x[base + m..base + m + mn2]);
                            }
                        }
                        Sub1Mode::FixedPrecoding { b0, devices } => {
                            let mn2 = 2 * out.mn();
                            let mt = &x[base + m..base + m + mn2];
                            out.beamformers[d] = unlift_vector(mt);
                            for k in 0..k_n {
                                let c = if devices[k] { (b0 * dot(&gen[k], mt)).max(0.0) } else { 0.0 };
                                out.receive_strength.set(k, d, c);
                            }
                        }
                    }
                }
            }
            Kind::Sub2 => {
                let n_act = self.active.len();
                for (j, &d) in self.active.iter().enumerate() {
                    out.aux_gain[d] = x[j];
                }
                let mn = out.mn();
                out.quantization.copy_from_slice(&x[n_act..n_act + mn]);
            }
        }
        out
    }
}
