//! The comparison schemes and the shared scheme driver.
//!
//! * uniform quantization: `q = lambda 1` with `lambda` meeting the fronthaul
//!   capacity exactly, then subproblem 1 only;
//! * uniform beamforming: `m_d` is the all-ones vector, the remaining variables
//!   alternate as in the proposed method;
//! * fixed precoding: every transmit scalar equals a common real `b0`, so
//!   `c_k(d) = b0 Re(m_d^H h_k)` follows from the beamformer.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::metrics::{fronthaul_rate, ConstraintConstants};
use crate::model::{ChannelSet, DesignSolution, FeatureStatistics, SystemConfig};
use crate::sca::lift::{lift_vector, unlift_vector};
use crate::sca::{self, alternate, failure, Context, ScaFailure, ScaOptions, ScaState, Step, Sub1Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaselineKind {
    UniformQuantization,
    UniformBeamforming,
    FixedPrecoding,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineSpec {
    pub kind: BaselineKind,
    /// `b0^2` for fixed precoding; `None` picks the largest level meeting the budgets with margin 0.9.
    pub fixed_level: Option<f64>,
}

impl BaselineSpec {
    pub fn new(kind: BaselineKind) -> Self {
        Self { kind, fixed_level: None }
    }
}

/// The optimizer variants that can be run on an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Proposed,
    Baseline(BaselineKind),
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Proposed,
        Scheme::Baseline(BaselineKind::UniformQuantization),
        Scheme::Baseline(BaselineKind::UniformBeamforming),
        Scheme::Baseline(BaselineKind::FixedPrecoding),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Baseline(BaselineKind::UniformQuantization) => "baseline1",
            Scheme::Baseline(BaselineKind::UniformBeamforming) => "baseline2",
            Scheme::Baseline(BaselineKind::FixedPrecoding) => "baseline3",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }
}

/// `lambda` with `fronthaul_rate(lambda 1) = C`, found by bisection on `log lambda`.
/// The returned value never exceeds the capacity.
pub fn uniform_quantization_lambda(constants: &ConstraintConstants, capacity: f64) -> f64 {
    let n = constants.a.dim();
    let rate = |l: f64| fronthaul_rate(&vec![l; n], constants).unwrap_or(f64::INFINITY);
    let (mut lo, mut hi) = (1.0_f64, 1.0_f64);
    while rate(lo) <= capacity && lo > 1e-300 {
        lo *= 0.5;
    }
    while rate(hi) > capacity && hi < 1e300 {
        hi *= 2.0;
    }
    // rate(lo) > C >= rate(hi)
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if rate(mid) > capacity {
            lo = mid;
        } else {
            hi = mid;
        }
        if capacity - rate(hi) <= 1e-11 {
            break;
        }
    }
    hi
}

/// Default `b0^2 = min(min_k P_k, 0.9 E_bar / (D_active sum_k w_k))`.
pub fn fixed_precoding_level(cfg: &SystemConfig, active_dims: usize) -> f64 {
    sca::uniform_level(cfg, active_dims, 0.9)
}

/// Scheme-specific data fixed for a whole run.
enum Setup {
    Proposed,
    UniformQuantization { lambda: f64 },
    UniformBeamforming,
    FixedPrecoding { b0: f64, devices: Vec<bool> },
}

impl Setup {
    fn schedule(&self) -> Vec<Step> {
        match self {
            Setup::Proposed => vec![Step::Sub1(Sub1Mode::Full), Step::Sub2],
            Setup::UniformQuantization { .. } => vec![Step::Sub1(Sub1Mode::Full)],
            Setup::UniformBeamforming => vec![Step::Sub1(Sub1Mode::FixedBeamformer), Step::Sub2],
            Setup::FixedPrecoding { b0, devices } => {
                vec![Step::Sub1(Sub1Mode::FixedPrecoding { b0: *b0, devices: devices.clone() }), Step::Sub2]
            }
        }
    }
}

fn ones(ctx: &Context) -> Vec<Complex64> {
    vec![Complex64::new(1.0, 0.0); ctx.cfg.mn()]
}

fn setup(ctx: &Context, scheme: Scheme, spec_level: Option<f64>) -> Result<Setup> {
    Ok(match scheme {
        Scheme::Proposed => Setup::Proposed,
        Scheme::Baseline(BaselineKind::UniformQuantization) => {
            Setup::UniformQuantization { lambda: uniform_quantization_lambda(&ctx.constants, ctx.cfg.fronthaul_capacity) }
        }
        Scheme::Baseline(BaselineKind::UniformBeamforming) => Setup::UniformBeamforming,
        Scheme::Baseline(BaselineKind::FixedPrecoding) => {
            let level = spec_level.unwrap_or_else(|| fixed_precoding_level(&ctx.cfg, ctx.active.len()));
            let pmin = ctx.cfg.max_precoding_power.iter().copied().fold(f64::INFINITY, f64::min);
            if !(level > 0.0 && level <= pmin) {
                return Err(Error::InvalidConfig { field: "fixed_level", reason: "must lie in (0, min_k P_k]".into() });
            }
            let mut devices = vec![true; ctx.cfg.devices];
            loop {
                if !devices.iter().any(|&b| b) {
                    return Err(Error::DegenerateChannels);
                }
                let (m, t) = sca::max_min_beamformer(ctx, &devices)?;
                if t > 1e-9 {
                    break;
                }
                // Drop the device with the worst real gain and retry.
                let worst = (0..ctx.cfg.devices)
                    .filter(|&k| devices[k])
                    .min_by(|&a, &b| {
                        let ga = dot(&ctx.g1[a], &m) / dot(&ctx.g1[a], &ctx.g1[a]).sqrt().max(f64::MIN_POSITIVE);
                        let gb = dot(&ctx.g1[b], &m) / dot(&ctx.g1[b], &ctx.g1[b]).sqrt().max(f64::MIN_POSITIVE);
                        ga.total_cmp(&gb)
                    })
                    .unwrap();
                devices[worst] = false;
            }
            Setup::FixedPrecoding { b0: level.sqrt(), devices }
        }
    })
}

/// Standard starting point of a scheme (working frame).
fn standard_start(ctx: &Context, setup: &Setup) -> Result<DesignSolution> {
    let cfg = &ctx.cfg;
    let mut sol = sca::initial_point_in(ctx)?;
    match setup {
        Setup::Proposed => {}
        Setup::UniformQuantization { lambda } => {
            sol.quantization = vec![*lambda; cfg.mn()];
        }
        Setup::UniformBeamforming => {
            let gamma2 = sca::uniform_level(cfg, ctx.active.len(), 0.5);
            for &d in &ctx.active {
                sol.beamformers[d] = ones(ctx);
                for k in 0..cfg.devices {
                    let g = ctx.effective_gain(&sol.beamformers[d], k);
                    sol.receive_strength.set(k, d, gamma2.sqrt() * g.sqrt());
                    sol.aux_energy.set(k, d, 1.5 * gamma2 * cfg.signal_second_moment[k]);
                }
            }
        }
        Setup::FixedPrecoding { b0, devices } => {
            let (m, _) = sca::max_min_beamformer(ctx, devices)?;
            for &d in &ctx.active {
                sol.beamformers[d] = unlift_vector(&m);
            }
            set_fixed_precoding(ctx, &mut sol, *b0, devices);
        }
    }
    for &d in &ctx.active {
        sol.aux_gain[d] = ctx.alpha_eq(&sol, d) * (1.0 - 1e-6);
    }
    Ok(sol)
}

/// `c_k(d) = b0 Re(m_d^H h_k)` on the selected devices, `beta` at the energy used.
fn set_fixed_precoding(ctx: &Context, sol: &mut DesignSolution, b0: f64, devices: &[bool]) {
    for &d in &ctx.active {
        let m = lift_vector(&sol.beamformers[d]);
        for k in 0..ctx.cfg.devices {
            let c = if devices[k] { b0 * dot(&ctx.g1[k], &m) } else { 0.0 };
            sol.receive_strength.set(k, d, c);
        }
    }
    ctx.tighten(sol);
}

/// Turns a design found elsewhere into a feasible point of this scheme, if possible.
fn adapt(ctx: &Context, setup: &Setup, cand: &DesignSolution) -> Option<DesignSolution> {
    if cand.check_shapes(&ctx.cfg).is_err() {
        return None;
    }
    let mut sol = ctx.to_working(cand);
    match setup {
        Setup::Proposed => {}
        Setup::UniformQuantization { lambda } => sol.quantization = vec![*lambda; ctx.cfg.mn()],
        Setup::UniformBeamforming => {
            if ctx.active.iter().any(|&d| sol.beamformers[d] != ones(ctx)) {
                return None;
            }
        }
        Setup::FixedPrecoding { b0, devices } => {
            set_fixed_precoding(ctx, &mut sol, *b0, devices);
            let positive = ctx
                .active
                .iter()
                .all(|&d| (0..ctx.cfg.devices).all(|k| !devices[k] || sol.receive_strength.get(k, d) > 0.0));
            if !positive {
                return None;
            }
        }
    }
    ctx.tighten(&mut sol);
    (ctx.violation(&sol) <= 0.0).then_some(sol)
}

/// Runs `scheme` from the best of its standard starting point and the given
/// candidate designs (physical units, adapted to the scheme where possible).
pub fn run_scheme(
    scheme: Scheme,
    spec_level: Option<f64>,
    cfg: &SystemConfig,
    channels: &ChannelSet,
    stats: &FeatureStatistics,
    candidates: &[&DesignSolution],
    opts: &ScaOptions,
) -> core::result::Result<(DesignSolution, ScaState), ScaFailure> {
    let ctx = Context::new(cfg, channels, stats, opts, true).map_err(failure)?;
    let setup = setup(&ctx, scheme, spec_level).map_err(failure)?;
    let mut best = standard_start(&ctx, &setup).map_err(failure)?;
    let mut best_obj = ctx.objective(&best);
    for cand in candidates {
        if let Some(sol) = adapt(&ctx, &setup, cand) {
            let obj = ctx.objective(&sol);
            if obj > best_obj {
                best = sol;
                best_obj = obj;
            }
        }
    }
    alternate(&ctx, best, &setup.schedule())
}

/// Runs one comparison scheme from its standard starting point.
pub fn run_baseline(
    spec: &BaselineSpec,
    cfg: &SystemConfig,
    channels: &ChannelSet,
    stats: &FeatureStatistics,
    opts: &ScaOptions,
) -> core::result::Result<(DesignSolution, ScaState), ScaFailure> {
    run_scheme(Scheme::Baseline(spec.kind), spec.fixed_level, cfg, channels, stats, &[], opts)
}

