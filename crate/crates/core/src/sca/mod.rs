//! Alternating successive convex approximation.
//!
//! Each iteration solves subproblem 1 over `(alpha, beta, c, m~)` with `q`
//! fixed, then subproblem 2 over `(alpha, q)` with `(c, m)` fixed. Both replace
//! the concave sides `Gamma1 = (sum c)^2 / alpha` and `Gamma2 = |m^H h|^2` by
//! first-order minorants at the current point, so every solution is feasible
//! for the original problem and the anchor is feasible for the next program.
//!
//! After a solve, `alpha` is raised to the value making `Lambda = Gamma1` hold
//! with equality and `beta` is lowered to the energy it actually uses. The
//! objective `sum_d alpha(d)` is then the received discriminant gain.
//!
//! Internally all work happens in a frame where channels are divided by
//! `sigma_z`: AWGN becomes 1, `q` is divided by `sigma_z^2` and `c` by
//! `sigma_z`, while `alpha`, `beta` and every constraint are unchanged.

mod init;
pub mod lift;
mod subproblems;

pub use init::initial_feasible_point;
pub use lift::{complex_to_real_lift, RealLift};
pub use subproblems::{linearize_gamma1, linearize_gamma2, Gamma1Minorant, Gamma2Minorant, Sub1Mode, Subproblem};

pub(crate) use init::{initial_point_in, max_min_beamformer, uniform_level};

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::metrics::{self, ConstraintConstants};
use crate::model::{ChannelSet, DesignSolution, FeatureStatistics, SystemConfig};
use crate::solver::{self, SolveStatus, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaOptions {
    /// Stop once a full iteration raises the objective by less than this.
    pub eps_stop: f64,
    pub max_iters: usize,
    pub alpha_floor: f64,
    pub beta_floor: f64,
    /// Lower bound on `q` relative to the AWGN power.
    pub q_floor: f64,
    pub solver: SolverOptions,
}

impl Default for ScaOptions {
    fn default() -> Self {
        Self { eps_stop: 1e-3, max_iters: 50, alpha_floor: 1e-8, beta_floor: 1e-12, q_floor: 1e-12, solver: SolverOptions::default() }
    }
}

/// One row of the convergence trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    /// Position within the iteration: 0 for the initial point, then 1, 2.
    pub half: usize,
    pub objective: f64,
    pub subproblem: &'static str,
    pub newton_steps: usize,
    /// Largest residual of the original constraints at the accepted point.
    pub violation: f64,
}

/// Solver outcome of one subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemReport {
    pub subproblem: &'static str,
    pub status: SolveStatus,
    pub newton_steps: usize,
    /// Part of `newton_steps` spent finding a strictly feasible start.
    pub phase1_newton_steps: usize,
    pub barrier_iterations: usize,
    pub max_violation: f64,
    pub kkt_residual: f64,
    /// Largest constraint violation of the program at its warm start.
    pub anchor_violation: f64,
    /// `false` when the safeguard kept the previous point.
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaState {
    /// Current design in physical units.
    pub solution: DesignSolution,
    /// Completed full iterations.
    pub iteration: usize,
    pub trace: Vec<TraceRow>,
    pub reports: Vec<SubproblemReport>,
    /// `true` if the stopping threshold was met before the iteration cap.
    pub converged: bool,
}

impl ScaState {
    pub fn objective(&self) -> f64 {
        self.trace.last().map_or(0.0, |r| r.objective)
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.trace.iter().map(|r| r.objective).collect()
    }
}

/// A solver failure together with the progress made before it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaFailure {
    pub error: Error,
    pub state: ScaState,
}

impl fmt::Display for ScaFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} after {} iterations", self.error, self.state.iteration)
    }
}

impl From<ScaFailure> for Error {
    fn from(e: ScaFailure) -> Self {
        e.error
    }
}

/// Problem data in the working frame.
pub(crate) struct Context<'a> {
    pub cfg: SystemConfig,
    pub stats: &'a FeatureStatistics,
    pub channels: ChannelSet,
    pub constants: ConstraintConstants,
    pub kappa: Vec<f64>,
    pub active: Vec<usize>,
    pub g1: Vec<Vec<f64>>,
    pub g2: Vec<Vec<f64>>,
    pub opts: ScaOptions,
    /// `sigma_z` of the physical frame (1 when not normalized).
    pub scale: f64,
}

impl<'a> Context<'a> {
    pub fn new(
        cfg: &SystemConfig,
        channels: &ChannelSet,
        stats: &'a FeatureStatistics,
        opts: &ScaOptions,
        normalize: bool,
    ) -> Result<Self> {
        let cfg = cfg.clone().validate()?;
        if stats.dims() != cfg.dims {
            return Err(Error::DimensionMismatch { what: "feature dimensions", expected: cfg.dims, found: stats.dims() });
        }
        if channels.devices() != cfg.devices || channels.mn() != cfg.mn() {
            return Err(Error::DimensionMismatch { what: "channel set", expected: cfg.devices * cfg.mn(), found: channels.devices() * channels.mn() });
        }
        let scale = if normalize { cfg.awgn_power.sqrt() } else { 1.0 };
        let mut wcfg = cfg;
        let wch = if normalize {
            wcfg.awgn_power = 1.0;
            channels.scaled(scale)
        } else {
            channels.clone()
        };
        let constants = ConstraintConstants::new(&wcfg, stats, &wch);
        let active = constants.active_dims();
        if active.is_empty() {
            return Err(Error::InactiveProblem);
        }
        let (g1, g2) = (0..wch.devices()).map(|k| lift::channel_generators(wch.device(k))).unzip();
        Ok(Self { kappa: constants.kappa.clone(), cfg: wcfg, stats, channels: wch, constants, active, g1, g2, opts: *opts, scale })
    }

    pub fn effective_gain(&self, m: &[Complex64], k: usize) -> f64 {
        self.channels.effective(m, k).norm_sqr()
    }

    pub fn equivalent_noise(&self, m: &[Complex64], q: &[f64]) -> f64 {
        metrics::equivalent_noise(m, q, self.cfg.awgn_power)
    }

    pub fn aggregate_variance(&self, c: &[f64], d: usize, noise: f64) -> f64 {
        metrics::aggregate_variance(c, self.stats.feature_variances()[d], &self.cfg.sensing_noise_power, noise)
    }

    pub fn q_cap(&self) -> f64 {
        let amax = (0..self.cfg.mn()).map(|i| self.constants.a.get(i, i).re).fold(0.0, f64::max);
        1e6 * (1.0 + amax)
    }

    pub fn alpha_eq(&self, sol: &DesignSolution, d: usize) -> f64 {
        let c = sol.receive_strength.column(d);
        let s: f64 = c.iter().sum();
        let v = self.aggregate_variance(&c, d, self.equivalent_noise(&sol.beamformers[d], &sol.quantization));
        if v > 0.0 {
            self.kappa[d] * s * s / v
        } else {
            0.0
        }
    }

    pub fn objective(&self, sol: &DesignSolution) -> f64 {
        self.active.iter().map(|&d| self.alpha_eq(sol, d)).sum()
    }

    /// Sets `alpha` to its equality value and `beta` to the energy each slot uses.
    pub fn tighten(&self, sol: &mut DesignSolution) {
        for &d in &self.active {
            sol.aux_gain[d] = self.alpha_eq(sol, d);
            for k in 0..self.cfg.devices {
                let c = sol.receive_strength.get(k, d);
                let g = self.effective_gain(&sol.beamformers[d], k);
                let used = if c == 0.0 { 0.0 } else { c * c * self.cfg.signal_second_moment[k] / g };
                sol.aux_energy.set(k, d, used.max(2.0 * self.opts.beta_floor));
            }
        }
    }

    /// Residuals `g <= 0` of every constraint of the original problem, in unit-free form.
    pub fn residuals(&self, sol: &DesignSolution) -> Vec<f64> {
        let cfg = &self.cfg;
        let mut r = Vec::new();
        let mut beta_sum = 0.0;
        for &d in &self.active {
            let m = &sol.beamformers[d];
            for k in 0..cfg.devices {
                let c = sol.receive_strength.get(k, d);
                let beta = sol.aux_energy.get(k, d);
                let g = self.effective_gain(m, k);
                if g > 0.0 {
                    r.push(c * c / (cfg.max_precoding_power[k] * g) - 1.0);
                    r.push(c * c * cfg.signal_second_moment[k] / g - beta);
                } else {
                    r.push(c * c);
                    r.push(-beta);
                }
                r.push(-c);
                r.push(-beta);
                beta_sum += beta;
            }
            r.push(sol.aux_gain[d] - self.alpha_eq(sol, d));
            r.push(-sol.aux_gain[d]);
        }
        r.push(beta_sum - cfg.normalized_energy());
        match metrics::fronthaul_rate(&sol.quantization, &self.constants) {
            Ok(rate) => r.push(rate - cfg.fronthaul_capacity),
            Err(_) => r.push(f64::INFINITY),
        }
        r.extend(sol.quantization.iter().map(|q| -q));
        r
    }

    pub fn violation(&self, sol: &DesignSolution) -> f64 {
        self.residuals(sol).into_iter().fold(0.0, f64::max)
    }

    pub fn to_working(&self, sol: &DesignSolution) -> DesignSolution {
        let mut out = sol.clone();
        out.receive_strength = sol.receive_strength.map(|c| c / self.scale);
        out.quantization = sol.quantization.iter().map(|q| q / (self.scale * self.scale)).collect();
        out
    }

    pub fn to_physical(&self, sol: &DesignSolution) -> DesignSolution {
        let mut out = sol.clone();
        out.receive_strength = sol.receive_strength.map(|c| c * self.scale);
        out.quantization = sol.quantization.iter().map(|q| q * self.scale * self.scale).collect();
        out
    }
}

/// One half-step of an alternation schedule.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Step {
    Sub1(Sub1Mode),
    Sub2,
}

/// Runs the alternation `schedule` from `start` (working frame) until a full
/// cycle improves the objective by less than `eps_stop`.
pub(crate) fn alternate(ctx: &Context, start: DesignSolution, schedule: &[Step]) -> core::result::Result<(DesignSolution, ScaState), ScaFailure> {
    let mut sol = start;
    ctx.tighten(&mut sol);
    let mut objective = ctx.objective(&sol);
    let mut state = ScaState {
        solution: DesignSolution { ..sol.clone() },
        iteration: 0,
        trace: vec![TraceRow { iter: 0, half: 0, objective, subproblem: "init", newton_steps: 0, violation: ctx.violation(&sol) }],
        reports: Vec::new(),
        converged: false,
    };
    let cycle = schedule.len();
    'outer: for it in 1..=ctx.opts.max_iters {
        state.iteration = it;
        for (h, step) in schedule.iter().enumerate() {
            let (sub, name) = match step {
                Step::Sub1(mode) => (subproblems::build_sub1(ctx, &sol, mode), "sub1"),
                Step::Sub2 => (subproblems::build_sub2(ctx, &sol), "sub2"),
            };
            let sub = match sub {
                Ok(s) => s,
                Err(error) => {
                    state.solution = ctx.to_physical(&sol);
                    return Err(ScaFailure { error, state });
                }
            };
            let report = match solver::solve(&sub.program, Some(&sub.warm_start), &ctx.opts.solver) {
                Ok(r) => r,
                Err(error) => {
                    state.solution = ctx.to_physical(&sol);
                    return Err(ScaFailure { error, state });
                }
            };
            if report.status == SolveStatus::Infeasible || !(report.max_violation <= 1e-7) {
                state.solution = ctx.to_physical(&sol);
                return Err(ScaFailure { error: Error::Solver { status: report.status, context: name }, state });
            }
            let mut cand = sub.apply(&report.x, &sol);
            ctx.tighten(&mut cand);
            let cand_obj = ctx.objective(&cand);
            let accepted = cand_obj >= objective && ctx.violation(&cand) <= 1e-7;
            if accepted {
                sol = cand;
                objective = cand_obj;
            }
            state.reports.push(SubproblemReport {
                subproblem: name,
                status: report.status,
                newton_steps: report.newton_steps,
                phase1_newton_steps: report.phase1_newton_steps,
                barrier_iterations: report.barrier_iterations,
                max_violation: report.max_violation,
                kkt_residual: report.kkt_residual,
                anchor_violation: sub.program.max_violation(&sub.warm_start),
                accepted,
            });
            state.trace.push(TraceRow { iter: it, half: h + 1, objective, subproblem: name, newton_steps: report.newton_steps, violation: ctx.violation(&sol) });
            let n = state.trace.len();
            if n > cycle && state.trace[n - 1].objective - state.trace[n - 1 - cycle].objective < ctx.opts.eps_stop {
                state.converged = true;
                break 'outer;
            }
        }
    }
    let physical = ctx.to_physical(&sol);
    state.solution = physical.clone();
    Ok((physical, state))
}

/// Subproblem 1 anchored at `state`, in the units of the arguments.
pub fn build_subproblem1(
    state: &DesignSolution,
    cfg: &SystemConfig,
    stats: &FeatureStatistics,
    channels: &ChannelSet,
    opts: &ScaOptions,
) -> Result<Subproblem> {
    let ctx = Context::new(cfg, channels, stats, opts, false)?;
    subproblems::build_sub1(&ctx, state, &Sub1Mode::Full)
}

/// Subproblem 2 anchored at `state`, in the units of the arguments.
pub fn build_subproblem2(
    state: &DesignSolution,
    cfg: &SystemConfig,
    stats: &FeatureStatistics,
    channels: &ChannelSet,
    opts: &ScaOptions,
) -> Result<Subproblem> {
    let ctx = Context::new(cfg, channels, stats, opts, false)?;
    subproblems::build_sub2(&ctx, state)
}

/// Residuals of the original constraints (negative means strictly satisfied).
pub fn constraint_residuals(
    sol: &DesignSolution,
    cfg: &SystemConfig,
    stats: &FeatureStatistics,
    channels: &ChannelSet,
) -> Result<Vec<f64>> {
    let ctx = Context::new(cfg, channels, stats, &ScaOptions::default(), true)?;
    Ok(ctx.residuals(&ctx.to_working(sol)))
}

/// The proposed alternating optimization from the standard initial point.
pub fn run_algorithm1(
    cfg: &SystemConfig,
    channels: &ChannelSet,
    stats: &FeatureStatistics,
    opts: &ScaOptions,
) -> core::result::Result<(DesignSolution, ScaState), ScaFailure> {
    let ctx = Context::new(cfg, channels, stats, opts, true).map_err(failure)?;
    let start = initial_point_in(&ctx).map_err(failure)?;
    alternate(&ctx, start, &[Step::Sub1(Sub1Mode::Full), Step::Sub2])
}

/// The proposed alternating optimization from a caller-supplied feasible point.
pub fn run_algorithm1_from(
    cfg: &SystemConfig,
    channels: &ChannelSet,
    stats: &FeatureStatistics,
    start: &DesignSolution,
    opts: &ScaOptions,
) -> core::result::Result<(DesignSolution, ScaState), ScaFailure> {
    let ctx = Context::new(cfg, channels, stats, opts, true).map_err(failure)?;
    start.check_shapes(cfg).map_err(failure)?;
    alternate(&ctx, ctx.to_working(start), &[Step::Sub1(Sub1Mode::Full), Step::Sub2])
}

pub(crate) fn failure(error: Error) -> ScaFailure {
    let empty = DesignSolution {
        receive_strength: crate::linalg::Matrix::zeros(0, 0),
        beamformers: Vec::new(),
        quantization: Vec::new(),
        aux_gain: Vec::new(),
        aux_energy: crate::linalg::Matrix::zeros(0, 0),
    };
    ScaFailure { error, state: ScaState { solution: empty, iteration: 0, trace: Vec::new(), reports: Vec::new(), converged: false } }
}

/// Received discriminant gain of a physical-unit design (objective of the optimizer).
pub fn objective_value(sol: &DesignSolution, cfg: &SystemConfig, stats: &FeatureStatistics) -> f64 {
    metrics::received_discriminant_gain(sol, stats, cfg)
}

