use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use super::logdet::logdet_gradient_hessian;
use super::program::{quad_value, Affine, Constraint, ConvexProgram};
use super::{SolveReport, SolveStatus, SolverOptions};
use crate::error::Result;
use crate::linalg::{cholesky_in_place, cholesky_solve};

/// Result of the feasibility phase.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibilityOutcome {
    /// A strictly feasible point and the Newton steps spent finding it.
    Feasible { x: Vec<f64>, newton_steps: usize },
    /// The minimal relaxation slack is non-negative: no strictly feasible point exists.
    Infeasible { slack_lower_bound: f64, newton_steps: usize },
}

/// Barrier of a program, optionally in phase-I form where variable `n`
/// is the relaxation slack `s` added to every constraint.
struct Barrier<'a> {
    prog: &'a ConvexProgram,
    n: usize,
    phase1: bool,
    /// Phase I only: `|x_i - centre_i| < radius` keeps the relaxed problem bounded.
    trust: Option<(Vec<f64>, f64)>,
}

struct Derivs {
    phi: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

impl<'a> Barrier<'a> {
    fn dim(&self) -> usize {
        self.n + usize::from(self.phase1)
    }

    fn nu(&self) -> f64 {
        let trust = if self.trust.is_some() { 2 * self.n } else { 0 };
        (self.prog.barrier_parameter() + usize::from(self.phase1) + trust) as f64
    }

    fn slack(&self, x: &[f64]) -> f64 {
        if self.phase1 {
            x[self.n]
        } else {
            0.0
        }
    }

    /// `a(x) + s` in phase I.
    fn relaxed(&self, a: &Affine) -> Affine {
        if self.phase1 {
            a.clone().with(self.n, 1.0)
        } else {
            a.clone()
        }
    }

    /// Barrier value, or `None` outside the domain.
    fn value(&self, x: &[f64]) -> Option<f64> {
        let s = self.slack(x);
        let mut phi = 0.0;
        let mut log_pos = |v: f64| -> Option<()> {
            if v > 0.0 && v.is_finite() {
                phi -= v.ln();
                Some(())
            } else {
                None
            }
        };
        for i in 0..self.n {
            if self.prog.lower[i].is_finite() {
                log_pos(x[i] - self.prog.lower[i] + s)?;
            }
            if self.prog.upper[i].is_finite() {
                log_pos(self.prog.upper[i] - x[i] + s)?;
            }
        }
        if self.phase1 {
            log_pos(s + 1.0)?;
        }
        if let Some((centre, r)) = &self.trust {
            for i in 0..self.n {
                log_pos(r - (x[i] - centre[i]))?;
                log_pos(r + (x[i] - centre[i]))?;
            }
        }
        for c in &self.prog.constraints {
            match c {
                Constraint::AffineLe(a) => log_pos(s - a.eval(x))?,
                Constraint::ConvexQuadLe { vars, p, a } => log_pos(s - quad_value(vars, p, x) - a.eval(x))?,
                Constraint::QuadOverLinLe { u, v, l } => {
                    let (u, v, l) = (u.eval(x), v.eval(x) + s, l.eval(x) + s);
                    log_pos(v)?;
                    log_pos(l)?;
                    log_pos(v * l - u * u)?;
                }
                Constraint::LogDetRatioLe { a, q, bound } => {
                    let qv: Vec<f64> = q.iter().map(|&i| x[i]).collect();
                    if qv.iter().any(|&v| !(v > 0.0)) {
                        return None;
                    }
                    let r = super::logdet::logdet_ratio(a, &qv).ok()?;
                    log_pos(bound + s - r)?;
                }
            }
        }
        Some(phi)
    }

    fn derivs(&self, x: &[f64]) -> Option<Derivs> {
        let dim = self.dim();
        let mut d = Derivs { phi: 0.0, grad: vec![0.0; dim], hess: vec![0.0; dim * dim] };
        let s = self.slack(x);
        let sidx = self.n;
        // -log(g) for affine g with sparse gradient `a`.
        let add_affine_log = |d: &mut Derivs, g: f64, a: &[(usize, f64)]| -> Option<()> {
            if !(g > 0.0 && g.is_finite()) {
                return None;
            }
            d.phi -= g.ln();
            let inv = 1.0 / g;
            for &(i, ai) in a {
                d.grad[i] -= ai * inv;
                for &(j, aj) in a {
                    d.hess[i * dim + j] += ai * aj * inv * inv;
                }
            }
            Some(())
        };
        for i in 0..self.n {
            let mut terms = vec![(i, 1.0)];
            if self.phase1 {
                terms.push((sidx, 1.0));
            }
            if self.prog.lower[i].is_finite() {
                add_affine_log(&mut d, x[i] - self.prog.lower[i] + s, &terms)?;
            }
            if self.prog.upper[i].is_finite() {
                terms[0].1 = -1.0;
                add_affine_log(&mut d, self.prog.upper[i] - x[i] + s, &terms)?;
            }
        }
        if self.phase1 {
            add_affine_log(&mut d, s + 1.0, &[(sidx, 1.0)])?;
        }
        if let Some((centre, r)) = &self.trust {
            for i in 0..self.n {
                add_affine_log(&mut d, r - (x[i] - centre[i]), &[(i, -1.0)])?;
                add_affine_log(&mut d, r + (x[i] - centre[i]), &[(i, 1.0)])?;
            }
        }
        for c in &self.prog.constraints {
            match c {
                Constraint::AffineLe(a) => {
                    // -a(x) + s > 0
                    let g = self.relaxed(&a.scaled(-1.0));
                    add_affine_log(&mut d, g.eval(x), &g.terms)?;
                }
                Constraint::ConvexQuadLe { vars, p, a } => {
                    // h(x) = s - x^T P x - a(x) > 0
                    let h = s - quad_value(vars, p, x) - a.eval(x);
                    if !(h > 0.0 && h.is_finite()) {
                        return None;
                    }
                    d.phi -= h.ln();
                    let mut gh: Vec<(usize, f64)> = a.terms.iter().map(|&(i, v)| (i, -v)).collect();
                    for (r, &i) in vars.iter().enumerate() {
                        let px: f64 = vars.iter().enumerate().map(|(c, &j)| p.get(r, c) * x[j]).sum();
                        gh.push((i, -2.0 * px));
                    }
                    if self.phase1 {
                        gh.push((sidx, 1.0));
                    }
                    let inv = 1.0 / h;
                    for &(i, gi) in &gh {
                        d.grad[i] -= gi * inv;
                        for &(j, gj) in &gh {
                            d.hess[i * dim + j] += gi * gj * inv * inv;
                        }
                    }
                    // -(grad^2 h)/h = 2P/h
                    for (r, &i) in vars.iter().enumerate() {
                        for (c, &j) in vars.iter().enumerate() {
                            d.hess[i * dim + j] += 2.0 * p.get(r, c) * inv;
                        }
                    }
                }
                Constraint::QuadOverLinLe { u, v, l } => {
                    let v = self.relaxed(v);
                    let l = self.relaxed(l);
                    let (uu, vv, ll) = (u.eval(x), v.eval(x), l.eval(x));
                    add_affine_log(&mut d, vv, &v.terms)?;
                    add_affine_log(&mut d, ll, &l.terms)?;
                    let f = vv * ll - uu * uu;
                    if !(f > 0.0 && f.is_finite()) {
                        return None;
                    }
                    d.phi -= f.ln();
                    // grad f = l grad v + v grad l - 2u grad u
                    let mut gf: Vec<(usize, f64)> = Vec::new();
                    gf.extend(v.terms.iter().map(|&(i, a)| (i, ll * a)));
                    gf.extend(l.terms.iter().map(|&(i, a)| (i, vv * a)));
                    gf.extend(u.terms.iter().map(|&(i, a)| (i, -2.0 * uu * a)));
                    let inv = 1.0 / f;
                    for &(i, gi) in &gf {
                        d.grad[i] -= gi * inv;
                        for &(j, gj) in &gf {
                            d.hess[i * dim + j] += gi * gj * inv * inv;
                        }
                    }
                    // -(grad^2 f)/f with grad^2 f = gv gl^T + gl gv^T - 2 gu gu^T
                    for &(i, a) in &v.terms {
                        for &(j, b) in &l.terms {
                            d.hess[i * dim + j] -= a * b * inv;
                            d.hess[j * dim + i] -= a * b * inv;
                        }
                    }
                    for &(i, a) in &u.terms {
                        for &(j, b) in &u.terms {
                            d.hess[i * dim + j] += 2.0 * a * b * inv;
                        }
                    }
                }
                Constraint::LogDetRatioLe { a, q, bound } => {
                    let qv: Vec<f64> = q.iter().map(|&i| x[i]).collect();
                    if qv.iter().any(|&v| !(v > 0.0)) {
                        return None;
                    }
                    let e = logdet_gradient_hessian(a, &qv).ok()?;
                    let h = bound + s - e.value;
                    if !(h > 0.0 && h.is_finite()) {
                        return None;
                    }
                    d.phi -= h.ln();
                    let inv = 1.0 / h;
                    // grad h = -grad R (+1 on s)
                    let mut gh: Vec<(usize, f64)> = q.iter().zip(&e.gradient).map(|(&i, g)| (i, -g)).collect();
                    if self.phase1 {
                        gh.push((sidx, 1.0));
                    }
                    for &(i, gi) in &gh {
                        d.grad[i] -= gi * inv;
                        for &(j, gj) in &gh {
                            d.hess[i * dim + j] += gi * gj * inv * inv;
                        }
                    }
                    for (r, &i) in q.iter().enumerate() {
                        for (c, &j) in q.iter().enumerate() {
                            d.hess[i * dim + j] += e.hessian.get(r, c) * inv;
                        }
                    }
                }
            }
        }
        Some(d)
    }
}

/// Solves `H dx = -g` with Jacobi equilibration and escalating regularization.
fn newton_direction(hess: &[f64], grad: &[f64], reg0: f64) -> Option<Vec<f64>> {
    let n = grad.len();
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let h = hess[i * n + i];
            if h > 0.0 && h.is_finite() {
                1.0 / h.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let mut reg = 0.0;
    for _ in 0..12 {
        let mut m: Vec<f64> = (0..n * n).map(|k| hess[k] * scale[k / n] * scale[k % n]).collect();
        for i in 0..n {
            m[i * n + i] += reg;
        }
        if cholesky_in_place(&mut m, n) {
            let mut rhs: Vec<f64> = (0..n).map(|i| -grad[i] * scale[i]).collect();
            cholesky_solve(&m, n, &mut rhs);
            let dx: Vec<f64> = rhs.iter().zip(&scale).map(|(y, s)| y * s).collect();
            if dx.iter().all(|v| v.is_finite()) {
                return Some(dx);
            }
        }
        reg = if reg == 0.0 { reg0 } else { reg * 10.0 };
    }
    None
}

enum Centering {
    Centered { lambda2: f64 },
    Stalled { lambda2: f64 },
}

/// Minimizes `t c.x + phi(x)` from a strictly feasible `x`. `stop` is checked after
/// every accepted step and ends centering early when it returns `true`.
fn center(
    bar: &Barrier<'_>,
    cmin: &[f64],
    t: f64,
    x: &mut [f64],
    opts: &SolverOptions,
    steps: &mut usize,
    stop: &dyn Fn(&[f64]) -> bool,
) -> Centering {
    let dim = x.len();
    let mut last_lambda2 = f64::INFINITY;
    for _ in 0..opts.max_newton_per_center {
        let Some(d) = bar.derivs(x) else {
            return Centering::Stalled { lambda2: last_lambda2 };
        };
        let grad: Vec<f64> = (0..dim).map(|i| t * cmin[i] + d.grad[i]).collect();
        let Some(dx) = newton_direction(&d.hess, &grad, opts.regularization) else {
            return Centering::Stalled { lambda2: last_lambda2 };
        };
        let slope: f64 = grad.iter().zip(&dx).map(|(g, v)| g * v).sum();
        let lambda2 = -slope;
        last_lambda2 = lambda2;
        if !(lambda2 >= 0.0) {
            return Centering::Stalled { lambda2 };
        }
        // Below this the decrement is dominated by cancellation in t*f + phi.
        let fx: f64 = cmin.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
        let floor = 16.0 * f64::EPSILON * (t * fx.abs() + d.phi.abs() + 1.0);
        if lambda2 / 2.0 <= opts.newton_tol.max(floor) {
            return Centering::Centered { lambda2 };
        }
        let lin: f64 = cmin.iter().zip(&dx).map(|(c, v)| c * v).sum();
        let mut step = 1.0;
        let mut trial = vec![0.0; dim];
        let accepted = loop {
            if step < 1e-14 {
                break false;
            }
            for i in 0..dim {
                trial[i] = x[i] + step * dx[i];
            }
            if let Some(phi) = bar.value(&trial) {
                let df = t * step * lin + (phi - d.phi);
                if df <= opts.ls_alpha * step * slope {
                    break true;
                }
            }
            step *= opts.ls_beta;
        };
        if !accepted {
            return Centering::Stalled { lambda2 };
        }
        x.copy_from_slice(&trial);
        *steps += 1;
        if stop(x) {
            return Centering::Centered { lambda2 };
        }
    }
    Centering::Stalled { lambda2: last_lambda2 }
}

/// Default start: box midpoints, or one unit inside a single finite bound.
fn default_start(prog: &ConvexProgram) -> Vec<f64> {
    (0..prog.num_vars())
        .map(|i| {
            let (lo, hi) = (prog.lower[i], prog.upper[i]);
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (true, false) => lo + 1.0,
                (false, true) => hi - 1.0,
                (false, false) => 0.0,
            }
        })
        .collect()
}

/// Smallest slack that makes every relaxed constraint hold at `x`.
fn required_slack(prog: &ConvexProgram, x: &[f64]) -> f64 {
    let mut need = f64::NEG_INFINITY;
    for i in 0..x.len() {
        need = need.max(prog.lower[i] - x[i]).max(x[i] - prog.upper[i]);
    }
    for c in &prog.constraints {
        let r = match c {
            Constraint::QuadOverLinLe { u, v, l } => {
                let (u, v, l) = (u.eval(x), v.eval(x), l.eval(x));
                (-v).max(-l) + u.abs()
            }
            other => other.residual(x),
        };
        need = need.max(r);
    }
    need
}

fn strictly_feasible(prog: &ConvexProgram, x: &[f64]) -> bool {
    Barrier { prog, n: prog.num_vars(), phase1: false, trust: None }.value(x).is_some()
}

/// Phase I: minimizes the common relaxation slack `s`, stopping at the first
/// centered iterate with `s < 0`.
pub fn feasibility_phase(prog: &ConvexProgram, start: Option<&[f64]>, opts: &SolverOptions) -> Result<FeasibilityOutcome> {
    prog.validate()?;
    Ok(phase_one(prog, start, opts))
}

fn phase_one(prog: &ConvexProgram, start: Option<&[f64]>, opts: &SolverOptions) -> FeasibilityOutcome {
    let n = prog.num_vars();
    let mut x0 = start.map(<[f64]>::to_vec).unwrap_or_else(|| default_start(prog));
    for c in &prog.constraints {
        if let Constraint::LogDetRatioLe { q, .. } = c {
            for &i in q {
                if !(x0[i] > 0.0) {
                    x0[i] = if prog.upper[i].is_finite() { 0.5 * (prog.lower[i].max(0.0) + prog.upper[i]) } else { 1.0 };
                }
            }
        }
    }
    if strictly_feasible(prog, &x0) {
        return FeasibilityOutcome::Feasible { x: x0, newton_steps: 0 };
    }
    let radius = 1e6 * x0.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let bar = Barrier { prog, n, phase1: true, trust: Some((x0.clone(), radius)) };
    let mut x = x0;
    x.push(required_slack(prog, &x).max(0.0) + 1.0);
    let mut cmin = vec![0.0; n + 1];
    cmin[n] = 1.0;
    let nu = bar.nu();
    let mut t = opts.t0;
    let mut steps = 0;
    let negative = |y: &[f64]| y[n] < 0.0 && strictly_feasible(prog, &y[..n]);
    for _ in 0..opts.max_outer {
        let outcome = center(&bar, &cmin, t, &mut x, opts, &mut steps, &negative);
        if negative(&x) {
            x.truncate(n);
            return FeasibilityOutcome::Feasible { x, newton_steps: steps };
        }
        let lower_bound = x[n] - nu / t;
        if lower_bound >= 0.0 || nu / t <= opts.gap_tol || matches!(outcome, Centering::Stalled { .. }) {
            return FeasibilityOutcome::Infeasible { slack_lower_bound: lower_bound.max(x[n].min(0.0)), newton_steps: steps };
        }
        t *= opts.mu;
    }
    FeasibilityOutcome::Infeasible { slack_lower_bound: x[n] - nu / t, newton_steps: steps }
}

/// Maximizes the program's objective. A strictly feasible `warm_start` is used
/// as-is; a warm start on the boundary is pulled toward the phase-I point.
pub fn solve(prog: &ConvexProgram, warm_start: Option<&[f64]>, opts: &SolverOptions) -> Result<SolveReport> {
    prog.validate()?;
    let n = prog.num_vars();
    let mut phase1_steps = 0;
    let x0 = match warm_start.filter(|w| w.len() == n) {
        Some(w) if strictly_feasible(prog, w) => w.to_vec(),
        other => match phase_one(prog, other, opts) {
            FeasibilityOutcome::Feasible { x, newton_steps } => {
                phase1_steps = newton_steps;
                match other {
                    Some(w) if prog.max_violation(w) <= 1e-9 => shrink_toward(prog, w, &x, opts.shrink),
                    _ => x,
                }
            }
            FeasibilityOutcome::Infeasible { newton_steps, .. } => {
                let x = other.map(<[f64]>::to_vec).unwrap_or_else(|| default_start(prog));
                return Ok(SolveReport {
                    objective: prog.objective_value(&x),
                    max_violation: prog.max_violation(&x),
                    x,
                    barrier_iterations: 0,
                    newton_steps,
                    phase1_newton_steps: newton_steps,
                    kkt_residual: f64::INFINITY,
                    objective_trace: Vec::new(),
                    status: SolveStatus::Infeasible,
                });
            }
        },
    };
    let bar = Barrier { prog, n, phase1: false, trust: None };
    let cmin: Vec<f64> = prog.objective.iter().map(|c| -c).collect();
    let nu = bar.nu();
    let mut x = x0;
    let mut t = opts.t0;
    let mut steps = 0;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut lambda2;
    let mut stalled;
    loop {
        let out = center(&bar, &cmin, t, &mut x, opts, &mut steps, &|_| false);
        iterations += 1;
        (lambda2, stalled) = match out {
            Centering::Centered { lambda2 } => (lambda2, false),
            Centering::Stalled { lambda2 } => (lambda2, true),
        };
        trace.push(prog.objective_value(&x));
        if stalled || nu / t <= opts.gap_tol || iterations >= opts.max_outer {
            break;
        }
        t *= opts.mu;
    }
    let objective = prog.objective_value(&x);
    let lambda = if lambda2.is_finite() { lambda2.max(0.0).sqrt() } else { f64::INFINITY };
    let kkt = (nu + nu.sqrt() * lambda) / t / (1.0 + objective.abs());
    let max_violation = prog.max_violation(&x);
    let status = if max_violation <= 1e-7 && kkt <= opts.kkt_tol {
        SolveStatus::Optimal
    } else {
        SolveStatus::NumericalFailure
    };
    Ok(SolveReport {
        x,
        objective,
        barrier_iterations: iterations,
        newton_steps: steps + phase1_steps,
        phase1_newton_steps: phase1_steps,
        max_violation,
        kkt_residual: kkt,
        objective_trace: trace,
        status,
    })
}

/// `c + f^j (w - c)` for the first `j >= 1` that is strictly feasible.
fn shrink_toward(prog: &ConvexProgram, w: &[f64], c: &[f64], factor: f64) -> Vec<f64> {
    let mut f = factor;
    for _ in 0..200 {
        let y: Vec<f64> = w.iter().zip(c).map(|(wi, ci)| ci + f * (wi - ci)).collect();
        if strictly_feasible(prog, &y) {
            return y;
        }
        f *= factor;
    }
    c.to_vec()
}
