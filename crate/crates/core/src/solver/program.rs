//! Canonical form of the convex programs handled by [`super::solve`].

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use super::logdet::logdet_ratio;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, CMatrix, Matrix};

/// Sparse affine function `sum_i a_i x_i + b`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Affine {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl Affine {
    pub fn constant(b: f64) -> Self {
        Self { terms: Vec::new(), constant: b }
    }

    /// `coef * x_i`.
    pub fn var(i: usize, coef: f64) -> Self {
        Self { terms: vec![(i, coef)], constant: 0.0 }
    }

    pub fn with(mut self, i: usize, coef: f64) -> Self {
        self.push(i, coef);
        self
    }

    pub fn with_constant(mut self, b: f64) -> Self {
        self.constant += b;
        self
    }

    pub fn push(&mut self, i: usize, coef: f64) {
        if coef == 0.0 {
            return;
        }
        match self.terms.iter_mut().find(|(j, _)| *j == i) {
            Some(t) => t.1 += coef,
            None => self.terms.push((i, coef)),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(i, a)| a * x[i]).sum::<f64>() + self.constant
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { terms: self.terms.iter().map(|&(i, a)| (i, a * s)).collect(), constant: self.constant * s }
    }

    fn max_index(&self) -> Option<usize> {
        self.terms.iter().map(|t| t.0).max()
    }
}

/// One constraint record.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// `a(x) <= 0`.
    AffineLe(Affine),
    /// `x_S^T P x_S + a(x) <= 0` with `P` positive semidefinite on the selected variables `S`.
    ConvexQuadLe { vars: Vec<usize>, p: Matrix, a: Affine },
    /// `u(x)^2 <= v(x) l(x)` with `v(x), l(x) >= 0`.
    QuadOverLinLe { u: Affine, v: Affine, l: Affine },
    /// `log2 det(A + diag x_q) - sum log2 x_q <= bound`.
    LogDetRatioLe { a: CMatrix, q: Vec<usize>, bound: f64 },
}

impl Constraint {
    /// Signed constraint value: positive means violated. Domain failures map to `+inf`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        match self {
            Constraint::AffineLe(a) => a.eval(x),
            Constraint::ConvexQuadLe { vars, p, a } => quad_value(vars, p, x) + a.eval(x),
            Constraint::QuadOverLinLe { u, v, l } => {
                let (u, v, l) = (u.eval(x), v.eval(x), l.eval(x));
                (u * u - v * l).max(-v).max(-l)
            }
            Constraint::LogDetRatioLe { a, q, bound } => {
                let qv: Vec<f64> = q.iter().map(|&i| x[i]).collect();
                logdet_ratio(a, &qv).map(|r| r - bound).unwrap_or(f64::INFINITY)
            }
        }
    }

    /// Number of logarithmic barrier terms this record contributes.
    pub(crate) fn barrier_weight(&self) -> usize {
        match self {
            Constraint::QuadOverLinLe { .. } => 3,
            _ => 1,
        }
    }
}

pub(crate) fn quad_value(vars: &[usize], p: &Matrix, x: &[f64]) -> f64 {
    let mut s = 0.0;
    for (r, &i) in vars.iter().enumerate() {
        let mut row = 0.0;
        for (c, &j) in vars.iter().enumerate() {
            row += p.get(r, c) * x[j];
        }
        s += x[i] * row;
    }
    s
}

/// A named contiguous range of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

/// `maximize objective . x` subject to the constraint records and box bounds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexProgram {
    pub blocks: Vec<Block>,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ConvexProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `len` unbounded variables with zero objective and returns the first index.
    pub fn add_block(&mut self, name: &str, len: usize) -> usize {
        let start = self.objective.len();
        self.blocks.push(Block { name: name.into(), start, len });
        self.objective.resize(start + len, 0.0);
        self.lower.resize(start + len, f64::NEG_INFINITY);
        self.upper.resize(start + len, f64::INFINITY);
        start
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_bounds(&mut self, i: usize, lower: f64, upper: f64) {
        self.lower[i] = lower;
        self.upper[i] = upper;
    }

    pub fn push(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation over records and bounds, `0` when feasible.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for c in &self.constraints {
            worst = worst.max(c.residual(x));
        }
        for i in 0..x.len() {
            worst = worst.max(self.lower[i] - x[i]).max(x[i] - self.upper[i]);
        }
        worst
    }

    /// Total barrier parameter: one per bound and per log term of each record.
    pub fn barrier_parameter(&self) -> usize {
        let bounds = self.lower.iter().filter(|v| v.is_finite()).count()
            + self.upper.iter().filter(|v| v.is_finite()).count();
        bounds + self.constraints.iter().map(Constraint::barrier_weight).sum::<usize>()
    }

    /// Checks selector ranges, bound ordering and PSD/Hermitian data.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let bad = |msg: String| Err(Error::InvalidProgram(msg));
        if self.lower.len() != n || self.upper.len() != n {
            return bad("bound vectors do not match the variable count".into());
        }
        for i in 0..n {
            if !(self.lower[i] < self.upper[i]) {
                return bad(format!("empty box for variable {i}"));
            }
        }
        let in_range = |a: &Affine| a.max_index().is_none_or(|m| m < n);
        for (j, c) in self.constraints.iter().enumerate() {
            let ok = match c {
                Constraint::AffineLe(a) => in_range(a),
                Constraint::ConvexQuadLe { vars, p, a } => {
                    if p.rows() != vars.len() || p.cols() != vars.len() {
                        return bad(format!("constraint {j}: P shape does not match the selector"));
                    }
                    if !vars.is_empty() {
                        let e = symmetric_eigen(p, 1e-13);
                        let scale = e.values[0].abs().max(1.0);
                        if *e.values.last().unwrap() < -1e-10 * scale {
                            return bad(format!("constraint {j}: P is not positive semidefinite"));
                        }
                    }
                    in_range(a) && vars.iter().all(|&i| i < n)
                }
                Constraint::QuadOverLinLe { u, v, l } => in_range(u) && in_range(v) && in_range(l),
                Constraint::LogDetRatioLe { a, q, .. } => {
                    if a.dim() != q.len() {
                        return bad(format!("constraint {j}: A shape does not match the selector"));
                    }
                    if a.hermitian_defect() > 1e-12 * (1.0 + a.get(0, 0).norm()) {
                        return bad(format!("constraint {j}: A is not Hermitian"));
                    }
                    q.iter().all(|&i| i < n)
                }
            };
            if !ok {
                return bad(format!("constraint {j}: selector outside the variable layout"));
            }
        }
        Ok(())
    }

    /// Line-oriented text dump: one record per line, coefficients in scientific notation.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let aff = |a: &Affine| -> String {
            let mut t = format!("{:e}", a.constant);
            for &(i, c) in &a.terms {
                let _ = write!(t, " {i}:{c:e}");
            }
            t
        };
        let _ = writeln!(s, "program vars={} constraints={}", self.num_vars(), self.constraints.len());
        for b in &self.blocks {
            let _ = writeln!(s, "block {} {} {}", b.name, b.start, b.len);
        }
        let _ = write!(s, "maximize");
        for (i, c) in self.objective.iter().enumerate().filter(|(_, c)| **c != 0.0) {
            let _ = write!(s, " {i}:{c:e}");
        }
        let _ = writeln!(s);
        for i in 0..self.num_vars() {
            if self.lower[i].is_finite() || self.upper[i].is_finite() {
                let _ = writeln!(s, "bound {i} {:e} {:e}", self.lower[i], self.upper[i]);
            }
        }
        for c in &self.constraints {
            match c {
                Constraint::AffineLe(a) => {
                    let _ = writeln!(s, "affine_le {}", aff(a));
                }
                Constraint::ConvexQuadLe { vars, p, a } => {
                    let _ = write!(s, "quad_le vars={vars:?} p=[");
                    for (k, v) in p.as_slice().iter().enumerate() {
                        let _ = write!(s, "{}{v:e}", if k == 0 { "" } else { " " });
                    }
                    let _ = writeln!(s, "] a={}", aff(a));
                }
                Constraint::QuadOverLinLe { u, v, l } => {
                    let _ = writeln!(s, "qol_le u={} | v={} | l={}", aff(u), aff(v), aff(l));
                }
                Constraint::LogDetRatioLe { a, q, bound } => {
                    let _ = write!(s, "logdet_le bound={bound:e} q={q:?} a=[");
                    for r in 0..a.dim() {
                        for c in 0..a.dim() {
                            let z = a.get(r, c);
                            let _ = write!(s, "{}{:e},{:e}", if r + c == 0 { "" } else { " " }, z.re, z.im);
                        }
                    }
                    let _ = writeln!(s, "]");
                }
            }
        }
        s
    }
}
