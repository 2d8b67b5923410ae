//! Small programs with at most three variables, used to cross-check the solver
//! against exhaustive search.

use alloc::vec;
use alloc::vec::Vec;

use super::program::{Affine, Constraint, ConvexProgram};
use crate::linalg::{CMatrix, Matrix};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct ScalarInstance {
    pub name: &'static str,
    pub program: ConvexProgram,
    /// Axis-aligned box that contains the whole feasible set.
    pub search_box: Vec<(f64, f64)>,
}

fn scalar(v: f64) -> Matrix {
    Matrix::from_fn(1, 1, |_, _| v)
}

/// `max x` s.t. `x <= 1`.
pub fn affine_1d() -> ScalarInstance {
    let mut p = ConvexProgram::new();
    let x = p.add_block("x", 1);
    p.objective[x] = 1.0;
    p.set_bounds(x, -10.0, f64::INFINITY);
    p.push(Constraint::AffineLe(Affine::var(x, 1.0).with_constant(-1.0)));
    ScalarInstance { name: "affine_1d", program: p, search_box: vec![(-10.0, 2.0)] }
}

/// `max alpha` s.t. `(1.2 c^2 + 0.1) / 4 <= 2c - alpha` and `c^2 <= 2`: a
/// single-device gain constraint with its linearized right-hand side.
pub fn gain_quadratic() -> ScalarInstance {
    let mut p = ConvexProgram::new();
    let alpha = p.add_block("alpha", 1);
    let c = p.add_block("c", 1);
    p.objective[alpha] = 1.0;
    p.set_bounds(alpha, 0.0, f64::INFINITY);
    p.set_bounds(c, 0.0, f64::INFINITY);
    p.push(Constraint::ConvexQuadLe {
        vars: vec![c],
        p: scalar(0.3),
        a: Affine::var(alpha, 1.0).with(c, -2.0).with_constant(0.025),
    });
    p.push(Constraint::ConvexQuadLe { vars: vec![c], p: scalar(1.0), a: Affine::constant(-2.0) });
    ScalarInstance { name: "gain_quadratic", program: p, search_box: vec![(0.0, 4.0), (0.0, 1.5)] }
}

/// `max alpha` s.t. `q + alpha <= 3` and `log2((1 + q) / q) <= 1`.
pub fn logdet_scalar() -> ScalarInstance {
    let mut p = ConvexProgram::new();
    let alpha = p.add_block("alpha", 1);
    let q = p.add_block("q", 1);
    p.objective[alpha] = 1.0;
    p.set_bounds(alpha, 0.0, f64::INFINITY);
    p.set_bounds(q, 0.0, f64::INFINITY);
    p.push(Constraint::AffineLe(Affine::var(q, 1.0).with(alpha, 1.0).with_constant(-3.0)));
    let mut a = CMatrix::zeros(1);
    a.set(0, 0, Complex64::new(1.0, 0.0));
    p.push(Constraint::LogDetRatioLe { a, q: vec![q], bound: 1.0 });
    ScalarInstance { name: "logdet_scalar", program: p, search_box: vec![(0.0, 3.0), (0.0, 3.0)] }
}

/// `max x + y` over the unit disk.
pub fn disk() -> ScalarInstance {
    let mut p = ConvexProgram::new();
    let x = p.add_block("xy", 2);
    p.objective = vec![1.0, 1.0];
    let eye = Matrix::from_fn(2, 2, |i, j| if i == j { 1.0 } else { 0.0 });
    p.push(Constraint::ConvexQuadLe { vars: vec![x, x + 1], p: eye, a: Affine::constant(-1.0) });
    ScalarInstance { name: "disk", program: p, search_box: vec![(-1.0, 1.0), (-1.0, 1.0)] }
}

/// `max u` s.t. `u^2 <= v l`, `v <= 1` and `l <= 2`.
pub fn rotated_cone() -> ScalarInstance {
    let mut p = ConvexProgram::new();
    let u = p.add_block("u", 1);
    let v = p.add_block("v", 1);
    let l = p.add_block("l", 1);
    p.objective[u] = 1.0;
    p.set_bounds(v, f64::NEG_INFINITY, 1.0);
    p.set_bounds(l, f64::NEG_INFINITY, 2.0);
    p.push(Constraint::QuadOverLinLe { u: Affine::var(u, 1.0), v: Affine::var(v, 1.0), l: Affine::var(l, 1.0) });
    ScalarInstance { name: "rotated_cone", program: p, search_box: vec![(-2.0, 2.0), (0.0, 1.0), (0.0, 2.0)] }
}

/// `max -v` s.t. `1 <= v l` and `l <= 2`.
pub fn hyperbola() -> ScalarInstance {
    let mut p = ConvexProgram::new();
    let v = p.add_block("v", 1);
    let l = p.add_block("l", 1);
    p.objective[v] = -1.0;
    p.set_bounds(v, f64::NEG_INFINITY, 4.0);
    p.set_bounds(l, f64::NEG_INFINITY, 2.0);
    p.push(Constraint::QuadOverLinLe { u: Affine::constant(1.0), v: Affine::var(v, 1.0), l: Affine::var(l, 1.0) });
    ScalarInstance { name: "hyperbola", program: p, search_box: vec![(0.0, 4.0), (0.0, 2.0)] }
}

pub fn scalar_instances() -> Vec<ScalarInstance> {
    vec![affine_1d(), gain_quadratic(), logdet_scalar(), disk(), rotated_cone(), hyperbola()]
}
