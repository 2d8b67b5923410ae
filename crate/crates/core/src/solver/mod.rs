//! Log-barrier interior-point method for the convex subproblems of the
//! alternating optimizer.
//!
//! Programs are maximizations of a linear objective over affine, convex
//! quadratic, quadratic-over-linear and log-det-ratio constraints plus box
//! bounds. Each record contributes `-log` terms to the barrier; Newton steps on
//! `t * (-objective) + barrier` are damped by a backtracking line search and
//! `t` grows geometrically until `nu / t` falls below the gap tolerance.

mod barrier;
pub mod instances;
pub mod logdet;
mod program;

pub use barrier::{feasibility_phase, solve, FeasibilityOutcome};
pub use logdet::{logdet_gradient_hessian, logdet_ratio, LogDetEval};
pub use program::{Affine, Block, Constraint, ConvexProgram};

use alloc::vec::Vec;

/// Tolerances and schedule of the barrier method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Initial barrier weight `t`.
    pub t0: f64,
    /// Growth factor of `t` per outer iteration.
    pub mu: f64,
    /// Stop once `nu / t` is below this.
    pub gap_tol: f64,
    /// Centering stops once half the squared Newton decrement is below this.
    pub newton_tol: f64,
    /// Armijo fraction.
    pub ls_alpha: f64,
    /// Backtracking factor.
    pub ls_beta: f64,
    pub max_newton_per_center: usize,
    pub max_outer: usize,
    /// Diagonal regularization tried first when the Newton system is not positive definite.
    pub regularization: f64,
    /// Factor used to pull boundary warm starts into the interior.
    pub shrink: f64,
    /// Tolerance on the optimality certificate for an `Optimal` status.
    pub kkt_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            t0: 1.0,
            mu: 10.0,
            gap_tol: 1e-8,
            newton_tol: 1e-10,
            ls_alpha: 0.3,
            ls_beta: 0.8,
            max_newton_per_center: 200,
            max_outer: 60,
            regularization: 1e-12,
            shrink: 0.99,
            kkt_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub objective: f64,
    pub barrier_iterations: usize,
    /// Newton steps over both phases.
    pub newton_steps: usize,
    /// Newton steps spent in the feasibility phase.
    pub phase1_newton_steps: usize,
    pub max_violation: f64,
    /// Relative optimality certificate `(nu + sqrt(nu) lambda) / t / (1 + |f|)`.
    pub kkt_residual: f64,
    /// Objective after each completed centering.
    pub objective_trace: Vec<f64>,
    pub status: SolveStatus,
}
