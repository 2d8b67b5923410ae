//! The fronthaul log-det-ratio `log2 det(A + diag q) - sum_i log2 q_i` with its
//! derivatives in `q`.
//!
//! Evaluated as `log2 det(I + D A D)` with `D = diag(q)^{-1/2}` so that the
//! value stays accurate when `q` is large relative to `A`.

use alloc::vec::Vec;
use core::f64::consts::LN_2;
use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_cholesky, inverse_from_cholesky, ln_det_from_cholesky, CMatrix, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct LogDetEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Matrix,
}

fn check(q: &[f64]) -> Result<()> {
    match q.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        Some(index) => Err(Error::NonPositiveQuantization { index, value: q[index] }),
        None => Ok(()),
    }
}

/// `(I + D A D, D)`.
fn whitened(a: &CMatrix, q: &[f64]) -> (CMatrix, Vec<f64>) {
    let n = a.dim();
    let dq: Vec<f64> = q.iter().map(|v| 1.0 / v.sqrt()).collect();
    let mut b = CMatrix::zeros(n);
    for r in 0..n {
        for c in 0..n {
            b.set(r, c, a.get(r, c) * (dq[r] * dq[c]));
        }
    }
    b.add_diagonal(1.0);
    b.hermitize();
    (b, dq)
}

/// Rate only. Returns `None` if the factorization fails.
pub fn logdet_ratio(a: &CMatrix, q: &[f64]) -> Result<f64> {
    check(q)?;
    let (b, _) = whitened(a, q);
    hermitian_cholesky(&b)
        .map(|l| ln_det_from_cholesky(&l) / LN_2)
        .ok_or_else(|| Error::InvalidProgram("log-det matrix is not positive definite".into()))
}

/// Value, gradient and Hessian in `q`:
/// `g_i = (W_ii - 1/q_i) / ln 2`, `H_ij = (delta_ij / q_i^2 - |W_ij|^2) / ln 2`
/// with `W = (A + diag q)^{-1}`.
pub fn logdet_gradient_hessian(a: &CMatrix, q: &[f64]) -> Result<LogDetEval> {
    check(q)?;
    let n = q.len();
    let (b, dq) = whitened(a, q);
    let l = hermitian_cholesky(&b)
        .ok_or_else(|| Error::InvalidProgram("log-det matrix is not positive definite".into()))?;
    let value = ln_det_from_cholesky(&l) / LN_2;
    let binv = inverse_from_cholesky(&l);
    let w = |r: usize, c: usize| -> Complex64 { binv.get(r, c) * (dq[r] * dq[c]) };
    let mut gradient = Vec::with_capacity(n);
    // W_ii - 1/q_i = ([B^{-1}]_ii - 1) / q_i, kept in this form to avoid cancellation.
    for i in 0..n {
        gradient.push((binv.get(i, i).re - 1.0) / q[i] / LN_2);
    }
    let hessian = Matrix::from_fn(n, n, |r, c| {
        let delta = if r == c { 1.0 / (q[r] * q[r]) } else { 0.0 };
        (delta - w(r, c).norm_sqr()) / LN_2
    });
    Ok(LogDetEval { value, gradient, hessian })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_hand_values() {
        let mut a = CMatrix::zeros(1);
        a.add_diagonal(1.0);
        let e = logdet_gradient_hessian(&a, &[1.0]).unwrap();
        assert!((e.value - 1.0).abs() < 1e-15);
        assert!((e.gradient[0] + 0.5 / LN_2).abs() < 1e-15);
        // 1/q^2 - 1/(1+q)^2 = 3/4
        assert!((e.hessian.get(0, 0) - 0.75 / LN_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_positive_q() {
        let a = CMatrix::identity(2);
        assert_eq!(logdet_ratio(&a, &[1.0, 0.0]), Err(Error::NonPositiveQuantization { index: 1, value: 0.0 }));
    }

    #[test]
    fn coarse_quantization_limit() {
        let a = CMatrix::identity(2);
        assert!(logdet_ratio(&a, &[1e12, 1e12]).unwrap() < 1e-11);
    }
}
