//! Small dense linear algebra: real and Hermitian Cholesky factorizations and a
//! cyclic Jacobi eigen-solver. Sizes in this crate stay in the tens to low
//! hundreds, so everything is row-major `Vec` storage without blocking.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds from row-major data; `None` if the length does not match.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == rows * cols).then_some(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.n + c] = v;
    }

    /// `self += scale * v v^H`.
    pub fn add_outer(&mut self, v: &[Complex64], scale: f64) {
        for r in 0..self.n {
            for c in 0..self.n {
                self.data[r * self.n + c] += v[r] * v[c].conj() * scale;
            }
        }
    }

    pub fn add_diagonal(&mut self, d: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += d;
        }
    }

    /// Replaces the matrix by `(A + A^H) / 2`.
    pub fn hermitize(&mut self) {
        let n = self.n;
        for r in 0..n {
            for c in r..n {
                let avg = (self.get(r, c) + self.get(c, r).conj()) * 0.5;
                self.set(r, c, avg);
                self.set(c, r, avg.conj());
            }
        }
    }

    /// Largest entrywise deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..self.n {
            for c in 0..self.n {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// `x^H A x` (real part; exact for Hermitian `A`).
    pub fn quadratic_form(&self, x: &[Complex64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..self.n {
            let mut row = Complex64::new(0.0, 0.0);
            for c in 0..self.n {
                row += self.get(r, c) * x[c];
            }
            acc += x[r].conj() * row;
        }
        acc.re
    }
}

/// In-place lower Cholesky factorization of a symmetric positive definite
/// row-major matrix. Returns `false` if a non-positive pivot is met.
pub fn cholesky_in_place(a: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
        for c in j + 1..n {
            a[j * n + c] = 0.0;
        }
    }
    true
}

/// Solves `L L^T x = b` in place given the factor from [`cholesky_in_place`].
pub fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
pub fn hermitian_cholesky(a: &CMatrix) -> Option<CMatrix> {
    let n = a.dim();
    let mut l = CMatrix::zeros(n);
    for j in 0..n {
        let mut d = a.get(j, j).re;
        for k in 0..j {
            d -= l.get(j, k).norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l.set(j, j, Complex64::new(d, 0.0));
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k).conj();
            }
            l.set(i, j, s / d);
        }
    }
    Some(l)
}

/// `ln det A` from its Cholesky factor.
pub fn ln_det_from_cholesky(l: &CMatrix) -> f64 {
    (0..l.dim()).map(|i| l.get(i, i).re.ln()).sum::<f64>() * 2.0
}

/// Inverse of `A = L L^H` from its Cholesky factor.
pub fn inverse_from_cholesky(l: &CMatrix) -> CMatrix {
    let n = l.dim();
    let mut inv = CMatrix::zeros(n);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for e in 0..n {
        // forward: L y = e_e
        for i in 0..n {
            let mut s = if i == e { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            for k in 0..i {
                s -= l.get(i, k) * col[k];
            }
            col[i] = s / l.get(i, i).re;
        }
        // backward: L^H x = y
        for i in (0..n).rev() {
            let mut s = col[i];
            for k in i + 1..n {
                s -= l.get(k, i).conj() * col[k];
            }
            col[i] = s / l.get(i, i).re;
        }
        for i in 0..n {
            inv.set(i, e, col[i]);
        }
    }
    inv
}

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues sorted in non-increasing order.
    pub values: Vec<f64>,
    /// Column `j` (row-major `n x n`) is the eigenvector of `values[j]`.
    pub vectors: Matrix,
}

/// Runs cyclic Jacobi sweeps until the off-diagonal Frobenius norm drops
/// below `tol` (absolute) or 100 sweeps elapse.
pub fn symmetric_eigen(a: &Matrix, tol: f64) -> SymmetricEigen {
    let n = a.rows();
    let mut m: Vec<f64> = a.as_slice().to_vec();
    for r in 0..n {
        for c in r + 1..n {
            let avg = 0.5 * (m[r * n + c] + m[c * n + r]);
            m[r * n + c] = avg;
            m[c * n + r] = avg;
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    s += m[r * n + c] * m[r * n + c];
                }
            }
        }
        s.sqrt()
    };
    for _sweep in 0..100 {
        if off(&m) <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[r * n + order[c]]);
    SymmetricEigen { values, vectors }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
