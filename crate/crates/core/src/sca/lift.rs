//! Real-valued lift of complex beamformers and channel outer products.
//!
//! With `m~ = [Re m; Im m]`, `g1 = [Re h; Im h]` and `g2 = [Im h; -Re h]`:
//! `Re(m^H h) = g1 . m~`, `Im(m^H h) = g2 . m~`, hence
//! `|m^H h|^2 = m~^T (g1 g1^T + g2 g2^T) m~`.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::linalg::Matrix;
use crate::model::ChannelSet;

#[derive(Debug, Clone, PartialEq)]
pub struct RealLift {
    /// Lifted beamformer per dimension, length `2MN`.
    pub m_tilde: Vec<Vec<f64>>,
    /// `[[Re hh^H, -Im hh^H], [Im hh^H, Re hh^H]]` per device.
    pub h_tilde: Vec<Matrix>,
    /// Lift of `diag(q)`: `q` repeated on the diagonal.
    pub q_tilde: Matrix,
}

pub fn lift_vector(m: &[Complex64]) -> Vec<f64> {
    m.iter().map(|z| z.re).chain(m.iter().map(|z| z.im)).collect()
}

pub fn unlift_vector(m: &[f64]) -> Vec<Complex64> {
    let n = m.len() / 2;
    (0..n).map(|i| Complex64::new(m[i], m[n + i])).collect()
}

/// `(g1, g2)` for a channel vector.
pub fn channel_generators(h: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let g1 = h.iter().map(|z| z.re).chain(h.iter().map(|z| z.im)).collect();
    let g2 = h.iter().map(|z| z.im).chain(h.iter().map(|z| -z.re)).collect();
    (g1, g2)
}

pub fn lift_channel(h: &[Complex64]) -> Matrix {
    let n = h.len();
    Matrix::from_fn(2 * n, 2 * n, |r, c| {
        let hh = h[r % n] * h[c % n].conj();
        match (r < n, c < n) {
            (true, true) | (false, false) => hh.re,
            (true, false) => -hh.im,
            (false, true) => hh.im,
        }
    })
}

pub fn complex_to_real_lift(channels: &ChannelSet, beamformers: &[Vec<Complex64>], q: &[f64]) -> RealLift {
    let n = q.len();
    RealLift {
        m_tilde: beamformers.iter().map(|m| lift_vector(m)).collect(),
        h_tilde: (0..channels.devices()).map(|k| lift_channel(channels.device(k))).collect(),
        q_tilde: Matrix::from_fn(2 * n, 2 * n, |r, c| if r == c { q[r % n] } else { 0.0 }),
    }
}
