//! Weighted Gaussian kernel sums in whitened coordinates.
//!
//! With `H = L Lᵀ`, the Gaussian kernel with covariance `H` at `x - c` equals
//! `(2π)^{-d/2} |H|^{-1/2} exp(-½ ‖L⁻¹x - L⁻¹c‖²)`, so centres are whitened once
//! and each query costs one triangular solve plus `d` flops per centre.

use std::f64::consts::PI;

use crate::kde::BandwidthMatrix;

/// Below this the direct sum loses precision and the log-sum-exp path is used.
const DIRECT_SUM_FLOOR: f64 = 1e-280;

pub(crate) fn log_two_pi() -> f64 {
    (2.0 * PI).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct KernelSum {
    dim: usize,
    chol: Vec<f64>,
    shift: Vec<f64>,
    centers: Vec<f64>,
    weights: Option<Vec<f64>>,
    log_weights: Option<Vec<f64>>,
    log_norm: f64,
}

impl KernelSum {
    /// `centers` is row-major `n × d`. `weights` of `None` means unit weights.
    /// The normaliser divides by the total weight.
    pub(crate) fn new(centers: &[f64], weights: Option<&[f64]>, bandwidth: &BandwidthMatrix) -> Self {
        let dim = bandwidth.dim();
        let n = centers.len() / dim;
        let chol = bandwidth.cholesky_rows();
        let mut shift = vec![0.0; dim];
        for row in centers.chunks_exact(dim) {
            for (s, &x) in shift.iter_mut().zip(row) {
                *s += x;
            }
        }
        for s in &mut shift {
            *s /= n as f64;
        }
        let total = weights.map_or(n as f64, |w| w.iter().sum());
        let mut ks = KernelSum {
            dim,
            chol,
            shift,
            centers: Vec::with_capacity(centers.len()),
            weights: weights.map(<[f64]>::to_vec),
            log_weights: weights.map(|w| w.iter().map(|x| x.ln()).collect()),
            log_norm: -0.5 * dim as f64 * log_two_pi() - 0.5 * bandwidth.log_det() - total.ln(),
        };
        let mut z = vec![0.0; dim];
        for row in centers.chunks_exact(dim) {
            ks.whiten(row, &mut z);
            ks.centers.extend_from_slice(&z);
        }
        ks
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn whiten(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for i in 0..d {
            let mut acc = x[i] - self.shift[i];
            for k in 0..i {
                acc -= self.chol[i * d + k] * out[k];
            }
            out[i] = acc / self.chol[i * d + i];
        }
    }

    /// Log of the normalised kernel sum at `x`.
    pub(crate) fn log_density(&self, x: &[f64]) -> f64 {
        let mut z = [0.0f64; 8];
        let mut heap;
        let z: &mut [f64] = if self.dim <= 8 {
            &mut z[..self.dim]
        } else {
            heap = vec![0.0; self.dim];
            &mut heap
        };
        self.whiten(x, z);
        self.log_density_whitened(z)
    }

    pub(crate) fn log_density_whitened(&self, z: &[f64]) -> f64 {
        let s = match (self.dim, self.weights.as_deref()) {
            (1, w) => direct_sum::<1>(&self.centers, w, z),
            (2, w) => direct_sum::<2>(&self.centers, w, z),
            (3, w) => direct_sum::<3>(&self.centers, w, z),
            (4, w) => direct_sum::<4>(&self.centers, w, z),
            (_, w) => direct_sum_dyn(self.dim, &self.centers, w, z),
        };
        if s >= DIRECT_SUM_FLOOR {
            s.ln() + self.log_norm
        } else {
            self.log_sum_exp(z) + self.log_norm
        }
    }

    fn log_sum_exp(&self, z: &[f64]) -> f64 {
        let d = self.dim;
        let exponent = |j: usize| {
            let c = &self.centers[j * d..(j + 1) * d];
            let r2: f64 = c.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
            let lw = self.log_weights.as_ref().map_or(0.0, |lw| lw[j]);
            lw - 0.5 * r2
        };
        let n = self.centers.len() / d;
        let max = (0..n).map(exponent).fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return max;
        }
        let s: f64 = (0..n).map(|j| (exponent(j) - max).exp()).sum();
        max + s.ln()
    }
}

#[inline]
fn direct_sum<const D: usize>(centers: &[f64], weights: Option<&[f64]>, z: &[f64]) -> f64 {
    let mut q = [0.0; D];
    q.copy_from_slice(&z[..D]);
    let rows = centers.chunks_exact(D);
    match weights {
        None => rows
            .map(|c| {
                let mut r2 = 0.0;
                for k in 0..D {
                    let t = c[k] - q[k];
                    r2 += t * t;
                }
                (-0.5 * r2).exp()
            })
            .sum(),
        Some(w) => rows
            .zip(w)
            .map(|(c, &w)| {
                let mut r2 = 0.0;
                for k in 0..D {
                    let t = c[k] - q[k];
                    r2 += t * t;
                }
                w * (-0.5 * r2).exp()
            })
            .sum(),
    }
}

fn direct_sum_dyn(d: usize, centers: &[f64], weights: Option<&[f64]>, z: &[f64]) -> f64 {
    centers
        .chunks_exact(d)
        .enumerate()
        .map(|(j, c)| {
            let r2: f64 = c.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
            weights.map_or(1.0, |w| w[j]) * (-0.5 * r2).exp()
        })
        .sum()
}
