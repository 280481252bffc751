//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use bspbn::binning::Grid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting and
/// returns `(x, ln|det A|)`.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> (Vec<f64>, f64) {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &bi)| {
        let mut r = r.clone();
        r.push(bi);
        r
    }).collect();
    let mut logdet = 0.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        logdet += m[c][c].abs().ln();
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..=n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    (x, logdet)
}

/// Log of the Gaussian density with covariance `h` at `v`.
pub fn gauss_log(v: &[f64], h: &[Vec<f64>]) -> f64 {
    let (w, logdet) = solve(h, v);
    let q: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
    -0.5 * v.len() as f64 * (2.0 * std::f64::consts::PI).ln() - 0.5 * logdet - 0.5 * q
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `log (1/N) Σ_j K_H(x - x_j)` over row-major points.
pub fn kde_log(points: &[Vec<f64>], h: &[Vec<f64>], x: &[f64]) -> f64 {
    let terms: Vec<f64> = points
        .iter()
        .map(|p| {
            let v: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
            gauss_log(&v, h)
        })
        .collect();
    log_sum_exp(&terms) - (points.len() as f64).ln()
}

pub fn sub_bandwidth(h: &[Vec<f64>], coords: &[usize]) -> Vec<Vec<f64>> {
    coords.iter().map(|&i| coords.iter().map(|&j| h[i][j]).collect()).collect()
}

pub fn ckde_log(points: &[Vec<f64>], h: &[Vec<f64>], row: &[f64]) -> f64 {
    let d = row.len();
    if d == 1 {
        return kde_log(points, h, row);
    }
    let coords: Vec<usize> = (1..d).collect();
    let parents: Vec<Vec<f64>> = points.iter().map(|p| p[1..].to_vec()).collect();
    kde_log(points, h, row) - kde_log(&parents, &sub_bandwidth(h, &coords), &row[1..])
}

/// All multi-indices of a grid with the given sizes, row-major.
pub fn cells(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &m in dims {
        out = out
            .into_iter()
            .flat_map(|p| (0..m).map(move |i| {
                let mut q = p.clone();
                q.push(i);
                q
            }))
            .collect();
    }
    out
}

/// Binned KDE summed over every grid cell, zero weights included.
pub fn dense_bkde_log(dense: &[f64], grids: &[Grid], h: &[Vec<f64>], x: &[f64]) -> f64 {
    let dims: Vec<usize> = grids.iter().map(|g| g.m).collect();
    let total: f64 = dense.iter().sum();
    let mut terms = Vec::new();
    for (c, w) in cells(&dims).iter().zip(dense) {
        let v: Vec<f64> = c.iter().zip(grids).zip(x).map(|((&i, g), xi)| xi - g.point(i)).collect();
        terms.push(w.ln() + gauss_log(&v, h));
    }
    log_sum_exp(&terms) - total.ln()
}

/// `Σ_l c^{t-l} k^l` with `k^l = (1/N) K_H(δ∘l)` over `|l_i| ≤ L_i`.
pub fn direct_convolution(dense: &[f64], grids: &[Grid], h: &[Vec<f64>], radii: &[usize]) -> Vec<f64> {
    let dims: Vec<usize> = grids.iter().map(|g| g.m).collect();
    let total: f64 = dense.iter().sum();
    let flat = |idx: &[usize]| idx.iter().zip(&dims).fold(0, |acc, (&i, &m)| acc * m + i);
    let spans: Vec<usize> = radii.iter().map(|&l| 2 * l + 1).collect();
    let offsets: Vec<Vec<isize>> = cells(&spans)
        .into_iter()
        .map(|o| o.iter().zip(radii).map(|(&a, &l)| a as isize - l as isize).collect())
        .collect();
    let kernel: Vec<f64> = offsets
        .iter()
        .map(|l| {
            let v: Vec<f64> = l.iter().zip(grids).map(|(&li, g)| li as f64 * g.delta()).collect();
            gauss_log(&v, h).exp() / total
        })
        .collect();
    cells(&dims)
        .iter()
        .map(|t| {
            let mut s = 0.0;
            for (l, k) in offsets.iter().zip(&kernel) {
                let src: Vec<isize> = t.iter().zip(l).map(|(&ti, &li)| ti as isize - li).collect();
                if src.iter().zip(&dims).all(|(&s, &m)| s >= 0 && (s as usize) < m) {
                    let idx: Vec<usize> = src.iter().map(|&s| s as usize).collect();
                    s += dense[flat(&idx)] * k;
                }
            }
            s
        })
        .collect()
}

/// Random SPD matrix with eigenvalues roughly in `[lo, hi]`.
pub fn random_spd(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let a: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..d).map(|_| rng.random_range(-0.4..0.4)).collect())
        .collect();
    let mut h = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            h[i][j] = (0..d).map(|k| a[i][k] * a[j][k]).sum::<f64>() * (hi - lo) / d as f64;
        }
        h[i][i] += lo;
    }
    h
}

pub fn normal_sample(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
