//! Exact Gaussian kernel density estimation and the conditional KDE CPD.
//!
//! The scaled kernel is the Gaussian density with covariance `H`:
//! `K_H(v) = (2π)^{-d/2} |H|^{-1/2} exp(-½ vᵀ H⁻¹ v)`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::kernel::{log_two_pi, KernelSum};

/// Symmetric positive-definite bandwidth matrix with its Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthMatrix {
    h: DMatrix<f64>,
    chol: DMatrix<f64>,
    log_det: f64,
}

impl BandwidthMatrix {
    pub fn new(h: DMatrix<f64>) -> Result<Self> {
        if !h.is_square() || h.nrows() == 0 {
            return Err(Error::fit(format!(
                "bandwidth must be a non-empty square matrix, got {}x{}",
                h.nrows(),
                h.ncols()
            )));
        }
        let d = h.nrows();
        for i in 0..d {
            for j in 0..i {
                let (a, b) = (h[(i, j)], h[(j, i)]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1e-300) {
                    return Err(Error::fit("bandwidth matrix is not symmetric"));
                }
            }
        }
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::fit("bandwidth matrix has non-finite entries"));
        }
        let chol = h
            .clone()
            .cholesky()
            .ok_or_else(|| Error::fit("bandwidth matrix is not positive definite"))?
            .l();
        let log_det = 2.0 * (0..d).map(|i| chol[(i, i)].ln()).sum::<f64>();
        Ok(BandwidthMatrix { h, chol, log_det })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::fit("bandwidth rows are not square"));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn scalar(h: f64) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, h))
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn cholesky(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub(crate) fn cholesky_rows(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d * d).map(|k| self.chol[(k / d, k % d)]).collect()
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.h.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Principal submatrix on the given coordinates.
    pub fn submatrix(&self, coords: &[usize]) -> Result<Self> {
        let k = coords.len();
        Self::new(DMatrix::from_fn(k, k, |i, j| self.h[(coords[i], coords[j])]))
    }

    pub fn largest_abs_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.h.clone())
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Log of the standard Gaussian kernel, `-(d/2) log 2π - ½ uᵀu`.
pub fn gaussian_log_kernel(u: &[f64]) -> f64 {
    -0.5 * u.len() as f64 * log_two_pi() - 0.5 * u.iter().map(|x| x * x).sum::<f64>()
}

/// Sample covariance with denominator `N - 1`.
pub fn sample_covariance(columns: &[&[f64]]) -> DMatrix<f64> {
    let d = columns.len();
    let n = columns[0].len();
    let means: Vec<f64> = columns.iter().map(|c| c.iter().sum::<f64>() / n as f64).collect();
    let mut cov = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = columns[i]
                .iter()
                .zip(columns[j])
                .map(|(a, b)| (a - means[i]) * (b - means[j]))
                .sum();
            cov[(i, j)] = s / (n - 1) as f64;
            cov[(j, i)] = cov[(i, j)];
        }
    }
    cov
}

/// Relative pivot below which a covariance is treated as singular.
const SINGULAR_PIVOT: f64 = 1e-12;

/// Normal reference rule: `H = (4/(d+2))^{2/(d+4)} Σ̂ N^{-2/(d+4)}`.
///
/// `names` label the columns in error messages.
pub fn normal_reference_bandwidth(columns: &[&[f64]], names: &[&str]) -> Result<BandwidthMatrix> {
    let d = columns.len();
    if d == 0 {
        return Err(Error::fit("bandwidth needs at least one variable"));
    }
    let n = columns[0].len();
    if n < 2 {
        return Err(Error::fit(format!("bandwidth needs at least 2 instances, got {n}")));
    }
    let cov = sample_covariance(columns);
    check_nonsingular(&cov, names)?;
    let df = d as f64;
    let factor = (4.0 / (df + 2.0)).powf(2.0 / (df + 4.0)) * (n as f64).powf(-2.0 / (df + 4.0));
    BandwidthMatrix::new(cov * factor)
}

fn label(names: &[&str], i: usize) -> String {
    names.get(i).map_or_else(|| format!("#{i}"), |s| s.to_string())
}

/// Rejects covariances with a (near) zero-variance or collinear variable.
pub(crate) fn check_nonsingular(cov: &DMatrix<f64>, names: &[&str]) -> Result<()> {
    let d = cov.nrows();
    let constant: Vec<String> = (0..d)
        .filter(|&i| !(cov[(i, i)] > 0.0))
        .map(|i| label(names, i))
        .collect();
    if !constant.is_empty() {
        return Err(Error::fit(format!("zero variance in {}", constant.join(", "))));
    }
    // Incremental Cholesky: the squared pivot of variable i over its variance
    // is 1 - R² of i regressed on the preceding variables.
    let mut l = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let mut s = cov[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if !(s > SINGULAR_PIVOT * cov[(i, i)]) {
                    let group: Vec<String> = (0..=i).map(|k| label(names, k)).collect();
                    return Err(Error::fit(format!(
                        "singular covariance: {} is collinear with {}",
                        label(names, i),
                        group[..i].join(", ")
                    )));
                }
                l[(i, i)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Ok(())
}

/// Multivariate Gaussian KDE over `N` training points.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeModel {
    n: usize,
    points: Vec<f64>,
    bandwidth: BandwidthMatrix,
    sum: KernelSum,
}

impl KdeModel {
    /// Training points given as one slice per dimension.
    pub fn new(columns: &[&[f64]], bandwidth: BandwidthMatrix) -> Result<Self> {
        let d = columns.len();
        if d != bandwidth.dim() {
            return Err(Error::fit(format!(
                "{d} columns for a {}-dimensional bandwidth",
                bandwidth.dim()
            )));
        }
        let n = columns[0].len();
        if n == 0 || columns.iter().any(|c| c.len() != n) {
            return Err(Error::fit("training columns are empty or ragged"));
        }
        let mut points = Vec::with_capacity(n * d);
        for r in 0..n {
            points.extend(columns.iter().map(|c| c[r]));
        }
        let sum = KernelSum::new(&points, None, &bandwidth);
        Ok(KdeModel {
            n,
            points,
            bandwidth,
            sum,
        })
    }

    /// Fits with the normal reference bandwidth.
    pub fn fit(columns: &[&[f64]], names: &[&str]) -> Result<Self> {
        let bw = normal_reference_bandwidth(columns, names)?;
        Self::new(columns, bw)
    }

    pub fn dim(&self) -> usize {
        self.sum.dim()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> &BandwidthMatrix {
        &self.bandwidth
    }

    /// Training points, row-major `N × d`.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn logpdf(&self, x: &[f64]) -> f64 {
        self.sum.log_density(x)
    }

    /// Log densities of the rows formed by `columns`.
    pub fn logpdf_columns(&self, columns: &[&[f64]]) -> Vec<f64> {
        let mut x = vec![0.0; columns.len()];
        (0..columns[0].len())
            .map(|r| {
                for (xi, c) in x.iter_mut().zip(columns) {
                    *xi = c[r];
                }
                self.logpdf(&x)
            })
            .collect()
    }
}

/// Conditional KDE of a child given its parents, as the ratio of a joint KDE
/// over `(child, parents)` to a parents-only KDE that uses the parent block of
/// the joint bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct CkdeCpd {
    joint: KdeModel,
    marginal: Option<KdeModel>,
}

impl CkdeCpd {
    pub fn new(child: &[f64], parents: &[&[f64]], joint_bandwidth: BandwidthMatrix) -> Result<Self> {
        let mut cols = Vec::with_capacity(parents.len() + 1);
        cols.push(child);
        cols.extend_from_slice(parents);
        let marginal = if parents.is_empty() {
            None
        } else {
            let coords: Vec<usize> = (1..=parents.len()).collect();
            Some(KdeModel::new(parents, joint_bandwidth.submatrix(&coords)?)?)
        };
        let joint = KdeModel::new(&cols, joint_bandwidth)?;
        Ok(CkdeCpd { joint, marginal })
    }

    /// Fits the joint bandwidth with the normal reference rule. `names` lists
    /// the child first, then the parents.
    pub fn fit(child: &[f64], parents: &[&[f64]], names: &[&str]) -> Result<Self> {
        let mut cols = Vec::with_capacity(parents.len() + 1);
        cols.push(child);
        cols.extend_from_slice(parents);
        let bw = normal_reference_bandwidth(&cols, names)?;
        Self::new(child, parents, bw)
    }

    pub fn joint(&self) -> &KdeModel {
        &self.joint
    }

    pub fn marginal(&self) -> Option<&KdeModel> {
        self.marginal.as_ref()
    }

    pub fn n_parents(&self) -> usize {
        self.joint.dim() - 1
    }

    /// `row` holds the child value followed by the parent values.
    pub fn logpdf(&self, row: &[f64]) -> f64 {
        let joint = self.joint.logpdf(row);
        match &self.marginal {
            Some(m) => joint - m.logpdf(&row[1..]),
            None => joint,
        }
    }

    pub fn logpdf_columns(&self, child: &[f64], parents: &[&[f64]]) -> Vec<f64> {
        let mut row = vec![0.0; parents.len() + 1];
        (0..child.len())
            .map(|r| {
                row[0] = child[r];
                for (x, p) in row[1..].iter_mut().zip(parents) {
                    *x = p[r];
                }
                self.logpdf(&row)
            })
            .collect()
    }
}
