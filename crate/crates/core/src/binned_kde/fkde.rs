//! Binned KDE evaluated on the grid by FFT convolution.
//!
//! Per axis of size `M`, weights sit at padded positions `M..2M` and kernel
//! values for offsets `l ∈ [-L, L]` at `M - 1 + l`; with padded length
//! `P = 2^⌈log2(3M-1)⌉` the circular convolution has no wrap-around over the
//! read-out window, and the density at grid index `t` is read at `2M - 1 + t`.

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::fft::NdFft;
use crate::binning::{bin_columns, build_grid, flat_index, BinningRule, Grid, SparseWeightTensor};
use crate::error::{Error, Result};
use crate::kde::{normal_reference_bandwidth, BandwidthMatrix};
use crate::kernel::log_two_pi;

/// Smallest density kept before taking logs.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Limits on FKDE size: parent count and padded elements per tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FkdeGuardConfig {
    pub max_parents: usize,
    pub max_padded_elements: u128,
}

impl Default for FkdeGuardConfig {
    fn default() -> Self {
        FkdeGuardConfig {
            max_parents: 3,
            max_padded_elements: 1 << 26,
        }
    }
}

impl FkdeGuardConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_padded_elements == 0 {
            return Err(Error::Config("fkde max padded elements must be positive".into()));
        }
        Ok(())
    }

    /// Checks a joint FKDE over grids of the given sizes (child first).
    pub fn check(&self, grid_sizes: &[usize]) -> Result<()> {
        let elements = padded_elements(grid_sizes);
        let parents = grid_sizes.len().saturating_sub(1);
        if parents > self.max_parents || elements > self.max_padded_elements {
            return Err(Error::FkdeDimensionality {
                dims: grid_sizes.to_vec(),
                elements,
                max_elements: self.max_padded_elements,
                max_parents: self.max_parents,
            });
        }
        Ok(())
    }

    pub fn allows(&self, grid_sizes: &[usize]) -> bool {
        self.check(grid_sizes).is_ok()
    }
}

/// Zero-padded transform length `2^⌈log2(3M-1)⌉`.
pub fn padded_size(m: usize) -> usize {
    (3 * m - 1).next_power_of_two()
}

pub fn padded_elements(grid_sizes: &[usize]) -> u128 {
    grid_sizes
        .iter()
        .map(|&m| padded_size(m) as u128)
        .try_fold(1u128, |acc, p| acc.checked_mul(p))
        .unwrap_or(u128::MAX)
}

/// Kernel truncation radius per axis: `min(M_i - 1, ⌈4√|λ|/δ_i⌉)` with `λ`
/// the largest-magnitude eigenvalue of `H` (`λ = h²` in one dimension).
pub fn truncation_radii(grids: &[Grid], bandwidth: &BandwidthMatrix) -> Vec<usize> {
    let reach = 4.0 * bandwidth.largest_abs_eigenvalue().sqrt();
    grids
        .iter()
        .map(|g| {
            let steps = reach / g.delta();
            // Guard against ratios like 20.000000000000004 from rounding.
            let steps = (steps - 1e-9 * steps.abs().max(1.0)).ceil().max(0.0);
            (steps as usize).min(g.m - 1)
        })
        .collect()
}

/// Density values of a binned KDE at every grid vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FkdeModel {
    grids: Vec<Grid>,
    padded: Vec<usize>,
    radii: Vec<usize>,
    density: Vec<f64>,
}

impl FkdeModel {
    pub fn fit(
        tensor: &SparseWeightTensor,
        grids: Vec<Grid>,
        bandwidth: &BandwidthMatrix,
        guard: &FkdeGuardConfig,
    ) -> Result<Self> {
        let d = grids.len();
        let dims: Vec<usize> = grids.iter().map(|g| g.m).collect();
        if tensor.dims() != dims.as_slice() || bandwidth.dim() != d {
            return Err(Error::fit("fkde tensor, grids and bandwidth disagree"));
        }
        let elements = padded_elements(&dims);
        if elements > guard.max_padded_elements {
            return Err(Error::FkdeDimensionality {
                dims,
                elements,
                max_elements: guard.max_padded_elements,
                max_parents: guard.max_parents,
            });
        }
        let padded: Vec<usize> = dims.iter().map(|&m| padded_size(m)).collect();
        let radii = truncation_radii(&grids, bandwidth);
        let total = elements as usize;

        let mut weights = vec![Complex::default(); total];
        for (idx, w) in tensor.iter() {
            let pos = flat_index(
                idx.iter().zip(&dims).map(|(&i, &m)| m + i as usize),
                &padded,
            );
            weights[pos] = Complex::new(w, 0.0);
        }

        let mut kernel = vec![Complex::default(); total];
        let chol = bandwidth.cholesky();
        let log_norm = -0.5 * d as f64 * log_two_pi() - 0.5 * bandwidth.log_det() - tensor.total().ln();
        let deltas: Vec<f64> = grids.iter().map(Grid::delta).collect();
        let mut offset: Vec<isize> = radii.iter().map(|&l| -(l as isize)).collect();
        let mut v = vec![0.0; d];
        let mut z = vec![0.0; d];
        'kernel: loop {
            for i in 0..d {
                v[i] = deltas[i] * offset[i] as f64;
            }
            for i in 0..d {
                let mut acc = v[i];
                for k in 0..i {
                    acc -= chol[(i, k)] * z[k];
                }
                z[i] = acc / chol[(i, i)];
            }
            let r2: f64 = z.iter().map(|x| x * x).sum();
            let pos = flat_index(
                offset
                    .iter()
                    .zip(&dims)
                    .map(|(&l, &m)| (m as isize - 1 + l) as usize),
                &padded,
            );
            kernel[pos] = Complex::new((log_norm - 0.5 * r2).exp(), 0.0);
            for i in (0..d).rev() {
                offset[i] += 1;
                if offset[i] <= radii[i] as isize {
                    continue 'kernel;
                }
                offset[i] = -(radii[i] as isize);
            }
            break;
        }

        let fft = NdFft::new(&padded);
        fft.forward(&mut weights);
        fft.forward(&mut kernel);
        for (w, k) in weights.iter_mut().zip(&kernel) {
            *w *= k;
        }
        drop(kernel);
        fft.inverse(&mut weights);
        let scale = 1.0 / total as f64;

        let cells: usize = dims.iter().product();
        let mut density = Vec::with_capacity(cells);
        let mut t = vec![0usize; d];
        for _ in 0..cells {
            let pos = flat_index(t.iter().zip(&dims).map(|(&ti, &m)| 2 * m - 1 + ti), &padded);
            density.push((weights[pos].re * scale).max(DENSITY_FLOOR));
            for i in (0..d).rev() {
                t[i] += 1;
                if t[i] < dims[i] {
                    break;
                }
                t[i] = 0;
            }
        }
        Ok(FkdeModel {
            grids,
            padded,
            radii,
            density,
        })
    }

    /// Rebuilds a model from stored grid densities.
    pub fn from_parts(grids: Vec<Grid>, radii: Vec<usize>, density: Vec<f64>) -> Result<Self> {
        let cells: usize = grids.iter().map(|g| g.m).product();
        if density.len() != cells || radii.len() != grids.len() {
            return Err(Error::fit("fkde density grid does not match the grids"));
        }
        if density.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::fit("fkde densities must be finite and non-negative"));
        }
        Ok(FkdeModel {
            padded: grids.iter().map(|g| padded_size(g.m)).collect(),
            grids,
            radii,
            density: density.into_iter().map(|v| v.max(DENSITY_FLOOR)).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.grids.len()
    }

    pub fn grids(&self) -> &[Grid] {
        &self.grids
    }

    pub fn padded_sizes(&self) -> &[usize] {
        &self.padded
    }

    pub fn radii(&self) -> &[usize] {
        &self.radii
    }

    /// Row-major densities over the grid.
    pub fn densities(&self) -> &[f64] {
        &self.density
    }

    pub fn density_at(&self, index: &[usize]) -> f64 {
        let dims: Vec<usize> = self.grids.iter().map(|g| g.m).collect();
        self.density[flat_index(index.iter().copied(), &dims)]
    }

    /// Log density of the grid cell nearest to `x` (clamped to the grid).
    pub fn logpdf(&self, x: &[f64]) -> f64 {
        let pos = self
            .grids
            .iter()
            .zip(x)
            .fold(0, |acc, (g, &xi)| acc * g.m + g.nearest(xi));
        self.density[pos].max(DENSITY_FLOOR).ln()
    }
}

/// Conditional FKDE: grid densities of the joint over `(child, parents)`
/// divided by those of the parents, both computed on the same grids.
#[derive(Debug, Clone, PartialEq)]
pub struct FkdeCpd {
    rule: BinningRule,
    bandwidth: BandwidthMatrix,
    joint: FkdeModel,
    marginal: Option<FkdeModel>,
}

impl FkdeCpd {
    pub fn new(
        child: &[f64],
        parents: &[&[f64]],
        grids: Vec<Grid>,
        rule: BinningRule,
        joint_bandwidth: BandwidthMatrix,
        guard: &FkdeGuardConfig,
    ) -> Result<Self> {
        let sizes: Vec<usize> = grids.iter().map(|g| g.m).collect();
        guard.check(&sizes)?;
        let mut cols = Vec::with_capacity(parents.len() + 1);
        cols.push(child);
        cols.extend_from_slice(parents);
        let tensor = bin_columns(&cols, &grids, rule)?;
        let d = grids.len();
        let marginal = if d > 1 {
            let axes: Vec<usize> = (1..d).collect();
            Some(FkdeModel::fit(
                &tensor.project(&axes),
                grids[1..].to_vec(),
                &joint_bandwidth.submatrix(&axes)?,
                guard,
            )?)
        } else {
            None
        };
        let joint = FkdeModel::fit(&tensor, grids, &joint_bandwidth, guard)?;
        Ok(FkdeCpd {
            rule,
            bandwidth: joint_bandwidth,
            joint,
            marginal,
        })
    }

    /// Checks the guard first, then fits grids and the normal reference
    /// bandwidth from the training columns.
    pub fn fit(
        child: &[f64],
        parents: &[&[f64]],
        names: &[&str],
        rule: BinningRule,
        grid_size: usize,
        guard: &FkdeGuardConfig,
    ) -> Result<Self> {
        guard.check(&vec![grid_size; parents.len() + 1])?;
        let mut cols = Vec::with_capacity(parents.len() + 1);
        cols.push(child);
        cols.extend_from_slice(parents);
        let bw = normal_reference_bandwidth(&cols, names)?;
        let grids = cols
            .iter()
            .map(|c| build_grid(c, grid_size))
            .collect::<Result<Vec<_>>>()?;
        Self::new(child, parents, grids, rule, bw, guard)
    }

    pub fn from_parts(
        rule: BinningRule,
        bandwidth: BandwidthMatrix,
        joint: FkdeModel,
        marginal: Option<FkdeModel>,
    ) -> Result<Self> {
        if bandwidth.dim() != joint.dim() || marginal.as_ref().map_or(0, |m| m.dim() + 1).max(1) != joint.dim() {
            return Err(Error::fit("fkde parts have inconsistent dimensions"));
        }
        Ok(FkdeCpd {
            rule,
            bandwidth,
            joint,
            marginal,
        })
    }

    pub fn rule(&self) -> BinningRule {
        self.rule
    }

    pub fn bandwidth(&self) -> &BandwidthMatrix {
        &self.bandwidth
    }

    pub fn joint(&self) -> &FkdeModel {
        &self.joint
    }

    pub fn marginal(&self) -> Option<&FkdeModel> {
        self.marginal.as_ref()
    }

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
