//! Grid binning of continuous samples.
//!
//! Grid indices are 0-based throughout: point `m` of a grid is
//! `lo + m * delta` for `m` in `0..M`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Positions closer than this fraction of a binwidth to a grid point are
/// treated as lying on it.
const SNAP: f64 = 1e-10;

/// Dense accumulation is used when the full grid has at most this many cells.
const DENSE_LIMIT: u128 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub m: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Config(format!("grid size must be at least 2, got {m}")));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::Config(format!("invalid grid bounds [{lo}, {hi}]")));
        }
        Ok(Grid { lo, hi, m })
    }

    pub fn delta(&self) -> f64 {
        (self.hi - self.lo) / (self.m - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i == self.m - 1 {
            self.hi
        } else {
            self.lo + i as f64 * self.delta()
        }
    }

    /// Continuous grid coordinate of `x`, clamped to `[0, M-1]`.
    fn position(&self, x: f64) -> f64 {
        let u = (x - self.lo) / self.delta();
        let u = u.clamp(0.0, (self.m - 1) as f64);
        let r = u.round();
        if (u - r).abs() < SNAP {
            r
        } else {
            u
        }
    }

    /// Index of the nearest grid point; midpoint ties go to the lower index.
    pub fn nearest(&self, x: f64) -> usize {
        let u = self.position(x);
        let m = u.floor();
        if u - m > 0.5 {
            m as usize + 1
        } else {
            m as usize
        }
    }
}

/// Grid spanning the column's range. A constant column gets a unit-wide grid
/// centred on its value.
pub fn build_grid(column: &[f64], m: usize) -> Result<Grid> {
    if m < 2 {
        return Err(Error::Config(format!("grid size must be at least 2, got {m}")));
    }
    if column.is_empty() {
        return Err(Error::Data("cannot build a grid for an empty column".into()));
    }
    let (lo, hi) = column
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Data("non-finite value in column".into()));
    }
    if hi == lo {
        Grid::new(lo - 0.5, lo + 0.5, m)
    } else {
        Grid::new(lo, hi, m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinningRule {
    Simple,
    Linear,
}

pub type UnivariateBins = SmallVec<[(usize, f64); 2]>;

/// Grid indices and weights for one value. Values outside the grid put their
/// whole mass on the nearest boundary point.
pub fn bin_univariate(x: f64, grid: &Grid, rule: BinningRule) -> UnivariateBins {
    let mut out = UnivariateBins::new();
    match rule {
        BinningRule::Simple => out.push((grid.nearest(x), 1.0)),
        BinningRule::Linear => {
            let u = grid.position(x);
            let m = u.floor();
            let frac = u - m;
            let m = m as usize;
            if frac == 0.0 || m == grid.m - 1 {
                out.push((m, 1.0));
            } else {
                out.push((m, 1.0 - frac));
                out.push((m + 1, frac));
            }
        }
    }
    out
}

/// Positive weights on a multidimensional grid, keyed by index vectors.
///
/// Entries are kept sorted lexicographically by index so iteration order is
/// deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseWeightTensor {
    dims: Vec<usize>,
    indices: Vec<u32>,
    weights: Vec<f64>,
    total: f64,
}

impl SparseWeightTensor {
    /// Builds a tensor from explicit entries, merging duplicates and dropping
    /// non-positive weights.
    pub fn from_entries(dims: Vec<usize>, entries: &[(Vec<usize>, f64)]) -> Result<Self> {
        let mut acc: HashMap<SmallVec<[u32; 8]>, f64> = HashMap::new();
        for (idx, w) in entries {
            if idx.len() != dims.len() {
                return Err(Error::Data(format!(
                    "index {idx:?} has wrong arity for dims {dims:?}"
                )));
            }
            if idx.iter().zip(&dims).any(|(&i, &m)| i >= m) {
                return Err(Error::Data(format!("index {idx:?} outside dims {dims:?}")));
            }
            if !w.is_finite() {
                return Err(Error::Data(format!("non-finite weight at {idx:?}")));
            }
            *acc.entry(idx.iter().map(|&i| i as u32).collect()).or_insert(0.0) += w;
        }
        Ok(Self::from_map(dims, acc))
    }

    fn from_map(dims: Vec<usize>, acc: HashMap<SmallVec<[u32; 8]>, f64>) -> Self {
        let mut entries: Vec<_> = acc.into_iter().filter(|(_, w)| *w > 0.0).collect();
        entries.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut indices = Vec::with_capacity(entries.len() * dims.len());
        let mut weights = Vec::with_capacity(entries.len());
        for (k, w) in entries {
            indices.extend_from_slice(&k);
            weights.push(w);
        }
        let total = weights.iter().sum();
        SparseWeightTensor {
            dims,
            indices,
            weights,
            total,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    /// Number of stored (positive) entries.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn index(&self, s: usize) -> &[u32] {
        let n = self.dims.len();
        &self.indices[s * n..(s + 1) * n]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        (0..self.len()).map(move |s| (self.index(s), self.weights[s]))
    }

    /// Sums weights over every axis not in `axes`; the result has the kept
    /// axes in the given order.
    pub fn project(&self, axes: &[usize]) -> SparseWeightTensor {
        let dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let mut acc: HashMap<SmallVec<[u32; 8]>, f64> = HashMap::new();
        for (idx, w) in self.iter() {
            let key: SmallVec<[u32; 8]> = axes.iter().map(|&a| idx[a]).collect();
            *acc.entry(key).or_insert(0.0) += w;
        }
        Self::from_map(dims, acc)
    }

    /// Row-major dense copy of the tensor.
    pub fn to_dense(&self) -> Vec<f64> {
        let size: usize = self.dims.iter().product();
        let mut dense = vec![0.0; size];
        for (idx, w) in self.iter() {
            dense[flat_index(idx.iter().map(|&i| i as usize), &self.dims)] = w;
        }
        dense
    }
}

pub(crate) fn flat_index(idx: impl Iterator<Item = usize>, dims: &[usize]) -> usize {
    idx.zip(dims).fold(0, |acc, (i, &m)| acc * m + i)
}

/// Bins the rows formed by `columns` (one slice per dimension) on the given
/// grids. Each row contributes the product of its per-dimension weights to
/// every combination of its per-dimension grid indices.
pub fn bin_columns(columns: &[&[f64]], grids: &[Grid], rule: BinningRule) -> Result<SparseWeightTensor> {
    if columns.len() != grids.len() {
        return Err(Error::Config(format!(
            "{} columns but {} grids",
            columns.len(),
            grids.len()
        )));
    }
    if columns.is_empty() {
        return Err(Error::Config("binning needs at least one dimension".into()));
    }
    let n_rows = columns[0].len();
    if columns.iter().any(|c| c.len() != n_rows) {
        return Err(Error::Data("columns have different lengths".into()));
    }
    let dims: Vec<usize> = grids.iter().map(|g| g.m).collect();
    let cells: u128 = dims.iter().map(|&m| m as u128).product();
    let ndim = dims.len();

    let mut per_dim: Vec<UnivariateBins> = vec![UnivariateBins::new(); ndim];
    let mut visit = |row: usize, sink: &mut dyn FnMut(&[usize], f64)| {
        for (d, (col, grid)) in columns.iter().zip(grids).enumerate() {
            per_dim[d] = bin_univariate(col[row], grid, rule);
        }
        // Odometer over the cross product of per-dimension pairs.
        let mut choice = vec![0usize; ndim];
        let mut idx = vec![0usize; ndim];
        loop {
            let mut w = 1.0;
            for d in 0..ndim {
                let (i, wd) = per_dim[d][choice[d]];
                idx[d] = i;
                w *= wd;
            }
            sink(&idx, w);
            let mut d = ndim;
            loop {
                if d == 0 {
                    return;
                }
                d -= 1;
                choice[d] += 1;
                if choice[d] < per_dim[d].len() {
                    break;
                }
                choice[d] = 0;
            }
        }
    };

    if cells <= DENSE_LIMIT {
        let mut dense = vec![0.0; cells as usize];
        for row in 0..n_rows {
            visit(row, &mut |idx, w| {
                dense[flat_index(idx.iter().copied(), &dims)] += w;
            });
        }
        let mut indices = Vec::new();
        let mut weights = Vec::new();
        let mut idx = vec![0u32; ndim];
        for (flat, &w) in dense.iter().enumerate() {
            if w > 0.0 {
                let mut rem = flat;
                for d in (0..ndim).rev() {
                    idx[d] = (rem % dims[d]) as u32;
                    rem /= dims[d];
                }
                indices.extend_from_slice(&idx);
                weights.push(w);
            }
        }
        let total = weights.iter().sum();
        Ok(SparseWeightTensor {
            dims,
            indices,
            weights,
            total,
        })
    } else {
        let mut acc: HashMap<SmallVec<[u32; 8]>, f64> = HashMap::new();
        for row in 0..n_rows {
            visit(row, &mut |idx, w| {
                *acc.entry(idx.iter().map(|&i| i as u32).collect()).or_insert(0.0) += w;
            });
        }
        Ok(SparseWeightTensor::from_map(dims, acc))
    }
}

/// Bins the selected dataset columns.
pub fn bin_dataset(data: &Dataset, vars: &[usize], grids: &[Grid], rule: BinningRule) -> Result<SparseWeightTensor> {
    let cols: Vec<&[f64]> = vars.iter().map(|&v| data.column(v)).collect();
    bin_columns(&cols, grids, rule)
}
