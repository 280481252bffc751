use crate::binning::{bin_columns, build_grid, BinningRule, Grid, SparseWeightTensor};
use crate::error::{Error, Result};
use crate::kde::{normal_reference_bandwidth, BandwidthMatrix};
use crate::kernel::KernelSum;

/// Binned KDE that sums kernels only over the stored (positive) grid weights:
/// `f(x) = (1/N) Σ_s K_H(x - g_s) c_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SbkdeModel {
    grids: Vec<Grid>,
    tensor: SparseWeightTensor,
    bandwidth: BandwidthMatrix,
    sum: KernelSum,
}

impl SbkdeModel {
    pub fn new(tensor: SparseWeightTensor, grids: Vec<Grid>, bandwidth: BandwidthMatrix) -> Result<Self> {
        let d = grids.len();
        if tensor.ndim() != d || bandwidth.dim() != d {
            return Err(Error::fit(format!(
                "sbkde dimension mismatch: tensor {}, grids {d}, bandwidth {}",
                tensor.ndim(),
                bandwidth.dim()
            )));
        }
        if tensor.dims().iter().zip(&grids).any(|(&m, g)| m != g.m) {
            return Err(Error::fit("tensor dims do not match grid sizes"));
        }
        if tensor.is_empty() {
            return Err(Error::fit("sbkde needs at least one weighted grid point"));
        }
        let mut centers = Vec::with_capacity(tensor.len() * d);
        for (idx, _) in tensor.iter() {
            centers.extend(idx.iter().zip(&grids).map(|(&i, g)| g.point(i as usize)));
        }
        let sum = KernelSum::new(&centers, Some(tensor.weights()), &bandwidth);
        Ok(SbkdeModel {
            grids,
            tensor,
            bandwidth,
            sum,
        })
    }

    pub fn dim(&self) -> usize {
        self.grids.len()
    }

    pub fn grids(&self) -> &[Grid] {
        &self.grids
    }

    pub fn tensor(&self) -> &SparseWeightTensor {
        &self.tensor
    }

    pub fn bandwidth(&self) -> &BandwidthMatrix {
        &self.bandwidth
    }

    pub fn logpdf(&self, x: &[f64]) -> f64 {
        self.sum.log_density(x)
    }
}

/// Conditional SBKDE: joint model over `(child, parents)` divided by the
/// parents-axis projection of the same weights, with the parent block of the
/// joint bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct SbkdeCpd {
    rule: BinningRule,
    joint: SbkdeModel,
    marginal: Option<SbkdeModel>,
}

impl SbkdeCpd {
    /// Bins the training columns on the given grids (child grid first).
    pub fn new(
        child: &[f64],
        parents: &[&[f64]],
        grids: Vec<Grid>,
        rule: BinningRule,
        joint_bandwidth: BandwidthMatrix,
    ) -> Result<Self> {
        let mut cols = Vec::with_capacity(parents.len() + 1);
        cols.push(child);
        cols.extend_from_slice(parents);
        let tensor = bin_columns(&cols, &grids, rule)?;
        Self::from_joint(tensor, grids, rule, joint_bandwidth)
    }

    /// Assembles the CPD from an already binned joint tensor.
    pub fn from_joint(
        tensor: SparseWeightTensor,
        grids: Vec<Grid>,
        rule: BinningRule,
        joint_bandwidth: BandwidthMatrix,
    ) -> Result<Self> {
        let d = grids.len();
        let marginal = if d > 1 {
            let axes: Vec<usize> = (1..d).collect();
            Some(SbkdeModel::new(
                tensor.project(&axes),
                grids[1..].to_vec(),
                joint_bandwidth.submatrix(&axes)?,
            )?)
        } else {
            None
        };
        let joint = SbkdeModel::new(tensor, grids, joint_bandwidth)?;
        Ok(SbkdeCpd {
            rule,
            joint,
            marginal,
        })
    }

    /// Grids span the training range of each variable with `grid_size`
    /// points; the bandwidth is the normal reference rule on the raw data.
    pub fn fit(
        child: &[f64],
        parents: &[&[f64]],
        names: &[&str],
        rule: BinningRule,
        grid_size: usize,
    ) -> Result<Self> {
        let mut cols = Vec::with_capacity(parents.len() + 1);
        cols.push(child);
        cols.extend_from_slice(parents);
        let bw = normal_reference_bandwidth(&cols, names)?;
        let grids = cols
            .iter()
            .map(|c| build_grid(c, grid_size))
            .collect::<Result<Vec<_>>>()?;
        Self::new(child, parents, grids, rule, bw)
    }

    pub fn rule(&self) -> BinningRule {
        self.rule
    }

    pub fn joint(&self) -> &SbkdeModel {
        &self.joint
    }

    pub fn marginal(&self) -> Option<&SbkdeModel> {
        self.marginal.as_ref()
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
