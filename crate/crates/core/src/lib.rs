//! Semiparametric Bayesian networks over continuous data with exact and
//! binned kernel density CPDs.

pub mod binned_kde;
pub mod binning;
pub mod dag;
pub mod dataset;
pub mod error;
pub mod kde;
mod kernel;
pub mod learning;
pub mod metrics;
pub mod synth;

pub use binned_kde::{FkdeCpd, FkdeGuardConfig, FkdeModel, SbkdeCpd, SbkdeModel};
pub use binning::{BinningRule, Grid, SparseWeightTensor};
pub use dag::{Dag, DagSpec};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use kde::{BandwidthMatrix, CkdeCpd, KdeModel};
pub use learning::{
    hill_climb, Cpd, CpdOptions, HcConfig, LgCpd, NetworkModel, NodeType, NodeTypeMap, NonparamFamily,
};
