//! Parameter fitting, cross-validated scoring and structure search.

mod cpd;
mod hill_climb;
mod lg;
mod network;
mod score;

pub use cpd::{Cpd, CpdOptions, NodeType, NodeTypeMap, NonparamFamily};
pub use hill_climb::{hill_climb, HcConfig, HcResult, HcStep, Operator};
pub use lg::{LgCpd, VARIANCE_FLOOR};
pub use network::{LogLik, NetworkModel};
pub use score::{cv_score, fold_partition, CvScorer};
