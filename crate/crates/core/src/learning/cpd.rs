use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::lg::LgCpd;
use crate::binned_kde::{FkdeCpd, FkdeGuardConfig, SbkdeCpd};
use crate::binning::BinningRule;
use crate::error::{Error, Result};
use crate::kde::CkdeCpd;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeType {
    #[serde(rename = "LG")]
    LinearGaussian,
    #[serde(rename = "CKDE")]
    Ckde,
    #[serde(rename = "SBKDE")]
    Sbkde,
    #[serde(rename = "FKDE")]
    Fkde,
}

impl NodeType {
    pub fn is_parametric(self) -> bool {
        self == NodeType::LinearGaussian
    }

    pub fn tag(self) -> &'static str {
        match self {
            NodeType::LinearGaussian => "LG",
            NodeType::Ckde => "CKDE",
            NodeType::Sbkde => "SBKDE",
            NodeType::Fkde => "FKDE",
        }
    }
}

impl fmt::Display for NodeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for NodeType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LG" => Ok(NodeType::LinearGaussian),
            "CKDE" => Ok(NodeType::Ckde),
            "SBKDE" => Ok(NodeType::Sbkde),
            "FKDE" => Ok(NodeType::Fkde),
            _ => Err(Error::Config(format!("unknown node type `{s}`"))),
        }
    }
}

/// Nonparametric CPD family a learner may switch nodes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonparamFamily {
    Ckde,
    Sbkde,
    Fkde,
}

impl NonparamFamily {
    pub fn node_type(self) -> NodeType {
        match self {
            NonparamFamily::Ckde => NodeType::Ckde,
            NonparamFamily::Sbkde => NodeType::Sbkde,
            NonparamFamily::Fkde => NodeType::Fkde,
        }
    }
}

/// One CPD family tag per node, in node order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeTypeMap {
    names: Vec<String>,
    types: Vec<NodeType>,
}

impl NodeTypeMap {
    pub fn new<S: AsRef<str>>(names: &[S], types: Vec<NodeType>) -> Result<Self> {
        if names.len() != types.len() {
            return Err(Error::Config(format!(
                "{} node types for {} nodes",
                types.len(),
                names.len()
            )));
        }
        Ok(NodeTypeMap {
            names: names.iter().map(|s| s.as_ref().to_string()).collect(),
            types,
        })
    }

    pub fn uniform<S: AsRef<str>>(names: &[S], t: NodeType) -> Self {
        NodeTypeMap {
            names: names.iter().map(|s| s.as_ref().to_string()).collect(),
            types: vec![t; names.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn types(&self) -> &[NodeType] {
        &self.types
    }

    pub fn get(&self, i: usize) -> NodeType {
        self.types[i]
    }

    pub fn set(&mut self, i: usize, t: NodeType) {
        self.types[i] = t;
    }

    pub fn get_by_name(&self, name: &str) -> Result<NodeType> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.types[i])
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    /// Reorders to follow `names`, which must be a permutation of the nodes.
    pub fn reordered<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        if names.len() != self.names.len() {
            return Err(Error::NodeSetMismatch(format!(
                "{} names for {} typed nodes",
                names.len(),
                self.names.len()
            )));
        }
        let types = names
            .iter()
            .map(|n| self.get_by_name(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(names, types)
    }

    /// Replaces every nonparametric tag with `t`.
    pub fn with_nonparametric(&self, t: NodeType) -> Self {
        let types = self
            .types
            .iter()
            .map(|&x| if x.is_parametric() { x } else { t })
            .collect();
        NodeTypeMap {
            names: self.names.clone(),
            types,
        }
    }
}

/// Settings shared by every binned CPD fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpdOptions {
    pub rule: BinningRule,
    pub grid_size: usize,
    pub guard: FkdeGuardConfig,
}

impl Default for CpdOptions {
    fn default() -> Self {
        CpdOptions {
            rule: BinningRule::Simple,
            grid_size: 100,
            guard: FkdeGuardConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cpd {
    Lg(LgCpd),
    Ckde(CkdeCpd),
    Sbkde(SbkdeCpd),
    Fkde(FkdeCpd),
}

impl Cpd {
    /// `names` lists the child first, then the parents.
    pub fn fit(
        node_type: NodeType,
        child: &[f64],
        parents: &[&[f64]],
        names: &[&str],
        options: &CpdOptions,
    ) -> Result<Self> {
        Ok(match node_type {
            NodeType::LinearGaussian => Cpd::Lg(LgCpd::fit(child, parents, names)?),
            NodeType::Ckde => Cpd::Ckde(CkdeCpd::fit(child, parents, names)?),
            NodeType::Sbkde => Cpd::Sbkde(SbkdeCpd::fit(
                child,
                parents,
                names,
                options.rule,
                options.grid_size,
            )?),
            NodeType::Fkde => Cpd::Fkde(FkdeCpd::fit(
                child,
                parents,
                names,
                options.rule,
                options.grid_size,
                &options.guard,
            )?),
        })
    }

    pub fn node_type(&self) -> NodeType {
        match self {
            Cpd::Lg(_) => NodeType::LinearGaussian,
            Cpd::Ckde(_) => NodeType::Ckde,
            Cpd::Sbkde(_) => NodeType::Sbkde,
            Cpd::Fkde(_) => NodeType::Fkde,
        }
    }

    pub fn n_parents(&self) -> usize {
        match self {
            Cpd::Lg(c) => c.coefficients().len(),
            Cpd::Ckde(c) => c.n_parents(),
            Cpd::Sbkde(c) => c.joint().dim() - 1,
            Cpd::Fkde(c) => c.joint().dim() - 1,
        }
    }

    /// `row` holds the child value followed by the parent values.
    pub fn logpdf(&self, row: &[f64]) -> f64 {
        match self {
            Cpd::Lg(c) => c.logpdf(row),
            Cpd::Ckde(c) => c.logpdf(row),
            Cpd::Sbkde(c) => c.logpdf(row),
            Cpd::Fkde(c) => c.logpdf(row),
        }
    }

    pub fn logpdf_columns(&self, child: &[f64], parents: &[&[f64]]) -> Vec<f64> {
        match self {
            Cpd::Lg(c) => c.logpdf_columns(child, parents),
            Cpd::Ckde(c) => c.logpdf_columns(child, parents),
            Cpd::Sbkde(c) => c.logpdf_columns(child, parents),
            Cpd::Fkde(c) => c.logpdf_columns(child, parents),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type_tags_round_trip() {
        for t in [NodeType::LinearGaussian, NodeType::Ckde, NodeType::Sbkde, NodeType::Fkde] {
            assert_eq!(t.tag().parse::<NodeType>().unwrap(), t);
        }
        assert!("gauss".parse::<NodeType>().is_err());
    }

    #[test]
    fn type_map_reorders_by_name() {
        let m = NodeTypeMap::new(&["a", "b"], vec![NodeType::Ckde, NodeType::LinearGaussian]).unwrap();
        let r = m.reordered(&["b", "a"]).unwrap();
        assert_eq!(r.types(), &[NodeType::LinearGaussian, NodeType::Ckde]);
        assert!(m.reordered(&["b", "c"]).is_err());
        let s = m.with_nonparametric(NodeType::Sbkde);
        assert_eq!(s.types(), &[NodeType::Sbkde, NodeType::LinearGaussian]);
    }
}
