//! JSON network files.
//!
//! A file holds the node list, the arc list, one type tag per node and,
//! optionally, fitted parameters per node. Files without parameters describe
//! a structure only (for example a true synthetic DAG).
//!
//! Parameter rows always list the child first, then the parents in node-list
//! order.

use std::path::Path;

use bspbn::{
    BandwidthMatrix, BinningRule, CkdeCpd, Cpd, Dag, FkdeCpd, FkdeModel, Grid, LgCpd, NetworkModel, NodeType,
    NodeTypeMap, SbkdeCpd, SparseWeightTensor,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub nodes: Vec<String>,
    pub arcs: Vec<(String, String)>,
    pub types: Vec<NodeType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Vec<NodeParams>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FkdeGridDensity {
    pub radii: Vec<usize>,
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NodeParams {
    Lg {
        intercept: f64,
        coefficients: Vec<f64>,
        variance: f64,
    },
    Ckde {
        bandwidth: Vec<Vec<f64>>,
        /// Training points, one row per instance.
        points: Vec<Vec<f64>>,
    },
    Sbkde {
        rule: BinningRule,
        bandwidth: Vec<Vec<f64>>,
        grids: Vec<Grid>,
        indices: Vec<Vec<u32>>,
        weights: Vec<f64>,
    },
    Fkde {
        rule: BinningRule,
        bandwidth: Vec<Vec<f64>>,
        grids: Vec<Grid>,
        joint: FkdeGridDensity,
        marginal: Option<FkdeGridDensity>,
    },
}

impl NodeParams {
    pub fn from_cpd(cpd: &Cpd) -> Self {
        match cpd {
            Cpd::Lg(c) => NodeParams::Lg {
                intercept: c.intercept(),
                coefficients: c.coefficients().to_vec(),
                variance: c.variance(),
            },
            Cpd::Ckde(c) => {
                let j = c.joint();
                NodeParams::Ckde {
                    bandwidth: j.bandwidth().to_rows(),
                    points: j.points().chunks_exact(j.dim()).map(<[f64]>::to_vec).collect(),
                }
            }
            Cpd::Sbkde(c) => {
                let j = c.joint();
                NodeParams::Sbkde {
                    rule: c.rule(),
                    bandwidth: j.bandwidth().to_rows(),
                    grids: j.grids().to_vec(),
                    indices: j.tensor().iter().map(|(i, _)| i.to_vec()).collect(),
                    weights: j.tensor().weights().to_vec(),
                }
            }
            Cpd::Fkde(c) => {
                let density = |m: &FkdeModel| FkdeGridDensity {
                    radii: m.radii().to_vec(),
                    density: m.densities().to_vec(),
                };
                NodeParams::Fkde {
                    rule: c.rule(),
                    bandwidth: c.bandwidth().to_rows(),
                    grids: c.joint().grids().to_vec(),
                    joint: density(c.joint()),
                    marginal: c.marginal().map(density),
                }
            }
        }
    }

    pub fn node_type(&self) -> NodeType {
        match self {
            NodeParams::Lg { .. } => NodeType::LinearGaussian,
            NodeParams::Ckde { .. } => NodeType::Ckde,
            NodeParams::Sbkde { .. } => NodeType::Sbkde,
            NodeParams::Fkde { .. } => NodeType::Fkde,
        }
    }

    pub fn to_cpd(&self) -> Result<Cpd> {
        Ok(match self {
            NodeParams::Lg {
                intercept,
                coefficients,
                variance,
            } => Cpd::Lg(LgCpd::new(*intercept, coefficients.clone(), *variance)?),
            NodeParams::Ckde { bandwidth, points } => {
                let bw = BandwidthMatrix::from_rows(bandwidth)?;
                let d = bw.dim();
                if points.is_empty() || points.iter().any(|p| p.len() != d) {
                    return Err(CliError::Network("ckde points do not match the bandwidth".into()));
                }
                let cols: Vec<Vec<f64>> = (0..d).map(|k| points.iter().map(|p| p[k]).collect()).collect();
                let parents: Vec<&[f64]> = cols[1..].iter().map(Vec::as_slice).collect();
                Cpd::Ckde(CkdeCpd::new(&cols[0], &parents, bw)?)
            }
            NodeParams::Sbkde {
                rule,
                bandwidth,
                grids,
                indices,
                weights,
            } => {
                if indices.len() != weights.len() {
                    return Err(CliError::Network("sbkde indices and weights differ in length".into()));
                }
                let entries: Vec<(Vec<usize>, f64)> = indices
                    .iter()
                    .zip(weights)
                    .map(|(i, &w)| (i.iter().map(|&x| x as usize).collect(), w))
                    .collect();
                let dims = grids.iter().map(|g| g.m).collect();
                let tensor = SparseWeightTensor::from_entries(dims, &entries)?;
                Cpd::Sbkde(SbkdeCpd::from_joint(
                    tensor,
                    grids.clone(),
                    *rule,
                    BandwidthMatrix::from_rows(bandwidth)?,
                )?)
            }
            NodeParams::Fkde {
                rule,
                bandwidth,
                grids,
                joint,
                marginal,
            } => {
                let joint_model = FkdeModel::from_parts(grids.clone(), joint.radii.clone(), joint.density.clone())?;
                let marginal_model = match marginal {
                    Some(m) if grids.len() > 1 => Some(FkdeModel::from_parts(
                        grids[1..].to_vec(),
                        m.radii.clone(),
                        m.density.clone(),
                    )?),
                    Some(_) => return Err(CliError::Network("fkde marginal without parents".into())),
                    None => None,
                };
                Cpd::Fkde(FkdeCpd::from_parts(
                    *rule,
                    BandwidthMatrix::from_rows(bandwidth)?,
                    joint_model,
                    marginal_model,
                )?)
            }
        })
    }
}

impl NetworkFile {
    pub fn structure(dag: &Dag, types: &NodeTypeMap) -> Result<Self> {
        let types = types.reordered(dag.nodes())?;
        let spec = dag.to_spec();
        Ok(NetworkFile {
            nodes: spec.nodes,
            arcs: spec.arcs,
            types: types.types().to_vec(),
            parameters: None,
        })
    }

    pub fn from_model(model: &NetworkModel) -> Result<Self> {
        let mut file = Self::structure(model.dag(), model.types())?;
        file.parameters = Some(model.cpds().iter().map(NodeParams::from_cpd).collect());
        Ok(file)
    }

    pub fn dag(&self) -> Result<Dag> {
        Ok(Dag::acyclic(&self.nodes, &self.arcs)?)
    }

    pub fn node_types(&self) -> Result<NodeTypeMap> {
        Ok(NodeTypeMap::new(&self.nodes, self.types.clone())?)
    }

    pub fn to_model(&self) -> Result<NetworkModel> {
        let params = self
            .parameters
            .as_ref()
            .ok_or_else(|| CliError::Network("file holds a structure without parameters".into()))?;
        if params.len() != self.nodes.len() {
            return Err(CliError::Network(format!(
                "{} parameter blocks for {} nodes",
                params.len(),
                self.nodes.len()
            )));
        }
        let cpds = params.iter().map(NodeParams::to_cpd).collect::<Result<Vec<_>>>()?;
        Ok(NetworkModel::from_parts(self.dag()?, self.node_types()?, cpds)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}
