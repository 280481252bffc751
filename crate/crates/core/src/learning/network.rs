use super::cpd::{Cpd, CpdOptions, NodeTypeMap};
use crate::dag::Dag;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// A DAG with one fitted CPD per node.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    dag: Dag,
    types: NodeTypeMap,
    cpds: Vec<Cpd>,
}

/// Per-row log-likelihoods and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLik {
    pub rows: Vec<f64>,
    pub total: f64,
}

impl NetworkModel {
    /// Fits every node's CPD on `data`, whose columns must include the
    /// DAG's nodes.
    pub fn fit(dag: &Dag, types: &NodeTypeMap, data: &Dataset, options: &CpdOptions) -> Result<Self> {
        if !dag.is_acyclic() {
            return Err(Error::Structure("cannot fit a cyclic graph".into()));
        }
        let types = types.reordered(dag.nodes())?;
        let cols = dag
            .nodes()
            .iter()
            .map(|n| data.column_by_name(n))
            .collect::<Result<Vec<_>>>()?;
        let mut cpds = Vec::with_capacity(dag.node_count());
        for v in 0..dag.node_count() {
            let pa = dag.parent_indices(v);
            let parents: Vec<&[f64]> = pa.iter().map(|&u| cols[u]).collect();
            let mut names = vec![dag.name(v)];
            names.extend(pa.iter().map(|&u| dag.name(u)));
            let cpd = Cpd::fit(types.get(v), cols[v], &parents, &names, options)
                .map_err(|e| e.at_node(dag.name(v)))?;
            cpds.push(cpd);
        }
        Ok(NetworkModel {
            dag: dag.clone(),
            types,
            cpds,
        })
    }

    /// Assembles a model from already fitted CPDs (in DAG node order).
    pub fn from_parts(dag: Dag, types: NodeTypeMap, cpds: Vec<Cpd>) -> Result<Self> {
        if !dag.is_acyclic() {
            return Err(Error::Structure("cannot build a model on a cyclic graph".into()));
        }
        let types = types.reordered(dag.nodes())?;
        if cpds.len() != dag.node_count() {
            return Err(Error::Config(format!(
                "{} cpds for {} nodes",
                cpds.len(),
                dag.node_count()
            )));
        }
        for (v, cpd) in cpds.iter().enumerate() {
            if cpd.node_type() != types.get(v) || cpd.n_parents() != dag.parent_indices(v).len() {
                return Err(Error::Config(format!(
                    "cpd of node `{}` does not match its type or parent set",
                    dag.name(v)
                )));
            }
        }
        Ok(NetworkModel { dag, types, cpds })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn types(&self) -> &NodeTypeMap {
        &self.types
    }

    pub fn cpds(&self) -> &[Cpd] {
        &self.cpds
    }

    pub fn cpd(&self, node: &str) -> Result<&Cpd> {
        Ok(&self.cpds[self.dag.index_of(node)?])
    }

    /// Per-node conditional log densities of every row of `data`.
    pub fn node_logliks(&self, data: &Dataset) -> Result<Vec<Vec<f64>>> {
        let cols = self
            .dag
            .nodes()
            .iter()
            .map(|n| data.column_by_name(n))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..self.dag.node_count())
            .map(|v| {
                let parents: Vec<&[f64]> = self.dag.parent_indices(v).iter().map(|&u| cols[u]).collect();
                self.cpds[v].logpdf_columns(cols[v], &parents)
            })
            .collect())
    }

    /// Log-likelihood of each row as the sum of node conditionals.
    pub fn loglik(&self, data: &Dataset) -> Result<LogLik> {
        let per_node = self.node_logliks(data)?;
        let mut rows = vec![0.0; data.n_rows()];
        for node in &per_node {
            for (r, v) in rows.iter_mut().zip(node) {
                *r += v;
            }
        }
        let total = rows.iter().sum();
        Ok(LogLik { rows, total })
    }

    /// Joint log density of one instance given in DAG node order.
    pub fn logpdf(&self, values: &[f64]) -> f64 {
        let mut row = Vec::new();
        (0..self.dag.node_count())
            .map(|v| {
                row.clear();
                row.push(values[v]);
                row.extend(self.dag.parent_indices(v).iter().map(|&u| values[u]));
                self.cpds[v].logpdf(&row)
            })
            .sum()
    }
}
