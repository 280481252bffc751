use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::cpd::{Cpd, CpdOptions, NodeType, NodeTypeMap};
use crate::dag::Dag;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Splits `0..n` into `k` held-out folds after a seeded shuffle. Each fold's
/// indices are sorted; fold sizes differ by at most one.
pub fn fold_partition(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    if n < k {
        return Err(Error::Config(format!("{n} instances cannot fill {k} folds")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (i, r) in perm.into_iter().enumerate() {
        folds[i % k].push(r);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

struct Fold {
    train: Vec<Vec<f64>>,
    test: Vec<Vec<f64>>,
}

type CacheKey = (usize, Vec<usize>, NodeType);

/// Cross-validated log-likelihood scorer with a fixed fold partition. The
/// score decomposes over nodes and node terms are cached by
/// `(node, parent set, type)`; nodes are the dataset's column indices.
pub struct CvScorer {
    names: Vec<String>,
    folds: Vec<Fold>,
    options: CpdOptions,
    cache: HashMap<CacheKey, f64>,
    fits: usize,
}

impl CvScorer {
    pub fn new(data: &Dataset, k: usize, seed: u64, options: CpdOptions) -> Result<Self> {
        let partition = fold_partition(data.n_rows(), k, seed)?;
        let mut in_fold = vec![0usize; data.n_rows()];
        for (f, rows) in partition.iter().enumerate() {
            for &r in rows {
                in_fold[r] = f;
            }
        }
        let folds = (0..k)
            .map(|f| {
                let split = |keep: bool| {
                    (0..data.n_cols())
                        .map(|j| {
                            data.column(j)
                                .iter()
                                .zip(&in_fold)
                                .filter(|(_, &g)| (g == f) != keep)
                                .map(|(&x, _)| x)
                                .collect()
                        })
                        .collect()
                };
                Fold {
                    train: split(true),
                    test: split(false),
                }
            })
            .collect();
        Ok(CvScorer {
            names: data.names().to_vec(),
            folds,
            options,
            cache: HashMap::new(),
            fits: 0,
        })
    }

    pub fn options(&self) -> &CpdOptions {
        &self.options
    }

    pub fn n_folds(&self) -> usize {
        self.folds.len()
    }

    /// Number of distinct node terms computed so far.
    pub fn evaluations(&self) -> usize {
        self.fits
    }

    /// Held-out log-likelihood of node `v` summed over folds, or `-∞` when a
    /// fold fit fails.
    pub fn node_score(&mut self, v: usize, parents: &[usize], t: NodeType) -> f64 {
        let mut pa = parents.to_vec();
        pa.sort_unstable();
        let key = (v, pa, t);
        if let Some(&s) = self.cache.get(&key) {
            return s;
        }
        let s = self.compute(v, &key.1, t);
        self.fits += 1;
        self.cache.insert(key, s);
        s
    }

    fn compute(&self, v: usize, parents: &[usize], t: NodeType) -> f64 {
        let mut names: Vec<&str> = vec![&self.names[v]];
        names.extend(parents.iter().map(|&u| self.names[u].as_str()));
        let mut total = 0.0;
        for fold in &self.folds {
            let pa_train: Vec<&[f64]> = parents.iter().map(|&u| fold.train[u].as_slice()).collect();
            let cpd = match Cpd::fit(t, &fold.train[v], &pa_train, &names, &self.options) {
                Ok(c) => c,
                Err(_) => return f64::NEG_INFINITY,
            };
            let pa_test: Vec<&[f64]> = parents.iter().map(|&u| fold.test[u].as_slice()).collect();
            total += cpd.logpdf_columns(&fold.test[v], &pa_test).iter().sum::<f64>();
        }
        if total.is_nan() {
            f64::NEG_INFINITY
        } else {
            total
        }
    }

    /// Score of a whole structure whose node order matches the dataset's
    /// columns.
    pub fn score(&mut self, dag: &Dag, types: &NodeTypeMap) -> f64 {
        (0..dag.node_count())
            .map(|v| self.node_score(v, dag.parent_indices(v), types.get(v)))
            .sum()
    }
}

/// k-fold cross-validated log-likelihood of `(dag, types)` on `data`.
pub fn cv_score(
    data: &Dataset,
    dag: &Dag,
    types: &NodeTypeMap,
    k: usize,
    seed: u64,
    options: &CpdOptions,
) -> Result<f64> {
    let data = data.select_columns(dag.nodes())?;
    let types = types.reordered(dag.nodes())?;
    let mut scorer = CvScorer::new(&data, k, seed, *options)?;
    Ok(scorer.score(dag, &types))
}
