use serde::{Deserialize, Serialize};

use super::cpd::{CpdOptions, NodeType, NodeTypeMap, NonparamFamily};
use super::network::NetworkModel;
use super::score::CvScorer;
use crate::binned_kde::FkdeGuardConfig;
use crate::binning::BinningRule;
use crate::dag::Dag;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HcConfig {
    pub patience: usize,
    pub folds: usize,
    pub family: NonparamFamily,
    pub rule: BinningRule,
    pub grid_size: usize,
    pub guard: FkdeGuardConfig,
    pub max_parents: Option<usize>,
    pub seed: u64,
}

impl Default for HcConfig {
    fn default() -> Self {
        HcConfig {
            patience: 3,
            folds: 5,
            family: NonparamFamily::Ckde,
            rule: BinningRule::Simple,
            grid_size: 100,
            guard: FkdeGuardConfig::default(),
            max_parents: None,
            seed: 0,
        }
    }
}

impl HcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config(format!("need at least 2 folds, got {}", self.folds)));
        }
        if self.grid_size < 2 {
            return Err(Error::Config(format!("grid size must be at least 2, got {}", self.grid_size)));
        }
        self.guard.validate()
    }

    pub fn cpd_options(&self) -> CpdOptions {
        CpdOptions {
            rule: self.rule,
            grid_size: self.grid_size,
            guard: self.guard,
        }
    }

    /// Parent cap for a node of type `t`, combining the global cap and the
    /// FKDE guard.
    fn parent_limit(&self, t: NodeType) -> usize {
        let mut limit = self.max_parents.unwrap_or(usize::MAX);
        if t == NodeType::Fkde {
            let mut p = 0;
            while p < limit && self.guard.allows(&vec![self.grid_size; p + 2]) {
                p += 1;
            }
            limit = p;
        }
        limit
    }
}

/// Search operators, ordered by kind for tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Operator {
    AddArc { child: usize, parent: usize },
    RemoveArc { child: usize, parent: usize },
    /// Reverses the arc `parent → child`.
    FlipArc { child: usize, parent: usize },
    ChangeType { node: usize, to: NodeType },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HcStep {
    pub operator: Operator,
    pub delta: f64,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct HcResult {
    /// Best structure seen, refit on the full dataset.
    pub model: NetworkModel,
    pub score: f64,
    pub trace: Vec<HcStep>,
    /// Distinct node terms scored during the search.
    pub evaluations: usize,
}

struct State {
    dag: Dag,
    types: NodeTypeMap,
    node_scores: Vec<f64>,
}

impl State {
    fn total(&self) -> f64 {
        self.node_scores.iter().sum()
    }
}

fn with_parent(parents: &[usize], u: usize) -> Vec<usize> {
    let mut p = parents.to_vec();
    p.push(u);
    p
}

fn without_parent(parents: &[usize], u: usize) -> Vec<usize> {
    parents.iter().copied().filter(|&x| x != u).collect()
}

/// Best legal operator and its score delta. Among equal deltas the first in
/// `(kind, child, parent)` order wins.
fn best_operator(state: &State, scorer: &mut CvScorer, config: &HcConfig) -> Option<(Operator, f64)> {
    let n = state.dag.node_count();
    let dag = &state.dag;
    let nonparam = config.family.node_type();
    let mut best: Option<(Operator, f64)> = None;
    let mut consider = |op: Operator, delta: f64| {
        if delta.is_finite() && best.is_none_or(|(_, d)| delta > d) {
            best = Some((op, delta));
        }
    };

    for child in 0..n {
        let pa = dag.parent_indices(child);
        let t = state.types.get(child);
        if pa.len() >= config.parent_limit(t) {
            continue;
        }
        for parent in 0..n {
            if parent == child || dag.has_arc(parent, child) || !dag.can_add_arc(parent, child) {
                continue;
            }
            let s = scorer.node_score(child, &with_parent(pa, parent), t);
            consider(Operator::AddArc { child, parent }, s - state.node_scores[child]);
        }
    }
    for child in 0..n {
        let pa = dag.parent_indices(child);
        for &parent in pa {
            let s = scorer.node_score(child, &without_parent(pa, parent), state.types.get(child));
            consider(Operator::RemoveArc { child, parent }, s - state.node_scores[child]);
        }
    }
    for child in 0..n {
        let pa = dag.parent_indices(child);
        for &parent in pa {
            let pt = state.types.get(parent);
            let ppa = dag.parent_indices(parent);
            if ppa.len() >= config.parent_limit(pt) || !dag.can_flip_arc(parent, child) {
                continue;
            }
            let s_child = scorer.node_score(child, &without_parent(pa, parent), state.types.get(child));
            let s_parent = scorer.node_score(parent, &with_parent(ppa, child), pt);
            let delta = s_child + s_parent - state.node_scores[child] - state.node_scores[parent];
            consider(Operator::FlipArc { child, parent }, delta);
        }
    }
    for node in 0..n {
        let to = if state.types.get(node).is_parametric() {
            nonparam
        } else {
            NodeType::LinearGaussian
        };
        let pa = dag.parent_indices(node);
        if pa.len() > config.parent_limit(to) {
            continue;
        }
        let s = scorer.node_score(node, pa, to);
        consider(Operator::ChangeType { node, to }, s - state.node_scores[node]);
    }
    best
}

fn apply(state: &mut State, op: Operator, scorer: &mut CvScorer) -> Result<()> {
    let touched: Vec<usize> = match op {
        Operator::AddArc { child, parent } => {
            state.dag.add_arc(parent, child)?;
            vec![child]
        }
        Operator::RemoveArc { child, parent } => {
            state.dag.remove_arc(parent, child)?;
            vec![child]
        }
        Operator::FlipArc { child, parent } => {
            state.dag.flip_arc(parent, child)?;
            vec![child, parent]
        }
        Operator::ChangeType { node, to } => {
            state.types.set(node, to);
            vec![node]
        }
    };
    for v in touched {
        state.node_scores[v] = scorer.node_score(v, state.dag.parent_indices(v), state.types.get(v));
    }
    Ok(())
}

/// Greedy hill climbing with patience from the empty all-LG network.
///
/// Each iteration applies the best legal operator, even when it lowers the
/// score; the search stops once `patience` consecutive iterations have not
/// improved the best score seen, and returns that best state.
pub fn hill_climb(data: &Dataset, config: &HcConfig) -> Result<HcResult> {
    config.validate()?;
    let names = data.names();
    let mut scorer = CvScorer::new(data, config.folds, config.seed, config.cpd_options())?;
    let dag = Dag::empty(names)?;
    let types = NodeTypeMap::uniform(names, NodeType::LinearGaussian);
    let node_scores = (0..names.len())
        .map(|v| scorer.node_score(v, &[], NodeType::LinearGaussian))
        .collect();
    let mut state = State {
        dag,
        types,
        node_scores,
    };
    let mut best_score = state.total();
    let mut best = (state.dag.clone(), state.types.clone());
    let mut trace = Vec::new();
    let mut stale = 0usize;

    while let Some((op, delta)) = best_operator(&state, &mut scorer, config) {
        let candidate = state.total() + delta;
        let improves = candidate > best_score + 1e-9 * best_score.abs().max(1.0);
        if !improves {
            if stale >= config.patience {
                break;
            }
            stale += 1;
        }
        apply(&mut state, op, &mut scorer)?;
        let score = state.total();
        trace.push(HcStep {
            operator: op,
            delta,
            score,
        });
        if improves {
            stale = 0;
            best_score = score;
            best = (state.dag.clone(), state.types.clone());
        }
    }

    let model = NetworkModel::fit(&best.0, &best.1, data, &config.cpd_options())?;
    Ok(HcResult {
        model,
        score: best_score,
        trace,
        evaluations: scorer.evaluations(),
    })
}
