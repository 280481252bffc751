use std::time::Instant;

use bspbn::metrics::{hmd, loglik_errors, shd, speed_ratio, thmd};
use bspbn::synth::{build_synthetic, GenerativeSpec};
use bspbn::{hill_climb, CpdOptions, Dag, Dataset, NetworkModel, NodeType, NodeTypeMap};
use log::{info, warn};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ExperimentConfig, ModelKind, Source};
use crate::error::{CliError, Result};
use crate::ingest::load_csv;

/// One repeat of an experiment. Metrics that need unavailable inputs (true
/// structure, timing) are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub repeat: usize,
    pub seed: u64,
    pub model: ModelKind,
    pub grid_size: usize,
    pub n_train: usize,
    pub arcs: Vec<(String, String)>,
    pub node_types: Vec<(String, NodeType)>,
    pub hmd: Option<usize>,
    pub shd: Option<usize>,
    pub thmd: Option<usize>,
    pub test_loglik: f64,
    pub rmse: Option<f64>,
    pub rmae_pct: Option<f64>,
    pub hc_seconds: Option<f64>,
    pub test_seconds: Option<f64>,
    pub hc_ratio: Option<f64>,
    pub test_ratio: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub records: Vec<RunRecord>,
    /// Learned network of each repeat, fit on that repeat's training data.
    pub networks: Vec<NetworkModel>,
}

impl RunReport {
    /// Concatenates the records of several runs under the first config.
    pub fn merge(reports: Vec<RunReport>) -> Option<RunReport> {
        let mut it = reports.into_iter();
        let mut out = it.next()?;
        for r in it {
            out.records.extend(r.records);
            out.networks.extend(r.networks);
        }
        Some(out)
    }
}

/// Test log-likelihoods of a structure fit on training data.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub rows: Vec<f64>,
    pub total: f64,
    /// Wall-clock seconds for fitting plus evaluating the test rows.
    pub seconds: f64,
}

pub fn evaluate_structure(
    dag: &Dag,
    types: &NodeTypeMap,
    train: &Dataset,
    test: &Dataset,
    options: &CpdOptions,
) -> Result<Evaluation> {
    let start = Instant::now();
    let model = NetworkModel::fit(dag, types, train, options)?;
    let ll = model.loglik(test)?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(Evaluation {
        rows: ll.rows,
        total: ll.total,
        seconds,
    })
}

enum Data {
    Synthetic(GenerativeSpec),
    Table(Dataset),
}

/// Per-repeat seeds drawn from the config seed.
pub fn repeat_seeds(seed: u64, repeats: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..repeats).map(|_| rng.random()).collect()
}

/// Train and test sets for one repeat. Synthetic sources are sampled afresh;
/// tables are shuffled and split without replacement.
fn split(data: &Data, config: &ExperimentConfig, seed: u64) -> Result<(Dataset, Dataset)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match data {
        Data::Synthetic(spec) => {
            let (s1, s2): (u64, u64) = (rng.random(), rng.random());
            Ok((spec.sample(config.n_train, s1)?, spec.sample(config.n_test, s2)?))
        }
        Data::Table(d) => {
            let mut idx: Vec<usize> = (0..d.n_rows()).collect();
            idx.shuffle(&mut rng);
            let train = d.select_rows(&idx[..config.n_train])?;
            let test = d.select_rows(&idx[config.n_train..config.n_train + config.n_test])?;
            Ok((train, test))
        }
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed().as_secs_f64()))
}

fn load(config: &ExperimentConfig) -> Result<Data> {
    config.validate()?;
    match &config.source {
        Source::Synthetic(id) => Ok(Data::Synthetic(build_synthetic(*id)?)),
        Source::Csv(path) => {
            let d = load_csv(path)?;
            if config.n_train + config.n_test > d.n_rows() {
                return Err(CliError::Config(format!(
                    "n_train + n_test = {} exceeds the {} usable rows of {}",
                    config.n_train + config.n_test,
                    d.n_rows(),
                    path.display()
                )));
            }
            Ok(Data::Table(d))
        }
    }
}

/// Runs every repeat of the experiment in order.
///
/// With a known true structure, the configured family and the CKDE reference
/// are both fit on it and their per-row test log-likelihoods are compared.
/// When `timed` is set, the CKDE baseline also runs the structure search on the
/// same data and seed so the ratios are paired.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    let data = load(config)?;
    let options = config.hc_config(config.seed).cpd_options();
    let mut records = Vec::with_capacity(config.repeats);
    let mut networks = Vec::with_capacity(config.repeats);
    for (repeat, seed) in repeat_seeds(config.seed, config.repeats).into_iter().enumerate() {
        let (train, test) = split(&data, config, seed)?;
        info!("repeat {repeat}: {} on {} ({} train rows)", config.model, config.source, train.n_rows());

        let hc = config.hc_config(seed);
        let (result, hc_secs) = timed(|| Ok(hill_climb(&train, &hc)?))?;
        let learned = result.model;
        let test_loglik = learned.loglik(&test)?.total;

        let baseline_hc = if config.timed && config.model != ModelKind::Spbn {
            let base = ExperimentConfig {
                model: ModelKind::Spbn,
                ..config.clone()
            };
            Some(timed(|| Ok(hill_climb(&train, &base.hc_config(seed))?))?)
        } else {
            None
        };

        let mut rec = RunRecord {
            repeat,
            seed,
            model: config.model,
            grid_size: config.grid_size,
            n_train: config.n_train,
            arcs: learned.dag().to_spec().arcs,
            node_types: learned
                .types()
                .names()
                .iter()
                .cloned()
                .zip(learned.types().types().iter().copied())
                .collect(),
            hmd: None,
            shd: None,
            thmd: None,
            test_loglik,
            rmse: None,
            rmae_pct: None,
            hc_seconds: None,
            test_seconds: None,
            hc_ratio: None,
            test_ratio: None,
        };

        let family = config.model.family().node_type();
        let (candidate, reference) = match &data {
            Data::Synthetic(spec) => {
                let truth = spec.dag();
                rec.hmd = Some(hmd(truth, learned.dag())?);
                rec.shd = Some(shd(truth, learned.dag())?);
                rec.thmd = Some(thmd(&spec.true_types(family), learned.types())?);
                match evaluate_structure(truth, &spec.true_types(family), &train, &test, &options) {
                    Err(CliError::Model(e @ bspbn::Error::FkdeDimensionality { .. })) => {
                        warn!("repeat {repeat}: true structure not representable, skipping its metrics: {e}");
                        (None, None)
                    }
                    cand => {
                        let cand = cand?;
                        let reference = if family == NodeType::Ckde {
                            cand.clone()
                        } else {
                            evaluate_structure(truth, &spec.true_types(NodeType::Ckde), &train, &test, &options)?
                        };
                        let err = loglik_errors(&reference.rows, &cand.rows)?;
                        rec.rmse = Some(err.rmse);
                        rec.rmae_pct = err.rmae_percent;
                        (Some(cand), Some(reference))
                    }
                }
            }
            Data::Table(_) => {
                let cand = evaluate_structure(learned.dag(), learned.types(), &train, &test, &options)?;
                let reference = match &baseline_hc {
                    Some((base, _)) => Some(evaluate_structure(
                        base.model.dag(),
                        base.model.types(),
                        &train,
                        &test,
                        &options,
                    )?),
                    None => None,
                };
                (Some(cand), reference)
            }
        };

        if config.timed {
            rec.hc_seconds = Some(hc_secs);
            rec.test_seconds = candidate.as_ref().map(|c| c.seconds);
            if let Some((_, base_secs)) = &baseline_hc {
                rec.hc_ratio = Some(speed_ratio(*base_secs, hc_secs)?);
                if let (Some(c), Some(r)) = (&candidate, &reference) {
                    rec.test_ratio = Some(speed_ratio(r.seconds, c.seconds)?);
                }
            }
        }
        records.push(rec);
        networks.push(learned);
    }
    Ok(RunReport {
        config: config.clone(),
        records,
        networks,
    })
}
