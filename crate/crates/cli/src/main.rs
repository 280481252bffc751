use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bspbn::metrics::{hmd, shd, thmd};
use bspbn::synth::build_synthetic;
use bspbn::NodeType;
use bspbn_cli::{
    load_csv, render_csv, run_experiment, write_csv, write_report, CliError, ExperimentConfig, ModelKind,
    NetworkFile, Result, RunReport, Source,
};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

#[derive(Parser)]
#[command(name = "bspbn", version, about = "Learn and evaluate semiparametric Bayesian networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run repeated structure learning on one configuration.
    Learn(ExperimentArgs),
    /// Log-likelihood of a CSV under a fitted network file.
    Evaluate {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Structure file to compare the network against.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Per-row log-likelihood CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat an experiment over several grid sizes.
    SweepGrid {
        #[command(flatten)]
        experiment: ExperimentArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [10, 25, 50, 80, 100, 125])]
        grid_sizes: Vec<usize>,
    },
    /// Repeat an experiment over several training set sizes.
    SweepInstances {
        #[command(flatten)]
        experiment: ExperimentArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [512, 1024, 2048, 4096, 8192, 16384])]
        n_trains: Vec<usize>,
    },
    /// Sample one of the built-in synthetic networks to CSV.
    SampleSynthetic {
        #[arg(long)]
        id: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the true structure as a network file.
        #[arg(long)]
        network: Option<PathBuf>,
    },
}

/// Flags override the values read from `--config`.
#[derive(Args, Clone)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// `synthetic:<1-8>` or a CSV path.
    #[arg(long)]
    source: Option<Source>,
    #[arg(long)]
    model: Option<ModelKind>,
    #[arg(long)]
    grid_size: Option<usize>,
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    max_parents: Option<usize>,
    #[arg(long)]
    fkde_max_parents: Option<usize>,
    #[arg(long)]
    fkde_max_elements: Option<u128>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report base path; `.csv` and `.json` are written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    timed: bool,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = &self.source {
            c.source = v.clone();
        }
        if let Some(v) = self.model {
            c.model = v;
        }
        if let Some(v) = self.grid_size {
            c.grid_size = v;
        }
        if let Some(v) = self.n_train {
            c.n_train = v;
        }
        if let Some(v) = self.n_test {
            c.n_test = v;
        }
        if let Some(v) = self.folds {
            c.folds = v;
        }
        if let Some(v) = self.patience {
            c.patience = v;
        }
        if self.max_parents.is_some() {
            c.max_parents = self.max_parents;
        }
        if let Some(v) = self.fkde_max_parents {
            c.guard.max_parents = v;
        }
        if let Some(v) = self.fkde_max_elements {
            c.guard.max_padded_elements = v;
        }
        if let Some(v) = self.repeats {
            c.repeats = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        c.timed |= self.timed;
        c.validate()?;
        Ok(c)
    }
}

fn emit(report: &RunReport, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => {
            let (csv, json) = write_report(report, p)?;
            info!("wrote {} and {}", csv.display(), json.display());
        }
        None => print!("{}", render_csv(report)?),
    }
    Ok(())
}

fn learn(args: &ExperimentArgs) -> Result<()> {
    let config = args.resolve()?;
    let report = run_experiment(&config)?;
    emit(&report, config.out.as_deref())?;
    if let Some(out) = &config.out {
        let stem = out.with_extension("");
        for (rec, model) in report.records.iter().zip(&report.networks) {
            let path = PathBuf::from(format!("{}.r{}.network.json", stem.display(), rec.repeat));
            NetworkFile::from_model(model)?.write(&path)?;
        }
    }
    Ok(())
}

fn sweep(args: &ExperimentArgs, configs: impl Fn(&ExperimentConfig) -> Vec<ExperimentConfig>) -> Result<()> {
    let base = args.resolve()?;
    let mut reports = Vec::new();
    for config in configs(&base) {
        match config.validate().and_then(|_| run_experiment(&config)) {
            Ok(r) => reports.push(r),
            Err(e @ CliError::Model(bspbn::Error::FkdeDimensionality { .. })) => {
                warn!("skipping M={} n_train={}: {e}", config.grid_size, config.n_train)
            }
            Err(e) => return Err(e),
        }
    }
    let report = RunReport::merge(reports).ok_or_else(|| CliError::Config("no sweep point could run".into()))?;
    emit(&report, base.out.as_deref())
}

fn evaluate(network: &Path, data: &Path, truth: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let model = NetworkFile::read(network)?.to_model()?;
    let data = load_csv(data)?;
    let ll = model.loglik(&data)?;
    println!(
        "rows={} total_loglik={} mean_loglik={}",
        ll.rows.len(),
        ll.total,
        ll.total / ll.rows.len() as f64
    );
    if let Some(t) = truth {
        let file = NetworkFile::read(t)?;
        let (dag, types) = (file.dag()?, file.node_types()?);
        println!(
            "hmd={} shd={} thmd={}",
            hmd(&dag, model.dag())?,
            shd(&dag, model.dag())?,
            thmd(&types, model.types())?
        );
    }
    if let Some(p) = out {
        let mut w = csv::Writer::from_path(p)?;
        w.write_record(["row", "loglik"])?;
        for (i, v) in ll.rows.iter().enumerate() {
            w.write_record([i.to_string(), v.to_string()])?;
        }
        w.flush().map_err(|e| CliError::Io {
            path: p.to_path_buf(),
            source: e,
        })?;
    }
    Ok(())
}

fn sample(id: u32, n: usize, seed: u64, out: &Path, network: Option<&Path>) -> Result<()> {
    let spec = build_synthetic(id)?;
    write_csv(&spec.sample(n, seed)?, out)?;
    if let Some(p) = network {
        NetworkFile::structure(spec.dag(), &spec.true_types(NodeType::Ckde))?.write(p)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Learn(args) => learn(&args),
        Command::Evaluate {
            network,
            data,
            truth,
            out,
        } => evaluate(&network, &data, truth.as_deref(), out.as_deref()),
        Command::SweepGrid {
            experiment,
            grid_sizes,
        } => sweep(&experiment, |base| {
            grid_sizes
                .iter()
                .map(|&m| ExperimentConfig {
                    grid_size: m,
                    ..base.clone()
                })
                .collect()
        }),
        Command::SweepInstances { experiment, n_trains } => sweep(&experiment, |base| {
            n_trains
                .iter()
                .map(|&n| ExperimentConfig {
                    n_train: n,
                    ..base.clone()
                })
                .collect()
        }),
        Command::SampleSynthetic {
            id,
            n,
            seed,
            out,
            network,
        } => sample(id, n, seed, &out, network.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
