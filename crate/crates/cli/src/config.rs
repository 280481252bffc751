//! Experiment configuration, read from a JSON document whose keys mirror the
//! field names below. Missing keys take their defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bspbn::{BinningRule, FkdeGuardConfig, HcConfig, NonparamFamily};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Where the data comes from. Written as `synthetic:<id>` or a CSV path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Source {
    Synthetic(u32),
    Csv(PathBuf),
}

impl FromStr for Source {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(CliError::Config("empty source".into()));
        }
        match s.strip_prefix("synthetic:") {
            Some(id) => {
                let id: u32 = id
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad synthetic id `{id}`")))?;
                Ok(Source::Synthetic(id))
            }
            None => Ok(Source::Csv(PathBuf::from(s))),
        }
    }
}

impl TryFrom<String> for Source {
    type Error = CliError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Source> for String {
    fn from(s: Source) -> String {
        s.to_string()
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Synthetic(id) => write!(f, "synthetic:{id}"),
            Source::Csv(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Spbn,
    BspbnSimple,
    BspbnLinear,
    BspbnFkdeSimple,
    BspbnFkdeLinear,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Spbn,
        ModelKind::BspbnSimple,
        ModelKind::BspbnLinear,
        ModelKind::BspbnFkdeSimple,
        ModelKind::BspbnFkdeLinear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Spbn => "spbn",
            ModelKind::BspbnSimple => "bspbn-simple",
            ModelKind::BspbnLinear => "bspbn-linear",
            ModelKind::BspbnFkdeSimple => "bspbn-fkde-simple",
            ModelKind::BspbnFkdeLinear => "bspbn-fkde-linear",
        }
    }

    pub fn family(self) -> NonparamFamily {
        match self {
            ModelKind::Spbn => NonparamFamily::Ckde,
            ModelKind::BspbnSimple | ModelKind::BspbnLinear => NonparamFamily::Sbkde,
            ModelKind::BspbnFkdeSimple | ModelKind::BspbnFkdeLinear => NonparamFamily::Fkde,
        }
    }

    /// Binning rule; irrelevant for the unbinned baseline.
    pub fn rule(self) -> BinningRule {
        match self {
            ModelKind::BspbnLinear | ModelKind::BspbnFkdeLinear => BinningRule::Linear,
            _ => BinningRule::Simple,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| CliError::Config(format!("unknown model `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: Source,
    pub model: ModelKind,
    pub grid_size: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub folds: usize,
    pub patience: usize,
    pub max_parents: Option<usize>,
    pub guard: FkdeGuardConfig,
    pub repeats: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Record wall-clock timings and run the paired SPBN baseline.
    pub timed: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            source: Source::Synthetic(3),
            model: ModelKind::BspbnSimple,
            grid_size: 100,
            n_train: 16384,
            n_test: 2048,
            folds: 5,
            patience: 3,
            max_parents: None,
            guard: FkdeGuardConfig::default(),
            repeats: 5,
            seed: 0,
            out: None,
            timed: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("grid_size", self.grid_size),
            ("n_train", self.n_train),
            ("n_test", self.n_test),
            ("repeats", self.repeats),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(CliError::Config(format!("{name} must be positive")));
            }
        }
        if let Source::Synthetic(id) = self.source {
            if !(1..=8).contains(&id) {
                return Err(CliError::Config(format!("synthetic id must be 1..=8, got {id}")));
            }
        }
        self.hc_config(self.seed).validate()?;
        if self.model.family() == NonparamFamily::Fkde {
            let parents = self.max_parents.unwrap_or(0);
            self.guard.check(&vec![self.grid_size; parents + 1])?;
        }
        Ok(())
    }

    /// Search settings for this config's model with the given seed.
    pub fn hc_config(&self, seed: u64) -> HcConfig {
        HcConfig {
            patience: self.patience,
            folds: self.folds,
            family: self.model.family(),
            rule: self.model.rule(),
            grid_size: self.grid_size,
            guard: self.guard,
            max_parents: self.max_parents,
            seed,
        }
    }
}
