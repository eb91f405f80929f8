use std::path::{Path, PathBuf};

use coalescent_core::diagnostics::{StudyConfig, Thresholds};
use coalescent_core::sim::Scheme;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Classify,
    Simulate,
    Analyze,
    Report,
}

/// Values as they may appear in a `--config` TOML file. Keys mirror the flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub measure: Option<String>,
    pub n: Option<OneOrMany>,
    pub horizon: Option<f64>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub scheme: Option<Scheme>,
    pub x_min: Option<f64>,
    pub bmax: Option<usize>,
    pub eps_grid: Option<Vec<f64>>,
    pub delta_grid: Option<Vec<f64>>,
    pub eta_grid: Option<Vec<f64>>,
    pub thin_delta_grid: Option<Vec<f64>>,
    pub format: Option<Format>,
    pub input: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub thresholds: Option<Thresholds>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<usize> {
        match self {
            OneOrMany::One(n) => vec![n],
            OneOrMany::Many(v) => v,
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
    }
}

/// Fully resolved settings of one run. Echoed into the manifest and
/// sufficient to repeat it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub measure: String,
    pub n: Vec<usize>,
    pub horizon: Option<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub scheme: Scheme,
    pub x_min: Option<f64>,
    pub bmax: usize,
    pub eps_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    pub eta_grid: Vec<f64>,
    pub thin_delta_grid: Vec<f64>,
    pub thresholds: Thresholds,
    pub format: Format,
    pub input: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    /// Flags win over the file, the file over per-command defaults.
    pub fn resolve(command: CommandKind, flags: FileConfig, file: FileConfig) -> Result<Self, CliError> {
        let study = StudyConfig::default();
        let (n_default, reps_default, format_default) = match command {
            CommandKind::Classify => (vec![], 1, Format::Text),
            CommandKind::Simulate => (vec![10], 1, Format::Json),
            CommandKind::Analyze => (study.n_grid.clone(), study.replicates, Format::Csv),
            CommandKind::Report => (study.n_grid.clone(), study.replicates, Format::Text),
        };
        let measure = flags.measure.or(file.measure).ok_or_else(|| CliError::Usage("--measure is required".into()));
        let input = flags.input.or(file.input);
        let measure = match (command, measure, &input) {
            (CommandKind::Analyze, Err(_), Some(_)) => String::new(),
            (_, m, _) => m?,
        };
        Ok(Self {
            measure,
            n: flags.n.or(file.n).map_or(n_default, OneOrMany::into_vec),
            horizon: flags.horizon.or(file.horizon),
            replicates: flags.replicates.or(file.replicates).unwrap_or(reps_default),
            seed: flags.seed.or(file.seed).unwrap_or(study.seed),
            scheme: flags.scheme.or(file.scheme).unwrap_or(study.scheme),
            x_min: flags.x_min.or(file.x_min),
            bmax: flags.bmax.or(file.bmax).unwrap_or(coalescent_core::classification::ClassificationConfig::default().b_max),
            eps_grid: flags.eps_grid.or(file.eps_grid).unwrap_or(study.eps_grid),
            delta_grid: flags.delta_grid.or(file.delta_grid).unwrap_or(study.delta_grid),
            eta_grid: flags.eta_grid.or(file.eta_grid).unwrap_or(study.eta_grid),
            thin_delta_grid: flags.thin_delta_grid.or(file.thin_delta_grid).unwrap_or(study.thin_delta_grid),
            thresholds: flags.thresholds.or(file.thresholds).unwrap_or(study.thresholds),
            format: flags.format.or(file.format).unwrap_or(format_default),
            input: input.map(|p| std::path::absolute(&p).unwrap_or(p)),
            jobs: flags.jobs.or(file.jobs),
        })
    }

    pub fn study(&self) -> StudyConfig {
        StudyConfig {
            n_grid: self.n.clone(),
            eps_grid: self.eps_grid.clone(),
            delta_grid: self.delta_grid.clone(),
            eta_grid: self.eta_grid.clone(),
            thin_delta_grid: self.thin_delta_grid.clone(),
            replicates: self.replicates,
            seed: self.seed,
            scheme: self.scheme,
            x_min: self.x_min,
            thresholds: self.thresholds,
        }
    }
}
