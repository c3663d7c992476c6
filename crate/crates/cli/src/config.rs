//! Run configuration (TOML).
//!
//! ```toml
//! seed = 7
//! clusters = 5
//! truncation_fraction = 0.35
//! archive_cells = 200
//! problem = "problem"          # directory written by `morphreg synth`
//!
//! [[schedule]]
//! grid_resolution = 6          # or [6, 6, 6]
//! population_size = 250
//! generations = 300
//! ```
//!
//! Without a `schedule`, top-level `grid_resolution`, `population_size`
//! and `generations` describe a single stage; with none of them the
//! default two-stage 6³ → 11³ schedule runs.

use std::fs;
use std::path::{Path, PathBuf};

use morphreg::multires::{validate_schedule, Stage};
use morphreg::optimizer::OptimizerConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum Resolution {
    Uniform(usize),
    Axes([usize; 3]),
}

impl Resolution {
    pub fn axes(self) -> [usize; 3] {
        match self {
            Resolution::Uniform(n) => [n; 3],
            Resolution::Axes(a) => a,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    pub grid_resolution: Resolution,
    pub population_size: usize,
    pub generations: usize,
}

/// The file as written by the user; every key is optional.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub clusters: Option<usize>,
    pub truncation_fraction: Option<f64>,
    pub archive_cells: Option<usize>,
    pub init_jitter: Option<f64>,
    pub distribution_multiplier: Option<f64>,
    pub grid_resolution: Option<Resolution>,
    pub population_size: Option<usize>,
    pub generations: Option<usize>,
    pub schedule: Option<Vec<StageConfig>>,
    pub problem: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSpec {
    pub grid_resolution: [usize; 3],
    pub population_size: usize,
    pub generations: usize,
}

impl From<StageSpec> for Stage {
    fn from(s: StageSpec) -> Stage {
        Stage {
            grid_resolution: s.grid_resolution,
            population_size: s.population_size,
            generations: s.generations,
        }
    }
}

/// Fully resolved settings, echoed into the bundle manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub clusters: usize,
    pub truncation_fraction: f64,
    pub archive_cells: usize,
    pub init_jitter: f64,
    pub distribution_multiplier: f64,
    pub schedule: Vec<StageSpec>,
    /// Problem directory, absolute or relative to the config file.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub problem: Option<PathBuf>,
}

pub fn default_schedule() -> Vec<StageSpec> {
    vec![
        StageSpec {
            grid_resolution: [6; 3],
            population_size: 250,
            generations: 300,
        },
        StageSpec {
            grid_resolution: [11; 3],
            population_size: 500,
            generations: 600,
        },
    ]
}

impl Default for RunConfig {
    fn default() -> Self {
        ConfigFile::default().resolve().expect("defaults are valid")
    }
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|source| CliError::Toml {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let d = OptimizerConfig::default();
        let single = self.grid_resolution.is_some()
            || self.population_size.is_some()
            || self.generations.is_some();
        let schedule = match (&self.schedule, single) {
            (Some(_), true) => {
                return Err(CliError::Config(
                    "give either `schedule` or top-level stage keys, not both".into(),
                ))
            }
            (Some(s), false) => s
                .iter()
                .map(|s| StageSpec {
                    grid_resolution: s.grid_resolution.axes(),
                    population_size: s.population_size,
                    generations: s.generations,
                })
                .collect(),
            (None, true) => vec![StageSpec {
                grid_resolution: self
                    .grid_resolution
                    .map(Resolution::axes)
                    .unwrap_or(d.grid_resolution),
                population_size: self.population_size.unwrap_or(d.population_size),
                generations: self.generations.unwrap_or(d.generations),
            }],
            (None, false) => default_schedule(),
        };
        let config = RunConfig {
            seed: self.seed.unwrap_or(d.seed),
            clusters: self.clusters.unwrap_or(d.clusters),
            truncation_fraction: self.truncation_fraction.unwrap_or(d.truncation_fraction),
            archive_cells: self.archive_cells.unwrap_or(d.archive_cells),
            init_jitter: self.init_jitter.unwrap_or(d.init_jitter),
            distribution_multiplier: self
                .distribution_multiplier
                .unwrap_or(d.distribution_multiplier),
            schedule,
            problem: self.problem.clone(),
        };
        config.validate()?;
        Ok(config)
    }
}

impl RunConfig {
    /// Reads and resolves a config file; a relative `problem` path is
    /// taken relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config = ConfigFile::parse(&text, path)?.resolve()?;
        if let Some(p) = &config.problem {
            if p.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                config.problem = Some(base.join(p));
            }
        }
        Ok(config)
    }

    pub fn stages(&self) -> Vec<Stage> {
        self.schedule.iter().map(|&s| s.into()).collect()
    }

    /// Optimizer settings shared by every stage.
    pub fn optimizer(&self) -> OptimizerConfig {
        let first = self.schedule.first().copied().unwrap_or(StageSpec {
            grid_resolution: [6; 3],
            population_size: 1,
            generations: 0,
        });
        OptimizerConfig {
            grid_resolution: first.grid_resolution,
            population_size: first.population_size,
            generations: first.generations,
            seed: self.seed,
            clusters: self.clusters,
            truncation_fraction: self.truncation_fraction,
            archive_cells: self.archive_cells,
            init_jitter: self.init_jitter,
            distribution_multiplier: self.distribution_multiplier,
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_schedule(&self.stages())?;
        self.optimizer().validate()?;
        Ok(())
    }
}
