use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Experiment {
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::E1,
        Experiment::E2,
        Experiment::E3,
        Experiment::E4,
        Experiment::E5,
        Experiment::E6,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::E1 => "E1",
            Experiment::E2 => "E2",
            Experiment::E3 => "E3",
            Experiment::E4 => "E4",
            Experiment::E5 => "E5",
            Experiment::E6 => "E6",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Experiment::E1 => "curvature sanity and numerical kernel",
            Experiment::E2 => "helicoid in the conic metric",
            Experiment::E3 => "distance-sphere family",
            Experiment::E4 => "sphere eigenfunction",
            Experiment::E5 => "Riccati and focal consistency",
            Experiment::E6 => "umbilicity and level distance",
        }
    }

    /// Default for `samples` and the smallest accepted value.
    ///
    /// | id | meaning of `samples`            | default | min |
    /// |----|---------------------------------|---------|-----|
    /// | E1 | random flags per metric         | 100     | 10  |
    /// | E2 | grid points per parameter axis  | 20      | 4   |
    /// | E3 | rays per level                  | 16      | 4   |
    /// | E4 | rays per level                  | 12      | 4   |
    /// | E5 | patch points for the transport  | 4       | 1   |
    /// | E6 | grid points per parameter axis  | 15      | 4   |
    pub fn samples(self) -> (usize, usize) {
        match self {
            Experiment::E1 => (100, 10),
            Experiment::E2 => (20, 4),
            Experiment::E3 => (16, 4),
            Experiment::E4 => (12, 4),
            Experiment::E5 => (4, 1),
            Experiment::E6 => (15, 4),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Experiment {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.id().eq_ignore_ascii_case(s))
            .with_context(|| format!("unknown experiment {s:?} (expected E1..E6)"))
    }
}

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_SEED: u64 = 7;

/// Contents of a config file; every key is optional.
///
/// ```toml
/// experiment = "E3"          # E1..E6
/// metric = "euclidean(3)"    # overrides the experiment's metric
/// tol = 1e-10                # ODE tolerance (relative), default 1e-10
/// samples = 16               # see Experiment::samples
/// seed = 7                   # RNG seed for flags and ray directions
/// out = "results"            # output directory
/// plots = true               # write plot_*.svg
/// ```
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<String>,
    pub metric: Option<String>,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub plots: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// `other` wins wherever it sets a key.
    pub fn merge(self, other: ConfigFile) -> ConfigFile {
        ConfigFile {
            experiment: other.experiment.or(self.experiment),
            metric: other.metric.or(self.metric),
            tol: other.tol.or(self.tol),
            samples: other.samples.or(self.samples),
            seed: other.seed.or(self.seed),
            out: other.out.or(self.out),
            plots: other.plots.or(self.plots),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub metric: Option<String>,
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub plots: bool,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            metric: None,
            tol: DEFAULT_TOL,
            samples: experiment.samples().0,
            seed: DEFAULT_SEED,
            out: None,
            plots: true,
        }
    }

    pub fn from_file(experiment: Experiment, file: &ConfigFile) -> Result<Self> {
        let mut cfg = ExperimentConfig::new(experiment);
        cfg.metric = file.metric.clone();
        if let Some(t) = file.tol {
            cfg.tol = t;
        }
        if let Some(s) = file.samples {
            cfg.samples = s;
        }
        if let Some(s) = file.seed {
            cfg.seed = s;
        }
        cfg.out = file.out.clone();
        cfg.plots = file.plots.unwrap_or(true);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1e-3) {
            bail!("tol must lie in (0, 1e-3), got {}", self.tol);
        }
        let min = self.experiment.samples().1;
        if self.samples < min {
            bail!("{} needs samples >= {min}, got {}", self.experiment, self.samples);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_keys_and_overrides() {
        let file: ConfigFile = toml::from_str("experiment = \"e4\"\nsamples = 6\nseed = 3\n").unwrap();
        let cli = ConfigFile {
            seed: Some(11),
            ..Default::default()
        };
        let merged = file.merge(cli);
        let exp: Experiment = merged.experiment.as_deref().unwrap().parse().unwrap();
        let cfg = ExperimentConfig::from_file(exp, &merged).unwrap();
        assert_eq!((cfg.experiment, cfg.samples, cfg.seed, cfg.tol), (Experiment::E4, 6, 11, DEFAULT_TOL));
        assert!(toml::from_str::<ConfigFile>("grid = 3").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::new(Experiment::E2);
        cfg.samples = 3;
        assert!(cfg.validate().is_err());
        cfg.samples = 4;
        cfg.tol = 0.0;
        assert!(cfg.validate().is_err());
        assert!("E7".parse::<Experiment>().is_err());
    }
}
