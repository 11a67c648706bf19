use crate::config::ExperimentConfig;
use anyhow::{Context, Result};
use serde::Serialize;
use std::path::{Path, PathBuf};

/// One verdict. `measured` is the residual (or flag value) and `threshold`
/// the bound it was held to.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: Option<f64>,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    /// Passes iff `measured < threshold`.
    pub fn below(name: impl Into<String>, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            measured,
            threshold: Some(threshold),
            passed: measured < threshold,
            detail: detail.into(),
        }
    }

    pub fn flag(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            measured: if passed { 1.0 } else { 0.0 },
            threshold: None,
            passed,
            detail: detail.into(),
        }
    }

    pub fn error(name: impl Into<String>, err: &anyhow::Error) -> Self {
        Check {
            name: name.into(),
            measured: f64::NAN,
            threshold: None,
            passed: false,
            detail: format!("error: {err:#}"),
        }
    }
}

/// A raw sample for `table.csv`.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub series: String,
    pub param: f64,
    pub measured: f64,
    pub expected: Option<f64>,
}

impl Row {
    pub fn new(series: &str, param: f64, measured: f64, expected: Option<f64>) -> Self {
        Row {
            series: series.to_string(),
            param,
            measured,
            expected,
        }
    }
}

/// Output of one section of an experiment.
#[derive(Debug, Clone, Default)]
pub struct Section {
    pub checks: Vec<Check>,
    pub rows: Vec<Row>,
    pub extras: Vec<(String, serde_json::Value)>,
}

impl Section {
    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn row(&mut self, series: &str, param: f64, measured: f64, expected: Option<f64>) {
        self.rows.push(Row::new(series, param, measured, expected));
    }

    pub fn extra(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.extras.push((key.to_string(), serde_json::to_value(value)?));
        Ok(())
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SectionSummary {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub title: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub passed: usize,
    pub failed: usize,
    pub sections: Vec<SectionSummary>,
    pub extras: serde_json::Map<String, serde_json::Value>,
    #[serde(skip)]
    pub rows: Vec<Row>,
}

impl ExperimentReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.sections.iter().flat_map(|s| &s.checks)
    }

    pub fn section(&self, name: &str) -> Option<&SectionSummary> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn dir(&self, out: &Path) -> PathBuf {
        out.join(&self.experiment)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn write_table(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(["series", "param", "measured", "expected", "abs_error"])?;
        for r in &self.rows {
            let (exp, err) = match r.expected {
                Some(e) => (e.to_string(), (r.measured - e).abs().to_string()),
                None => (String::new(), String::new()),
            };
            w.write_record([r.series.clone(), r.param.to_string(), r.measured.to_string(), exp, err])?;
        }
        w.flush()?;
        Ok(())
    }
}
