mod e1;
mod e2;
mod e3;
mod e4;
mod e5;
mod e6;

use crate::config::{Experiment, ExperimentConfig};
use crate::plot::PlotSpec;
use crate::report::Section;
use anyhow::{Context, Result};
use finsler::metrics::{parse_metric, Density, MetricSpec};
use finsler::scalar::{laplacian_sigma, level_curvatures, RaySampler, ScalarField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct SectionDef {
    pub name: &'static str,
    pub run: fn(&Ctx) -> Result<Section>,
}

pub struct ExperimentDef {
    pub sections: &'static [SectionDef],
    pub plots: &'static [PlotSpec],
}

pub fn definition(e: Experiment) -> &'static ExperimentDef {
    match e {
        Experiment::E1 => &e1::DEF,
        Experiment::E2 => &e2::DEF,
        Experiment::E3 => &e3::DEF,
        Experiment::E4 => &e4::DEF,
        Experiment::E5 => &e5::DEF,
        Experiment::E6 => &e6::DEF,
    }
}

/// Parsed configuration handed to each section.
pub struct Ctx {
    pub cfg: ExperimentConfig,
    pub metric: Option<MetricSpec>,
}

impl Ctx {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let metric = match &cfg.metric {
            Some(src) => Some(parse_metric(src).with_context(|| format!("metric {src:?}"))?),
            None => None,
        };
        Ok(Ctx {
            cfg: cfg.clone(),
            metric,
        })
    }

    pub fn tol(&self) -> f64 {
        self.cfg.tol
    }

    pub fn samples(&self) -> usize {
        self.cfg.samples
    }

    /// Independent stream per section so results do not depend on which
    /// sections ran before.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(stream);
        rng
    }

    pub fn metric_or(&self, default: &str) -> Result<MetricSpec> {
        match &self.metric {
            Some(m) => Ok(m.clone()),
            None => Ok(parse_metric(default)?),
        }
    }

    /// The override if it is a sphere chart, else `default`.
    pub fn sphere_or(&self, default: &str) -> Result<MetricSpec> {
        match &self.metric {
            Some(m) if m.sphere_chart().is_some() => Ok(m.clone()),
            Some(m) => anyhow::bail!("{} expects riemannian_sphere(n, c), got {}", self.cfg.experiment, m.name()),
            None => Ok(parse_metric(default)?),
        }
    }
}

/// `F²(∇f)`, `b(f)` and the level curvatures at one point.
#[derive(Debug, Clone)]
pub struct Measured {
    pub x: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub kappas: Vec<f64>,
}

/// `b` is `Δ_σ f` when the metric has a density, otherwise `Δ̂f`.
pub fn measure_at(metric: &MetricSpec, f: &ScalarField, x: &[f64]) -> Result<Measured> {
    let lc = level_curvatures(metric, f, x)?;
    let b = if metric.density() != Density::None {
        laplacian_sigma(metric, f, x)?.divergence
    } else {
        lc.laplacian_hat
    };
    Ok(Measured {
        x: x.to_vec(),
        a: lc.grad_norm * lc.grad_norm,
        b,
        kappas: lc.kappas,
    })
}

/// Measures on `{f = t}` where the ray `anchor + s dir` first meets it.
pub struct RayProbe {
    pub metric: MetricSpec,
    pub field: ScalarField,
    pub anchor: Vec<f64>,
    pub dir: Vec<f64>,
    pub s_max: f64,
}

impl RayProbe {
    pub fn point(&self, t: f64) -> Result<Vec<f64>> {
        let s = RaySampler::new(&self.anchor, self.s_max, 1, 0).hit(&self.field, &self.dir, t)?;
        Ok(self.anchor.iter().zip(&self.dir).map(|(a, d)| a + s * d).collect())
    }

    pub fn at(&self, t: f64) -> Result<Measured> {
        measure_at(&self.metric, &self.field, &self.point(t)?)
    }

    pub fn a(&self) -> impl Fn(f64) -> finsler::Result<f64> + '_ {
        move |t| self.at(t).map(|m| m.a).map_err(to_finsler)
    }

    pub fn b(&self) -> impl Fn(f64) -> finsler::Result<f64> + '_ {
        move |t| self.at(t).map(|m| m.b).map_err(to_finsler)
    }

    pub fn kappas(&self) -> impl Fn(f64) -> finsler::Result<Vec<f64>> + '_ {
        move |t| self.at(t).map(|m| m.kappas).map_err(to_finsler)
    }
}

fn to_finsler(e: anyhow::Error) -> finsler::FinslerError {
    match e.downcast::<finsler::FinslerError>() {
        Ok(fe) => fe,
        Err(e) => finsler::FinslerError::Unsupported(format!("{e:#}")),
    }
}

/// Unit vector with a slight tilt off the coordinate axes.
pub fn probe_direction(n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * i as f64).collect();
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

pub fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .fold(0.0f64, |m, v| if m.is_nan() || v.is_nan() { f64::NAN } else { m.max(v.abs()) })
}
