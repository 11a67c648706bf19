use super::ode::{integrate, OdeOptions, Solution, Termination};
use crate::error::{FinslerError, Result};
use crate::metrics::MetricSpec;
use crate::spray::spray_vector;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct GeodesicSample {
    pub s: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Solution of `ẍ + 2G(x, ẋ) = 0` with its dense output.
#[derive(Debug, Clone)]
pub struct GeodesicTrajectory {
    pub metric: MetricSpec,
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub samples: Vec<GeodesicSample>,
    /// `s` at which the trajectory left the chart or metric domain, if it did
    pub exit: Option<f64>,
    solution: Solution,
}

impl GeodesicTrajectory {
    pub fn s_end(&self) -> f64 {
        self.samples.last().map(|p| p.s).unwrap_or(0.0)
    }

    /// Hermite-interpolated `(x(s), y(s))`.
    pub fn at(&self, s: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.x0.len();
        let mut z = self.solution.interpolate(s);
        let y = z.split_off(n);
        (z, y)
    }

    /// `max_s |F(x(s), y(s)) − F(x₀, y₀)|` over the nodes.
    pub fn speed_drift(&self) -> Result<f64> {
        let f0 = self.metric.norm(&self.x0, &self.y0)?;
        let mut d = 0.0f64;
        for p in &self.samples {
            d = d.max((self.metric.norm(&p.x, &p.y)? - f0).abs());
        }
        Ok(d)
    }

    pub fn csv_header(&self) -> Vec<String> {
        let n = self.x0.len();
        let mut h = vec!["s".to_string()];
        h.extend((0..n).map(|i| format!("x{i}")));
        h.extend((0..n).map(|i| format!("y{i}")));
        h
    }

    pub fn csv_rows(&self) -> Vec<Vec<f64>> {
        self.samples
            .iter()
            .map(|p| std::iter::once(p.s).chain(p.x.iter().copied()).chain(p.y.iter().copied()).collect())
            .collect()
    }
}

pub(crate) fn geodesic_rhs(metric: &MetricSpec, z: &[f64]) -> Result<Vec<f64>> {
    let n = metric.dim();
    let (x, y) = z.split_at(n);
    let g = spray_vector(metric, x, y)?;
    let mut out = y.to_vec();
    out.extend(g.iter().map(|v| -2.0 * v));
    Ok(out)
}

/// Integrates the geodesic from `(x0, y0)` over `[0, s_max]`. A trajectory
/// that leaves the domain is truncated there and `exit` records where.
pub fn integrate_geodesic(metric: &MetricSpec, x0: &[f64], y0: &[f64], s_max: f64, tol: f64) -> Result<GeodesicTrajectory> {
    let n = metric.dim();
    if x0.len() != n || y0.len() != n {
        return Err(FinslerError::Dimension {
            expected: n,
            got: x0.len().max(y0.len()),
        });
    }
    metric.check_point(x0)?;
    if y0.iter().all(|v| *v == 0.0) {
        return Err(FinslerError::domain(metric.name(), "zero initial velocity"));
    }
    let mut z0 = x0.to_vec();
    z0.extend_from_slice(y0);
    let opts = OdeOptions::with_tol(tol);
    let mut exit = None;
    let solution = match integrate(|_s, z| geodesic_rhs(metric, z), 0.0, &z0, s_max, &opts, None, None) {
        Ok(sol) => sol,
        Err(FinslerError::Integration { s, reason }) => {
            // retry up to the last good point so the caller keeps the samples
            exit = Some(s);
            if s <= 0.0 {
                return Err(FinslerError::Integration { s, reason });
            }
            integrate(|_s, z| geodesic_rhs(metric, z), 0.0, &z0, s, &opts, None, None)?
        }
        Err(e) => return Err(e),
    };
    if let Termination::StepUnderflow(s) = solution.termination {
        return Err(FinslerError::Integration {
            s,
            reason: "step size underflow".to_string(),
        });
    }
    let samples = solution
        .s
        .iter()
        .zip(&solution.y)
        .map(|(s, z)| GeodesicSample {
            s: *s,
            x: z[..n].to_vec(),
            y: z[n..].to_vec(),
        })
        .collect();
    Ok(GeodesicTrajectory {
        metric: metric.clone(),
        x0: x0.to_vec(),
        y0: y0.to_vec(),
        samples,
        exit,
        solution,
    })
}
