use super::{laplacian_sigma, level_curvatures, ScalarField};
use crate::error::{FinslerError, Result};
use crate::jets::{seed, Jet};
use crate::metrics::{Density, MetricSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

/// Produces points on a level set `{f = t}`.
pub trait LevelSampler: Sync {
    fn sample(&self, f: &ScalarField, t: f64, level_index: usize) -> Result<Vec<Vec<f64>>>;
}

/// Shoots rays from `anchor` in seeded random directions and solves
/// `f(anchor + s θ) = t` on `(0, s_max]` by scan, bisection and Newton.
#[derive(Debug, Clone)]
pub struct RaySampler {
    pub anchor: Vec<f64>,
    pub s_max: f64,
    pub count: usize,
    pub seed: u64,
}

impl RaySampler {
    pub fn new(anchor: &[f64], s_max: f64, count: usize, seed: u64) -> Self {
        RaySampler {
            anchor: anchor.to_vec(),
            s_max,
            count,
            seed,
        }
    }

    fn point(&self, dir: &[f64], s: f64) -> Vec<f64> {
        self.anchor.iter().zip(dir).map(|(a, d)| a + s * d).collect()
    }

    fn along(&self, f: &ScalarField, dir: &[f64], s: f64) -> Result<(f64, f64)> {
        let sj = &seed(&[s], 1)?[0];
        let xs: Vec<Jet> = self.anchor.iter().zip(dir).map(|(a, d)| sj.clone().scale(*d) + *a).collect();
        let v = f.eval_jet(&xs)?;
        Ok((v.value(), v.partial(&[0])))
    }

    /// First root of `f(ray(s)) − t` on the ray.
    pub fn hit(&self, f: &ScalarField, dir: &[f64], t: f64) -> Result<f64> {
        const SCAN: usize = 400;
        let h = self.s_max / SCAN as f64;
        let mut lo = 1e-9 * self.s_max;
        let mut flo = self.along(f, dir, lo)?.0 - t;
        let mut found = None;
        for i in 1..=SCAN {
            let s = i as f64 * h;
            let fs = self.along(f, dir, s)?.0 - t;
            if fs == 0.0 {
                return Ok(s);
            }
            if fs.signum() != flo.signum() {
                found = Some((lo, s));
                break;
            }
            lo = s;
            flo = fs;
        }
        let (mut a, mut b) = found.ok_or_else(|| {
            FinslerError::Sampler(format!("level {t} not reached along ray {dir:?} within s <= {}", self.s_max))
        })?;
        let fa_sign = (self.along(f, dir, a)?.0 - t).signum();
        while b - a > 1e-12 * b.max(1.0) {
            let m = 0.5 * (a + b);
            let fm = self.along(f, dir, m)?.0 - t;
            if fm.signum() == fa_sign {
                a = m;
            } else {
                b = m;
            }
        }
        let mut s = 0.5 * (a + b);
        for _ in 0..3 {
            let (v, dv) = self.along(f, dir, s)?;
            if dv == 0.0 {
                break;
            }
            let next = s - (v - t) / dv;
            if !(next > a - (b - a) && next < b + (b - a)) {
                break;
            }
            s = next;
        }
        Ok(s)
    }
}

impl LevelSampler for RaySampler {
    fn sample(&self, f: &ScalarField, t: f64, level_index: usize) -> Result<Vec<Vec<f64>>> {
        let n = self.anchor.len();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(level_index as u64 + 1)));
        let dirs: Vec<Vec<f64>> = (0..self.count)
            .map(|_| {
                let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                v.into_iter().map(|a| a / norm).collect()
            })
            .collect();
        dirs.par_iter()
            .map(|d| Ok(self.point(d, self.hit(f, d, t)?)))
            .collect()
    }
}

/// Verdict thresholds for [`isoparametric_check`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    /// Max relative deviation of `F²(∇f)` on a level.
    pub transnormal: f64,
    /// Max deviation of `Δf` on a level, relative to `max(1, |mean|)`.
    pub laplacian: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            transnormal: 1e-5,
            laplacian: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelStats {
    pub t: f64,
    pub samples: usize,
    /// Fitted `a(t)`, the mean of `F²(∇f)`.
    pub a: f64,
    pub a_max_dev: f64,
    pub a_rel_dev: f64,
    /// Mean of `Δ̂f`.
    pub b_hat: f64,
    pub b_hat_max_dev: f64,
    /// Mean of `Δ_σf` when a density is available.
    pub b_sigma: Option<f64>,
    pub b_sigma_max_dev: Option<f64>,
    /// Max `|div_σ ∇f − (Δ̂f − S(∇f))|` over the samples.
    pub sigma_route_gap: Option<f64>,
    /// Fitted `b(t)`: `b_sigma` if present, else `b_hat`.
    pub b: f64,
    pub b_rel_dev: f64,
    /// Per-index mean of the ascending principal curvatures.
    pub kappa: Vec<f64>,
    pub kappa_max_dev: f64,
    pub transnormal: bool,
    pub isoparametric: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSetReport {
    pub metric: String,
    pub field: String,
    pub tolerances: Tolerances,
    pub levels: Vec<LevelStats>,
    pub is_transnormal: bool,
    pub is_isoparametric: bool,
}

impl LevelSetReport {
    pub fn level(&self, t: f64) -> Option<&LevelStats> {
        self.levels.iter().find(|l| l.t == t)
    }
}

struct Sample {
    a: f64,
    b_hat: f64,
    b_sigma: Option<(f64, f64)>,
    kappas: Vec<f64>,
}

fn spread(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (sum, count) = values.clone().fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    let mean = sum / count as f64;
    let dev = values.fold(0.0f64, |m, v| m.max((v - mean).abs()));
    (mean, dev)
}

/// Statistics of `F²(∇f)`, `Δf` and the level-set principal curvatures on
/// each level of `levels`.
pub fn isoparametric_check(
    metric: &MetricSpec,
    f: &ScalarField,
    levels: &[f64],
    sampler: &dyn LevelSampler,
    tol: Tolerances,
) -> Result<LevelSetReport> {
    let with_sigma = metric.density() != Density::None;
    let mut out = Vec::with_capacity(levels.len());
    for (li, &t) in levels.iter().enumerate() {
        let points = sampler.sample(f, t, li)?;
        if points.is_empty() {
            return Err(FinslerError::Sampler(format!("no samples on level {t}")));
        }
        let samples: Vec<Sample> = points
            .par_iter()
            .map(|x| -> Result<Sample> {
                let lc = level_curvatures(metric, f, x)?;
                let b_sigma = if with_sigma {
                    let ls = laplacian_sigma(metric, f, x)?;
                    Some((ls.divergence, ls.hat_minus_s))
                } else {
                    None
                };
                Ok(Sample {
                    a: lc.grad_norm * lc.grad_norm,
                    b_hat: lc.laplacian_hat,
                    b_sigma,
                    kappas: lc.kappas,
                })
            })
            .collect::<Result<_>>()?;
        let (a, a_dev) = spread(samples.iter().map(|s| s.a));
        let (b_hat, b_hat_dev) = spread(samples.iter().map(|s| s.b_hat));
        let (b_sigma, b_sigma_dev, gap) = if with_sigma {
            let (m, d) = spread(samples.iter().map(|s| s.b_sigma.unwrap().0));
            let gap = samples
                .iter()
                .map(|s| {
                    let (dv, hs) = s.b_sigma.unwrap();
                    (dv - hs).abs()
                })
                .fold(0.0, f64::max);
            (Some(m), Some(d), Some(gap))
        } else {
            (None, None, None)
        };
        let m = samples[0].kappas.len();
        let mut kappa = Vec::with_capacity(m);
        let mut kdev = 0.0f64;
        for i in 0..m {
            let (km, kd) = spread(samples.iter().map(|s| s.kappas[i]));
            kappa.push(km);
            kdev = kdev.max(kd);
        }
        let a_rel = if a.abs() > 0.0 { a_dev / a.abs() } else { a_dev };
        let (b, b_dev) = match (b_sigma, b_sigma_dev) {
            (Some(b), Some(d)) => (b, d),
            _ => (b_hat, b_hat_dev),
        };
        let b_rel = b_dev / b.abs().max(1.0);
        let transnormal = a_rel < tol.transnormal;
        let isoparametric = transnormal && b_rel < tol.laplacian;
        out.push(LevelStats {
            t,
            samples: samples.len(),
            a,
            a_max_dev: a_dev,
            a_rel_dev: a_rel,
            b_hat,
            b_hat_max_dev: b_hat_dev,
            b_sigma,
            b_sigma_max_dev: b_sigma_dev,
            sigma_route_gap: gap,
            b,
            b_rel_dev: b_rel,
            kappa,
            kappa_max_dev: kdev,
            transnormal,
            isoparametric,
        });
    }
    Ok(LevelSetReport {
        metric: metric.name().to_string(),
        field: f.name().to_string(),
        tolerances: tol,
        is_transnormal: out.iter().all(|l| l.transnormal),
        is_isoparametric: out.iter().all(|l| l.isoparametric),
        levels: out,
    })
}
