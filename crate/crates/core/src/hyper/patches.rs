use super::{HypersurfacePatch, ParamDomain};
use crate::error::{FinslerError, Result};
use crate::jets::{seed, solve_implicit, Jet};
use crate::metrics::MetricSpec;
use crate::scalar::{RaySampler, ScalarField};
use std::f64::consts::PI;

/// Unit direction from angles: `θ` in the plane, `(ϑ, ψ)` in space.
fn direction(u: &[Jet], n: usize) -> Result<Vec<Jet>> {
    match n {
        2 => Ok(vec![u[0].cos()?, u[0].sin()?]),
        3 => {
            let (st, ct) = (u[0].sin()?, u[0].cos()?);
            Ok(vec![&st * &u[1].cos()?, &st * &u[1].sin()?, ct])
        }
        _ => Err(FinslerError::Unsupported(format!("angular patches in dimension {n}"))),
    }
}

fn angle_domain(n: usize) -> ParamDomain {
    if n == 2 {
        ParamDomain::new(&[0.0], &[2.0 * PI])
    } else {
        ParamDomain::new(&[0.0, 0.0], &[PI, 2.0 * PI])
    }
}

fn outward(center: &[f64], x: &[f64]) -> Vec<f64> {
    x.iter().zip(center).map(|(a, b)| a - b).collect()
}

/// `(u cos v, u sin v, a v)` on `(0, ½) × (0, 2π)`.
#[derive(Debug, Clone)]
pub struct Helicoid {
    pub a: f64,
}

impl HypersurfacePatch for Helicoid {
    fn name(&self) -> String {
        format!("helicoid(a={})", self.a)
    }
    fn ambient_dim(&self) -> usize {
        3
    }
    fn domain(&self) -> ParamDomain {
        ParamDomain::new(&[0.0, 0.0], &[0.5, 2.0 * PI])
    }
    fn eval(&self, u: &[Jet]) -> Result<Vec<Jet>> {
        Ok(vec![&u[0] * &u[1].cos()?, &u[0] * &u[1].sin()?, u[1].clone().scale(self.a)])
    }
    fn orientation(&self, u: &[f64], _x: &[f64]) -> Vec<f64> {
        // φ_u × φ_v
        vec![self.a * u[1].sin(), -self.a * u[1].cos(), u[0]]
    }
}

/// Euclidean round sphere of radius `r` about `center`, hinted outward.
#[derive(Debug, Clone)]
pub struct RoundSphere {
    pub radius: f64,
    pub center: Vec<f64>,
}

impl HypersurfacePatch for RoundSphere {
    fn name(&self) -> String {
        format!("round_sphere(R={})", self.radius)
    }
    fn ambient_dim(&self) -> usize {
        self.center.len()
    }
    fn domain(&self) -> ParamDomain {
        angle_domain(self.center.len())
    }
    fn eval(&self, u: &[Jet]) -> Result<Vec<Jet>> {
        let d = direction(u, self.center.len())?;
        Ok(d.into_iter().zip(&self.center).map(|(v, c)| v.scale(self.radius) + *c).collect())
    }
    fn orientation(&self, _u: &[f64], x: &[f64]) -> Vec<f64> {
        outward(&self.center, x)
    }
}

/// Indicatrix-shaped sphere `{F(x − c) = r}` of a Minkowski metric,
/// parametrised radially as `c + r S d / F(d)`; a non-identity diagonal
/// `stretch = S` deforms it away from an `F`-sphere. Hinted outward.
#[derive(Debug, Clone)]
pub struct FSphere {
    pub metric: MetricSpec,
    pub radius: f64,
    pub center: Vec<f64>,
    pub stretch: Vec<f64>,
}

impl FSphere {
    pub fn new(metric: &MetricSpec, radius: f64, center: &[f64]) -> Result<Self> {
        if !metric.is_minkowski() {
            return Err(FinslerError::Unsupported(format!("F-sphere patch for non-Minkowski {}", metric.name())));
        }
        Ok(FSphere {
            metric: metric.clone(),
            radius,
            center: center.to_vec(),
            stretch: vec![1.0; center.len()],
        })
    }

    pub fn stretched(mut self, stretch: &[f64]) -> Self {
        self.stretch = stretch.to_vec();
        self
    }
}

impl HypersurfacePatch for FSphere {
    fn name(&self) -> String {
        if self.stretch.iter().all(|s| *s == 1.0) {
            format!("f_sphere(r={})", self.radius)
        } else {
            format!("f_sphere(r={},stretch={:?})", self.radius, self.stretch)
        }
    }
    fn ambient_dim(&self) -> usize {
        self.center.len()
    }
    fn domain(&self) -> ParamDomain {
        angle_domain(self.center.len())
    }
    fn eval(&self, u: &[Jet]) -> Result<Vec<Jet>> {
        let d = direction(u, self.center.len())?;
        let xs: Vec<Jet> = self.center.iter().map(|c| Jet::constant(u[0].space(), *c)).collect();
        let f = self.metric.norm_jet(&xs, &d)?;
        let scale = f.try_recip()?.scale(self.radius);
        Ok(d.iter()
            .zip(&self.center)
            .zip(&self.stretch)
            .map(|((v, c), s)| (v * &scale).scale(*s) + *c)
            .collect())
    }
    fn orientation(&self, _u: &[f64], x: &[f64]) -> Vec<f64> {
        outward(&self.center, x)
    }
}

/// Graph `x = (u, h(u))` over the box `domain`, hinted upward.
#[derive(Debug, Clone)]
pub struct Graph {
    pub h: ScalarField,
    pub domain: ParamDomain,
}

impl HypersurfacePatch for Graph {
    fn name(&self) -> String {
        format!("graph({})", self.h.name())
    }
    fn ambient_dim(&self) -> usize {
        self.domain.lo.len() + 1
    }
    fn domain(&self) -> ParamDomain {
        self.domain.clone()
    }
    fn eval(&self, u: &[Jet]) -> Result<Vec<Jet>> {
        let mut x = u.to_vec();
        x.push(self.h.eval_jet(u)?);
        Ok(x)
    }
    fn orientation(&self, _u: &[f64], x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; x.len()];
        r[x.len() - 1] = 1.0;
        r
    }
}

/// Level set `{f = level}` seen from `anchor`: the point at angles `u` is
/// `anchor + s(u) d(u)`, with `s(u)` propagated on jets by the implicit
/// function theorem. Hinted away from the anchor.
#[derive(Debug, Clone)]
pub struct LevelSetPatch {
    pub field: ScalarField,
    pub level: f64,
    pub anchor: Vec<f64>,
    pub s_max: f64,
}

impl LevelSetPatch {
    fn radius(&self, u0: &[f64]) -> Result<f64> {
        let n = self.anchor.len();
        let uj: Vec<Jet> = seed(u0, 1)?;
        let dir: Vec<f64> = direction(&uj, n)?.iter().map(Jet::value).collect();
        RaySampler::new(&self.anchor, self.s_max, 1, 0).hit(&self.field, &dir, self.level)
    }
}

impl HypersurfacePatch for LevelSetPatch {
    fn name(&self) -> String {
        format!("level_set({}={})", self.field.name(), self.level)
    }
    fn ambient_dim(&self) -> usize {
        self.anchor.len()
    }
    fn domain(&self) -> ParamDomain {
        angle_domain(self.anchor.len())
    }
    fn eval(&self, u: &[Jet]) -> Result<Vec<Jet>> {
        let n = self.anchor.len();
        let k = n - 1;
        let u0: Vec<f64> = u.iter().map(Jet::value).collect();
        let s0 = self.radius(&u0)?;
        let order = u[0].order();
        let mut base = u0.clone();
        base.push(s0);
        let vars = seed(&base, order)?;
        let dir = direction(&vars[..k], n)?;
        let x: Vec<Jet> = dir.iter().zip(&self.anchor).map(|(d, a)| d * &vars[k] + *a).collect();
        let eq = self.field.eval_jet(&x)? - self.level;
        let known: Vec<Jet> = u.iter().zip(&u0).map(|(a, b)| a - *b).collect();
        let zero = Jet::zero(u[0].space());
        let ds = solve_implicit(&[eq], &known, &[zero.with_value(0.0)])?;
        let s = &ds[0] + s0;
        let d = direction(u, n)?;
        Ok(d.iter().zip(&self.anchor).map(|(di, a)| di * &s + *a).collect())
    }
    fn orientation(&self, _u: &[f64], x: &[f64]) -> Vec<f64> {
        outward(&self.anchor, x)
    }
}
