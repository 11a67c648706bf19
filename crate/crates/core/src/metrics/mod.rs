//! Finsler metrics as jet-evaluable functionals.
//!
//! A metric is described by a [`MetricModel`] that evaluates the primal norm
//! `F(x, y)`, the dual norm `F*(x, ξ)`, or both, on jets. [`MetricSpec`] wraps a
//! model and supplies everything derivable from it: Legendre maps in both
//! directions (closed form from whichever side is available, Newton plus
//! implicit jet propagation for the other), the fundamental tensor and the
//! volume density.

mod builtin;
mod parse;
mod volume;

pub use builtin::{
    conic_extension_cone, conic_phi, ConicAB, Euclidean, Product, Randers, RandersShear, Reversed,
    RiemannianSphere,
};
pub use parse::{parse_expr, parse_metric, MetricExpr, Param, Value};
pub use volume::{bh_density_at, bh_volume_density, euclidean_ball_volume};

use crate::error::{FinslerError, Result};
use crate::jets::{seed, seed_pair, solve_implicit, Jet, JetSpace};
use nalgebra::{DMatrix, DVector};
use std::fmt;
use std::sync::Arc;

/// Evaluators and domain of one concrete metric family.
pub trait MetricModel: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn has_primal(&self) -> bool {
        false
    }

    fn has_dual(&self) -> bool {
        false
    }

    /// `F(x, y)` on jets. Only called after the domain checks passed.
    fn primal(&self, _x: &[Jet], _y: &[Jet]) -> Result<Jet> {
        Err(FinslerError::MissingEvaluator(format!("{self:?}")))
    }

    /// `F*(x, ξ)` on jets. Only called after the domain checks passed.
    fn dual(&self, _x: &[Jet], _xi: &[Jet]) -> Result<Jet> {
        Err(FinslerError::MissingEvaluator(format!("{self:?}")))
    }

    /// Chart domain of the base point.
    fn check_point(&self, _x: &[f64]) -> Result<()> {
        Ok(())
    }

    fn check_primal(&self, _x: &[f64], _y: &[f64]) -> Result<()> {
        Ok(())
    }

    fn check_dual(&self, _x: &[f64], _xi: &[f64]) -> Result<()> {
        Ok(())
    }

    /// True when the metric does not depend on the base point.
    fn is_minkowski(&self) -> bool {
        false
    }

    /// Analytic volume density `σ(x)`, if the family has one.
    fn density(&self, _x: &[Jet]) -> Option<Result<Jet>> {
        None
    }

    fn has_density(&self) -> bool {
        false
    }

    /// Starting point for the Newton solve of `∇h(z) = target` on the dual
    /// (`dual_side`) or primal side, when `target` itself is a poor guess.
    fn newton_seed(&self, _x: &[f64], _target: &[f64], _dual_side: bool) -> Option<Vec<f64>> {
        None
    }

    /// `c` when this is the stereographic chart `2|y|/(1+c|x|²)` of a round sphere.
    fn sphere_chart(&self) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    None,
    /// Constant density, e.g. Busemann–Hausdorff of a Minkowski norm.
    Constant(f64),
    /// Supplied by [`MetricModel::density`].
    Analytic,
}

#[derive(Clone)]
pub struct MetricSpec {
    name: String,
    model: Arc<dyn MetricModel>,
    density: Density,
}

impl fmt::Debug for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricSpec")
            .field("name", &self.name)
            .field("density", &self.density)
            .finish()
    }
}

/// `g_ij(x, y) = ½ [F²]_{y^i y^j}` and its inverse at one point.
#[derive(Debug, Clone)]
pub struct FundamentalTensor {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
}

impl FundamentalTensor {
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = u.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.g[(i, j)] * u[i] * v[j];
            }
        }
        s
    }

    pub fn lower(&self, v: &[f64]) -> Vec<f64> {
        (self.g.clone() * DVector::from_column_slice(v)).iter().copied().collect()
    }
}

pub(crate) const NEWTON_MAX_ITER: usize = 50;
pub(crate) const NEWTON_TOL: f64 = 1e-11;

fn values(j: &[Jet]) -> Vec<f64> {
    j.iter().map(Jet::value).collect()
}

fn increments(j: &[Jet], base: &[f64]) -> Vec<Jet> {
    j.iter().zip(base).map(|(a, b)| a - *b).collect()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Order-0 jets (plain values) sharing one space.
pub(crate) fn constants(v: &[f64]) -> Vec<Jet> {
    let space = JetSpace::get(0, 0);
    v.iter().map(|&a| Jet::constant(&space, a)).collect()
}

impl MetricSpec {
    pub fn new(name: impl Into<String>, model: Arc<dyn MetricModel>) -> Self {
        let density = if model.has_density() { Density::Analytic } else { Density::None };
        MetricSpec {
            name: name.into(),
            model,
            density,
        }
    }

    pub fn with_density(mut self, density: Density) -> Self {
        self.density = density;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn model(&self) -> &Arc<dyn MetricModel> {
        &self.model
    }

    pub fn sphere_chart(&self) -> Option<f64> {
        self.model.sphere_chart()
    }

    pub fn is_minkowski(&self) -> bool {
        self.model.is_minkowski()
    }

    pub fn has_primal(&self) -> bool {
        self.model.has_primal()
    }

    pub fn has_dual(&self) -> bool {
        self.model.has_dual()
    }

    pub fn density(&self) -> Density {
        self.density
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(FinslerError::Dimension {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    fn check_primal_point(&self, x: &[f64], y: &[f64]) -> Result<()> {
        self.check_len(x)?;
        self.check_len(y)?;
        self.model.check_point(x)?;
        if norm2(y) == 0.0 {
            return Err(FinslerError::domain(&self.name, "zero vector"));
        }
        if self.has_primal() {
            self.model.check_primal(x, y)?;
        }
        Ok(())
    }

    fn check_dual_point(&self, x: &[f64], xi: &[f64]) -> Result<()> {
        self.check_len(x)?;
        self.check_len(xi)?;
        self.model.check_point(x)?;
        if norm2(xi) == 0.0 {
            return Err(FinslerError::domain(&self.name, "zero covector"));
        }
        if self.has_dual() {
            self.model.check_dual(x, xi)?;
        }
        Ok(())
    }

    fn finite(&self, j: Jet, what: &str) -> Result<Jet> {
        if j.is_finite() {
            Ok(j)
        } else {
            Err(FinslerError::domain(&self.name, format!("non-finite {what}")))
        }
    }

    /// Evaluation space for an expansion about `(x0, z0)`: for Minkowski
    /// metrics only the fibre variables are seeded.
    fn expansion_seeds(&self, x0: &[f64], z0: &[f64], order: usize) -> Result<(Vec<Jet>, Vec<Jet>)> {
        if self.is_minkowski() {
            let zs = seed(z0, order)?;
            let space = zs[0].space().clone();
            let xs = x0.iter().map(|&v| Jet::constant(&space, v)).collect();
            Ok((xs, zs))
        } else {
            Ok(seed_pair(x0, z0, order)?)
        }
    }

    fn fibre_offset(&self) -> usize {
        if self.is_minkowski() {
            0
        } else {
            self.dim()
        }
    }

    fn expansion_increments(&self, x: &[Jet], x0: &[f64], z: &[Jet], z0: &[f64]) -> Vec<Jet> {
        let mut inc = if self.is_minkowski() { Vec::new() } else { increments(x, x0) };
        inc.extend(increments(z, z0));
        inc
    }

    // ---------------------------------------------------------------- primal

    /// `F(x, y)` on jets.
    pub fn norm_jet(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        let (x0, y0) = (values(x), values(y));
        self.check_primal_point(&x0, &y0)?;
        if self.has_primal() {
            let f = self.model.primal(x, y)?;
            return self.finite(f, "F");
        }
        let xi = self.legendre_jet(x, y)?;
        self.conorm_jet(x, &xi)
    }

    pub fn norm(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.norm_jet(&constants(x), &constants(y))?.value())
    }

    /// `F*(x, ξ)` on jets.
    pub fn conorm_jet(&self, x: &[Jet], xi: &[Jet]) -> Result<Jet> {
        let (x0, xi0) = (values(x), values(xi));
        self.check_dual_point(&x0, &xi0)?;
        if self.has_dual() {
            let f = self.model.dual(x, xi)?;
            return self.finite(f, "F*");
        }
        let y = self.legendre_inverse_jet(x, xi)?;
        self.norm_jet(x, &y)
    }

    pub fn conorm(&self, x: &[f64], xi: &[f64]) -> Result<f64> {
        Ok(self.conorm_jet(&constants(x), &constants(xi))?.value())
    }

    /// `½F²` expanded in `2n` fresh variables `(x, y)` about `(x0, y0)`.
    pub fn half_sq_norm_expansion(&self, x0: &[f64], y0: &[f64], order: usize) -> Result<Jet> {
        let (xs, ys) = seed_pair(x0, y0, order)?;
        Ok(self.norm_jet(&xs, &ys)?.square().scale(0.5))
    }

    // -------------------------------------------------------------- Legendre

    /// Newton solve of `∇_z h(z) = target` for `h = ½F²(x0, ·)` (primal) or
    /// `h = ½F*²(x0, ·)` (dual), damped by step halving.
    fn gradient_match(&self, x0: &[f64], target: &[f64], dual_side: bool) -> Result<Vec<f64>> {
        let n = self.dim();
        let eval = |z: &[f64]| -> Result<(DVector<f64>, DMatrix<f64>)> {
            let zs = seed(z, 2)?;
            let space = zs[0].space().clone();
            let xs: Vec<Jet> = x0.iter().map(|&v| Jet::constant(&space, v)).collect();
            let f = if dual_side {
                self.conorm_jet(&xs, &zs)?
            } else {
                self.norm_jet(&xs, &zs)?
            };
            let h = f.square().scale(0.5);
            let grad = DVector::from_fn(n, |i, _| h.partial(&[i]) - target[i]);
            let hess = DMatrix::from_fn(n, n, |i, j| h.partial(&[i, j]));
            Ok((grad, hess))
        };
        let scale = norm2(target).max(1.0);
        let mut z = self
            .model
            .newton_seed(x0, target, dual_side)
            .unwrap_or_else(|| target.to_vec());
        let (mut r, mut hess) = eval(&z)?;
        let mut rnorm = r.norm();
        for _ in 0..NEWTON_MAX_ITER {
            if rnorm < NEWTON_TOL * scale {
                return Ok(z);
            }
            let step = hess
                .clone()
                .lu()
                .solve(&r)
                .ok_or_else(|| FinslerError::Singular {
                    what: format!("Legendre Hessian of {}", self.name),
                })?;
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-8 {
                let cand: Vec<f64> = z.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
                if let Ok((r2, h2)) = eval(&cand) {
                    let n2 = r2.norm();
                    if n2 < rnorm {
                        z = cand;
                        r = r2;
                        hess = h2;
                        rnorm = n2;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if rnorm < NEWTON_TOL * scale {
            return Ok(z);
        }
        Err(FinslerError::NoConvergence {
            what: format!("Legendre inversion for {}", self.name),
            iterations: NEWTON_MAX_ITER,
            residual: rnorm,
        })
    }

    /// `L(y)_i = ½ ∂F²/∂y^i` on jets.
    pub fn legendre_jet(&self, x: &[Jet], y: &[Jet]) -> Result<Vec<Jet>> {
        let (x0, y0) = (values(x), values(y));
        self.check_primal_point(&x0, &y0)?;
        let order = y[0].order() + 1;
        let off = self.fibre_offset();
        let n = self.dim();
        if self.has_primal() {
            let (xs, ys) = self.expansion_seeds(&x0, &y0, order)?;
            let h = self.norm_jet(&xs, &ys)?.square().scale(0.5);
            let inc = self.expansion_increments(x, &x0, y, &y0);
            return Ok((0..n).map(|i| h.diff(off + i).compose(&inc)).collect());
        }
        let xi0 = self.gradient_match(&x0, &y0, true)?;
        let (xs, xis) = self.expansion_seeds(&x0, &xi0, order.max(2))?;
        let h = self.conorm_jet(&xs, &xis)?.square().scale(0.5);
        let eqs: Vec<Jet> = (0..n).map(|i| h.diff(off + i)).collect();
        let known = if self.is_minkowski() { Vec::new() } else { increments(x, &x0) };
        let target = self.retarget(y, &eqs);
        let dxi = solve_implicit(&eqs, &known, &target)?;
        Ok(dxi.iter().zip(&xi0).map(|(d, v)| d + *v).collect())
    }

    pub fn legendre(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        Ok(values(&self.legendre_jet(&constants(x), &constants(y))?))
    }

    /// `L⁻¹(ξ) = F*(ξ) ∇F*(ξ)` on jets.
    pub fn legendre_inverse_jet(&self, x: &[Jet], xi: &[Jet]) -> Result<Vec<Jet>> {
        let (x0, xi0) = (values(x), values(xi));
        self.check_dual_point(&x0, &xi0)?;
        let order = xi[0].order() + 1;
        let off = self.fibre_offset();
        let n = self.dim();
        if self.has_dual() {
            let (xs, xis) = self.expansion_seeds(&x0, &xi0, order)?;
            let h = self.conorm_jet(&xs, &xis)?.square().scale(0.5);
            let inc = self.expansion_increments(x, &x0, xi, &xi0);
            return Ok((0..n).map(|i| h.diff(off + i).compose(&inc)).collect());
        }
        let y0 = self.gradient_match(&x0, &xi0, false)?;
        let (xs, ys) = self.expansion_seeds(&x0, &y0, order.max(2))?;
        let h = self.norm_jet(&xs, &ys)?.square().scale(0.5);
        let eqs: Vec<Jet> = (0..n).map(|i| h.diff(off + i)).collect();
        let known = if self.is_minkowski() { Vec::new() } else { increments(x, &x0) };
        let target = self.retarget(xi, &eqs);
        let dy = solve_implicit(&eqs, &known, &target)?;
        Ok(dy.iter().zip(&y0).map(|(d, v)| d + *v).collect())
    }

    /// `L⁻¹(ξ)`, with `L⁻¹(0) = 0`.
    pub fn legendre_inverse(&self, x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
        if norm2(xi) == 0.0 {
            self.check_len(xi)?;
            return Ok(vec![0.0; xi.len()]);
        }
        Ok(values(&self.legendre_inverse_jet(&constants(x), &constants(xi))?))
    }

    /// Target jets for an implicit solve: same higher coefficients, constant
    /// terms taken from the converged equations so that the residual at the
    /// base point vanishes exactly.
    fn retarget(&self, target: &[Jet], eqs: &[Jet]) -> Vec<Jet> {
        target
            .iter()
            .zip(eqs)
            .map(|(t, e)| t.clone().with_value(e.value()))
            .collect()
    }

    /// Inverse Legendre map at the value level by damped Newton iteration on
    /// the primal side, regardless of whether a dual evaluator exists.
    pub fn legendre_inverse_newton(&self, x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
        self.check_dual_point(x, xi)?;
        self.gradient_match(x, xi, false)
    }

    // ---------------------------------------------------------------- tensor

    pub fn fundamental_tensor(&self, x: &[f64], y: &[f64]) -> Result<FundamentalTensor> {
        self.check_primal_point(x, y)?;
        let n = self.dim();
        let ys = seed(y, 2)?;
        let space = ys[0].space().clone();
        let xs: Vec<Jet> = x.iter().map(|&v| Jet::constant(&space, v)).collect();
        let h = self.norm_jet(&xs, &ys)?.square().scale(0.5);
        let g = DMatrix::from_fn(n, n, |i, j| h.partial(&[i, j]));
        let g = (&g + g.transpose()) * 0.5;
        let chol = g.clone().cholesky().ok_or_else(|| FinslerError::Singular {
            what: format!("fundamental tensor of {} at x={x:?}, y={y:?}", self.name),
        })?;
        let g_inv = chol.inverse();
        Ok(FundamentalTensor {
            x: x.to_vec(),
            y: y.to_vec(),
            g,
            g_inv,
        })
    }

    // --------------------------------------------------------------- density

    pub fn density_jet(&self, x: &[Jet]) -> Result<Jet> {
        match self.density {
            Density::None => Err(FinslerError::MissingDensity(self.name.clone())),
            Density::Constant(s) => Ok(Jet::constant(x[0].space(), s)),
            Density::Analytic => self
                .model
                .density(x)
                .unwrap_or_else(|| Err(FinslerError::MissingDensity(self.name.clone()))),
        }
    }

    /// Domain check for a covector at `x`.
    pub fn check_dual_covector(&self, x: &[f64], xi: &[f64]) -> Result<()> {
        self.check_dual_point(x, xi)
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        self.check_len(x)?;
        self.model.check_point(x)
    }
}

/// `←F(x, y) = F(x, −y)`.
pub fn reverse_metric(metric: &MetricSpec) -> MetricSpec {
    let name = format!("reverse({})", metric.name());
    let model: Arc<dyn MetricModel> = Arc::new(Reversed::new(metric.model().clone()));
    MetricSpec {
        name,
        model,
        density: metric.density(),
    }
}

/// Built-in metric by name; see [`parse_metric`] for the string grammar.
pub fn builtin(name: &str, params: &[Param]) -> Result<MetricSpec> {
    builtin::build(name, params)
}

impl std::str::FromStr for MetricSpec {
    type Err = FinslerError;
    fn from_str(s: &str) -> Result<Self> {
        parse_metric(s)
    }
}

#[cfg(test)]
mod tests;
