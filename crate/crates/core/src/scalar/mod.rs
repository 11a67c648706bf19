//! Scalar fields on a Finsler manifold: gradient, Hessian, Laplacians and
//! level-set statistics.
//!
//! With `n = ∇f / F(∇f)` the level sets are co-oriented by the gradient, and
//! their shape operator `A = −∇n` equals `−Hes f / F(∇f)` on the tangent
//! space, since `g_n(∇f, X) = df(X) = 0` there.

mod check;
mod identities;

pub use check::{
    isoparametric_check, LevelSampler, LevelSetReport, LevelStats, RaySampler, Tolerances,
};
pub use identities::{sum_of_squares_check, lemma61_identities, SumOfSquaresReport, LevelIdentityResidual};

use crate::error::{FinslerError, Result};
use crate::jets::{seed, Jet};
use crate::linalg::{complement_basis, generalized_symmetric_eigen};
use crate::metrics::{Density, MetricSpec};
use crate::spray::{geodesic_coefficients, s_curvature};
use nalgebra::DMatrix;
use std::fmt;
use std::sync::Arc;

type FieldFn = dyn Fn(&[Jet]) -> Result<Jet> + Send + Sync;

/// A jet-evaluable function `f(x)`.
#[derive(Clone)]
pub struct ScalarField {
    name: String,
    eval: Arc<FieldFn>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.name)
    }
}

impl ScalarField {
    pub fn new(name: impl Into<String>, eval: impl Fn(&[Jet]) -> Result<Jet> + Send + Sync + 'static) -> Self {
        ScalarField {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    /// `½|x − p|²`
    pub fn half_sq_euclidean(p: &[f64]) -> Self {
        let p = p.to_vec();
        ScalarField::new("half_sq_euclidean", move |x| {
            let mut acc = Jet::zero(x[0].space());
            for (xi, pi) in x.iter().zip(&p) {
                acc = acc + (xi - *pi).square();
            }
            Ok(acc.scale(0.5))
        })
    }

    /// `⟨k, x⟩`
    pub fn linear(k: &[f64]) -> Self {
        let k = k.to_vec();
        ScalarField::new("linear", move |x| {
            let mut acc = Jet::zero(x[0].space());
            for (xi, ki) in x.iter().zip(&k) {
                acc.axpy(*ki, xi);
            }
            Ok(acc)
        })
    }

    /// `h ∘ f` for a univariate jet map `h`.
    pub fn map(&self, name: impl Into<String>, h: impl Fn(&Jet) -> Result<Jet> + Send + Sync + 'static) -> Self {
        let inner = self.clone();
        ScalarField::new(name, move |x| h(&inner.eval_jet(x)?))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval_jet(&self, x: &[Jet]) -> Result<Jet> {
        let v = (self.eval)(x)?;
        if !v.is_finite() {
            return Err(FinslerError::domain(&self.name, "non-finite field value"));
        }
        Ok(v)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let xs = seed(x, 1)?;
        Ok(self.eval_jet(&xs)?.value())
    }

    /// Expansion of `f` about `x` to `order`.
    pub fn jet(&self, x: &[f64], order: usize) -> Result<Jet> {
        let xs = seed(x, order)?;
        self.eval_jet(&xs)
    }
}

/// `L(y)_i = g_ij(x, y) y^j`.
pub fn legendre(metric: &MetricSpec, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    metric.legendre(x, y)
}

/// `L⁻¹(ξ)`, with `L⁻¹(0) = 0`.
pub fn legendre_inverse(metric: &MetricSpec, x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
    metric.legendre_inverse(x, xi)
}

/// Relative size of `df` below which `x` counts as critical.
pub const CRITICAL_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct Gradient {
    pub df: Vec<f64>,
    /// `∇f = L⁻¹(df)`; zero at critical points.
    pub grad: Vec<f64>,
    pub critical: bool,
}

fn is_critical(df: &[f64], scale: f64) -> bool {
    df.iter().map(|v| v * v).sum::<f64>().sqrt() <= CRITICAL_TOL * scale.max(1.0)
}

/// `∇f = L⁻¹(df)`; critical points return the zero vector, flagged.
pub fn gradient(metric: &MetricSpec, f: &ScalarField, x: &[f64]) -> Result<Gradient> {
    let j = f.jet(x, 1)?;
    let df = j.gradient();
    if is_critical(&df, j.value().abs()) {
        return Ok(Gradient {
            grad: vec![0.0; df.len()],
            df,
            critical: true,
        });
    }
    let grad = metric.legendre_inverse(x, &df)?;
    Ok(Gradient {
        df,
        grad,
        critical: false,
    })
}

struct SecondOrder {
    df: Vec<f64>,
    grad: Vec<f64>,
    hess: DMatrix<f64>,
}

fn second_order(metric: &MetricSpec, f: &ScalarField, x: &[f64]) -> Result<SecondOrder> {
    let n = metric.dim();
    let j = f.jet(x, 2)?;
    let df = j.gradient();
    if is_critical(&df, j.value().abs()) {
        return Err(FinslerError::CriticalPoint(df.iter().map(|v| v * v).sum::<f64>().sqrt()));
    }
    let grad = metric.legendre_inverse(x, &df)?;
    let sd = geodesic_coefficients(metric, x, &grad)?;
    let hess = DMatrix::from_fn(n, n, |i, k| {
        let mut v = j.partial(&[i, k]);
        for (m, dm) in df.iter().enumerate() {
            v -= sd.gamma[m][(i, k)] * dm;
        }
        v
    });
    Ok(SecondOrder { df, grad, hess })
}

/// `Hes f(X, Y) = ∂²f/∂x^i∂x^j X^iY^j − Γ^k_ij(∇f) X^iY^j ∂f/∂x^k`.
pub fn hessian_matrix(metric: &MetricSpec, f: &ScalarField, x: &[f64]) -> Result<DMatrix<f64>> {
    Ok(second_order(metric, f, x)?.hess)
}

pub fn hessian(metric: &MetricSpec, f: &ScalarField, x: &[f64], xv: &[f64], yv: &[f64]) -> Result<f64> {
    let h = hessian_matrix(metric, f, x)?;
    let mut s = 0.0;
    for i in 0..xv.len() {
        for j in 0..yv.len() {
            s += h[(i, j)] * xv[i] * yv[j];
        }
    }
    Ok(s)
}

/// `Δ̂f = tr_{g_{∇f}} Hes f`.
pub fn laplacian_hat(metric: &MetricSpec, f: &ScalarField, x: &[f64]) -> Result<f64> {
    let so = second_order(metric, f, x)?;
    let fund = metric.fundamental_tensor(x, &so.grad)?;
    Ok((fund.g_inv * so.hess).trace())
}

/// `Δ_σ f` by both routes.
#[derive(Debug, Clone, Copy)]
pub struct SigmaLaplacian {
    /// `(1/σ) ∂_i(σ (∇f)^i)`
    pub divergence: f64,
    /// `Δ̂f − S(∇f)`
    pub hat_minus_s: f64,
}

/// `Δ_σ f = div_σ(∇f)`, with `Δ̂f − S(∇f)` alongside.
pub fn laplacian_sigma(metric: &MetricSpec, f: &ScalarField, x: &[f64]) -> Result<SigmaLaplacian> {
    if metric.density() == Density::None {
        return Err(FinslerError::MissingDensity(metric.name().to_string()));
    }
    let n = metric.dim();
    let xs = seed(x, 1)?;
    let fj = f.jet(x, 2)?;
    let df0 = fj.gradient();
    if is_critical(&df0, fj.value().abs()) {
        return Err(FinslerError::CriticalPoint(df0.iter().map(|v| v * v).sum::<f64>().sqrt()));
    }
    // df as order-1 jets in x
    let inc: Vec<Jet> = xs.iter().zip(x).map(|(a, b)| a - *b).collect();
    let dfs: Vec<Jet> = (0..n).map(|i| fj.diff(i).compose(&inc)).collect();
    let v = metric.legendre_inverse_jet(&xs, &dfs)?;
    let sigma = metric.density_jet(&xs)?;
    let ln_sigma = sigma.ln()?;
    let mut div = 0.0;
    for i in 0..n {
        div += v[i].partial(&[i]) + v[i].value() * ln_sigma.partial(&[i]);
    }
    let grad: Vec<f64> = v.iter().map(Jet::value).collect();
    let hat = laplacian_hat(metric, f, x)?;
    let s = s_curvature(metric, x, &grad)?;
    Ok(SigmaLaplacian {
        divergence: div,
        hat_minus_s: hat - s,
    })
}

/// Principal curvatures of the level set through `x`, co-oriented by `∇f`.
#[derive(Debug, Clone)]
pub struct LevelCurvatures {
    pub kappas: Vec<f64>,
    pub grad_norm: f64,
    pub laplacian_hat: f64,
}

/// Eigenvalues of `−Hes f / F(∇f)` restricted to `ker df`, relative to
/// `ĝ = g_{∇f}|_{ker df}`, together with `F(∇f)` and `Δ̂f`.
pub fn level_curvatures(metric: &MetricSpec, f: &ScalarField, x: &[f64]) -> Result<LevelCurvatures> {
    let so = second_order(metric, f, x)?;
    let fund = metric.fundamental_tensor(x, &so.grad)?;
    let fnorm = fund.inner(&so.grad, &so.grad).sqrt();
    let basis = complement_basis(&so.df);
    let gh = basis.transpose() * &fund.g * &basis;
    let hh = basis.transpose() * &so.hess * &basis * (-1.0 / fnorm);
    let (kappas, _) = generalized_symmetric_eigen(&hh, &gh)?;
    let lap = (&fund.g_inv * &so.hess).trace();
    Ok(LevelCurvatures {
        kappas,
        grad_norm: fnorm,
        laplacian_hat: lap,
    })
}

#[cfg(test)]
mod tests;
