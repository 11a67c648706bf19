//! Immersed hypersurfaces `x = φ(u)`: unit normal, shape operator
//! `A = −∇^n n`, principal curvatures and umbilicity.
//!
//! The normal is `n = L⁻¹(ν) / F*(ν)` for the covector `ν` annihilating
//! `dφ`; then `F(n) = 1` and `g_n(n, φ_a) = ν(φ_a)/F*(ν) = 0`. Both
//! co-orientations are obtained from `±ν` separately, never by negating `n`.
//! Differentiating `n` in `u` is done on jets, so `∂n/∂u` is exact.

mod patches;

pub use patches::{FSphere, Graph, Helicoid, LevelSetPatch, RoundSphere};

use crate::error::{FinslerError, Result};
use crate::jets::{seed, Jet};
use crate::linalg::{complex_eigenvalues, generalized_symmetric_eigen, multiplicities};
use crate::metrics::MetricSpec;
use crate::spray::geodesic_coefficients;
use nalgebra::DMatrix;
use serde::Serialize;
use std::fmt;

/// Open parameter box `(lo_a, hi_a)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ParamDomain {
    pub fn new(lo: &[f64], hi: &[f64]) -> Self {
        ParamDomain {
            lo: lo.to_vec(),
            hi: hi.to_vec(),
        }
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| v > l && v < h)
    }

    /// Cell-centred grid with `per_axis` points on each axis, first axis
    /// slowest.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let k = self.lo.len();
        let total = per_axis.pow(k as u32);
        (0..total)
            .map(|mut idx| {
                let mut u = vec![0.0; k];
                for a in (0..k).rev() {
                    let i = idx % per_axis;
                    idx /= per_axis;
                    u[a] = self.lo[a] + (i as f64 + 0.5) * (self.hi[a] - self.lo[a]) / per_axis as f64;
                }
                u
            })
            .collect()
    }
}

/// A jet-evaluable immersion with an orientation hint.
pub trait HypersurfacePatch: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn ambient_dim(&self) -> usize;

    fn param_dim(&self) -> usize {
        self.ambient_dim() - 1
    }

    fn domain(&self) -> ParamDomain;

    fn eval(&self, u: &[Jet]) -> Result<Vec<Jet>>;

    /// Reference vector `r` at `φ(u) = x`: the hinted normal covector `ν`
    /// satisfies `ν(r) > 0`.
    fn orientation(&self, u: &[f64], x: &[f64]) -> Vec<f64>;
}

/// Which of the two normal covectors `±ν` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CoOrientation {
    /// `ν(r) > 0` for the patch's reference vector `r`
    Hint,
    Opposite,
}

impl CoOrientation {
    fn sign(self) -> f64 {
        match self {
            CoOrientation::Hint => 1.0,
            CoOrientation::Opposite => -1.0,
        }
    }
}

impl fmt::Display for CoOrientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoOrientation::Hint => write!(f, "hint"),
            CoOrientation::Opposite => write!(f, "opposite"),
        }
    }
}

fn det(m: &[Vec<Jet>]) -> Jet {
    let k = m.len();
    match k {
        1 => m[0][0].clone(),
        2 => &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        _ => {
            let mut acc = Jet::zero(m[0][0].space());
            for c in 0..k {
                let minor: Vec<Vec<Jet>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| v.clone()).collect())
                    .collect();
                let term = &m[0][c] * &det(&minor);
                acc = if c % 2 == 0 { acc + term } else { acc - term };
            }
            acc
        }
    }
}

/// `ν_i = det[e_i | φ_1 | … | φ_{n−1}]`, which annihilates every `φ_a`.
fn cofactor_covector(tangents: &[Vec<Jet>]) -> Vec<Jet> {
    // tangents[a][i] = ∂φ^i/∂u^a
    let n = tangents[0].len();
    (0..n)
        .map(|i| {
            let minor: Vec<Vec<Jet>> = (0..n)
                .filter(|&r| r != i)
                .map(|r| tangents.iter().map(|t| t[r].clone()).collect())
                .collect();
            let d = det(&minor);
            if i % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect()
}

struct NormalJets {
    phi: Vec<Jet>,
    x: Vec<f64>,
    tangents: DMatrix<f64>,
    /// `ν / F*(ν)` as values
    covector: Vec<f64>,
    /// unit normal jets, order `u_order − 1` in the parameters
    normal: Vec<Jet>,
}

fn normal_jets(metric: &MetricSpec, patch: &dyn HypersurfacePatch, u: &[f64], side: CoOrientation, order: usize) -> Result<NormalJets> {
    let n = patch.ambient_dim();
    let k = patch.param_dim();
    if metric.dim() != n {
        return Err(FinslerError::Dimension {
            expected: metric.dim(),
            got: n,
        });
    }
    let us = seed(u, order)?;
    let phi = patch.eval(&us)?;
    let x: Vec<f64> = phi.iter().map(Jet::value).collect();
    metric.check_point(&x)?;
    let tan_j: Vec<Vec<Jet>> = (0..k).map(|a| phi.iter().map(|p| p.diff(a)).collect()).collect();
    let tangents = DMatrix::from_fn(n, k, |i, a| tan_j[a][i].value());
    let sv = tangents.clone().svd(false, false).singular_values;
    let smin = sv.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if !(smin > 1e-8) {
        return Err(FinslerError::Singular {
            what: format!("dφ of {} at u={u:?} (smallest singular value {smin:e})", patch.name()),
        });
    }
    let x_low: Vec<Jet> = phi.iter().map(|p| p.truncate(order - 1)).collect();
    let mut nu = cofactor_covector(&tan_j);
    let r = patch.orientation(u, &x);
    let dot: f64 = nu.iter().zip(&r).map(|(a, b)| a.value() * b).sum();
    if dot == 0.0 {
        return Err(FinslerError::Degenerate);
    }
    let s = dot.signum() * side.sign();
    nu = nu.into_iter().map(|v| v.scale(s)).collect();
    let nu0: Vec<f64> = nu.iter().map(Jet::value).collect();
    metric
        .check_dual_covector(&x, &nu0)
        .map_err(|e| FinslerError::domain(metric.name(), format!("normal covector {nu0:?} at u={u:?}: {e}")))?;
    let fstar = metric.conorm_jet(&x_low, &nu)?;
    let ybar = metric.legendre_inverse_jet(&x_low, &nu)?;
    let inv = fstar.try_recip()?;
    let normal: Vec<Jet> = ybar.iter().map(|v| v * &inv).collect();
    let f0 = fstar.value();
    Ok(NormalJets {
        phi,
        x,
        tangents,
        covector: nu0.iter().map(|v| v / f0).collect(),
        normal,
    })
}

/// `(φ, n)` as jets of order `order` in fresh parameter variables at `u`.
pub fn normal_field(
    metric: &MetricSpec,
    patch: &dyn HypersurfacePatch,
    u: &[f64],
    side: CoOrientation,
    order: usize,
) -> Result<(Vec<Jet>, Vec<Jet>)> {
    let nj = normal_jets(metric, patch, u, side, order + 1)?;
    Ok((nj.phi.iter().map(|p| p.truncate(order)).collect(), nj.normal))
}

/// Unit normal `n(u)` with `F(n) = 1`, `g_n(n, φ_a) = 0`.
pub fn unit_normal(metric: &MetricSpec, patch: &dyn HypersurfacePatch, u: &[f64], side: CoOrientation) -> Result<Vec<f64>> {
    Ok(normal_jets(metric, patch, u, side, 1)?.normal.iter().map(Jet::value).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct ShapeData {
    pub u: Vec<f64>,
    pub x: Vec<f64>,
    pub co_orientation: CoOrientation,
    pub normal: Vec<f64>,
    /// `L(n)`, equal to `ν / F*(ν)`
    pub normal_covector: Vec<f64>,
    /// `φ_a = ∂φ/∂u^a`, one vector per parameter
    pub tangents: Vec<Vec<f64>>,
    /// `A` in the basis `{φ_a}`, row-major
    pub a: Vec<Vec<f64>>,
    /// `ĝ_ab = g_n(φ_a, φ_b)`, row-major
    pub induced_g: Vec<Vec<f64>>,
    /// principal curvatures, ascending
    pub kappas: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// anisotropic mean curvature `Σκ_a`
    pub h: f64,
    pub unit_residual: f64,
    pub orthogonality_residual: f64,
    pub self_adjoint_residual: f64,
    pub tangency_residual: f64,
    pub max_imag_eigenvalue: f64,
}

impl ShapeData {
    pub fn a_matrix(&self) -> DMatrix<f64> {
        let k = self.a.len();
        DMatrix::from_fn(k, k, |i, j| self.a[i][j])
    }

    pub fn induced_metric(&self) -> DMatrix<f64> {
        let k = self.induced_g.len();
        DMatrix::from_fn(k, k, |i, j| self.induced_g[i][j])
    }
}

/// Tolerance on the non-tangential part of `∇n` above which the shape
/// operator is rejected.
pub const TANGENCY_TOL: f64 = 1e-6;
/// Gap for grouping equal principal curvatures.
pub const MULTIPLICITY_GAP: f64 = 1e-5;

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Shape operator from `dφ(A e_a) = −(∂_a n + Γ(n)(φ_a, n))`, projected
/// onto the tangent space with `ĝ`.
pub fn shape_operator(metric: &MetricSpec, patch: &dyn HypersurfacePatch, u: &[f64], side: CoOrientation) -> Result<ShapeData> {
    let nj = normal_jets(metric, patch, u, side, 2)?;
    let n = patch.ambient_dim();
    let k = patch.param_dim();
    let n0: Vec<f64> = nj.normal.iter().map(Jet::value).collect();
    let sd = geodesic_coefficients(metric, &nj.x, &n0)?;
    let fund = metric.fundamental_tensor(&nj.x, &n0)?;
    let phi = &nj.tangents;
    let mut d = DMatrix::zeros(n, k);
    for a in 0..k {
        let pa: Vec<f64> = phi.column(a).iter().copied().collect();
        let gam = sd.contract(&pa, &n0);
        for i in 0..n {
            d[(i, a)] = -(nj.normal[i].partial(&[a]) + gam[i]);
        }
    }
    let g = &fund.g;
    let gh = phi.transpose() * g * phi;
    let gha = phi.transpose() * g * &d;
    let gh_inv = gh.clone().cholesky().ok_or_else(|| FinslerError::Singular {
        what: format!("induced metric of {} at u={u:?}", patch.name()),
    })?;
    let a_mat = gh_inv.solve(&gha);
    let resid = &d - phi * &a_mat;
    let mut tangency = 0.0f64;
    for a in 0..k {
        let ra = resid.column(a);
        let da = d.column(a);
        let rn = (ra.transpose() * g * ra)[(0, 0)].max(0.0).sqrt();
        let dn = (da.transpose() * g * da)[(0, 0)].max(0.0).sqrt();
        tangency = tangency.max(rn / dn.max(1.0));
    }
    if tangency > TANGENCY_TOL {
        return Err(FinslerError::Tangency(format!("u={u:?}, residual {tangency:e}")));
    }
    let sym = (&gha + gha.transpose()) * 0.5;
    let (kappas, _) = generalized_symmetric_eigen(&sym, &gh)?;
    let max_imag = complex_eigenvalues(&a_mat).iter().fold(0.0f64, |m, z| m.max(z.1.abs()));
    let self_adj = (&gha - gha.transpose()).amax();
    let unit = (metric.norm(&nj.x, &n0)? - 1.0).abs();
    let ortho = (0..k)
        .map(|a| {
            let pa: Vec<f64> = phi.column(a).iter().copied().collect();
            fund.inner(&n0, &pa).abs()
        })
        .fold(0.0, f64::max);
    let h = kappas.iter().sum();
    Ok(ShapeData {
        u: u.to_vec(),
        x: nj.x,
        co_orientation: side,
        normal: n0,
        normal_covector: nj.covector,
        tangents: (0..k).map(|a| phi.column(a).iter().copied().collect()).collect(),
        a: rows(&a_mat),
        induced_g: rows(&gh),
        multiplicities: multiplicities(&kappas, MULTIPLICITY_GAP),
        kappas,
        h,
        unit_residual: unit,
        orthogonality_residual: ortho,
        self_adjoint_residual: self_adj,
        tangency_residual: tangency,
        max_imag_eigenvalue: max_imag,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UmbilicReport {
    pub points: usize,
    /// `max_u (κ_max − κ_min)`
    pub max_spread: f64,
    pub is_umbilic_pointwise: bool,
    /// `λ(u) = mean κ` at each grid point
    pub lambdas: Vec<f64>,
    /// `max_u |λ(u) − λ(u₀)|`, reported only when pointwise umbilic
    pub lambda_constancy: Option<f64>,
}

pub fn umbilic_check(
    metric: &MetricSpec,
    patch: &dyn HypersurfacePatch,
    side: CoOrientation,
    u_grid: &[Vec<f64>],
    tol: f64,
) -> Result<UmbilicReport> {
    use rayon::prelude::*;
    let shapes: Vec<ShapeData> = u_grid
        .par_iter()
        .map(|u| shape_operator(metric, patch, u, side))
        .collect::<Result<_>>()?;
    let spreads: Vec<f64> = shapes
        .iter()
        .map(|s| s.kappas.last().unwrap() - s.kappas.first().unwrap())
        .collect();
    let max_spread = spreads.iter().fold(0.0f64, |m, v| m.max(*v));
    let lambdas: Vec<f64> = shapes.iter().map(|s| s.h / s.kappas.len() as f64).collect();
    let is_umbilic = spreads.iter().all(|s| *s < tol);
    let lambda_constancy = is_umbilic.then(|| lambdas.iter().fold(0.0f64, |m, l| m.max((l - lambdas[0]).abs())));
    Ok(UmbilicReport {
        points: shapes.len(),
        max_spread,
        is_umbilic_pointwise: is_umbilic,
        lambdas,
        lambda_constancy,
    })
}

#[cfg(test)]
mod tests;
