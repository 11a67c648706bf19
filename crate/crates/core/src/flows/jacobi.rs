use super::geodesic::GeodesicTrajectory;
use super::ode::{integrate, OdeOptions, Termination};
use crate::error::{FinslerError, Result};
use crate::spray::connection_and_curvature;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct JacobiSample {
    pub s: f64,
    pub j: Vec<f64>,
    /// `∇_γ̇ J`
    pub dj: Vec<f64>,
    /// `|J|` in `g_γ̇`
    pub norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct JacobiField {
    pub samples: Vec<JacobiSample>,
    /// First `s > 0` where `J` vanishes (conjugate value), if reached
    pub first_zero: Option<f64>,
    /// `|J|` at `first_zero`, as a check that the located sign change is a zero
    pub norm_at_zero: Option<f64>,
}

fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> DVector<f64> {
    m * DVector::from_column_slice(v)
}

/// Integrates `J′ = P − NJ`, `P′ = −RJ − NP` (with `P = ∇_γ̇J`) together with
/// the geodesic and a parallel field `E′ = −NE`, `E(0) = J0` (or `J0′` when
/// `J0 = 0`). Zeros of `J` are located as sign changes of `g_γ̇(J, E)`, which
/// is exact whenever `J` stays parallel to `E` (space forms, surfaces).
pub fn jacobi_field(traj: &GeodesicTrajectory, j0: &[f64], j0_prime: &[f64], tol: f64) -> Result<JacobiField> {
    let metric = &traj.metric;
    let n = metric.dim();
    if j0.len() != n || j0_prime.len() != n {
        return Err(FinslerError::Dimension {
            expected: n,
            got: j0.len().max(j0_prime.len()),
        });
    }
    let e0 = if j0.iter().any(|v| *v != 0.0) { j0 } else { j0_prime };
    let mut z0 = traj.x0.clone();
    z0.extend_from_slice(&traj.y0);
    z0.extend_from_slice(j0);
    z0.extend_from_slice(j0_prime);
    z0.extend_from_slice(e0);
    let rhs = |_s: f64, z: &[f64]| -> Result<Vec<f64>> {
        let (x, y) = (&z[..n], &z[n..2 * n]);
        let (j, p, e) = (&z[2 * n..3 * n], &z[3 * n..4 * n], &z[4 * n..]);
        let (g, nm, r) = connection_and_curvature(metric, x, y)?;
        let mut out = y.to_vec();
        out.extend(g.iter().map(|v| -2.0 * v));
        let (nj, np, ne, rj) = (mat_vec(&nm, j), mat_vec(&nm, p), mat_vec(&nm, e), mat_vec(&r, j));
        out.extend((0..n).map(|i| p[i] - nj[i]));
        out.extend((0..n).map(|i| -rj[i] - np[i]));
        out.extend((0..n).map(|i| -ne[i]));
        Ok(out)
    };
    let g_je = |_s: f64, z: &[f64]| -> f64 {
        match metric.fundamental_tensor(&z[..n], &z[n..2 * n]) {
            Ok(fund) => fund.inner(&z[2 * n..3 * n], &z[4 * n..]),
            Err(_) => f64::NAN,
        }
    };
    let sol = integrate(rhs, 0.0, &z0, traj.s_end(), &OdeOptions::with_tol(tol), Some(&g_je), None)?;
    let mut samples = Vec::with_capacity(sol.s.len());
    for (s, z) in sol.s.iter().zip(&sol.y) {
        let fund = metric.fundamental_tensor(&z[..n], &z[n..2 * n])?;
        let j = &z[2 * n..3 * n];
        samples.push(JacobiSample {
            s: *s,
            j: j.to_vec(),
            dj: z[3 * n..4 * n].to_vec(),
            norm: fund.inner(j, j).max(0.0).sqrt(),
        });
    }
    let (first_zero, norm_at_zero) = match sol.termination {
        Termination::Event(s) => (Some(s), samples.last().map(|p| p.norm)),
        _ => (None, None),
    };
    Ok(JacobiField {
        samples,
        first_zero,
        norm_at_zero,
    })
}
