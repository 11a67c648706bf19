use super::ode::{integrate, OdeOptions, Termination};
use crate::error::{FinslerError, Result};
use crate::hyper::{shape_operator, CoOrientation, HypersurfacePatch, ShapeData};
use crate::linalg::{complement_basis, generalized_symmetric_eigen};
use crate::metrics::MetricSpec;
use crate::spray::connection_and_curvature;
use nalgebra::DMatrix;
use serde::Serialize;
use std::f64::consts::PI;

/// `|κ|` above which a solution is treated as having reached its pole.
pub const BLOW_UP: f64 = 1e8;

/// First `s > 0` where the solution of `κ′ = −(κ² + c)`, `κ(0) = κ0` has a pole.
pub fn riccati_pole(c: f64, kappa0: f64) -> Option<f64> {
    if c == 0.0 {
        (kappa0 < 0.0).then(|| -1.0 / kappa0)
    } else if c > 0.0 {
        let r = c.sqrt();
        Some((PI - r.atan2(kappa0)) / r)
    } else {
        let k = (-c).sqrt();
        (kappa0 < -k).then(|| -(k / kappa0).atanh() / k)
    }
}

/// Closed form of `κ′ = −(κ² + c)`: `κ0/(1+κ0 s)`, a shifted `√c cot`, or a
/// shifted `√−c coth`/`tanh`.
pub fn riccati_scalar_closed(c: f64, kappa0: f64, s: f64) -> Result<f64> {
    if let Some(p) = riccati_pole(c, kappa0) {
        if s >= p {
            return Err(FinslerError::Pole {
                what: format!("Riccati solution with c={c}, κ0={kappa0}"),
                at: p,
            });
        }
    }
    Ok(if c == 0.0 {
        kappa0 / (1.0 + kappa0 * s)
    } else if c > 0.0 {
        let r = c.sqrt();
        r / (r * s + r.atan2(kappa0)).tan()
    } else {
        let k = (-c).sqrt();
        if kappa0.abs() == k {
            kappa0
        } else if kappa0.abs() > k {
            k / (k * s + (k / kappa0).atanh()).tanh()
        } else {
            k * (k * s + (kappa0 / k).atanh()).tanh()
        }
    })
}

/// The same solution by adaptive integration; a pole before `s` is returned
/// as [`FinslerError::Pole`] with its location extrapolated from `1/κ`.
pub fn riccati_scalar_ode(c: f64, kappa0: f64, s: f64, tol: f64) -> Result<f64> {
    let stop = |_s: f64, y: &[f64]| y[0].abs() > BLOW_UP;
    let sol = integrate(
        |_s, y| Ok(vec![-(y[0] * y[0] + c)]),
        0.0,
        &[kappa0],
        s,
        &OdeOptions::with_tol(tol),
        None,
        Some(&stop),
    )?;
    let (s_end, y) = sol.last();
    match sol.termination {
        Termination::Completed => Ok(y[0]),
        _ => Err(FinslerError::Pole {
            what: format!("Riccati solution with c={c}, κ0={kappa0}"),
            // κ ≈ −1/(s* − s) near the pole
            at: s_end - 1.0 / y[0],
        }),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RiccatiSample {
    pub s: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub kappas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowUp {
    /// Extrapolated pole location
    pub s: f64,
    /// Number of principal curvatures diverging together
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RiccatiTransport {
    pub initial: ShapeData,
    pub samples: Vec<RiccatiSample>,
    /// `A(s)` as an `n × n` matrix on the ambient space at the last sample
    pub a_final: Vec<Vec<f64>>,
    pub blow_up: Option<BlowUp>,
}

impl RiccatiTransport {
    pub fn final_kappas(&self) -> &[f64] {
        &self.samples.last().unwrap().kappas
    }
}

/// Principal curvatures of the ambient `A` on the `g_y`-orthogonal
/// complement of `y`.
fn restricted_kappas(metric: &MetricSpec, x: &[f64], y: &[f64], a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let fund = metric.fundamental_tensor(x, y)?;
    let w = complement_basis(&fund.lower(y));
    let gw = &fund.g * &w;
    let gh = w.transpose() * &gw;
    let ga = gw.transpose() * a * &w;
    let sym = (&ga + ga.transpose()) * 0.5;
    Ok(generalized_symmetric_eigen(&sym, &gh)?.0)
}

/// Transports the shape operator at `u` along the normal geodesic with
/// `A′ = A² + R − NA + AN`, the coordinate form of `∇_T A = A² + R_T`
/// (so `κ′ = κ² + c` in a space form, with `s` running along `n`).
pub fn riccati_matrix_transport(
    metric: &MetricSpec,
    patch: &dyn HypersurfacePatch,
    u: &[f64],
    side: CoOrientation,
    s_max: f64,
    tol: f64,
) -> Result<RiccatiTransport> {
    let initial = shape_operator(metric, patch, u, side)?;
    let n = metric.dim();
    let k = n - 1;
    let mut basis = DMatrix::zeros(n, n);
    let mut image = DMatrix::zeros(n, n);
    let a_par = initial.a_matrix();
    for a in 0..k {
        for i in 0..n {
            basis[(i, a)] = initial.tangents[a][i];
            image[(i, a)] = (0..k).map(|b| initial.tangents[b][i] * a_par[(b, a)]).sum::<f64>();
        }
    }
    for i in 0..n {
        basis[(i, k)] = initial.normal[i];
    }
    let a0 = image
        * basis.try_inverse().ok_or_else(|| FinslerError::Singular {
            what: "tangent frame".to_string(),
        })?;
    let mut z0 = initial.x.clone();
    z0.extend_from_slice(&initial.normal);
    z0.extend(a0.transpose().iter());
    let rhs = |_s: f64, z: &[f64]| -> Result<Vec<f64>> {
        let (x, y) = (&z[..n], &z[n..2 * n]);
        let a = DMatrix::from_row_slice(n, n, &z[2 * n..]);
        let (g, nm, r) = connection_and_curvature(metric, x, y)?;
        let mut out = y.to_vec();
        out.extend(g.iter().map(|v| -2.0 * v));
        let da = &a * &a + r - &nm * &a + &a * &nm;
        out.extend(da.transpose().iter());
        Ok(out)
    };
    let stop = |_s: f64, z: &[f64]| z[2 * n..].iter().any(|v| !(v.abs() <= BLOW_UP));
    let sol = integrate(rhs, 0.0, &z0, s_max, &OdeOptions::with_tol(tol), None, Some(&stop))?;
    let mut samples = Vec::with_capacity(sol.s.len());
    for (s, z) in sol.s.iter().zip(&sol.y) {
        let a = DMatrix::from_row_slice(n, n, &z[2 * n..]);
        samples.push(RiccatiSample {
            s: *s,
            x: z[..n].to_vec(),
            y: z[n..2 * n].to_vec(),
            kappas: restricted_kappas(metric, &z[..n], &z[n..2 * n], &a)?,
        });
    }
    let last = samples.last().unwrap();
    let blow_up = match sol.termination {
        Termination::Completed => None,
        _ => {
            let top = last.kappas.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            let multiplicity = last.kappas.iter().filter(|v| (*v - top).abs() < 1e-3 * top.abs()).count();
            Some(BlowUp {
                // κ ≈ 1/(s* − s) near the pole
                s: last.s + 1.0 / top,
                multiplicity,
            })
        }
    };
    let zl = sol.y.last().unwrap();
    let a_final = (0..n).map(|i| zl[2 * n + i * n..2 * n + (i + 1) * n].to_vec()).collect();
    Ok(RiccatiTransport {
        initial,
        samples,
        a_final,
        blow_up,
    })
}
