use super::geodesic::integrate_geodesic;
use super::ode::{integrate, OdeOptions, Termination};
use crate::error::{FinslerError, Result};
use crate::jets::Jet;
use crate::metrics::MetricSpec;
use crate::quadrature::adaptive_gk15;
use crate::scalar::{gradient, ScalarField};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// `κ` at which the point at normal distance `s` is focal:
/// `√c cot √c s`, `1/s` or `√−c coth √−c s`.
pub fn focal_curvature(c: f64, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(FinslerError::Pole {
            what: "focal curvature".to_string(),
            at: 0.0,
        });
    }
    if c == 0.0 {
        Ok(1.0 / s)
    } else if c > 0.0 {
        let r = c.sqrt();
        let sn = (r * s).sin();
        if sn.abs() < 1e-12 {
            return Err(FinslerError::Pole {
                what: "focal curvature".to_string(),
                at: s,
            });
        }
        Ok(r * (r * s).cos() / sn)
    } else {
        let r = (-c).sqrt();
        Ok(r / (r * s).tanh())
    }
}

/// `s_c(r)`: `sin(√c r)/√c`, `r` or `sinh(√−c r)/√−c`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComparisonFunctions {
    pub c: f64,
}

pub fn comparison(c: f64) -> ComparisonFunctions {
    ComparisonFunctions { c }
}

impl ComparisonFunctions {
    pub fn s(&self, r: f64) -> f64 {
        let c = self.c;
        if c == 0.0 {
            r
        } else if c > 0.0 {
            (c.sqrt() * r).sin() / c.sqrt()
        } else {
            ((-c).sqrt() * r).sinh() / (-c).sqrt()
        }
    }

    pub fn s_prime(&self, r: f64) -> f64 {
        let c = self.c;
        if c == 0.0 {
            1.0
        } else if c > 0.0 {
            (c.sqrt() * r).cos()
        } else {
            ((-c).sqrt() * r).cosh()
        }
    }

    /// `Δ̂r = (n−1) s_c′/s_c` for the distance function of a space form.
    pub fn laplacian_r(&self, n: usize, r: f64) -> f64 {
        (n - 1) as f64 * self.s_prime(r) / self.s(r)
    }
}

/// `∫_α^β dt/√a(t)`. Each half is mapped by `t = α + v²` resp. `t = β − v²`,
/// which removes simple zeros of `a` at the endpoints.
pub fn level_distance(a_fn: &dyn Fn(f64) -> Result<f64>, alpha: f64, beta: f64) -> Result<f64> {
    if !(beta > alpha) {
        return Err(FinslerError::Unsupported(format!("level_distance needs α < β, got {alpha}, {beta}")));
    }
    let mid = 0.5 * (alpha + beta);
    let w = (mid - alpha).sqrt();
    let tol = 1e-12;
    let integrand = |t: f64, v: f64| -> Result<f64> {
        let a = a_fn(t)?;
        if !(a > 0.0) {
            return Err(FinslerError::Integration {
                s: t,
                reason: format!("a({t}) = {a} is not positive"),
            });
        }
        Ok(2.0 * v / a.sqrt())
    };
    let (left, el) = adaptive_gk15(|v| integrand(alpha + v * v, v), 0.0, w, tol, 40)?;
    let (right, er) = adaptive_gk15(|v| integrand(beta - v * v, v), 0.0, w, tol, 40)?;
    let total = left + right;
    if !(el + er <= 1e-9 * total.abs().max(1.0)) {
        return Err(FinslerError::NoConvergence {
            what: "level distance integral (divergent?)".to_string(),
            iterations: 40,
            residual: el + er,
        });
    }
    Ok(total)
}

/// Sphere chart: `√c·chord/2 = √c|x−p| / √((1+c|x|²)(1+c|p|²))`.
fn half_chord(c: f64, p: &[f64], x: &[Jet]) -> Result<Jet> {
    let mut d2 = Jet::zero(x[0].space());
    let mut x2 = Jet::zero(x[0].space());
    for (xi, pi) in x.iter().zip(p) {
        d2 = d2 + (xi - *pi).square();
        x2 = x2 + xi.square();
    }
    let p2: f64 = p.iter().map(|v| v * v).sum();
    let den = (x2 * c + 1.0) * (1.0 + c * p2);
    Ok((d2 * c).try_div(&den)?.sqrt()?)
}

const CUT_MARGIN: f64 = 1e-12;

/// Distance from `p` on the built-in space forms.
pub fn space_form_distance(metric: &MetricSpec, p: &[f64], x: &[f64]) -> Result<f64> {
    let f = distance_field(metric, p)?;
    f.value(x)
}

/// `r = d_F(p, ·)` as a jet-evaluable field: `F(x − p)` on Minkowski metrics,
/// `(2/√c) asin(√c·chord/2)` on the sphere chart. Non-smooth at `p`.
pub fn distance_field(metric: &MetricSpec, p: &[f64]) -> Result<ScalarField> {
    metric.check_point(p)?;
    let p = p.to_vec();
    if metric.is_minkowski() {
        let m = metric.clone();
        let name = format!("dist_{}({:?})", metric.name(), p);
        return Ok(ScalarField::new(name, move |x: &[Jet]| {
            let d: Vec<Jet> = x.iter().zip(&p).map(|(a, b)| a - *b).collect();
            m.norm_jet(x, &d)
        }));
    }
    let c = metric.sphere_chart().ok_or_else(|| {
        FinslerError::Unsupported(format!("closed-form distance on {}", metric.name()))
    })?;
    let name = format!("dist_{}({:?})", metric.name(), p);
    let mname = metric.name().to_string();
    Ok(ScalarField::new(name, move |x: &[Jet]| {
        let z = half_chord(c, &p, x)?;
        if !(z.value() < 1.0 - CUT_MARGIN) {
            return Err(FinslerError::domain(&mname, "point outside the cut-domain of the base point"));
        }
        // asin z = atan(z/√(1−z²))
        let q = (-z.square() + 1.0).sqrt()?;
        Ok(z.try_div(&q)?.atan()?.scale(2.0 / c.sqrt()))
    }))
}

#[derive(Debug, Clone, Serialize)]
pub struct Shot {
    pub distance: f64,
    /// Initial velocity with `exp_p(y0) = x`
    pub y0: Vec<f64>,
    pub endpoint_error: f64,
    pub iterations: usize,
}

/// Boundary-value shooting: Newton on `v ↦ exp_p(v) − x` from guesses
/// spread over the indicatrix; the first converged guess wins.
pub fn shooting_distance(metric: &MetricSpec, p: &[f64], x: &[f64], tol: f64) -> Result<Shot> {
    let n = metric.dim();
    let d: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
    if d.iter().all(|v| *v == 0.0) {
        return Ok(Shot {
            distance: 0.0,
            y0: d,
            endpoint_error: 0.0,
            iterations: 0,
        });
    }
    let scale = metric.norm(p, &d)?;
    let mut guesses = vec![d.clone()];
    for k in 0..8 {
        let th = k as f64 * std::f64::consts::PI / 4.0;
        let mut u = d.clone();
        let (i, j) = (0, 1.min(n - 1));
        let (a, b) = (d[i], d[j]);
        u[i] = a * th.cos() - b * th.sin();
        u[j] = a * th.sin() + b * th.cos();
        let f = metric.norm(p, &u)?;
        guesses.push(u.iter().map(|v| v * scale / f).collect());
    }
    let endpoint = |v: &[f64]| -> Result<Vec<f64>> {
        let tr = integrate_geodesic(metric, p, v, 1.0, tol)?;
        if tr.exit.is_some() {
            return Err(FinslerError::Integration {
                s: tr.s_end(),
                reason: "shot left the domain".to_string(),
            });
        }
        Ok(tr.samples.last().unwrap().x.clone())
    };
    let mut last_err = None;
    let mut best: Option<Shot> = None;
    'guess: for g in guesses {
        let mut v = g;
        for it in 0..40 {
            let e = match endpoint(&v) {
                Ok(e) => e,
                Err(err) => {
                    last_err = Some(err);
                    continue 'guess;
                }
            };
            let r: Vec<f64> = e.iter().zip(x).map(|(a, b)| a - b).collect();
            let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if rn < 1e-11 {
                let shot = Shot {
                    distance: metric.norm(p, &v)?,
                    y0: v,
                    endpoint_error: rn,
                    iterations: it,
                };
                // a shot much longer than the chart estimate wrapped around
                if shot.distance <= 2.0 * scale {
                    return Ok(shot);
                }
                if best.as_ref().is_none_or(|b| shot.distance < b.distance) {
                    best = Some(shot);
                }
                continue 'guess;
            }
            let h = 1e-6 * scale.max(1e-3);
            let mut jac = DMatrix::zeros(n, n);
            for c in 0..n {
                let mut vp = v.clone();
                let mut vm = v.clone();
                vp[c] += h;
                vm[c] -= h;
                let (ep, em) = match (endpoint(&vp), endpoint(&vm)) {
                    (Ok(a), Ok(b)) => (a, b),
                    (Err(err), _) | (_, Err(err)) => {
                        last_err = Some(err);
                        continue 'guess;
                    }
                };
                for i in 0..n {
                    jac[(i, c)] = (ep[i] - em[i]) / (2.0 * h);
                }
            }
            let Some(step) = jac.lu().solve(&DVector::from_column_slice(&r)) else {
                continue 'guess;
            };
            // damped: never change the speed by more than half
            let fv = metric.norm(p, &v)?;
            let len = step.norm() * fv / v.iter().map(|a| a * a).sum::<f64>().sqrt();
            let damp = if len > 0.5 * fv { 0.5 * fv / len } else { 1.0 };
            for c in 0..n {
                v[c] -= damp * step[c];
            }
        }
    }
    if let Some(b) = best {
        return Ok(b);
    }
    Err(last_err.unwrap_or(FinslerError::NoConvergence {
        what: "geodesic shooting".to_string(),
        iterations: 30,
        residual: f64::NAN,
    }))
}

/// Length of the unit-speed `∇f` integral curve from `x0` (on `{f = α}`) to
/// `{f = β}`. For transnormal `f` these curves are geodesics, so this is the
/// distance between the two level sets.
pub fn gradient_flow_distance(metric: &MetricSpec, f: &ScalarField, x0: &[f64], beta: f64, s_max: f64, tol: f64) -> Result<f64> {
    let rhs = |_s: f64, x: &[f64]| -> Result<Vec<f64>> {
        let g = gradient(metric, f, x)?;
        let norm = metric.norm(x, &g.grad)?;
        Ok(g.grad.iter().map(|v| v / norm).collect())
    };
    if !(beta > f.value(x0)?) {
        return Err(FinslerError::Unsupported("gradient flow runs toward larger levels".to_string()));
    }
    let ev = |_s: f64, x: &[f64]| f.value(x).map(|v| v - beta).unwrap_or(f64::NAN);
    let sol = integrate(rhs, 0.0, x0, s_max, &OdeOptions::with_tol(tol), Some(&ev), None)?;
    match sol.termination {
        Termination::Event(s) => Ok(s),
        _ => Err(FinslerError::NoConvergence {
            what: format!("gradient curve from {x0:?} never reached level {beta}"),
            iterations: sol.s.len(),
            residual: ev(0.0, sol.last().1),
        }),
    }
}
