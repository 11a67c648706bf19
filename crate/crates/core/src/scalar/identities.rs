use crate::error::{FinslerError, Result};
use serde::Serialize;

/// Outer step of the differences used for `a'(t)` and `κ'(t)`.
pub const DERIVATIVE_STEP: f64 = 1e-3;

fn five_point(f: &dyn Fn(f64) -> Result<f64>, t: f64, h: f64) -> Result<f64> {
    Ok((f(t - 2.0 * h)? - 8.0 * f(t - h)? + 8.0 * f(t + h)? - f(t + 2.0 * h)?) / (12.0 * h))
}

/// Five-point stencils at `h` and `h/2`, Richardson-combined (sixth order).
fn derivative(f: &dyn Fn(f64) -> Result<f64>, t: f64) -> Result<f64> {
    let coarse = five_point(f, t, DERIVATIVE_STEP)?;
    let fine = five_point(f, t, 0.5 * DERIVATIVE_STEP)?;
    Ok((16.0 * fine - coarse) / 15.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelIdentityResidual {
    pub t: f64,
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub kappas: Vec<f64>,
    /// `Σκ_i − (a'/(2√a) − b/√a)`
    pub trace_residual: f64,
    /// `max_i |√a ∂κ_i/∂t − (c + κ_i²)|`
    pub riccati_residual: f64,
}

/// Residuals of `Σκ_i = a'/(2√a) − b/√a` and `√a ∂_tκ_i = c + κ_i²` on
/// `t_grid`. Derivatives come from a five-point stencil, so `a_fn` and
/// `kappas_fn` must be defined within `2·DERIVATIVE_STEP` of every grid point.
pub fn lemma61_identities(
    a_fn: &dyn Fn(f64) -> Result<f64>,
    b_fn: &dyn Fn(f64) -> Result<f64>,
    kappas_fn: &dyn Fn(f64) -> Result<Vec<f64>>,
    t_grid: &[f64],
    c: f64,
) -> Result<Vec<LevelIdentityResidual>> {
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let a = a_fn(t)?;
        if !(a > 0.0) {
            return Err(FinslerError::Unsupported(format!("a({t}) = {a} is not positive")));
        }
        let a_prime = derivative(a_fn, t)?;
        let b = b_fn(t)?;
        let kappas = kappas_fn(t)?;
        let sa = a.sqrt();
        let trace_residual = kappas.iter().sum::<f64>() - (a_prime / (2.0 * sa) - b / sa);
        let mut riccati_residual = 0.0f64;
        for (i, k) in kappas.iter().enumerate() {
            let ki = |s: f64| -> Result<f64> {
                let v = kappas_fn(s)?;
                v.get(i).copied().ok_or(FinslerError::Dimension {
                    expected: kappas.len(),
                    got: v.len(),
                })
            };
            let dk = derivative(&ki, t)?;
            riccati_residual = riccati_residual.max((sa * dk - (c + k * k)).abs());
        }
        out.push(LevelIdentityResidual {
            t,
            a,
            a_prime,
            b,
            kappas,
            trace_residual,
            riccati_residual,
        });
    }
    Ok(out)
}

/// Consistency of the sum-of-squares table for the distance family
/// `f = ½r²` against the forced value `(Σκ)² / (n−1)`.
#[derive(Debug, Clone, Serialize)]
pub struct SumOfSquaresReport {
    pub n: usize,
    pub c: f64,
    pub t: f64,
    /// `Σκ_a` from the trace table
    pub sum_kappa: f64,
    /// `(Σκ_a)² / (n−1)`, the value forced by `(Σκ)² = (n−1)Σκ²`
    pub forced: f64,
    /// The tabulated `Σκ_a²`
    pub printed: f64,
    /// Measured `Σκ_a²`, if supplied
    pub measured: Option<f64>,
    pub printed_consistent: bool,
    pub measured_matches_forced: Option<bool>,
}

/// Compares the tabulated `Σκ_a²` for the distance family with the value
/// forced by the trace table; for `c = 0` the table prints
/// `(n−1)/(√2 t)` whereas `(n−1)/(2t)` is forced.
pub fn sum_of_squares_check(n: usize, c: f64, t: f64, measured: Option<f64>) -> SumOfSquaresReport {
    let m = (n - 1) as f64;
    let (sum_kappa, printed) = if c == 0.0 {
        (-m / (2.0 * t).sqrt(), m / (2f64.sqrt() * t))
    } else if c > 0.0 {
        let z = (2.0 * c * t).sqrt();
        (-m * c.sqrt() / z.tan(), m * c * (1.0 / z.sin().powi(2) - 1.0))
    } else {
        let z = (-2.0 * c * t).sqrt();
        (-m * (-c).sqrt() / z.tanh(), -c * m * (1.0 / z.sinh().powi(2) + 1.0))
    };
    let forced = sum_kappa * sum_kappa / m;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);
    SumOfSquaresReport {
        n,
        c,
        t,
        sum_kappa,
        forced,
        printed,
        measured,
        printed_consistent: close(printed, forced),
        measured_matches_forced: measured.map(|v| (v - forced).abs() <= 1e-6 * forced.abs().max(1.0)),
    }
}
