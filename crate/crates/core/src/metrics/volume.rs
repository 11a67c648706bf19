use super::MetricSpec;
use crate::error::{FinslerError, Result};
use crate::quadrature::gauss_legendre;
use std::f64::consts::PI;

/// Volume of the Euclidean unit ball in `ℝⁿ`.
pub fn euclidean_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => euclidean_ball_volume(n - 2) * 2.0 * PI / n as f64,
    }
}

/// Busemann–Hausdorff density `σ = vol(Bⁿ) / vol{y : F(x, y) < 1}` at `x`.
///
/// The indicatrix volume is `(1/n) ∫_{Sⁿ⁻¹} F(θ)⁻ⁿ dθ`, integrated in
/// hyperspherical coordinates: Gauss–Legendre in the polar angles and the
/// trapezoid rule in the periodic azimuth.
pub fn bh_density_at(metric: &MetricSpec, x: &[f64]) -> Result<f64> {
    let n = metric.dim();
    if n == 1 {
        let a = metric.norm(x, &[1.0])?;
        let b = metric.norm(x, &[-1.0])?;
        return Ok(2.0 / (1.0 / a + 1.0 / b));
    }
    let (n_polar, n_az) = match n {
        2 => (0, 512),
        3 => (64, 128),
        4 => (32, 64),
        5 => (20, 40),
        _ => {
            return Err(FinslerError::Unsupported(format!(
                "Busemann-Hausdorff quadrature in dimension {n}"
            )))
        }
    };
    let (gx, gw) = gauss_legendre(n_polar.max(1));
    let polar: Vec<(f64, f64)> = gx.iter().zip(&gw).map(|(t, w)| (0.5 * PI * (t + 1.0), 0.5 * PI * w)).collect();
    let n_angles = n - 2;
    let mut idx = vec![0usize; n_angles];
    let mut total = 0.0;
    let mut y = vec![0.0; n];
    loop {
        // polar angles φ_1..φ_{n-2}
        let mut weight = 1.0;
        let mut sin_prod = 1.0;
        for (k, &i) in idx.iter().enumerate() {
            let (phi, w) = polar[i];
            weight *= w * phi.sin().powi((n - 2 - k) as i32);
            y[k] = sin_prod * phi.cos();
            sin_prod *= phi.sin();
        }
        for j in 0..n_az {
            let th = 2.0 * PI * j as f64 / n_az as f64;
            y[n - 2] = sin_prod * th.cos();
            y[n - 1] = sin_prod * th.sin();
            let f = metric.norm(x, &y)?;
            total += weight * (2.0 * PI / n_az as f64) * f.powi(-(n as i32));
        }
        // advance the multi-index
        let mut k = 0;
        while k < n_angles {
            idx[k] += 1;
            if idx[k] < polar.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n_angles {
            break;
        }
    }
    let vol = total / n as f64;
    Ok(euclidean_ball_volume(n) / vol)
}

/// Busemann–Hausdorff density of a Minkowski norm (constant in `x`).
pub fn bh_volume_density(metric: &MetricSpec) -> Result<f64> {
    if !metric.is_minkowski() {
        return Err(FinslerError::Unsupported(format!(
            "constant Busemann-Hausdorff density of non-Minkowski {}",
            metric.name()
        )));
    }
    bh_density_at(metric, &vec![0.0; metric.dim()])
}
