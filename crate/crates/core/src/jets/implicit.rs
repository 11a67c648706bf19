use super::{Jet, JetError};
use nalgebra::DMatrix;

/// Implicit-function propagation at jet level.
///
/// `eqs` are Taylor polynomials in `known.len() + k` variables (known
/// increments first, then `k` unknown increments), expanded about a base point
/// at which `eqs` already equal the value parts of `target`. Returns the `k`
/// zero-valued unknown increment jets `b` with `eqs(known, b) = target` to the
/// truncation order of the outer space.
///
/// Each sweep uses the constant Jacobian `∂eqs/∂b` at the base point and gains
/// one order, so `order + 1` sweeps suffice.
pub fn solve_implicit(eqs: &[Jet], known: &[Jet], target: &[Jet]) -> Result<Vec<Jet>, JetError> {
    let k = eqs.len();
    let m = known.len();
    assert_eq!(target.len(), k, "one target per equation");
    assert!(eqs.iter().all(|e| e.num_vars() == m + k), "equation arity mismatch");
    let space = target[0].space().clone();

    let jac = DMatrix::from_fn(k, k, |i, j| eqs[i].partial(&[m + j]));
    let inv = jac.try_inverse().ok_or(JetError::Singular("implicit jet solve"))?;
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(JetError::Singular("implicit jet solve"));
    }

    let mut unknown: Vec<Jet> = (0..k).map(|_| Jet::zero(&space)).collect();
    for _ in 0..=space.order() {
        let args: Vec<Jet> = known.iter().chain(unknown.iter()).cloned().collect();
        let residual: Vec<Jet> = eqs
            .iter()
            .zip(target)
            .map(|(e, t)| (e.compose(&args) - t).with_value(0.0))
            .collect();
        for (i, u) in unknown.iter_mut().enumerate() {
            for (j, r) in residual.iter().enumerate() {
                u.axpy(-inv[(i, j)], r);
            }
        }
    }
    for u in &unknown {
        if !u.is_finite() {
            return Err(JetError::NonFinite("implicit jet solve"));
        }
    }
    Ok(unknown)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::seed;

    #[test]
    fn recovers_inverse_function() {
        // y³ + y = x around (x, y) = (2, 1): compare y'(x) = 1/(3y²+1), y'' by formula
        let base = seed(&[2.0, 1.0], 4).unwrap();
        let eq = &(&base[1] * &base[1] * &base[1]) + &base[1] - &base[0];
        let x = &seed(&[2.0], 3).unwrap()[0];
        let dx = x - 2.0;
        let zero = Jet::zero(x.space());
        let dy = solve_implicit(&[eq], &[dx], &[zero]).unwrap();
        let y = &dy[0] + 1.0;
        assert!((y.partial(&[0]) - 0.25).abs() < 1e-14);
        // y'' = -6 y y'^2 / (3y²+1) = -6/16/4
        assert!((y.partial(&[0, 0]) + 6.0 / 64.0).abs() < 1e-13);
        // check residual to full order
        let r = &(&y * &y * &y) + &y - x;
        for c in r.coeffs() {
            assert!(c.abs() < 1e-13);
        }
    }
}
