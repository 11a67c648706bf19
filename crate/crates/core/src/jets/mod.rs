//! Truncated multivariate Taylor arithmetic (forward-mode automatic
//! differentiation of arbitrary order).
//!
//! A [`Jet`] stores the *normalized* Taylor coefficients `∂^α f / α!` of a
//! function of `num_vars` variables for every multi-index `|α| <= order`.
//! Raw partial derivatives are recovered with [`Jet::partial`].
//!
//! Order budget used downstream (orders of jets in `(x, y)` fed to `F²`):
//!
//! | consumer                              | order |
//! |---------------------------------------|-------|
//! | fundamental tensor `g_ij`             | 2     |
//! | geodesic coefficients `G^i`           | 2     |
//! | nonlinear connection `N^i_j`          | 3     |
//! | Berwald connection `Γ^i_jk`           | 4     |
//! | curvature `R^i_k` (δ-derivative form) | 5     |
//! | non-Riemannian tensor `P^i_jkl`       | 5     |
//!
//! Legendre reconstruction of a primal metric from its dual needs one order
//! more than the requested output, hence [`MAX_ORDER`] is 6.

mod implicit;
mod linalg;
mod ops;
mod space;

pub use implicit::solve_implicit;
pub use linalg::{inverse, solve};
pub use space::JetSpace;

use std::sync::Arc;
use thiserror::Error;

/// Highest supported truncation order.
pub const MAX_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet order {0} outside supported range 1..={MAX_ORDER}")]
    OrderOutOfRange(usize),
    #[error("{op} undefined at value {value}")]
    Domain { op: &'static str, value: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("singular system in {0}")]
    Singular(&'static str),
}

#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<f64>,
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Jet")
            .field("num_vars", &self.space.num_vars())
            .field("order", &self.space.order())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

/// Independent coordinates at `values`, truncated at `order`.
pub fn seed(values: &[f64], order: usize) -> Result<Vec<Jet>, JetError> {
    if order == 0 || order > MAX_ORDER {
        return Err(JetError::OrderOutOfRange(order));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(JetError::NonFinite("seed"));
    }
    let space = JetSpace::get(values.len(), order);
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet::variable(&space, i, v))
        .collect())
}

/// Seeds `x` and `y` jointly: the first `x.len()` variables are `x`.
pub fn seed_pair(x: &[f64], y: &[f64], order: usize) -> Result<(Vec<Jet>, Vec<Jet>), JetError> {
    let all: Vec<f64> = x.iter().chain(y).copied().collect();
    let mut jets = seed(&all, order)?;
    let ys = jets.split_off(x.len());
    Ok((jets, ys))
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, value: f64) -> Jet {
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = value;
        Jet { space: space.clone(), coeffs }
    }

    pub fn zero(space: &Arc<JetSpace>) -> Jet {
        Jet::constant(space, 0.0)
    }

    pub fn variable(space: &Arc<JetSpace>, var: usize, value: f64) -> Jet {
        let mut j = Jet::constant(space, value);
        if space.order() > 0 {
            j.coeffs[1 + var] = 1.0;
        }
        j
    }

    pub fn from_coeffs(space: &Arc<JetSpace>, coeffs: Vec<f64>) -> Jet {
        assert_eq!(coeffs.len(), space.len(), "coefficient count mismatch");
        Jet { space: space.clone(), coeffs }
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn num_vars(&self) -> usize {
        self.space.num_vars()
    }

    pub fn order(&self) -> usize {
        self.space.order()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Same jet with its constant term replaced.
    pub fn with_value(mut self, value: f64) -> Jet {
        self.coeffs[0] = value;
        self
    }

    /// Normalized coefficient `∂^α f / α!`.
    pub fn coeff(&self, exps: &[u8]) -> f64 {
        self.space.index_of(exps).map_or(0.0, |i| self.coeffs[i])
    }

    /// Raw partial derivative with respect to the listed variables, e.g.
    /// `partial(&[0, 0, 2])` is `∂³f / ∂v0² ∂v2`.
    pub fn partial(&self, vars: &[usize]) -> f64 {
        if vars.len() > self.order() {
            return 0.0;
        }
        let mut exps = vec![0u8; self.num_vars()];
        for &v in vars {
            exps[v] += 1;
        }
        let idx = self.space.index_of(&exps).expect("multi-index in range");
        self.coeffs[idx] * self.space.factorial(idx)
    }

    pub fn gradient(&self) -> Vec<f64> {
        (0..self.num_vars()).map(|i| self.partial(&[i])).collect()
    }

    pub fn hessian(&self) -> Vec<Vec<f64>> {
        let n = self.num_vars();
        (0..n)
            .map(|i| (0..n).map(|j| self.partial(&[i, j])).collect())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn check_finite(self, context: &'static str) -> Result<Jet, JetError> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(JetError::NonFinite(context))
        }
    }

    /// Partial derivative `∂/∂v_var` as a jet one order lower.
    pub fn diff(&self, var: usize) -> Jet {
        assert!(self.order() > 0, "cannot differentiate an order-0 jet");
        let lower = JetSpace::get(self.num_vars(), self.order() - 1);
        let mut coeffs = vec![0.0; lower.len()];
        let mut exps = vec![0u8; self.num_vars()];
        for (idx, c) in coeffs.iter_mut().enumerate() {
            exps.copy_from_slice(lower.exponents(idx));
            let k = exps[var] as f64 + 1.0;
            exps[var] += 1;
            let up = self.space.index_of(&exps).expect("raised index in range");
            *c = k * self.coeffs[up];
        }
        Jet { space: lower, coeffs }
    }

    /// Repeated [`Jet::diff`] over the listed variables.
    pub fn diff_many(&self, vars: &[usize]) -> Jet {
        vars.iter().fold(self.clone(), |j, &v| j.diff(v))
    }

    /// Drops all coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        assert!(order <= self.order());
        let lower = JetSpace::get(self.num_vars(), order);
        let coeffs = self.coeffs[..lower.len()].to_vec();
        Jet { space: lower, coeffs }
    }

    /// Evaluates this jet, read as a polynomial in increments around its base
    /// point, at the given zero-valued increment jets (which may live in any
    /// other space). The result lives in the increments' space.
    pub fn compose(&self, increments: &[Jet]) -> Jet {
        assert_eq!(increments.len(), self.num_vars(), "increment count mismatch");
        let target = increments
            .first()
            .map(|j| j.space.clone())
            .expect("at least one increment");
        let deltas: Vec<Jet> = increments.iter().map(|d| d.clone().with_value(0.0)).collect();
        let max_deg = self.order().min(target.order());
        let count = self.space.upto(max_deg);
        let mut monos: Vec<Jet> = Vec::with_capacity(count);
        let mut out = Jet::constant(&target, self.coeffs[0]);
        monos.push(Jet::constant(&target, 1.0));
        for idx in 1..count {
            let (parent, var) = self.space.parent(idx);
            let m = &monos[parent] * &deltas[var];
            let c = self.coeffs[idx];
            if c != 0.0 {
                out.axpy(c, &m);
            }
            monos.push(m);
        }
        out
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Jet) {
        debug_assert!(Arc::ptr_eq(&self.space, &other.space) || self.space.len() == other.space.len());
        for (s, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *s += a * o;
        }
    }

    /// Applies a univariate function given its normalized Taylor coefficients
    /// `f^(k)(a)/k!` at the value `a` of this jet.
    pub fn compose_univariate(&self, taylor: &[f64]) -> Jet {
        let k = self.order().min(taylor.len() - 1);
        let h = self.clone().with_value(0.0);
        let mut r = Jet::constant(&self.space, taylor[k]);
        for c in taylor[..k].iter().rev() {
            r = &r * &h;
            r.coeffs[0] += c;
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_extracts_unit_gradient() {
        let v = seed(&[1.0, 2.0, 3.0], 2).unwrap();
        for (i, j) in v.iter().enumerate() {
            let g = j.gradient();
            for (k, gk) in g.iter().enumerate() {
                assert_eq!(*gk, if i == k { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn seed_rejects_bad_order() {
        assert_eq!(seed(&[1.0], 0).unwrap_err(), JetError::OrderOutOfRange(0));
        assert_eq!(seed(&[1.0], 7).unwrap_err(), JetError::OrderOutOfRange(7));
        assert!(matches!(seed(&[f64::NAN], 2), Err(JetError::NonFinite(_))));
    }

    #[test]
    fn square_at_three() {
        let x = &seed(&[3.0], 2).unwrap()[0];
        let f = x * x;
        assert_eq!(f.value(), 9.0);
        assert_eq!(f.partial(&[0]), 6.0);
        assert_eq!(f.partial(&[0, 0]), 2.0);
    }

    #[test]
    fn mixed_partial_of_product() {
        let v = seed(&[1.0, 2.0], 2).unwrap();
        let f = &v[0] * &v[1];
        assert_eq!(f.partial(&[0, 1]), 1.0);
        assert_eq!(f.partial(&[0, 0]), 0.0);
    }

    #[test]
    fn cube_third_derivative() {
        let x = &seed(&[2.0], 3).unwrap()[0];
        let f = x * x * x;
        assert!((f.partial(&[0, 0, 0]) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn diff_lowers_order() {
        let v = seed(&[0.5, -1.0], 4).unwrap();
        let f = &(&v[0] * &v[0]) * &v[1] + v[1].sin().unwrap();
        let fx = f.diff(0);
        assert_eq!(fx.order(), 3);
        assert!((fx.value() - 2.0 * 0.5 * -1.0).abs() < 1e-15);
        assert!((fx.partial(&[1]) - 1.0).abs() < 1e-15);
        let fyy = f.diff_many(&[1, 1]);
        assert!((fyy.value() + (-1.0f64).sin()).abs() < 1e-15);
    }

    #[test]
    fn compose_reexpands_polynomial() {
        // p(t) = exp(t) at 0.3, composed with t(s) = s^2 increments at s = 0.7
        let t = &seed(&[0.3], 4).unwrap()[0];
        let p = t.exp().unwrap();
        let s = &seed(&[0.7], 4).unwrap()[0];
        let inc = s * s - 0.49;
        let q = p.compose(&[inc]);
        let direct = (s * s - 0.49 + 0.3).exp().unwrap();
        for (a, b) in q.coeffs().iter().zip(direct.coeffs()) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
