//! Numerical Finsler geometry.
//!
//! Every derivative is taken exactly (to rounding) by truncated Taylor
//! arithmetic in [`jets`]; metrics in [`metrics`] are jet-evaluable functionals
//! from which the connection and curvature stack in [`spray`], the Legendre
//! duality and Laplacians in [`scalar`], hypersurface geometry in [`hyper`]
//! and the ODE layer in [`flows`] are derived.

pub mod error;
pub mod flows;
pub mod hyper;
pub mod jets;
pub mod linalg;
pub mod metrics;
pub mod quadrature;
pub mod scalar;
pub mod spray;

pub use error::{FinslerError, Result};
