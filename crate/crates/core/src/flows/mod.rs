//! Geodesics, Jacobi fields, Riccati transport of shape operators, focal
//! and comparison functions, level distances and space-form distances.

mod distance;
mod geodesic;
mod jacobi;
pub mod ode;
mod parallel;
mod riccati;

pub use distance::{
    comparison, distance_field, focal_curvature, gradient_flow_distance, level_distance, shooting_distance,
    space_form_distance, ComparisonFunctions, Shot,
};
pub use geodesic::{integrate_geodesic, GeodesicSample, GeodesicTrajectory};
pub use jacobi::{jacobi_field, JacobiField, JacobiSample};
pub use parallel::ParallelPatch;
pub use riccati::{
    riccati_matrix_transport, riccati_pole, riccati_scalar_closed, riccati_scalar_ode, BlowUp, RiccatiSample,
    RiccatiTransport, BLOW_UP,
};

#[cfg(test)]
mod tests;
