//! Numerical laboratory for gluing constant Q-curvature metrics.
//!
//! Exact rational curvature algebra, a zonal spectral venue on the round
//! sphere, radial Green's functions of the Paneitz operator, the neck metric
//! and its finite-difference curvature, weighted Hölder norms, and the
//! linearize-and-contract fixed-point solver.

pub mod conformal_core;
pub mod error;
pub mod exact_models;
pub mod fit;
pub mod green_paneitz;
pub mod neck_gluing;
mod ode;
pub mod solver;
pub mod sphere_spectral;
pub mod weighted_norms;

pub use error::{QcurvError, Result};
