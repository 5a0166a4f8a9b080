//! Numerical toolkit for scalar-curvature fill-in constructions.
//!
//! Modules: [`manifold`] (sphere metrics and curvature oracles), [`paths`] (metric paths),
//! [`necks`] (explicit neck metrics), [`quasispherical`] (flow extensions and mass bounds),
//! [`theta`] (bound calculus) and [`validation`] (the acceptance battery).

pub mod error;
pub mod manifold;
pub mod necks;
pub mod numeric;
pub mod paths;
pub mod quasispherical;
pub mod theta;
pub mod tol;
pub mod validation;

pub use error::{Error, Result};
