//! Discretized sphere geometry and curvature oracles.

mod band;
mod conformal;
pub mod io;
mod metric;
mod spectral;

pub use band::{fd_band_curvature, BandCurvature, Orientation, WarpedBand};
pub use conformal::{conformal_mean, conformal_scalar, yamabe_constant};
pub use metric::{unit_sphere_area, AxisProfile, ScalarField, SphereMetric, Tensor};
pub use spectral::{lambda1, operator_matrix as spectral_matrix, Eigenpair};
