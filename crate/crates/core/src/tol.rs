//! Default tolerances shared across modules.

/// Algebraic identities and closed-form re-substitution.
pub const ALGEBRAIC: f64 = 1e-12;
/// Discretized quantity against a closed form at default resolution.
pub const DISCRETE: f64 = 1e-6;
/// Finite-difference oracle comparisons.
pub const FD_ORACLE: f64 = 1e-4;
/// Pole regularity of axisymmetric profiles.
pub const POLE: f64 = 1e-6;
/// Residual required of the first-eigenpair solver.
pub const EIGEN_RESIDUAL: f64 = 1e-8;
/// Relative slack in the total-mean-curvature certificate.
pub const MONOTONE: f64 = 1e-6;
/// Default number of nodes of the axisymmetric x-grid.
pub const DEFAULT_NODES: usize = 401;
/// Default number of t-nodes used to sample a metric path.
pub const PATH_NODES: usize = 101;
