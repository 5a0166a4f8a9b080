use super::metric::ScalarField;
use crate::error::{Error, Result};

/// c_n = 4(n-1)/(n-2).
pub fn yamabe_constant(n: usize) -> f64 {
    4.0 * (n as f64 - 1.0) / (n as f64 - 2.0)
}

/// Scalar curvature of u^{4/(n-2)} g given R_g, u and Lap_g u.
pub fn conformal_scalar(r: &ScalarField, u: &ScalarField, lap_u: &ScalarField, n: usize) -> Result<ScalarField> {
    if n < 3 {
        return Err(Error::Domain(format!("conformal formulas need n >= 3, got {n}")));
    }
    if r.len() != u.len() || lap_u.len() != u.len() {
        return Err(Error::Alignment("conformal_scalar inputs differ in length".into()));
    }
    if u.0.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("conformal factor must be positive".into()));
    }
    let cn = yamabe_constant(n);
    let p = -(n as f64 + 2.0) / (n as f64 - 2.0);
    Ok(ScalarField(
        (0..u.len()).map(|i| u.0[i].powf(p) * (r.0[i] * u.0[i] - cn * lap_u.0[i])).collect(),
    ))
}

/// Boundary mean curvature after a conformal change with u = 1 on the boundary.
pub fn conformal_mean(h: &ScalarField, normal_derivative: &ScalarField, n: usize) -> Result<ScalarField> {
    if n < 3 {
        return Err(Error::Domain(format!("conformal formulas need n >= 3, got {n}")));
    }
    let half = 0.5 * yamabe_constant(n);
    h.zip(normal_derivative, |a, d| a + half * d)
}
