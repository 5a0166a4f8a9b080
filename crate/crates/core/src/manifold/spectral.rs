use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::metric::{ScalarField, SphereMetric};
use crate::error::{Error, Result};
use crate::tol;

/// First eigenpair of -Lap + R/2.
#[derive(Debug, Clone, Serialize)]
pub struct Eigenpair {
    pub lambda: f64,
    /// Positive, normalized to max 1.
    pub f: ScalarField,
    pub residual: f64,
    pub iterations: usize,
}

/// Dense matrix of the discrete operator -Lap + R/2 on an axisymmetric metric.
pub fn operator_matrix(metric: &SphereMetric) -> Result<DMatrix<f64>> {
    let (p, k) = metric
        .profile()
        .ok_or_else(|| Error::Precondition("operator matrix needs an axisymmetric metric".into()))?;
    let r = metric.scalar_curvature()?;
    let n = p.nodes();
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in p.laplacian_rows().iter().enumerate() {
        for (j, w) in row {
            m[(i, *j)] -= w / k;
        }
        m[(i, i)] += 0.5 * r.0[i];
    }
    Ok(m)
}

fn residual(m: &DMatrix<f64>, f: &DVector<f64>, lambda: f64) -> f64 {
    (m * f - f * lambda).amax()
}

/// Inverse iteration for the lowest eigenvalue of -Lap + R/2.
pub fn lambda1(metric: &SphereMetric) -> Result<Eigenpair> {
    if let SphereMetric::Round { .. } = metric {
        let r = metric.scalar_curvature()?.0[0];
        return Ok(Eigenpair { lambda: 0.5 * r, f: ScalarField(vec![1.0]), residual: 0.0, iterations: 0 });
    }
    let m = operator_matrix(metric)?;
    let n = m.nrows();
    let r = metric.scalar_curvature()?;
    let mut shift = 0.5 * r.min() - 1.0;
    let mut lu = (&m - DMatrix::identity(n, n) * shift).lu();
    let mut f = DVector::from_element(n, 1.0);
    let mut lambda = f64::NAN;
    let mut res = f64::INFINITY;
    let mut refined = false;
    for it in 1..=500 {
        let y = lu
            .solve(&f)
            .ok_or_else(|| Error::numerical("singular shifted operator", f64::NAN))?;
        let imax = y.iamax();
        f = &y / y[imax];
        let mf = &m * &f;
        lambda = f.dot(&mf) / f.dot(&f);
        res = residual(&m, &f, lambda);
        if res <= 0.01 * tol::EIGEN_RESIDUAL {
            return finish(f, lambda, res, it);
        }
        if !refined && it >= 8 && res < 1e-3 {
            // sharpen the shift once the eigenvector is roughly resolved
            shift = lambda - 1e-6 * lambda.abs().max(1.0);
            lu = (&m - DMatrix::identity(n, n) * shift).lu();
            refined = true;
        }
    }
    if res <= tol::EIGEN_RESIDUAL {
        return finish(f, lambda, res, 500);
    }
    Err(Error::numerical("inverse iteration did not converge", res))
}

fn finish(f: DVector<f64>, lambda: f64, res: f64, iterations: usize) -> Result<Eigenpair> {
    let vals: Vec<f64> = f.iter().cloned().collect();
    if vals.iter().any(|v| *v <= 0.0) {
        return Err(Error::numerical("first eigenfunction is not positive", res));
    }
    Ok(Eigenpair { lambda, f: ScalarField(vals), residual: res, iterations })
}
