use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{fd_band_curvature, Orientation, ScalarField, WarpedBand};
use crate::numeric::fd::derivs_at;
use crate::paths::smoothstep5;

/// Ramp equal to 0 on (-inf, 1], 1 on [2, inf), quintic in between.
pub fn smoothstep_ramp(x: f64) -> f64 {
    smoothstep5(x - 1.0)
}

/// u(s) = alpha + (1 - alpha) ramp(s / r) on the given s-grid.
pub fn transition_function(r: f64, alpha: f64, s_grid: &[f64]) -> Result<ScalarField> {
    if !(r > 0.0) || !(alpha > 0.0) {
        return Err(Error::Domain(format!("need r > 0 and alpha > 0, got r = {r}, alpha = {alpha}")));
    }
    Ok(ScalarField(s_grid.iter().map(|s| alpha + (1.0 - alpha) * smoothstep_ramp(s / r)).collect()))
}

/// Laplacian of the transition function on a product cylinder ds^2 + gamma.
/// The function is constant on slices, so only the s-derivative contributes.
pub fn cylinder_laplacian(r: f64, alpha: f64, s_grid: &[f64]) -> Result<Vec<f64>> {
    let u = transition_function(r, alpha, s_grid)?;
    Ok((0..s_grid.len()).map(|i| derivs_at(s_grid, &u.0, i).1).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct BmnReport {
    pub boundary_discrepancy: f64,
    pub gap: ScalarField,
    pub min_gap: f64,
    pub min_r: f64,
    pub metrics_match: bool,
    pub gap_positive: bool,
    pub pass: bool,
}

fn boundary_index(b: &WarpedBand) -> usize {
    match b.orientation() {
        Orientation::Increasing => b.s().len() - 1,
        Orientation::Decreasing => 0,
    }
}

/// Checks g = g~ on the boundary and H_g > H_g~ there.
pub fn check_bmn_hypotheses(g: &WarpedBand, gt: &WarpedBand) -> Result<BmnReport> {
    let (ig, it) = (boundary_index(g), boundary_index(gt));
    let (sg, st) = (&g.slices()[ig], &gt.slices()[it]);
    let (tg, tt) = (sg.tensor(), st.tensor());
    if sg.grid_len() != st.grid_len() || std::mem::discriminant(&tg) != std::mem::discriminant(&tt) || sg.n() != st.n() {
        return Err(Error::Alignment("boundary slices do not share a grid".into()));
    }
    let discrepancy = tg.max_abs_diff(&tt);
    let cg = fd_band_curvature(g)?;
    let ct = fd_band_curvature(gt)?;
    let gap = cg.mean[ig].zip(&ct.mean[it], |a, b| a - b)?;
    let min_gap = gap.min();
    let min_r = cg.interior_min().min(ct.interior_min());
    let metrics_match = discrepancy < 1e-10;
    let gap_positive = min_gap > 0.0;
    Ok(BmnReport {
        boundary_discrepancy: discrepancy,
        gap,
        min_gap,
        min_r,
        metrics_match,
        gap_positive,
        pass: metrics_match && gap_positive,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BendingProfile {
    pub alpha: f64,
    pub beta: f64,
    pub d: Vec<f64>,
    pub w: Vec<f64>,
    /// Normal derivative of w at d = 0 (normal pointing toward decreasing d).
    pub dw_dnu: f64,
    pub bound: Vec<f64>,
    /// -max(bound), positive when the certificate holds.
    pub epsilon: f64,
}

/// w = (1 - beta d)^alpha - 1 with beta = 2 C1 and alpha = 1/4.
pub fn bending_profile(d_grid: &[f64], c1: f64) -> Result<BendingProfile> {
    if !(c1 > 0.0) {
        return Err(Error::Domain(format!("C1 = {c1} must be positive")));
    }
    let alpha = 0.25;
    let beta = 2.0 * c1;
    let dmax = d_grid.iter().cloned().fold(0.0, f64::max);
    if d_grid.iter().any(|d| *d < 0.0) {
        return Err(Error::Domain("distance grid must be nonnegative".into()));
    }
    if beta * dmax >= 0.5 {
        return Err(Error::Domain(format!("beta * delta = {} must be below 1/2", beta * dmax)));
    }
    let w = d_grid.iter().map(|d| (1.0 - beta * d).powf(alpha) - 1.0).collect();
    let bound: Vec<f64> = d_grid
        .iter()
        .map(|d| {
            let q = 1.0 - beta * d;
            2.0 * alpha * c1 * c1 * q.powf(alpha - 2.0) * (2.0 * alpha - 1.0 - beta * d)
        })
        .collect();
    let epsilon = -bound.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(BendingProfile { alpha, beta, d: d_grid.to_vec(), w, dw_dnu: alpha * beta, bound, epsilon })
}
