use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{fd_band_curvature, Orientation, ScalarField, SphereMetric, WarpedBand};
use crate::numeric::roots::bisect;
use crate::tol;

/// The band psi^2 (dr^2 + r^2 gamma) on [r1, r2], possibly rescaled by tau^2.
#[derive(Debug, Clone, Serialize)]
pub struct SchwarzschildNeck {
    pub n: usize,
    pub m: f64,
    pub r1: f64,
    pub r2: f64,
    #[serde(rename = "H_outer")]
    pub h_outer: f64,
    pub h_inner: f64,
    pub tau2: f64,
    pub mu: f64,
    pub residuals: NeckResiduals,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NeckResiduals {
    /// |r2 psi(r2) - 1|
    pub outer_radius: f64,
    /// |H_r(r2) - H|
    pub outer_mean: f64,
    /// |H_r(r1) + h|
    pub inner_mean: f64,
}

impl SchwarzschildNeck {
    fn e(&self) -> f64 {
        (self.n - 2) as f64
    }

    pub fn psi(&self, r: f64) -> f64 {
        (1.0 + self.m / (2.0 * r.powf(self.e()))).powf(2.0 / self.e())
    }

    /// Mean curvature of the r-sphere in the unscaled band, toward increasing r.
    pub fn mean_curvature_r(&self, r: f64) -> f64 {
        let n = self.n as f64;
        (n - 1.0) / r * self.psi(r).powf(-n / 2.0) * (1.0 - self.m / (2.0 * r.powf(self.e())))
    }

    /// Scalar curvature at radius r for a boundary metric with scalar curvature r_gamma,
    /// including the tau^2 rescaling.
    pub fn scalar_curvature(&self, r: f64, r_gamma: f64) -> f64 {
        let n = self.n as f64;
        let rp = r * self.psi(r);
        (r_gamma - (n - 1.0) * (n - 2.0) / self.tau2) / (rp * rp)
    }

    /// r psi(r) on a uniform grid over [r1, r2].
    pub fn radius_profile(&self, points: usize) -> Vec<(f64, f64)> {
        (0..points)
            .map(|i| {
                let r = self.r1 + (self.r2 - self.r1) * i as f64 / (points - 1) as f64;
                (r, r * self.psi(r))
            })
            .collect()
    }
}

/// Unscaled neck with outer mean curvature H and inner mean curvature h.
pub fn build_schwarzschild_neck(n: usize, h_outer: f64, h_inner: f64) -> Result<SchwarzschildNeck> {
    if n < 3 {
        return Err(Error::Domain(format!("n = {n} must be >= 3")));
    }
    let nf = n as f64;
    if !(h_outer > 0.0 && h_outer < nf - 1.0) {
        return Err(Error::Domain(format!("H = {h_outer} outside (0, {})", n - 1)));
    }
    if !(h_inner >= 0.0 && h_inner < h_outer) {
        return Err(Error::Domain(format!("h = {h_inner} outside [0, H)")));
    }
    let e = nf - 2.0;
    let m = 0.5 - h_outer * h_outer / (2.0 * (nf - 1.0).powi(2));
    let r2 = ((nf - 1.0 + h_outer) / (2.0 * (nf - 1.0))).powf(2.0 / e);
    let r_star = (m / 2.0).powf(1.0 / e);
    let mut neck = SchwarzschildNeck {
        n,
        m,
        r1: r_star,
        r2,
        h_outer,
        h_inner,
        tau2: 1.0,
        mu: 0.0,
        residuals: NeckResiduals { outer_radius: 0.0, outer_mean: 0.0, inner_mean: 0.0 },
        flags: vec![],
    };
    if h_inner > 0.0 {
        // r -> r*^2/r is an isometry flipping H_r, so H_r = -H at r*^2/r2 < r1 <= r*
        let lo = r_star * r_star / r2;
        let probe = neck.clone();
        neck.r1 = bisect(|r| probe.mean_curvature_r(r) + h_inner, lo, r_star, 0.0)?;
    }
    let p1 = neck.r1 * neck.psi(neck.r1);
    neck.mu = p1 * p1;
    neck.residuals = NeckResiduals {
        outer_radius: (r2 * neck.psi(r2) - 1.0).abs(),
        outer_mean: (neck.mean_curvature_r(r2) - h_outer).abs(),
        inner_mean: (neck.mean_curvature_r(neck.r1) + h_inner).abs(),
    };
    let prof = neck.radius_profile(1000);
    if prof.windows(2).any(|w| w[1].1 <= w[0].1) {
        neck.flags.push("r*psi(r) is not increasing on [r1, r2]".into());
    }
    Ok(neck)
}

/// A Schwarzschild neck rescaled to boundary data (gamma, H) and (mu gamma, h), with its
/// discretized band and pointwise curvature checks.
#[derive(Debug, Clone, Serialize)]
pub struct RescaledNeck {
    pub neck: SchwarzschildNeck,
    pub epsilon: f64,
    /// min R_gamma - (n-2)/(n-1) H^2 - epsilon
    pub bound: f64,
    pub min_r_closed_form: f64,
    pub min_r_fd: f64,
    pub max_fd_error: f64,
    /// Inner boundary mean curvature with respect to its outward normal.
    pub inner_mean_curvature: f64,
    pub outer_mean_curvature: f64,
    pub band_nodes: usize,
    #[serde(skip)]
    pub band: Option<WarpedBand>,
}

pub fn rescale_neck(n: usize, gamma: &SphereMetric, h_outer: f64, h_inner: f64, eps: f64) -> Result<RescaledNeck> {
    rescale_neck_with(n, gamma, h_outer, h_inner, eps, 401)
}

pub fn rescale_neck_with(
    n: usize,
    gamma: &SphereMetric,
    h_outer: f64,
    h_inner: f64,
    eps: f64,
    nodes: usize,
) -> Result<RescaledNeck> {
    if gamma.n() != n {
        return Err(Error::Domain(format!("metric dimension {} differs from n = {n}", gamma.n())));
    }
    let nf = n as f64;
    if !(h_outer > 0.0) {
        return Err(Error::Precondition(format!("H = {h_outer} must be positive")));
    }
    if !(h_inner >= 0.0 && h_inner < h_outer) {
        return Err(Error::Precondition(format!("0 <= h < H violated (h = {h_inner}, H = {h_outer})")));
    }
    let r_gamma = gamma.scalar_curvature()?;
    let min_r = r_gamma.min();
    let slack = min_r - (nf - 2.0) / (nf - 1.0) * h_outer * h_outer;
    if !(slack > 0.0) {
        return Err(Error::Precondition(format!(
            "min R_gamma > (n-2)/(n-1) H^2 violated ({min_r} vs {})",
            min_r - slack
        )));
    }
    if !(eps > 0.0 && eps < slack) {
        return Err(Error::Precondition(format!("0 < epsilon < {slack} violated (epsilon = {eps})")));
    }
    let tau2 = (nf - 1.0) * (nf - 2.0) / ((nf - 2.0) * h_outer * h_outer / (nf - 1.0) + eps);
    let tau = tau2.sqrt();
    let mut neck = build_schwarzschild_neck(n, tau * h_outer, tau * h_inner)?;
    neck.h_outer = h_outer;
    neck.h_inner = h_inner;
    neck.tau2 = tau2;
    let bound = slack - eps;

    let cell = (neck.r2 - neck.r1) / (nodes - 1) as f64;
    let rs: Vec<f64> = (0..nodes + 2).map(|i| neck.r1 + (i as f64 - 1.0) * cell).collect();
    let len = gamma.grid_len();
    let lapse = rs.iter().map(|&r| ScalarField::constant(len, tau * neck.psi(r))).collect();
    let slices = rs
        .iter()
        .map(|&r| SphereMetric::scaled(gamma.clone(), (r * neck.psi(r)).powi(2)))
        .collect::<Result<Vec<_>>>()?;
    let band = WarpedBand::new(rs.clone(), lapse, slices, Orientation::Increasing)?;
    let curv = fd_band_curvature(&band)?;

    let mut min_closed = f64::INFINITY;
    let mut min_fd = f64::INFINITY;
    let mut max_err: f64 = 0.0;
    for (k, &r) in rs.iter().enumerate() {
        if k == 0 || k == rs.len() - 1 {
            continue;
        }
        for (i, rg) in r_gamma.0.iter().enumerate() {
            let closed = neck.scalar_curvature(r, *rg);
            min_closed = min_closed.min(closed);
            if !curv.extrapolated[k] {
                let fd = curv.r[k].0[i];
                min_fd = min_fd.min(fd);
                max_err = max_err.max((fd - closed).abs());
            }
        }
    }
    if min_closed < bound - tol::ALGEBRAIC {
        return Err(Error::numerical("closed-form curvature below the neck bound", bound - min_closed));
    }
    if min_fd < bound - tol::FD_ORACLE {
        return Err(Error::numerical("finite-difference curvature below the neck bound", bound - min_fd));
    }
    if !(neck.mu < 1.0) {
        return Err(Error::numerical("inner boundary factor mu is not below 1", neck.mu));
    }
    let inner = neck.mean_curvature_r(neck.r1) / tau;
    let outer = neck.mean_curvature_r(neck.r2) / tau;
    Ok(RescaledNeck {
        neck,
        epsilon: eps,
        bound,
        min_r_closed_form: min_closed,
        min_r_fd: min_fd,
        max_fd_error: max_err,
        inner_mean_curvature: -inner,
        outer_mean_curvature: outer,
        band_nodes: rs.len(),
        band: Some(band),
    })
}
