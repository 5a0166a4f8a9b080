use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{fd_band_curvature, ScalarField, SphereMetric, Tensor, WarpedBand};

/// Bending data: g3 = dt^2 + ghat3(t) on [-t0, 0] and the bent metric
/// g4 = dt^2 + (1 + omega kappa(t))^2 ghat3(t) with kappa(t) = -t - K t^2 / 2.
#[derive(Debug, Clone)]
pub struct CollarBend {
    pub base: WarpedBand,
    pub omega: ScalarField,
    /// K = -kappa''.
    pub k_curv: f64,
    pub t1: f64,
}

impl CollarBend {
    pub fn new(base: WarpedBand, omega: ScalarField, k_curv: f64, t1: f64) -> Result<Self> {
        let s = base.s();
        if s[s.len() - 1].abs() > 1e-12 {
            return Err(Error::Precondition("collar base band must end at t = 0".into()));
        }
        if base.lapse().iter().any(|u| u.0.iter().any(|v| (v - 1.0).abs() > 1e-12)) {
            return Err(Error::Precondition("collar base band must have unit lapse".into()));
        }
        if omega.len() != 1 && omega.len() != base.grid_len() {
            return Err(Error::Alignment("omega is not aligned with the slice grid".into()));
        }
        if omega.0.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Precondition("omega must be positive".into()));
        }
        if !(k_curv >= 0.0) {
            return Err(Error::Precondition(format!("K = {k_curv} must be nonnegative")));
        }
        if !(t1 > 0.0 && t1 <= -s[0]) {
            return Err(Error::Precondition(format!("bending width t1 = {t1} outside (0, t0]")));
        }
        Ok(CollarBend { base, omega, k_curv, t1 })
    }

    pub fn kappa(&self, t: f64) -> (f64, f64, f64) {
        (-t - 0.5 * self.k_curv * t * t, -1.0 - self.k_curv * t, -self.k_curv)
    }

    fn omega_at(&self, i: usize) -> f64 {
        if self.omega.len() == 1 {
            self.omega.0[0]
        } else {
            self.omega.0[i]
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CollarResult {
    pub s: Vec<f64>,
    /// Scalar curvature of g4 from the expansion in base-band quantities.
    pub r_expansion: Vec<ScalarField>,
    /// Same expansion with the omega-gradient terms weighted as (n-1)k/phi^3 and (n-1)(n-4)k^2/phi^4.
    pub r_expansion_literal: Vec<ScalarField>,
    /// Slice mean curvatures of g4 toward t = 0.
    pub mean: Vec<ScalarField>,
    /// min of r_expansion over t in [-t1, 0].
    pub min_r_bend: f64,
    #[serde(skip)]
    pub band: Option<WarpedBand>,
}

fn bend_slice(g: &SphereMetric, phi: &[f64]) -> Result<SphereMetric> {
    match g.tensor() {
        Tensor::Round { n, r2 } => {
            if phi.len() != 1 {
                return Err(Error::Alignment("round slices need a constant omega".into()));
            }
            SphereMetric::round(n, r2.sqrt() * phi[0])
        }
        Tensor::Axisym { gxx, gpp } => {
            let get = |i: usize| if phi.len() == 1 { phi[0] } else { phi[i] };
            let t = Tensor::Axisym {
                gxx: gxx.iter().enumerate().map(|(i, v)| v * get(i).powi(2)).collect(),
                gpp: gpp.iter().enumerate().map(|(i, v)| v * get(i).powi(2)).collect(),
            };
            t.to_metric()
        }
    }
}

pub fn collar_bend(bend: &CollarBend, n: usize) -> Result<CollarResult> {
    if bend.base.n() != n {
        return Err(Error::Domain(format!("band dimension {} differs from n = {n}", bend.base.n())));
    }
    let nf = n as f64;
    let len = bend.base.grid_len();
    let base = fd_band_curvature(&bend.base)?;
    let s = bend.base.s().to_vec();
    let mut slices = Vec::with_capacity(s.len());
    let mut r_exp = Vec::with_capacity(s.len());
    let mut r_lit = Vec::with_capacity(s.len());
    let mut mean = Vec::with_capacity(s.len());
    let mut min_r_bend = f64::INFINITY;
    let omega_full = ScalarField((0..len).map(|i| bend.omega_at(i)).collect());
    for (k, &t) in s.iter().enumerate() {
        let (ka, ka1, ka2) = bend.kappa(t);
        let phi: Vec<f64> = (0..len).map(|i| 1.0 + bend.omega_at(i) * ka).collect();
        if let Some(p) = phi.iter().find(|p| !(**p > 0.0)) {
            return Err(Error::Degenerate(format!("1 + omega kappa = {p} at t = {t}")));
        }
        let g3 = &bend.base.slices()[k];
        let g4 = bend_slice(g3, &phi)?;
        let r_hat = g3.scalar_curvature()?;
        let lap = g4.laplace_beltrami(&omega_full)?;
        let grad = g4.grad_sq(&omega_full)?;
        let mut re = Vec::with_capacity(len);
        let mut rl = Vec::with_capacity(len);
        let mut h4 = Vec::with_capacity(len);
        for i in 0..len {
            let w = bend.omega_at(i);
            let p = phi[i];
            let h3 = base.mean[k].0[i];
            let common = base.r[k].0[i]
                - 2.0 * (nf - 1.0) * w * ka2 / p
                - (nf - 1.0) * (nf - 2.0) * (w * ka1 / p).powi(2)
                - w * ka * (2.0 + w * ka) / (p * p) * r_hat.0[i]
                - 2.0 * nf * w * ka1 / p * h3;
            re.push(
                common - 2.0 * (nf - 2.0) * ka / p * lap.0[i] + (nf - 1.0) * (nf - 2.0) * (ka / p).powi(2) * grad.0[i],
            );
            rl.push(
                common
                    - 2.0 * (nf - 1.0) * ka / p.powi(3) * lap.0[i]
                    - (nf - 1.0) * (nf - 4.0) * ka * ka / p.powi(4) * grad.0[i],
            );
            h4.push(h3 + (nf - 1.0) * w * ka1 / p);
        }
        let re = ScalarField(re);
        if t >= -bend.t1 - 1e-12 {
            min_r_bend = min_r_bend.min(re.min());
        }
        r_exp.push(re);
        r_lit.push(ScalarField(rl));
        mean.push(ScalarField(h4));
        slices.push(g4);
    }
    let band = WarpedBand::new(s.clone(), bend.base.lapse().to_vec(), slices, bend.base.orientation())?;
    Ok(CollarResult { s, r_expansion: r_exp, r_expansion_literal: r_lit, mean, min_r_bend, band: Some(band) })
}
