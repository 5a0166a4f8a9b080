use serde::Serialize;

use super::metric::{ScalarField, SphereMetric};
use crate::error::{Error, Result};
use crate::numeric::fd::{fornberg, window};

/// Which coordinate direction is outward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    Increasing,
    Decreasing,
}

/// A metric u^2 ds^2 + gbar(s) on Sigma x [s_lo, s_hi], sampled on an s-grid.
#[derive(Debug, Clone)]
pub struct WarpedBand {
    s: Vec<f64>,
    lapse: Vec<ScalarField>,
    slices: Vec<SphereMetric>,
    orientation: Orientation,
}

impl WarpedBand {
    pub fn new(
        s: Vec<f64>,
        lapse: Vec<ScalarField>,
        slices: Vec<SphereMetric>,
        orientation: Orientation,
    ) -> Result<Self> {
        if s.len() < 4 {
            return Err(Error::Resolution(format!("band needs >= 4 slices, got {}", s.len())));
        }
        if lapse.len() != s.len() || slices.len() != s.len() {
            return Err(Error::Alignment("band s-grid, lapse and slices differ in length".into()));
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("band s-grid must be strictly increasing".into()));
        }
        let len = slices[0].grid_len();
        let round = matches!(slices[0], SphereMetric::Round { .. });
        for (g, u) in slices.iter().zip(&lapse) {
            if g.grid_len() != len || matches!(g, SphereMetric::Round { .. }) != round || g.n() != slices[0].n() {
                return Err(Error::Alignment("band slices do not share one grid".into()));
            }
            if u.len() != len {
                return Err(Error::Alignment("lapse not aligned with slice grid".into()));
            }
            if u.0.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::Domain("lapse must be positive".into()));
            }
        }
        Ok(WarpedBand { s, lapse, slices, orientation })
    }

    /// Product-form band (lapse 1).
    pub fn product(s: Vec<f64>, slices: Vec<SphereMetric>) -> Result<Self> {
        let lapse = slices.iter().map(|g| ScalarField::constant(g.grid_len(), 1.0)).collect();
        Self::new(s, lapse, slices, Orientation::Increasing)
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }
    pub fn lapse(&self) -> &[ScalarField] {
        &self.lapse
    }
    pub fn slices(&self) -> &[SphereMetric] {
        &self.slices
    }
    pub fn orientation(&self) -> Orientation {
        self.orientation
    }
    pub fn n(&self) -> usize {
        self.slices[0].n()
    }
    pub fn grid_len(&self) -> usize {
        self.slices[0].grid_len()
    }
}

/// Per-slice output of the finite-difference curvature oracle.
#[derive(Debug, Clone, Serialize)]
pub struct BandCurvature {
    /// Scalar curvature of the band metric.
    pub r: Vec<ScalarField>,
    /// Mean curvature of each slice with respect to the outward direction.
    pub mean: Vec<ScalarField>,
    /// Squared norm of the second fundamental form.
    pub a_sq: Vec<ScalarField>,
    /// True where the s-stencil was one-sided.
    pub extrapolated: Vec<bool>,
}

impl BandCurvature {
    /// Minimum of R over slices that were not extrapolated.
    pub fn interior_min(&self) -> f64 {
        self.r
            .iter()
            .zip(&self.extrapolated)
            .filter(|(_, e)| !**e)
            .map(|(r, _)| r.min())
            .fold(f64::INFINITY, f64::min)
    }
}

// log g_ii per component; at axisymmetric poles the phi-component borrows the x-component,
// which has the same s-derivative there.
fn log_components(g: &SphereMetric) -> Vec<(f64, Vec<f64>)> {
    let t = g.tensor();
    let comps = t.components();
    if comps.len() == 1 {
        return vec![(comps[0].0, comps[0].1.iter().map(|v| v.ln()).collect())];
    }
    let xx: Vec<f64> = comps[0].1.iter().map(|v| v.ln()).collect();
    let last = xx.len() - 1;
    let pp: Vec<f64> = comps[1]
        .1
        .iter()
        .enumerate()
        .map(|(i, v)| if i == 0 || i == last { xx[i] } else { v.ln() })
        .collect();
    vec![(1.0, xx), (1.0, pp)]
}

/// Scalar curvature of u^2 ds^2 + gbar(s) from the Gauss-Riccati identity
/// R = Rhat - 2 u^{-1} d_s H - H^2 - |A|^2 - 2 Lap(u)/u, with s-derivatives by finite differences.
pub fn fd_band_curvature(band: &WarpedBand) -> Result<BandCurvature> {
    let ns = band.s.len();
    let logs: Vec<_> = band.slices.iter().map(log_components).collect();
    let mut out = BandCurvature { r: vec![], mean: vec![], a_sq: vec![], extrapolated: vec![] };
    let width = if ns >= 7 { 7 } else { ns.min(5) };
    let sign = match band.orientation {
        Orientation::Increasing => 1.0,
        Orientation::Decreasing => -1.0,
    };
    for j in 0..ns {
        let lo = window(j, ns, width);
        let w = fornberg(band.s[j], &band.s[lo..lo + width], 2);
        let centered = width >= 5 && lo + width / 2 == j;
        let g = &band.slices[j];
        let u = &band.lapse[j];
        let rhat = g.scalar_curvature()?;
        let lap = g.laplace_beltrami(u)?;
        let m = u.len();
        let mut r = Vec::with_capacity(m);
        let mut mean = Vec::with_capacity(m);
        let mut asq = Vec::with_capacity(m);
        for i in 0..m {
            let us: f64 = (0..width).map(|k| w[1][k] * band.lapse[lo + k].0[i]).sum();
            let (mut s1, mut s2, mut q) = (0.0, 0.0, 0.0);
            for (c, (mult, _)) in logs[j].iter().enumerate() {
                let d1: f64 = (0..width).map(|k| w[1][k] * logs[lo + k][c].1[i]).sum();
                let d2: f64 = (0..width).map(|k| w[2][k] * logs[lo + k][c].1[i]).sum();
                s1 += mult * d1;
                s2 += mult * d2;
                q += mult * d1 * d1;
            }
            let ui = u.0[i];
            let u2 = ui * ui;
            r.push(rhat.0[i] - s2 / u2 + us * s1 / (u2 * ui) - s1 * s1 / (4.0 * u2) - q / (4.0 * u2) - 2.0 * lap.0[i] / ui);
            mean.push(sign * 0.5 * s1 / ui);
            asq.push(0.25 * q / u2);
        }
        out.r.push(ScalarField(r));
        out.mean.push(ScalarField(mean));
        out.a_sq.push(ScalarField(asq));
        out.extrapolated.push(!centered);
    }
    Ok(out)
}
