//! Bound calculus for the fill-in invariant theta(Sigma, gamma, H): closed forms, amplification,
//! decay constants and lower bounds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{fd_band_curvature, lambda1, Orientation, ScalarField, SphereMetric, WarpedBand};
use crate::necks::solve_c_mu;
use crate::numeric::roots::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    ClosedForm,
    LowerBound,
    UpperBound,
    DecayCurve,
}

/// Which result a bound comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    CircleClosedForm,
    SphereClosedForm,
    Monotonicity,
    ExponentialDecay,
    MeanCurvatureLowerBound,
    SpectralLowerBound,
}

/// A checked inequality `lhs relation rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub lhs: f64,
    pub relation: &'static str,
    pub rhs: f64,
    pub holds: bool,
}

impl Hypothesis {
    fn new(name: &str, lhs: f64, relation: &'static str, rhs: f64) -> Self {
        let holds = match relation {
            "<" => lhs < rhs,
            "<=" => lhs <= rhs,
            ">" => lhs > rhs,
            ">=" => lhs >= rhs,
            _ => false,
        };
        Hypothesis { name: name.to_string(), lhs, relation, rhs, holds }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    #[serde(rename = "H")]
    pub h: f64,
    pub envelope: f64,
    pub iterate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaBound {
    pub kind: BoundKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<Vec<CurvePoint>>,
    pub provenance: Provenance,
    pub hypotheses: Vec<Hypothesis>,
    pub flags: Vec<String>,
}

impl ThetaBound {
    /// `H,envelope,iterate` rows for decay curves.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("H,envelope,iterate\n");
        for p in self.curve.iter().flatten() {
            let it = p.iterate.map(|v| format!("{v:.16e}")).unwrap_or_default();
            out.push_str(&format!("{:.16e},{:.16e},{}\n", p.h, p.envelope, it));
        }
        out
    }
}

const DICHOTOMY: &str = "dichotomy: either theta >= value, or theta = 0 and is not attained; not decided here";

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::Domain(format!("n = {n} must be >= 3")));
    }
    Ok(())
}

pub fn theta_closed_form(n: usize, h: f64) -> Result<ThetaBound> {
    let (value, provenance, hyp) = match n {
        2 if (0.0..1.0).contains(&h) => (2.0 * (1.0 - h * h), Provenance::CircleClosedForm, Hypothesis::new("H < 1", h, "<", 1.0)),
        3 if h >= 2.0 => (6.0 * (1.0 - h * h / 4.0), Provenance::SphereClosedForm, Hypothesis::new("H >= 2", h, ">=", 2.0)),
        2 => return Err(Error::Domain(format!("closed form for n = 2 needs 0 <= H < 1, got H = {h}"))),
        3 => return Err(Error::Domain(format!("closed form for n = 3 needs H >= 2, got H = {h}"))),
        _ => return Err(Error::Domain(format!("closed forms exist only for n = 2 (0 <= H < 1) and n = 3 (H >= 2), got n = {n}"))),
    };
    Ok(ThetaBound {
        kind: BoundKind::ClosedForm,
        value: Some(value),
        curve: None,
        provenance,
        hypotheses: vec![hyp],
        flags: vec![],
    })
}

fn mu_of(n: usize, lambda: f64, theta: f64) -> f64 {
    let nf = n as f64;
    (nf - 1.0) / nf * (theta + nf * lambda * lambda / (nf - 1.0)).powf(2.0 / nf) * theta.powf(1.0 - 2.0 / nf)
}

/// Factor alpha > 1 with theta(lambda) <= alpha^{-2} theta(1).
pub fn amplification(n: usize, lambda: f64, theta: f64) -> Result<f64> {
    check_n(n)?;
    if !(lambda > 1.0) {
        return Err(Error::Domain(format!("lambda = {lambda} must exceed 1")));
    }
    if theta <= 0.0 {
        return Ok(2.0);
    }
    let nf = n as f64;
    let c = solve_c_mu(n, mu_of(n, lambda, theta))?;
    let alpha = ((1.0 - c) * (lambda * lambda + (nf - 1.0) * theta / nf)).powf(1.0 / (nf - 2.0));
    if !(alpha > 1.0) {
        return Err(Error::numerical("amplification factor is not above 1", alpha));
    }
    Ok(alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformDecay {
    pub theta0: f64,
    pub alpha0: f64,
    /// |4 (1 - c_mu(theta0)) - 2|
    pub certificate: f64,
}

pub fn uniform_decay_constants(n: usize) -> Result<UniformDecay> {
    check_n(n)?;
    let cm = |t: f64| if t > 0.0 { solve_c_mu(n, mu_of(n, 2.0, t)).expect("positive mu") } else { 0.0 };
    let mut hi = 1.0;
    while cm(hi) <= 0.5 {
        hi *= 2.0;
    }
    let theta0 = bisect(|t| cm(t) - 0.5, 0.0, hi, 0.0)?;
    let certificate = (4.0 * (1.0 - cm(theta0)) - 2.0).abs();
    if certificate > 1e-10 {
        return Err(Error::numerical("uniform decay certificate", certificate));
    }
    Ok(UniformDecay { theta0, alpha0: 2f64.powf(1.0 / (n as f64 - 2.0)), certificate })
}

/// Iterated bound alpha0^{-2k} theta_H0 at H = 2^k H0.
pub fn decay_iterate(n: usize, theta_h0: f64, k: u32) -> f64 {
    let alpha0 = 2f64.powf(1.0 / (n as f64 - 2.0));
    alpha0.powi(-2 * k as i32) * theta_h0
}

pub fn decay_curve(n: usize, h0: f64, theta_h0: f64, h_grid: &[f64]) -> Result<ThetaBound> {
    check_n(n)?;
    if !(h0 >= 1.0) || !(theta_h0 > 0.0) {
        return Err(Error::Domain(format!("need H0 >= 1 and theta_H0 > 0, got {h0}, {theta_h0}")));
    }
    if let Some(h) = h_grid.iter().find(|h| !(**h >= h0)) {
        return Err(Error::Domain(format!("grid point H = {h} below H0 = {h0}")));
    }
    let beta = 2.0 / (n as f64 - 2.0);
    let alpha0 = 2f64.powf(1.0 / (n as f64 - 2.0));
    let c = alpha0 * alpha0 * theta_h0 * h0.powf(beta);
    let curve: Vec<CurvePoint> = h_grid
        .iter()
        .map(|&h| {
            let k = ((h / h0).log2() + 1e-12).floor().max(0.0) as u32;
            CurvePoint { h, envelope: c * h.powf(-beta), iterate: Some(decay_iterate(n, theta_h0, k)) }
        })
        .collect();
    let worst = curve.iter().map(|p| p.envelope - p.iterate.unwrap()).fold(f64::INFINITY, f64::min);
    Ok(ThetaBound {
        kind: BoundKind::DecayCurve,
        value: None,
        curve: Some(curve),
        provenance: Provenance::ExponentialDecay,
        hypotheses: vec![
            Hypothesis::new("H0 >= 1", h0, ">=", 1.0),
            Hypothesis::new("theta_H0 > 0", theta_h0, ">", 0.0),
            Hypothesis::new("min(envelope - iterate) >= 0", worst, ">=", 0.0),
        ],
        flags: vec![],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub points: Vec<(f64, f64)>,
    pub flags: Vec<String>,
}

/// Tightest non-increasing envelope of upper bounds (H, value).
pub fn monotone_envelope(bounds: &[(f64, f64)]) -> Result<Envelope> {
    if bounds.is_empty() {
        return Err(Error::Domain("empty bound list".into()));
    }
    let mut pts = bounds.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut flags = Vec::new();
    for w in pts.windows(2) {
        if w[1].1 > w[0].1 {
            flags.push(format!("raw bound increases from {} at H = {} to {} at H = {}", w[0].1, w[0].0, w[1].1, w[1].0));
        }
    }
    let mut best = f64::INFINITY;
    let points = pts
        .iter()
        .map(|&(h, v)| {
            best = best.min(v);
            (h, best)
        })
        .collect();
    Ok(Envelope { points, flags })
}

pub fn fillin_lower_bound(n: usize, min_r: f64, max_h: f64) -> Result<ThetaBound> {
    check_n(n)?;
    if !(max_h >= 0.0) {
        return Err(Error::Precondition(format!("max H = {max_h} must be nonnegative")));
    }
    let nf = n as f64;
    let shift = (nf - 2.0) / (nf - 1.0) * max_h * max_h;
    let hyp = Hypothesis::new("min R > (n-2)/(n-1) max H^2", min_r, ">", shift);
    if !hyp.holds {
        return Err(Error::Precondition(format!("min R = {min_r} must exceed (n-2)/(n-1) max H^2 = {shift}")));
    }
    Ok(ThetaBound {
        kind: BoundKind::LowerBound,
        value: Some(min_r - shift),
        curve: None,
        provenance: Provenance::MeanCurvatureLowerBound,
        hypotheses: vec![hyp],
        flags: vec![DICHOTOMY.into()],
    })
}

/// Lower bound 2 lambda1 at H = 0, with a finite-difference check that f1^2 dt^2 + gamma
/// has scalar curvature 2 lambda1.
pub fn spectral_lower_bound(metric: &SphereMetric) -> Result<ThetaBound> {
    let pair = lambda1(metric)?;
    if !(pair.lambda > 0.0) {
        return Err(Error::Precondition(format!("lambda1 = {} must be positive", pair.lambda)));
    }
    let s: Vec<f64> = (0..9).map(|k| 0.1 * k as f64).collect();
    let band = WarpedBand::new(
        s.clone(),
        vec![pair.f.clone(); s.len()],
        vec![metric.clone(); s.len()],
        Orientation::Increasing,
    )?;
    let curv = fd_band_curvature(&band)?;
    let dev = curv
        .r
        .iter()
        .flat_map(|r| r.0.iter())
        .map(|v| (v - 2.0 * pair.lambda).abs())
        .fold(0.0, f64::max);
    if dev > 1e-4 {
        return Err(Error::numerical("cylinder f1^2 dt^2 + gamma is not of constant curvature 2 lambda1", dev));
    }
    Ok(ThetaBound {
        kind: BoundKind::LowerBound,
        value: Some(2.0 * pair.lambda),
        curve: None,
        provenance: Provenance::SpectralLowerBound,
        hypotheses: vec![
            Hypothesis::new("lambda1 > 0", pair.lambda, ">", 0.0),
            Hypothesis::new("max |R_cylinder - 2 lambda1|", dev, "<", 1e-4),
        ],
        flags: vec![DICHOTOMY.into()],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PscCondition {
    pub holds: bool,
    pub threshold: f64,
    pub max_h: f64,
}

/// max H < ((n-1) min R0 / (n-2))^{1/2}.
pub fn psc_fillin_condition(n: usize, min_r0: f64, h: &ScalarField) -> Result<PscCondition> {
    check_n(n)?;
    if !(min_r0 > 0.0) {
        return Err(Error::Precondition(format!("min R0 = {min_r0} must be positive")));
    }
    let nf = n as f64;
    let threshold = ((nf - 1.0) * min_r0 / (nf - 2.0)).sqrt();
    let max_h = h.max();
    Ok(PscCondition { holds: max_h < threshold, threshold, max_h })
}
