use serde::Serialize;

use super::base::{build_base, BaseAF};
use super::flow::{run_flow_to, FlowOptions, FlowSolution};
use crate::error::{Error, Result};
use crate::manifold::{unit_sphere_area, ScalarField, SphereMetric};
use crate::numeric::roots::bisect;

/// Default outer radius for mass extrapolation: 1e4, reduced for n >= 4 so that the
/// aspect s^{n-2} (u^2 - 1) stays above the roundoff floor of u.
pub fn default_s_max(n: usize) -> f64 {
    1e4f64.min(1e6f64.powf(1.0 / (n as f64 - 2.0)))
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    unit_sphere_area(n) / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "NoNNSCFillIn")]
    NoNnscFillIn,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmMass {
    /// Richardson limit of the coordinate-sphere flux at s_max, s_max/2, s_max/4.
    pub flux_extrapolated: f64,
    pub flux_samples: Vec<(f64, f64)>,
    /// s^{n-2} (1 - u^{-2}) / 2 averaged over the sphere at s_max.
    pub radial: f64,
    pub s_max: f64,
}

fn sphere_average(std: &SphereMetric, f: &ScalarField) -> Result<f64> {
    Ok(std.integrate(f)? / std.area())
}

/// ADM mass of a solved flow from its Euclidean region.
pub fn adm_mass(flow: &FlowSolution) -> Result<AdmMass> {
    let base = &flow.base;
    let s_max = *flow.s.last().unwrap();
    if base.truncated || s_max < 10.0 * base.s0 {
        return Err(Error::Refused(format!(
            "ADM mass needs the flow solved to s >= 10 s0 = {} (solved to {s_max})",
            10.0 * base.s0
        )));
    }
    let std = base.path.metric(1.0)?;
    let e = flow.n as f64 - 2.0;
    let find = |s: f64| {
        flow.s
            .iter()
            .position(|x| (x - s).abs() <= 1e-9 * s)
            .ok_or_else(|| Error::Alignment(format!("no output slice at s = {s}")))
    };
    let mut samples = Vec::new();
    for s in [s_max, s_max / 2.0, s_max / 4.0] {
        let u = &flow.u[find(s)?];
        let m = 0.5 * s.powf(e) * sphere_average(&std, &u.map(|v| v * v - 1.0))?;
        samples.push((s, m));
    }
    // quadratic in x = 1/s, evaluated at x = 0
    let xs: Vec<f64> = samples.iter().map(|p| 1.0 / p.0).collect();
    let mut limit = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if j != i {
                w *= -xs[j] / (xs[i] - xs[j]);
            }
        }
        limit += w * samples[i].1;
    }
    let u_last = flow.u.last().unwrap();
    let radial = 0.5 * s_max.powf(e) * sphere_average(&std, &u_last.map(|v| 1.0 - 1.0 / (v * v)))?;
    Ok(AdmMass { flux_extrapolated: limit, flux_samples: samples, radial, s_max })
}

/// n(n-1) omega_n s0^{n - alpha - 2} with alpha = (n-2)(1-eps)/2.
pub fn h0_threshold(n: usize, eps: f64, s0: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("n = {n} must be >= 3")));
    }
    if !(eps >= 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("epsilon = {eps} outside [0, 1)")));
    }
    if !(s0 >= 1.0) {
        return Err(Error::Domain(format!("s0 = {s0} below 1")));
    }
    let nf = n as f64;
    let alpha = (nf - 2.0) * (1.0 - eps) / 2.0;
    Ok(nf * (nf - 1.0) * unit_ball_volume(n) * s0.powf(nf - alpha - 2.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct MassReport {
    pub n: usize,
    pub s0: f64,
    pub epsilon_achieved: f64,
    pub alpha: f64,
    pub h0: f64,
    /// n(n-1) omega_n s0^{n-2} - s0^alpha * integral of Hbar_1 / u_1.
    pub bracket: f64,
    /// C(n) * bracket with C(n) = 1 / ((n-1) |S^{n-1}|).
    pub eq_mass_bound: f64,
    pub brown_york_bound: f64,
    pub adm_mass: Option<f64>,
    pub c_n: f64,
    pub verdict: Verdict,
}

fn c_n(n: usize) -> f64 {
    1.0 / ((n as f64 - 1.0) * unit_sphere_area(n))
}

fn bracket_parts(base: &BaseAF, u1: &ScalarField) -> Result<(f64, f64, f64)> {
    let nf = base.n as f64;
    let alpha = (nf - 2.0) * (1.0 - base.eps_achieved) / 2.0;
    let first = base.slice(1.0)?;
    let u1 = broadcast(u1, first.hbar.len())?;
    let integral = first.metric.integrate(&first.hbar.zip(&u1, |h, u| h / u)?)?;
    let lead = nf * (nf - 1.0) * unit_ball_volume(base.n) * base.s0.powf(nf - 2.0);
    Ok((lead, base.s0.powf(alpha), integral))
}

fn broadcast(f: &ScalarField, len: usize) -> Result<ScalarField> {
    if f.len() == len {
        Ok(f.clone())
    } else if f.len() == 1 {
        Ok(ScalarField::constant(len, f.0[0]))
    } else {
        Err(Error::Alignment(format!("field has {} samples, slice grid has {len}", f.len())))
    }
}

/// Mass bound and verdict for initial lapse u1; the flow is solved up to s0 for the slice bound.
pub fn mass_upper_bound(base: &BaseAF, u1: &ScalarField) -> Result<MassReport> {
    let (lead, scale, integral) = bracket_parts(base, u1)?;
    let bracket = lead - scale * integral;
    let n = base.n;
    let cn = c_n(n);
    let flow = run_flow_to(base, u1, base.s0, FlowOptions::default())?;
    let last = flow.s.len() - 1;
    let sd = base.slice(flow.s[last])?;
    let gap = sd.hbar.zip(&flow.u[last], |h, u| h - h / u)?;
    let brown_york_bound = cn * sd.metric.integrate(&gap)?;
    Ok(MassReport {
        n,
        s0: base.s0,
        epsilon_achieved: base.eps_achieved,
        alpha: (n as f64 - 2.0) * (1.0 - base.eps_achieved) / 2.0,
        h0: h0_threshold(n, base.eps_achieved, base.s0)?,
        bracket,
        eq_mass_bound: cn * bracket,
        brown_york_bound,
        adm_mass: None,
        c_n: cn,
        verdict: if bracket < 0.0 { Verdict::NoNnscFillIn } else { Verdict::Inconclusive },
    })
}

/// Bartnik data (Sigma, gamma, H).
#[derive(Debug, Clone)]
pub struct BartnikData {
    pub n: usize,
    pub metric: SphereMetric,
    pub h: ScalarField,
}

#[derive(Debug, Clone, Serialize)]
pub struct NnscReport {
    pub report: MassReport,
    /// Smallest constant H making the bracket negative for this path.
    #[serde(rename = "H0", skip_serializing_if = "Option::is_none")]
    pub h0_constant: Option<f64>,
    pub delta: f64,
}

pub fn nnsc_fillin_test(data: &BartnikData, path: &crate::paths::MetricPath, eps_target: f64) -> Result<NnscReport> {
    nnsc_fillin_test_with(data, path, eps_target, default_s_max(data.n))
}

pub fn nnsc_fillin_test_with(
    data: &BartnikData,
    path: &crate::paths::MetricPath,
    eps_target: f64,
    s_max: f64,
) -> Result<NnscReport> {
    if data.h.0.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::Precondition("H must be positive".into()));
    }
    if data.metric.n() != data.n || path.n() != data.n {
        return Err(Error::Domain("data, metric and path dimensions differ".into()));
    }
    let start = path.tensor(0.0);
    let given = if data.metric.grid_len() != start.grid_len() {
        data.metric.to_axisym(start.grid_len())?.tensor()
    } else {
        data.metric.tensor()
    };
    if std::mem::discriminant(&start) != std::mem::discriminant(&given) || start.max_abs_diff(&given) > 1e-10 {
        return Err(Error::Precondition("path does not start at the data metric".into()));
    }
    let base = build_base(path, eps_target, s_max)?;
    let first = base.slice(1.0)?;
    let h = broadcast(&data.h, first.hbar.len())?;
    let u1 = first.hbar.zip(&h, |hb, hv| hb / hv)?;
    let report = mass_upper_bound(&base, &u1)?;
    let h0_constant = if data.h.is_constant() {
        let (lead, scale, _) = bracket_parts(&base, &u1)?;
        let area = first.metric.area();
        let f = |hv: f64| lead - scale * hv * area;
        let mut hi = 1.0;
        while f(hi) >= 0.0 {
            hi *= 2.0;
        }
        Some(bisect(f, 0.0, hi, 0.0)?)
    } else {
        None
    };
    Ok(NnscReport { report, h0_constant, delta: base.delta })
}

