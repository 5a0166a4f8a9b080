use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{fd_band_curvature, ScalarField, SphereMetric, Tensor, WarpedBand};
use crate::numeric::fd::fornberg;
use crate::paths::{tensor_norm, MetricPath, END_WINDOW};

const MAX_HALVINGS: usize = 40;
/// Relative s-step of the local bands used for s-derivatives.
const ETA: f64 = 1e-3;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeviationSample {
    pub t: f64,
    pub s: f64,
    /// s |A - gbar/s| measured by differences in s.
    pub measured: f64,
    /// delta / (pi (1 + delta^2 ln^2 s)) |gamma'(t)|.
    pub formula: f64,
}

/// Base metric ds^2 + s^2 gamma(t(s)) on [1, s_max] with t(s) = (2/pi) atan(delta ln s).
#[derive(Debug, Clone, Serialize)]
pub struct BaseAF {
    #[serde(skip)]
    pub path: MetricPath,
    pub n: usize,
    pub delta: f64,
    pub s0: f64,
    pub s_max: f64,
    pub eps_target: f64,
    pub eps_achieved: f64,
    /// Constant path: the whole base is a cone over gamma(1).
    pub conical: bool,
    pub truncated: bool,
    pub corners_s: Vec<f64>,
    pub min_r_gamma: f64,
    pub samples: Vec<DeviationSample>,
    pub flags: Vec<String>,
}

/// Geometry of the base at one s.
#[derive(Debug, Clone)]
pub struct SliceData {
    pub s: f64,
    pub t: f64,
    pub metric: SphereMetric,
    pub r_gamma: ScalarField,
    pub hbar: ScalarField,
    pub r_bar: ScalarField,
}

fn is_std(t: &Tensor) -> Result<bool> {
    Ok(match t {
        Tensor::Round { r2, .. } => (r2 - 1.0).abs() <= 1e-10,
        Tensor::Axisym { gxx, .. } => {
            t.max_abs_diff(&SphereMetric::std_axisym(gxx.len())?.tensor()) <= 1e-10
        }
    })
}

impl BaseAF {
    pub fn t_of(&self, s: f64) -> f64 {
        (2.0 / PI) * (self.delta * s.ln()).atan()
    }

    pub fn s_of(&self, t: f64) -> f64 {
        ((PI * t / 2.0).tan() / self.delta).exp()
    }

    fn is_cone(&self, s: f64) -> bool {
        self.conical || s >= self.s0
    }

    fn gbar(&self, s: f64) -> Result<SphereMetric> {
        let t = if self.is_cone(s) { 1.0 } else { self.t_of(s) };
        SphereMetric::scaled(self.path.metric(t)?, s * s)
    }

    /// Offsets (in units of ETA s) of the local five-slice band at s.
    fn offsets(&self, s: f64, prefer_left: bool) -> [f64; 5] {
        let eta = ETA * s;
        const CENTER: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];
        const RIGHT: [f64; 5] = [0.0, 1.0, 2.0, 3.0, 4.0];
        const LEFT: [f64; 5] = [-4.0, -3.0, -2.0, -1.0, 0.0];
        if s - 2.0 * eta < 1.0 {
            return RIGHT;
        }
        for &c in self.corners_s.iter().chain(std::iter::once(&self.s0)) {
            if (s - c).abs() < 2.0 * eta {
                let tiny = 1e-12 * s;
                return if s > c + tiny {
                    RIGHT
                } else if s < c - tiny {
                    LEFT
                } else if prefer_left {
                    LEFT
                } else {
                    RIGHT
                };
            }
        }
        CENTER
    }

    pub fn slice(&self, s: f64) -> Result<SliceData> {
        self.slice_sided(s, true)
    }

    /// Slice data; at a corner `prefer_left` selects the one-sided stencil below it.
    pub fn slice_sided(&self, s: f64, prefer_left: bool) -> Result<SliceData> {
        if !(s >= 1.0 - 1e-12) {
            return Err(Error::Domain(format!("s = {s} below the inner boundary s = 1")));
        }
        let nf = self.n as f64;
        if self.is_cone(s) {
            let g = self.path.metric(1.0)?;
            let rg = g.scalar_curvature()?;
            let len = g.grid_len();
            return Ok(SliceData {
                s,
                t: if self.conical { 1.0 } else { self.t_of(s) },
                metric: SphereMetric::scaled(g, s * s)?,
                r_gamma: rg.map(|r| r / (s * s)),
                hbar: ScalarField::constant(len, (nf - 1.0) / s),
                r_bar: rg.map(|r| (r - (nf - 1.0) * (nf - 2.0)) / (s * s)),
            });
        }
        let offs = self.offsets(s, prefer_left);
        let ss: Vec<f64> = offs.iter().map(|o| s + o * ETA * s).collect();
        let slices = ss.iter().map(|&x| self.gbar(x)).collect::<Result<Vec<_>>>()?;
        let center = offs.iter().position(|o| *o == 0.0).unwrap();
        let band = WarpedBand::product(ss, slices)?;
        let curv = fd_band_curvature(&band)?;
        let metric = band.slices()[center].clone();
        Ok(SliceData {
            s,
            t: self.t_of(s),
            r_gamma: metric.scalar_curvature()?,
            metric,
            hbar: curv.mean[center].clone(),
            r_bar: curv.r[center].clone(),
        })
    }

    /// s |A_s - gbar_s / s| from five-point s-differences of the slices.
    pub fn measured_deviation(&self, s: f64) -> Result<f64> {
        if self.is_cone(s) {
            return Ok(0.0);
        }
        let offs = self.offsets(s, true);
        let xs: Vec<f64> = offs.iter().map(|o| o * ETA * s).collect();
        let w = fornberg(0.0, &xs, 1);
        let g = self.gbar(s)?.tensor();
        let mut d = g.zeros_like();
        for (k, x) in xs.iter().enumerate() {
            if *x != 0.0 {
                let diff = self.gbar(s + x)?.tensor().combine(1.0, &g, -1.0)?;
                d = d.combine(1.0, &diff, 0.5 * w[1][k])?;
            }
        }
        let dev = d.combine(1.0, &g, -1.0 / s)?;
        Ok(s * tensor_norm(&dev, &g))
    }

    /// The same quantity from the path derivative.
    pub fn formula_deviation(&self, s: f64) -> f64 {
        if self.is_cone(s) {
            return 0.0;
        }
        let t = self.t_of(s);
        let l = s.ln();
        self.delta / (PI * (1.0 + self.delta * self.delta * l * l))
            * tensor_norm(&self.path.derivative_auto(t, 1), &self.path.tensor(t))
    }

    fn measure(&mut self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        self.samples.clear();
        for t in self.path.t_nodes() {
            if t >= END_WINDOW.0 {
                continue;
            }
            let s = self.s_of(t);
            let measured = self.measured_deviation(s)?;
            worst = worst.max(measured);
            self.samples.push(DeviationSample { t, s, measured, formula: self.formula_deviation(s) });
        }
        Ok(worst)
    }
}

/// Base metric for `path`, halving delta from 1 until the measured deviation is <= eps_target.
pub fn build_base(path: &MetricPath, eps_target: f64, s_max: f64) -> Result<BaseAF> {
    if !(eps_target > 0.0 && eps_target < 1.0) {
        return Err(Error::Domain(format!("epsilon target {eps_target} outside (0, 1)")));
    }
    if !(s_max > 1.0) {
        return Err(Error::Domain(format!("s_max = {s_max} must exceed 1")));
    }
    if !path.flags().constant_near_1 || !is_std(&path.tensor(1.0))? {
        return Err(Error::Precondition("path must equal the standard sphere metric for t >= 5/6".into()));
    }
    let mut min_r = f64::INFINITY;
    for t in path.t_nodes() {
        min_r = min_r.min(path.metric(t)?.scalar_curvature()?.min());
    }
    if !(min_r > 0.0) {
        return Err(Error::Precondition(format!("path leaves positive scalar curvature (min R = {min_r})")));
    }
    let conical = path.is_constant();
    let mut base = BaseAF {
        path: path.clone(),
        n: path.n(),
        delta: 1.0,
        s0: 1.0,
        s_max,
        eps_target,
        eps_achieved: 0.0,
        conical,
        truncated: false,
        corners_s: vec![],
        min_r_gamma: min_r,
        samples: vec![],
        flags: vec![],
    };
    if !conical {
        let mut found = false;
        for _ in 0..=MAX_HALVINGS {
            base.s0 = ((5.0 * PI / 12.0).tan() / base.delta).exp();
            if !base.s0.is_finite() {
                break;
            }
            base.corners_s = path.corners().iter().filter(|c| **c < END_WINDOW.0).map(|c| base.s_of(*c)).collect();
            let worst = base.measure()?;
            if worst <= eps_target {
                base.eps_achieved = worst;
                found = true;
                break;
            }
            base.delta *= 0.5;
        }
        if !found {
            return Err(Error::numerical("no interpolation rate delta reaches the epsilon target", eps_target));
        }
    }
    if s_max < base.s0 {
        base.truncated = true;
        base.flags.push(format!("s_max = {s_max} truncates the Euclidean region starting at s0 = {}", base.s0));
    }
    Ok(base)
}
