use serde::Serialize;

use super::base::{BaseAF, SliceData};
use crate::error::{Error, Result};
use crate::manifold::{fd_band_curvature, Orientation, ScalarField, WarpedBand};
use crate::numeric::banded::Banded;

// L-stable, stiffly accurate SDIRK of order 4 with an embedded order-3 solution.
const GAMMA: f64 = 0.25;
const C: [f64; 5] = [0.25, 0.75, 11.0 / 20.0, 0.5, 1.0];
const A: [[f64; 4]; 5] = [
    [0.0, 0.0, 0.0, 0.0],
    [0.5, 0.0, 0.0, 0.0],
    [17.0 / 50.0, -1.0 / 25.0, 0.0, 0.0],
    [371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 0.0],
    [25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0],
];
const B: [f64; 5] = [25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25];
const B_HAT: [f64; 5] = [59.0 / 48.0, -17.0 / 96.0, 225.0 / 32.0, -85.0 / 12.0, 0.0];

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlowOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step in ln s.
    pub h_max: f64,
    /// Spacing of the output grid in ln s.
    pub out_step: f64,
    pub max_newton: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { rtol: 1e-11, atol: 1e-11, h_max: 0.01, out_step: 0.02, max_newton: 25 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityCertificate {
    pub alpha: f64,
    /// min over slices of I(s) / (s^alpha I(1)).
    pub worst_ratio: f64,
    pub holds: bool,
    pub applicable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowSolution {
    #[serde(skip)]
    pub base: BaseAF,
    pub n: usize,
    pub s: Vec<f64>,
    pub u: Vec<ScalarField>,
    /// I(s) = integral of Hbar / u over gbar_s.
    pub total_mean: Vec<f64>,
    pub certificate: MonotonicityCertificate,
    pub steps: usize,
    pub rejected: usize,
    pub options: FlowOptions,
}

impl FlowSolution {
    /// I(s) at an output node, or by re-evaluating the slice at interior s.
    pub fn total_mean_curvature(&self, s: f64) -> Result<f64> {
        let last = *self.s.last().unwrap();
        if s < 1.0 || s > last * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("s = {s} outside the solved range [1, {last}]")));
        }
        if let Some(k) = self.s.iter().position(|x| (x - s).abs() <= 1e-12 * s) {
            return Ok(self.total_mean[k]);
        }
        let k = self.s.partition_point(|x| *x < s);
        let (s0, s1) = (self.s[k - 1], self.s[k]);
        let w = (s.ln() - s0.ln()) / (s1.ln() - s0.ln());
        let u = self.u[k - 1].zip(&self.u[k], |a, b| (1.0 - w) * a + w * b)?;
        integral_of_mean(&self.base.slice(s)?, &u)
    }

    /// CSV rows `s,x,u`.
    pub fn to_csv(&self) -> String {
        let xs = self.base.path.metric(0.0).map(|m| m.x_nodes()).unwrap_or_default();
        let mut out = String::from("s,x,u\n");
        for (s, u) in self.s.iter().zip(&self.u) {
            for (i, v) in u.0.iter().enumerate() {
                let x = xs.get(i).copied().unwrap_or(0.0);
                out.push_str(&format!("{s:.16e},{x:.16e},{v:.16e}\n"));
            }
        }
        out
    }
}

fn integral_of_mean(sd: &SliceData, u: &ScalarField) -> Result<f64> {
    sd.metric.integrate(&sd.hbar.zip(u, |h, v| h / v)?)
}

struct Stage {
    rows: Vec<Vec<(usize, f64)>>,
    q: Vec<f64>,
    r_gamma: Vec<f64>,
    r_bar: Vec<f64>,
}

impl Stage {
    fn new(sd: &SliceData) -> Result<Self> {
        if let Some(h) = sd.hbar.0.iter().find(|h| !(**h > 0.0)) {
            return Err(Error::Precondition(format!("foliation is not mean-convex at s = {} (Hbar = {h})", sd.s)));
        }
        Ok(Stage {
            rows: sd.metric.laplacian_rows(),
            q: sd.hbar.0.iter().map(|h| sd.s / h).collect(),
            r_gamma: sd.r_gamma.0.clone(),
            r_bar: sd.r_bar.0.clone(),
        })
    }

    fn lap(&self, u: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|row| row.iter().map(|(j, w)| w * u[*j]).sum()).collect()
    }

    // d u / d ln s
    fn rhs(&self, u: &[f64]) -> Vec<f64> {
        let lu = self.lap(u);
        (0..u.len())
            .map(|i| {
                let v = u[i];
                self.q[i] * (v * v * lu[i] + 0.5 * (v - v * v * v) * self.r_gamma[i] - 0.5 * self.r_bar[i] * v)
            })
            .collect()
    }

    // I - h gamma J at u
    fn newton_matrix(&self, u: &[f64], hg: f64) -> Banded {
        let m = u.len();
        let lu = self.lap(u);
        let mut mat = Banded::zeros(m, 2, 2);
        for i in 0..m {
            let v = u[i];
            let diag = 2.0 * v * lu[i] + 0.5 * (1.0 - 3.0 * v * v) * self.r_gamma[i] - 0.5 * self.r_bar[i];
            mat.add(i, i, 1.0 - hg * self.q[i] * diag);
            for (j, w) in &self.rows[i] {
                mat.add(i, *j, -hg * self.q[i] * v * v * w);
            }
        }
        mat
    }
}

enum StepFail {
    Newton,
    Positivity,
}

struct Stepper<'a> {
    base: &'a BaseAF,
    opts: FlowOptions,
}

impl Stepper<'_> {
    fn step(&self, tau: f64, u: &[f64], h: f64) -> Result<std::result::Result<(Vec<f64>, f64), StepFail>> {
        let m = u.len();
        let hg = h * GAMMA;
        let mut ks: Vec<Vec<f64>> = Vec::with_capacity(5);
        let mut y = u.to_vec();
        for i in 0..5 {
            let s = (tau + C[i] * h).exp();
            let stage = Stage::new(&self.base.slice_sided(s, true)?)?;
            let mut rhs = u.to_vec();
            for (j, k) in ks.iter().enumerate() {
                for p in 0..m {
                    rhs[p] += h * A[i][j] * k[p];
                }
            }
            let mut converged = false;
            for _ in 0..self.opts.max_newton {
                let f = stage.rhs(&y);
                let g: Vec<f64> = (0..m).map(|p| -(y[p] - rhs[p] - hg * f[p])).collect();
                let lu = match stage.newton_matrix(&y, hg).factor() {
                    Ok(lu) => lu,
                    Err(_) => return Ok(Err(StepFail::Newton)),
                };
                let dy = lu.solve(&g);
                let mut big: f64 = 0.0;
                for p in 0..m {
                    y[p] += dy[p];
                    big = big.max(dy[p].abs() / (1.0 + y[p].abs()));
                }
                if !big.is_finite() {
                    return Ok(Err(StepFail::Newton));
                }
                if y.iter().any(|v| !(*v > 0.0)) {
                    return Ok(Err(StepFail::Positivity));
                }
                if big <= 1e-14 {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Ok(Err(StepFail::Newton));
            }
            ks.push((0..m).map(|p| (y[p] - rhs[p]) / hg).collect());
        }
        let mut err: f64 = 0.0;
        for p in 0..m {
            let e: f64 = (0..5).map(|i| h * (B[i] - B_HAT[i]) * ks[i][p]).sum();
            err = err.max(e.abs() / (self.opts.atol + self.opts.rtol * u[p].abs().max(y[p].abs())));
        }
        Ok(Ok((y, err)))
    }
}

fn output_grid(base: &BaseAF, s_end: f64, out_step: f64) -> Vec<f64> {
    let tau_end = s_end.ln();
    let mut forced: Vec<f64> = vec![0.0, tau_end];
    for s in base.corners_s.iter().chain([base.s0, s_end / 2.0, s_end / 4.0].iter()) {
        let t = s.ln();
        if t > 0.0 && t < tau_end {
            forced.push(t);
        }
    }
    let steps = (tau_end / out_step).ceil() as usize;
    let mut taus: Vec<f64> = (0..steps)
        .map(|k| k as f64 * tau_end / steps as f64)
        .filter(|t| forced.iter().all(|f| (t - f).abs() > 0.25 * out_step))
        .collect();
    taus.extend(forced);
    taus.sort_by(|a, b| a.total_cmp(b));
    taus.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    taus
}

pub fn run_flow(base: &BaseAF, u1: &ScalarField) -> Result<FlowSolution> {
    run_flow_to(base, u1, base.s_max, FlowOptions::default())
}

/// Solves H ds u = u^2 Lap u + (u - u^3) R_gamma / 2 - R_g u / 2 in ln s from u(1) = u1.
pub fn run_flow_to(base: &BaseAF, u1: &ScalarField, s_end: f64, opts: FlowOptions) -> Result<FlowSolution> {
    let len = base.path.grid_len();
    let u1 = if u1.len() == 1 && len > 1 { ScalarField::constant(len, u1.0[0]) } else { u1.clone() };
    if u1.len() != len {
        return Err(Error::Alignment(format!("u1 has {} samples, slice grid has {len}", u1.len())));
    }
    if u1.0.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Precondition("initial lapse u1 must be positive".into()));
    }
    if !(s_end >= 1.0) {
        return Err(Error::Domain(format!("flow end s = {s_end} below 1")));
    }
    let grid = output_grid(base, s_end, opts.out_step);
    let stepper = Stepper { base, opts };
    let mut u = u1.0.clone();
    let mut tau = 0.0;
    let mut h = 0.1 * opts.h_max;
    let mut us = vec![u1.clone()];
    let (mut steps, mut rejected) = (0, 0);
    for &target in &grid[1..] {
        while tau < target {
            let mut h_try = h.min(opts.h_max);
            let last = target - tau <= h_try * (1.0 + 1e-9);
            if last {
                h_try = target - tau;
            }
            match stepper.step(tau, &u, h_try)? {
                Ok((y, err)) if err <= 1.0 => {
                    tau = if last { target } else { tau + h_try };
                    u = y;
                    steps += 1;
                    let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.25)).clamp(0.2, 5.0) };
                    if !last || grow < 1.0 {
                        h = h_try * grow;
                    }
                }
                Ok((_, err)) => {
                    rejected += 1;
                    h = h_try * (0.9 * err.powf(-0.25)).clamp(0.2, 0.9);
                }
                Err(StepFail::Newton) => {
                    rejected += 1;
                    h = 0.5 * h_try;
                }
                Err(StepFail::Positivity) => {
                    rejected += 1;
                    h = 0.5 * h_try;
                    if h < 1e-12 {
                        return Err(Error::Degenerate(format!("lapse reaches zero near s = {}", tau.exp())));
                    }
                }
            }
            if h < 1e-12 {
                return Err(Error::numerical(format!("step size underflow at s = {}", tau.exp()), h));
            }
        }
        us.push(ScalarField(u.clone()));
    }
    let s: Vec<f64> = grid.iter().map(|t| t.exp()).collect();
    let mut total_mean = Vec::with_capacity(s.len());
    for (sk, uk) in s.iter().zip(&us) {
        total_mean.push(integral_of_mean(&base.slice(*sk)?, uk)?);
    }
    let alpha = (base.n as f64 - 2.0) * (1.0 - base.eps_achieved) / 2.0;
    let worst_ratio = s
        .iter()
        .zip(&total_mean)
        .map(|(sk, ik)| ik / (sk.powf(alpha) * total_mean[0]))
        .fold(f64::INFINITY, f64::min);
    let applicable = base.min_r_gamma >= 0.0;
    Ok(FlowSolution {
        base: base.clone(),
        n: base.n,
        s,
        u: us,
        total_mean,
        certificate: MonotonicityCertificate { alpha, worst_ratio, holds: worst_ratio >= 1.0 - 1e-6, applicable },
        steps,
        rejected,
        options: opts,
    })
}

/// max |R| of u^2 ds^2 + gbar_s over centered slices away from corners.
pub fn scalar_flatness(flow: &FlowSolution) -> Result<f64> {
    let slices = flow.s.iter().map(|s| Ok(flow.base.slice(*s)?.metric)).collect::<Result<Vec<_>>>()?;
    let band = WarpedBand::new(flow.s.clone(), flow.u.clone(), slices, Orientation::Increasing)?;
    let curv = fd_band_curvature(&band)?;
    let mut kinks: Vec<f64> = flow.base.corners_s.clone();
    if !flow.base.conical {
        kinks.push(flow.base.s0);
    }
    let near_kink = |k: usize| {
        let lo = k.saturating_sub(3);
        let hi = (k + 3).min(flow.s.len() - 1);
        kinks.iter().any(|c| *c >= flow.s[lo] * (1.0 - 1e-12) && *c <= flow.s[hi] * (1.0 + 1e-12))
    };
    let mut worst: f64 = 0.0;
    for k in 0..flow.s.len() {
        if curv.extrapolated[k] || near_kink(k) {
            continue;
        }
        worst = worst.max(curv.r[k].0.iter().fold(0.0, |a: f64, v| a.max(v.abs())));
    }
    Ok(worst)
}
