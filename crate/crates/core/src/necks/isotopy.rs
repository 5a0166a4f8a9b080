use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{fd_band_curvature, Orientation, ScalarField, SphereMetric, WarpedBand};
use crate::numeric::quad::gauss_legendre;
use crate::paths::{tensor_trace, MetricPath};

const T_NODES: usize = 401;
const MAX_DOUBLINGS: i32 = 40;
const FD_VERIFY_MAX_LAMBDA: f64 = 64.0;

#[derive(Debug, Clone, Serialize)]
pub struct LambdaAttempt {
    pub lambda: f64,
    pub min_r: f64,
    pub limiting_t: f64,
    pub min_r_fd: Option<f64>,
}

/// Band e^{2 Lambda t} dt^2 + e^{2B(t)} gamma(t) joining (gamma(0), eps0) to (mu gamma(1), eps1).
#[derive(Debug, Clone, Serialize)]
pub struct IsotopyNeck {
    pub path: String,
    pub n: usize,
    pub eps0: f64,
    pub c0: f64,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    pub t: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    pub hbar_min: f64,
    pub hbar_start: f64,
    pub hbar_end: f64,
    /// max |Hbar - eps0| over both end slices
    pub end_deviation: f64,
    pub mu: f64,
    pub eps1: f64,
    pub min_r: f64,
    pub min_r_fd: Option<f64>,
    pub attempts: Vec<LambdaAttempt>,
    #[serde(skip)]
    pub band: Option<WarpedBand>,
}

fn trace_derivative(path: &MetricPath, t: f64) -> Vec<f64> {
    tensor_trace(&path.derivative_auto(t, 1), &path.tensor(t))
}

// B' = (eps0 + (S - c)/2)/(n-1) with S = sqrt(sum tr^2 + c^2) >= max|tr|, so
// Hbar = (n-1)B' + tr/2 >= eps0 - c/2 = (eps0 + c0)/2, and Hbar = eps0 where tr = 0.
fn b_prime(path: &MetricPath, t: f64, eps0: f64, c: f64) -> (f64, Vec<f64>) {
    let tr = trace_derivative(path, t);
    let s = (tr.iter().map(|v| v * v).sum::<f64>() + c * c).sqrt();
    ((eps0 + 0.5 * (s - c)) / (path.n() - 1) as f64, tr)
}

pub fn build_isotopy_neck(path: &MetricPath, eps0: f64, c0: f64) -> Result<IsotopyNeck> {
    if !(eps0 > 0.0) {
        return Err(Error::Precondition(format!("epsilon0 = {eps0} must be positive")));
    }
    if !(c0 > 0.0 && c0 < eps0) {
        return Err(Error::Precondition(format!("0 < c0 < epsilon0 violated (c0 = {c0})")));
    }
    let flags = path.flags();
    if !flags.constant_near_0 || !flags.constant_near_1 {
        return Err(Error::Precondition("path must be constant near t = 0 and t = 1".into()));
    }
    let n = path.n();
    let c = eps0 - c0;
    let ts: Vec<f64> = (0..T_NODES).map(|k| k as f64 / (T_NODES - 1) as f64).collect();
    let (gx, gw) = gauss_legendre(4);

    let mut b = vec![0.0; T_NODES];
    let mut hbar_formula = Vec::with_capacity(T_NODES);
    let mut slices = Vec::with_capacity(T_NODES);
    let mut r_hat = Vec::with_capacity(T_NODES);
    for (k, &t) in ts.iter().enumerate() {
        if k > 0 {
            let (lo, hi) = (ts[k - 1], t);
            let inc: f64 = gx
                .iter()
                .zip(&gw)
                .map(|(x, w)| 0.5 * (hi - lo) * w * b_prime(path, 0.5 * (lo + hi) + 0.5 * (hi - lo) * x, eps0, c).0)
                .sum();
            b[k] = b[k - 1] + inc;
        }
        let gamma = path.metric(t)?;
        let rt = gamma.scalar_curvature()?;
        if !(rt.min() > 0.0) {
            return Err(Error::Precondition(format!("path leaves positive scalar curvature at t = {t}")));
        }
        let (bp, tr) = b_prime(path, t, eps0, c);
        hbar_formula.push(ScalarField(tr.iter().map(|v| (n - 1) as f64 * bp + 0.5 * v).collect()));
        let e2b = (2.0 * b[k]).exp();
        r_hat.push(rt.map(|v| v / e2b));
        slices.push(SphereMetric::scaled(gamma, e2b)?);
    }
    let flat = WarpedBand::product(ts.clone(), slices.clone())?;
    let flat_curv = fd_band_curvature(&flat)?;
    let hbar_min = hbar_formula.iter().map(|h| h.min()).fold(f64::INFINITY, f64::min);
    if hbar_min < c0 {
        return Err(Error::numerical("mean curvature of the flat band fell below c0", c0 - hbar_min));
    }

    let len = path.grid_len();
    let mut attempts = Vec::new();
    for k in 0..=MAX_DOUBLINGS {
        let lam = 2f64.powi(k);
        let mut min_r = f64::INFINITY;
        let mut limiting_t = 0.0;
        for (j, &t) in ts.iter().enumerate() {
            let w = (-2.0 * lam * t).exp();
            for i in 0..len {
                let h = hbar_formula[j].0[i];
                let rg = w * (2.0 * lam * h + flat_curv.r[j].0[i]) + (1.0 - w) * r_hat[j].0[i];
                if rg < min_r {
                    min_r = rg;
                    limiting_t = t;
                }
            }
        }
        let mut attempt = LambdaAttempt { lambda: lam, min_r, limiting_t, min_r_fd: None };
        if min_r > 0.0 {
            let mut band = None;
            if lam <= FD_VERIFY_MAX_LAMBDA {
                let lapse = ts.iter().map(|t| ScalarField::constant(len, (lam * t).exp())).collect();
                let warped = WarpedBand::new(ts.clone(), lapse, slices.clone(), Orientation::Increasing)?;
                let fd = fd_band_curvature(&warped)?.interior_min();
                attempt.min_r_fd = Some(fd);
                if !(fd > 0.0) {
                    attempts.push(attempt);
                    continue;
                }
                band = Some(warped);
            }
            let min_r_fd = attempt.min_r_fd;
            attempts.push(attempt);
            let last = T_NODES - 1;
            return Ok(IsotopyNeck {
                path: path.label().to_string(),
                n,
                eps0,
                c0,
                lambda: lam,
                hbar_min,
                hbar_start: hbar_formula[0].0[0],
                hbar_end: hbar_formula[last].0[0],
                end_deviation: [&hbar_formula[0], &hbar_formula[last]]
                    .iter()
                    .flat_map(|h| h.0.iter())
                    .map(|v| (v - eps0).abs())
                    .fold(0.0, f64::max),
                mu: (2.0 * b[last]).exp(),
                eps1: (-lam).exp() * eps0,
                t: ts,
                b,
                min_r,
                min_r_fd,
                attempts,
                band,
            });
        }
        attempts.push(attempt);
    }
    let last = attempts.last().expect("at least one attempt");
    Err(Error::numerical(
        format!("no Lambda <= 2^{MAX_DOUBLINGS} gives positive scalar curvature; limiting slice t = {}", last.limiting_t),
        last.min_r,
    ))
}
