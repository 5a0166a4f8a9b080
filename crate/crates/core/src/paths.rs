//! One-parameter families of sphere metrics: convex combinations, mollification,
//! flattening reparametrization and derivative norms.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{SphereMetric, Tensor};
use crate::numeric::quad::gauss_legendre;
use crate::numeric::roots::bisect;
use crate::numeric::spline::CubicSpline;
use crate::tol;

type Family = Arc<dyn Fn(f64) -> Tensor + Send + Sync>;

/// Step used for t-derivatives of path families.
pub const DT: f64 = 1e-3;

/// Windows on which a path may be flagged constant.
pub const START_WINDOW: (f64, f64) = (0.0, 1.0 / 20.0);
pub const END_WINDOW: (f64, f64) = (5.0 / 6.0, 1.0);

/// Side from which a one-sided derivative is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Centered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PathFlags {
    pub constant_near_0: bool,
    pub constant_near_1: bool,
}

/// A path t in [0, 1] of metrics on a fixed grid, stored in normalized parameter.
#[derive(Clone)]
pub struct MetricPath {
    family: Family,
    n: usize,
    grid_len: usize,
    corners: Vec<f64>,
    flags: PathFlags,
    nodes: usize,
    param_length: f64,
    label: String,
}

impl fmt::Debug for MetricPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricPath")
            .field("label", &self.label)
            .field("n", &self.n)
            .field("grid_len", &self.grid_len)
            .field("corners", &self.corners)
            .field("flags", &self.flags)
            .finish()
    }
}

fn window_constant(family: &Family, lo: f64, hi: f64) -> bool {
    let reference = family(lo);
    (0..=40).all(|k| {
        let t = lo + (hi - lo) * k as f64 / 40.0;
        family(t).max_abs_diff(&reference) <= tol::ALGEBRAIC
    })
}

impl MetricPath {
    /// Wraps a family; corners are parameters where the family is only Lipschitz.
    pub fn from_family(
        label: impl Into<String>,
        family: impl Fn(f64) -> Tensor + Send + Sync + 'static,
        corners: Vec<f64>,
    ) -> Result<Self> {
        let family: Family = Arc::new(family);
        let t0 = family(0.0);
        for k in 0..=20 {
            let t = family(k as f64 / 20.0);
            if t.grid_len() != t0.grid_len() || t.n() != t0.n() {
                return Err(Error::Alignment("path samples do not share grid and dimension".into()));
            }
        }
        let flags = PathFlags {
            constant_near_0: window_constant(&family, START_WINDOW.0, START_WINDOW.1),
            constant_near_1: window_constant(&family, END_WINDOW.0, END_WINDOW.1),
        };
        Ok(MetricPath {
            n: t0.n(),
            grid_len: t0.grid_len(),
            family,
            corners,
            flags,
            nodes: tol::PATH_NODES,
            param_length: 1.0,
            label: label.into(),
        })
    }

    pub fn constant(metric: &SphereMetric) -> Result<Self> {
        let t = metric.tensor();
        Self::from_family("constant", move |_| t.clone(), vec![])
    }

    /// Natural cubic spline through sampled slices.
    pub fn sampled(ts: Vec<f64>, metrics: &[SphereMetric]) -> Result<Self> {
        if ts.len() != metrics.len() || ts.len() < 2 {
            return Err(Error::Resolution("sampled path needs >= 2 aligned samples".into()));
        }
        let tensors: Vec<Tensor> = metrics.iter().map(|m| m.tensor()).collect();
        let template = tensors[0].clone();
        let ncomp = template.components().len();
        let len = template.grid_len();
        let mut splines = Vec::with_capacity(ncomp * len);
        for c in 0..ncomp {
            for i in 0..len {
                let ys: Vec<f64> = tensors
                    .iter()
                    .map(|t| t.components().get(c).map(|x| x.1[i]).ok_or_else(|| Error::Alignment("mixed slice kinds".into())))
                    .collect::<Result<_>>()?;
                splines.push(CubicSpline::new(ts.clone(), ys)?);
            }
        }
        let family = move |t: f64| match &template {
            Tensor::Round { n, .. } => Tensor::Round { n: *n, r2: splines[0].eval(t) },
            Tensor::Axisym { .. } => Tensor::Axisym {
                gxx: (0..len).map(|i| splines[i].eval(t)).collect(),
                gpp: (0..len).map(|i| splines[len + i].eval(t).max(0.0)).collect(),
            },
        };
        Self::from_family("sampled", family, vec![])
    }

    /// Round slices of radius rho(t).
    pub fn round_radius(n: usize, rho: impl Fn(f64) -> f64 + Send + Sync + 'static, corners: Vec<f64>) -> Result<Self> {
        SphereMetric::round(n, rho(0.0))?;
        Self::from_family("round-radius", move |t| Tensor::Round { n, r2: rho(t).powi(2) }, corners)
    }

    /// Piecewise-linear radius through the given knots (t, rho).
    pub fn kinked_radius(n: usize, knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Resolution("need at least two knots".into()));
        }
        let corners = knots[1..knots.len() - 1].iter().map(|k| k.0).collect();
        Self::round_radius(
            n,
            move |t| {
                let k = knots.iter().rposition(|k| k.0 <= t).unwrap_or(0).min(knots.len() - 2);
                let (t0, r0) = knots[k];
                let (t1, r1) = knots[k + 1];
                r0 + (r1 - r0) * (t - t0) / (t1 - t0)
            },
            corners,
        )
    }

    /// Blend (1 - w(t)) a + w(t) b of metric tensors.
    pub fn blend(
        label: &str,
        a: &SphereMetric,
        b: &SphereMetric,
        w: impl Fn(f64) -> f64 + Send + Sync + 'static,
        corners: Vec<f64>,
    ) -> Result<Self> {
        let (ta, tb) = aligned_tensors(a, b)?;
        Self::from_family(label, move |t| {
            let wt = w(t);
            ta.combine(1.0 - wt, &tb, wt).expect("aligned tensors")
        }, corners)
    }

    /// Round unit sphere to an ellipsoid (meridian (sin y, q cos y)) and back, with a C^2 bump weight
    /// supported in [1/20, 5/6].
    pub fn eccentric_excursion(nodes: usize, q: f64) -> Result<Self> {
        let std = SphereMetric::std_axisym(nodes)?;
        let ecc = SphereMetric::ellipsoid(nodes, 1.0, q)?;
        let (lo, hi) = (START_WINDOW.1, END_WINDOW.0);
        Self::blend("eccentric-excursion", &std, &ecc, move |t| {
            if t <= lo || t >= hi {
                0.0
            } else {
                let s = (t - lo) / (hi - lo);
                64.0 * (s * (1.0 - s)).powi(3)
            }
        }, vec![])
    }

    /// Ellipsoid at t = 0 relaxing to the unit round sphere by t = 5/6 (quintic smoothstep).
    pub fn eccentric_to_round(nodes: usize, q: f64) -> Result<Self> {
        let std = SphereMetric::std_axisym(nodes)?;
        let ecc = SphereMetric::ellipsoid(nodes, 1.0, q)?;
        let (lo, hi) = (START_WINDOW.1, END_WINDOW.0);
        Self::blend("eccentric-to-round", &ecc, &std, move |t| smoothstep5(((t - lo) / (hi - lo)).clamp(0.0, 1.0)), vec![])
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn grid_len(&self) -> usize {
        self.grid_len
    }
    pub fn corners(&self) -> &[f64] {
        &self.corners
    }
    pub fn flags(&self) -> PathFlags {
        self.flags
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    /// Length of the path's own parameter interval (1 unless flattened).
    pub fn param_length(&self) -> f64 {
        self.param_length
    }
    pub fn nodes(&self) -> usize {
        self.nodes
    }
    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }
    pub fn t_nodes(&self) -> Vec<f64> {
        let m = self.nodes.max(2);
        (0..m).map(|i| i as f64 / (m - 1) as f64).collect()
    }

    pub fn tensor(&self, t: f64) -> Tensor {
        (self.family)(t.clamp(0.0, 1.0))
    }

    pub fn metric(&self, t: f64) -> Result<SphereMetric> {
        self.tensor(t).to_metric()
    }

    /// True when every sampled slice equals the first.
    pub fn is_constant(&self) -> bool {
        let t0 = self.tensor(0.0);
        (0..=100).all(|k| self.tensor(k as f64 / 100.0).max_abs_diff(&t0) <= tol::ALGEBRAIC)
    }

    /// Side to use for derivatives at t so the stencil avoids corners and the ends of [0, 1].
    pub fn side_at(&self, t: f64, reach: f64) -> Side {
        if t - reach < 0.0 {
            return Side::Right;
        }
        if t + reach > 1.0 {
            return Side::Left;
        }
        for &c in &self.corners {
            if (c - t).abs() < reach {
                return if c > t { Side::Left } else { Side::Right };
            }
        }
        Side::Centered
    }

    /// k-th t-derivative (k = 1, 2) of the metric tensor by five-point differences.
    pub fn derivative(&self, t: f64, order: usize, side: Side) -> Tensor {
        let h = DT;
        let offsets: [f64; 5] = match side {
            Side::Centered => [-2.0, -1.0, 0.0, 1.0, 2.0],
            Side::Right => [0.0, 1.0, 2.0, 3.0, 4.0],
            Side::Left => [-4.0, -3.0, -2.0, -1.0, 0.0],
        };
        let xs: Vec<f64> = offsets.iter().map(|o| o * h).collect();
        let w = crate::numeric::fd::fornberg(0.0, &xs, order);
        // weights sum to zero, so differencing against the center keeps constants exact
        let center = (self.family)(t);
        let mut acc = center.zeros_like();
        for (k, x) in xs.iter().enumerate() {
            if *x == 0.0 {
                continue;
            }
            let diff = (self.family)(t + x).combine(1.0, &center, -1.0).expect("same representation");
            acc = acc.combine(1.0, &diff, w[order][k]).expect("same representation");
        }
        acc
    }

    /// Derivative using the automatically chosen side.
    pub fn derivative_auto(&self, t: f64, order: usize) -> Tensor {
        self.derivative(t, order, self.side_at(t, 2.0 * DT))
    }

    /// Slice descriptors at the path's t-nodes.
    pub fn describe(&self) -> Vec<SliceDescriptor> {
        self.t_nodes().into_iter().map(|t| SliceDescriptor::new(t, &self.tensor(t))).collect()
    }
}

/// Serialized form of a path sample.
#[derive(Debug, Clone, Serialize)]
pub struct SliceDescriptor {
    pub t: f64,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gxx: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gpp: Option<Vec<f64>>,
}

impl SliceDescriptor {
    fn new(t: f64, tensor: &Tensor) -> Self {
        match tensor {
            Tensor::Round { r2, .. } => SliceDescriptor { t, kind: "round", radius: Some(r2.sqrt()), gxx: None, gpp: None },
            Tensor::Axisym { gxx, gpp } => {
                SliceDescriptor { t, kind: "axisym", radius: None, gxx: Some(gxx.clone()), gpp: Some(gpp.clone()) }
            }
        }
    }
}

/// Quintic smoothstep on [0, 1].
pub fn smoothstep5(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

fn aligned_tensors(a: &SphereMetric, b: &SphereMetric) -> Result<(Tensor, Tensor)> {
    if a.n() != b.n() {
        return Err(Error::Alignment(format!("dimensions differ: {} vs {}", a.n(), b.n())));
    }
    let (a, b) = match (a, b) {
        (SphereMetric::Round { .. }, SphereMetric::Round { .. }) => (a.clone(), b.clone()),
        (SphereMetric::Round { .. }, _) => (a.to_axisym(b.grid_len())?, b.clone()),
        (_, SphereMetric::Round { .. }) => (a.clone(), b.to_axisym(a.grid_len())?),
        _ => (a.clone(), b.clone()),
    };
    if a.grid_len() != b.grid_len() {
        return Err(Error::Alignment(format!("grids differ: {} vs {} nodes", a.grid_len(), b.grid_len())));
    }
    Ok((a.tensor(), b.tensor()))
}

/// Tensor combination (1 - w) a + w b with w = min(3t/2, 1).
pub fn convex_path(a: &SphereMetric, b: &SphereMetric) -> Result<MetricPath> {
    let (ta, tb) = aligned_tensors(a, b)?;
    if ta.max_abs_diff(&tb) == 0.0 {
        return MetricPath::from_family("convex", move |_| ta.clone(), vec![]);
    }
    MetricPath::blend("convex", a, b, |t| (1.5 * t).min(1.0), vec![2.0 / 3.0])
}

/// Normalized bump kernel (315/256)(1 - u^2)^4 on [-1, 1].
pub fn kernel(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        315.0 / 256.0 * (1.0 - u * u).powi(4)
    }
}

/// Convolution with the scaled bump on [1/2, 5/6]; unchanged elsewhere.
pub fn mollify(path: &MetricPath, sigma: f64) -> Result<MetricPath> {
    if !(sigma > 0.0 && sigma <= 1.0 / 6.0) {
        return Err(Error::Domain(format!("mollifier width {sigma} outside (0, 1/6]")));
    }
    let inner = path.clone();
    let (lo, hi) = (0.5, 5.0 / 6.0);
    let (gx, gw) = gauss_legendre(10);
    let inner_corners = path.corners.clone();
    let family = move |t: f64| {
        if t < lo || t > hi {
            return inner.tensor(t);
        }
        let mut cuts = vec![t - sigma];
        for &c in &inner_corners {
            if c > t - sigma && c < t + sigma {
                cuts.push(c);
            }
        }
        cuts.push(t);
        cuts.push(t + sigma);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut acc = inner.tensor(t).zeros_like();
        for seg in cuts.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            if b - a <= 0.0 {
                continue;
            }
            for half in 0..2 {
                let (pa, pb) = (a + (b - a) * half as f64 / 2.0, a + (b - a) * (half + 1) as f64 / 2.0);
                let mid = 0.5 * (pa + pb);
                let rad = 0.5 * (pb - pa);
                for (x, w) in gx.iter().zip(&gw) {
                    let tau = mid + rad * x;
                    let weight = w * rad * kernel((t - tau) / sigma) / sigma;
                    acc = acc.combine(1.0, &inner.tensor(tau), weight).expect("same representation");
                }
            }
        }
        acc
    };
    let corners = path.corners.iter().cloned().filter(|&c| c < lo - sigma || c > hi + sigma).collect();
    let mut out = MetricPath::from_family(format!("mollified({})", path.label), family, corners)?;
    out.nodes = path.nodes;
    Ok(out)
}

/// Reparametrization t -> gamma(c(t)), c(t) = (L/2) t^2 - t^3/3 with L = (6T)^{1/3},
/// stored in normalized form tau -> gamma(3 tau^2 - 2 tau^3).
pub fn flatten_reparametrize(path: &MetricPath, big_t: f64) -> Result<MetricPath> {
    if !(big_t > 0.0) {
        return Err(Error::Domain(format!("T = {big_t} must be positive")));
    }
    let inner = path.clone();
    let map = |tau: f64| 3.0 * tau * tau - 2.0 * tau * tau * tau;
    let corners = path
        .corners
        .iter()
        .map(|&c| bisect(|tau| map(tau) - c, 0.0, 1.0, 0.0))
        .collect::<Result<Vec<_>>>()?;
    let mut out = MetricPath::from_family(format!("flattened({})", path.label), move |tau| inner.tensor(map(tau)), corners)?;
    out.nodes = path.nodes;
    out.param_length = (6.0 * big_t).cbrt();
    Ok(out)
}

/// max over x of sqrt(sum mult (d_ii / g_ii)^2).
pub fn tensor_norm(d: &Tensor, g: &Tensor) -> f64 {
    ratios(d, g)
        .iter()
        .map(|r| r.iter().map(|(m, v)| m * v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// Trace sum mult d_ii / g_ii at every grid node.
pub fn tensor_trace(d: &Tensor, g: &Tensor) -> Vec<f64> {
    ratios(d, g).iter().map(|r| r.iter().map(|(m, v)| m * v).sum()).collect()
}

fn ratios(d: &Tensor, g: &Tensor) -> Vec<Vec<(f64, f64)>> {
    let dc = d.components();
    let gc = g.components();
    let len = g.grid_len();
    (0..len)
        .map(|i| {
            dc.iter()
                .zip(&gc)
                .enumerate()
                .map(|(c, ((m, dv), (_, gv)))| {
                    let pole = c == 1 && (i == 0 || i == len - 1);
                    let v = if pole { dc[0].1[i] / gc[0].1[i] } else { dv[i] / gv[i] };
                    (*m, v)
                })
                .collect()
        })
        .collect()
}

/// Grid maxima of the derivative norms and curvature along a path.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormReport {
    pub sup_d1: f64,
    pub sup_d2: f64,
    pub sup_abs_r: f64,
    pub min_r: f64,
    pub nodes: usize,
}

pub fn path_norms(path: &MetricPath) -> Result<NormReport> {
    if path.nodes < 5 {
        return Err(Error::Resolution(format!("path norms need >= 5 t-nodes, got {}", path.nodes)));
    }
    let mut rep = NormReport { sup_d1: 0.0, sup_d2: 0.0, sup_abs_r: 0.0, min_r: f64::INFINITY, nodes: path.nodes };
    for t in path.t_nodes() {
        let g = path.tensor(t);
        let sides: Vec<Side> = if path.corners.iter().any(|c| (c - t).abs() < 1e-12) {
            vec![Side::Left, Side::Right]
        } else {
            vec![path.side_at(t, 2.0 * DT)]
        };
        for side in sides {
            let side = match (side, t) {
                (Side::Left, t) if t < 4.0 * DT => Side::Right,
                (Side::Right, t) if t > 1.0 - 4.0 * DT => Side::Left,
                (s, _) => s,
            };
            rep.sup_d1 = rep.sup_d1.max(tensor_norm(&path.derivative(t, 1, side), &g));
            rep.sup_d2 = rep.sup_d2.max(tensor_norm(&path.derivative(t, 2, side), &g));
        }
        let r = g.to_metric()?.scalar_curvature()?;
        rep.sup_abs_r = rep.sup_abs_r.max(r.max().abs()).max(r.min().abs());
        rep.min_r = rep.min_r.min(r.min());
    }
    Ok(rep)
}
