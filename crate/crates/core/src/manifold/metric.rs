use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::fd::{D1, D2, D3};
use crate::numeric::quad::{gauss_legendre, simpson};
use crate::tol;

/// Area of the unit round sphere S^{n-1}.
pub fn unit_sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

// Gamma(k/2) for positive integer k, exact recursion.
fn gamma_half(k: usize) -> f64 {
    if k == 1 {
        PI.sqrt()
    } else if k == 2 {
        1.0
    } else {
        (k as f64 / 2.0 - 1.0) * gamma_half(k - 2)
    }
}

/// Samples of a function on the metric's grid; a single value on round metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarField(pub Vec<f64>);

impl ScalarField {
    pub fn constant(len: usize, v: f64) -> Self {
        ScalarField(vec![v; len])
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn values(&self) -> &[f64] {
        &self.0
    }
    pub fn min(&self) -> f64 {
        self.0.iter().cloned().fold(f64::INFINITY, f64::min)
    }
    pub fn max(&self) -> f64 {
        self.0.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField(self.0.iter().map(|&v| f(v)).collect())
    }
    pub fn zip(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::Alignment(format!("field lengths {} vs {}", self.len(), other.len())));
        }
        Ok(ScalarField(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect()))
    }
    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&v| v == self.0[0])
    }
}

/// Axisymmetric S^2 profile gamma = a(x)^2 dx^2 + b(x)^2 dphi^2 on a uniform grid x in [0, pi].
#[derive(Debug, Clone, PartialEq)]
pub struct AxisProfile {
    a: Vec<f64>,
    b: Vec<f64>,
    h: f64,
}

fn ghost(v: &[f64], i: isize, odd: bool) -> f64 {
    let last = v.len() as isize - 1;
    let (j, flip) = if i < 0 {
        (-i, true)
    } else if i > last {
        (2 * last - i, true)
    } else {
        (i, false)
    };
    let x = v[j as usize];
    if flip && odd {
        -x
    } else {
        x
    }
}

fn stencil(v: &[f64], i: usize, odd: bool, w: &[f64]) -> f64 {
    let half = (w.len() / 2) as isize;
    w.iter()
        .enumerate()
        .map(|(k, c)| c * ghost(v, i as isize + k as isize - half, odd))
        .sum()
}

impl AxisProfile {
    pub fn nodes(&self) -> usize {
        self.a.len()
    }
    pub fn spacing(&self) -> f64 {
        self.h
    }
    pub fn a(&self) -> &[f64] {
        &self.a
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }
    pub fn x(&self) -> Vec<f64> {
        (0..self.nodes()).map(|i| i as f64 * self.h).collect()
    }

    fn d1(&self, v: &[f64], i: usize, odd: bool) -> f64 {
        stencil(v, i, odd, &D1) / self.h
    }
    fn d2(&self, v: &[f64], i: usize, odd: bool) -> f64 {
        stencil(v, i, odd, &D2) / (self.h * self.h)
    }
    fn d3(&self, v: &[f64], i: usize, odd: bool) -> f64 {
        stencil(v, i, odd, &D3) / (self.h * self.h * self.h)
    }

    /// Gauss curvature at every node.
    fn gauss_curvature(&self) -> Vec<f64> {
        let n = self.nodes();
        (0..n)
            .map(|i| {
                let a = self.a[i];
                if i == 0 || i == n - 1 {
                    let a2 = self.d2(&self.a, i, false);
                    let b3 = self.d3(&self.b, i, true);
                    let sign = if i == 0 { -1.0 } else { 1.0 };
                    (a2 + sign * b3) / a.powi(3)
                } else {
                    let b = self.b[i];
                    let b1 = self.d1(&self.b, i, true);
                    let b2 = self.d2(&self.b, i, true);
                    let a1 = self.d1(&self.a, i, false);
                    -b2 / (a * a * b) + a1 * b1 / (a * a * a * b)
                }
            })
            .collect()
    }

    /// Rows of the discrete Laplace-Beltrami operator as (column, weight) lists.
    pub fn laplacian_rows(&self) -> Vec<Vec<(usize, f64)>> {
        let n = self.nodes();
        let h = self.h;
        let last = n as isize - 1;
        (0..n)
            .map(|i| {
                let a = self.a[i];
                let mut w = [0.0; 5];
                if i == 0 || i == n - 1 {
                    for k in 0..5 {
                        w[k] = 2.0 * D2[k] / (h * h * a * a);
                    }
                } else {
                    let c = self.d1(&self.b, i, true) / self.b[i] - self.d1(&self.a, i, false) / a;
                    for k in 0..5 {
                        w[k] = (D2[k] / (h * h) + c * D1[k] / h) / (a * a);
                    }
                }
                let mut row: Vec<(usize, f64)> = Vec::with_capacity(5);
                for (k, wk) in w.iter().enumerate() {
                    let mut j = i as isize + k as isize - 2;
                    if j < 0 {
                        j = -j;
                    } else if j > last {
                        j = 2 * last - j;
                    }
                    let j = j as usize;
                    match row.iter_mut().find(|(c, _)| *c == j) {
                        Some(e) => e.1 += wk,
                        None => row.push((j, *wk)),
                    }
                }
                row
            })
            .collect()
    }

    fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        self.laplacian_rows()
            .iter()
            .map(|row| row.iter().map(|(j, w)| w * u[*j]).sum())
            .collect()
    }

    fn grad_sq(&self, u: &[f64]) -> Vec<f64> {
        (0..self.nodes())
            .map(|i| {
                let d = self.d1(u, i, false) / self.a[i];
                d * d
            })
            .collect()
    }

    fn integrate(&self, f: &[f64]) -> f64 {
        let vals: Vec<f64> = (0..self.nodes()).map(|i| f[i] * self.a[i] * self.b[i]).collect();
        2.0 * PI * simpson(&vals, self.h)
    }

    /// Pole regularity defect |b'(0)/a(0) - 1| and |b'(pi)/a(pi) + 1|.
    pub fn pole_defect(&self) -> f64 {
        let n = self.nodes();
        // odd extension: b = c1 x + c3 x^3 + c5 x^5, c1 from three interior samples
        let b = &self.b;
        let slope = |b1: f64, b2: f64, b3: f64| (45.0 * b1 - 9.0 * b2 + b3) / (30.0 * self.h);
        let left = (slope(b[1], b[2], b[3]) / self.a[0] - 1.0).abs();
        let right = (slope(b[n - 2], b[n - 3], b[n - 4]) / self.a[n - 1] - 1.0).abs();
        left.max(right)
    }
}

/// A metric on S^{n-1}.
#[derive(Debug, Clone, PartialEq)]
pub enum SphereMetric {
    /// Round sphere of the given radius inside an n-dimensional fill-in.
    Round { n: usize, radius: f64 },
    /// Axisymmetric S^2 (n = 3).
    Axisym(Arc<AxisProfile>),
    /// `factor` times the base metric; the base is never itself scaled.
    Scaled { base: Box<SphereMetric>, factor: f64 },
}

/// Metric components in fixed coordinates, used for paths and band derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum Tensor {
    Round { n: usize, r2: f64 },
    Axisym { gxx: Vec<f64>, gpp: Vec<f64> },
}

impl Tensor {
    /// p*self + q*other.
    pub fn combine(&self, p: f64, other: &Tensor, q: f64) -> Result<Tensor> {
        match (self, other) {
            (Tensor::Round { n, r2 }, Tensor::Round { n: m, r2: s2 }) if n == m => {
                Ok(Tensor::Round { n: *n, r2: p * r2 + q * s2 })
            }
            (Tensor::Axisym { gxx, gpp }, Tensor::Axisym { gxx: hxx, gpp: hpp }) if gxx.len() == hxx.len() => {
                Ok(Tensor::Axisym {
                    gxx: gxx.iter().zip(hxx).map(|(a, b)| p * a + q * b).collect(),
                    gpp: gpp.iter().zip(hpp).map(|(a, b)| p * a + q * b).collect(),
                })
            }
            _ => Err(Error::Alignment("tensors have different representations".into())),
        }
    }

    pub fn scale(&self, k: f64) -> Tensor {
        match self {
            Tensor::Round { n, r2 } => Tensor::Round { n: *n, r2: k * r2 },
            Tensor::Axisym { gxx, gpp } => Tensor::Axisym {
                gxx: gxx.iter().map(|v| k * v).collect(),
                gpp: gpp.iter().map(|v| k * v).collect(),
            },
        }
    }

    pub fn zeros_like(&self) -> Tensor {
        self.scale(0.0)
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        match (self, other) {
            (Tensor::Round { r2, .. }, Tensor::Round { r2: s2, .. }) => (r2 - s2).abs(),
            (Tensor::Axisym { gxx, gpp }, Tensor::Axisym { gxx: hxx, gpp: hpp }) => gxx
                .iter()
                .zip(hxx)
                .chain(gpp.iter().zip(hpp))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
            _ => f64::INFINITY,
        }
    }

    /// Components paired with multiplicities: (multiplicity, values per node).
    pub fn components(&self) -> Vec<(f64, &[f64])> {
        match self {
            Tensor::Round { n, r2 } => vec![((n - 1) as f64, std::slice::from_ref(r2))],
            Tensor::Axisym { gxx, gpp } => vec![(1.0, gxx.as_slice()), (1.0, gpp.as_slice())],
        }
    }

    pub fn grid_len(&self) -> usize {
        match self {
            Tensor::Round { .. } => 1,
            Tensor::Axisym { gxx, .. } => gxx.len(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Tensor::Round { n, .. } => *n,
            Tensor::Axisym { .. } => 3,
        }
    }

    pub fn to_metric(&self) -> Result<SphereMetric> {
        match self {
            Tensor::Round { n, r2 } => SphereMetric::round(*n, r2.sqrt()),
            Tensor::Axisym { gxx, gpp } => {
                let last = gpp.len() - 1;
                let a: Vec<f64> = gxx.iter().map(|v| v.sqrt()).collect();
                let b: Vec<f64> = gpp
                    .iter()
                    .enumerate()
                    .map(|(i, v)| if i == 0 || i == last { 0.0 } else { v.max(0.0).sqrt() })
                    .collect();
                SphereMetric::axisym(a, b)
            }
        }
    }
}

impl SphereMetric {
    pub fn round(n: usize, radius: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("dimension n = {n} must be >= 2")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("radius {radius} must be positive")));
        }
        Ok(SphereMetric::Round { n, radius })
    }

    /// General profile a^2 dx^2 + b^2 dphi^2 on the uniform grid over [0, pi].
    pub fn axisym(a: Vec<f64>, mut b: Vec<f64>) -> Result<Self> {
        let n = b.len();
        if n < 7 || a.len() != n {
            return Err(Error::Resolution(format!("axisymmetric profile needs >= 7 aligned nodes, got {n}")));
        }
        if a.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Degenerate("a must be positive".into()));
        }
        if b[1..n - 1].iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Degenerate("b must be positive on (0, pi)".into()));
        }
        let bmax = b.iter().cloned().fold(0.0, f64::max);
        if b[0].abs() > 1e-10 * bmax || b[n - 1].abs() > 1e-10 * bmax {
            return Err(Error::Degenerate(format!("b must vanish at the poles, got {} and {}", b[0], b[n - 1])));
        }
        b[0] = 0.0;
        b[n - 1] = 0.0;
        let p = AxisProfile { a, b, h: PI / (n - 1) as f64 };
        let defect = p.pole_defect();
        if defect > tol::POLE {
            return Err(Error::Degenerate(format!("pole regularity defect {defect:e} exceeds {:e}", tol::POLE)));
        }
        Ok(SphereMetric::Axisym(Arc::new(p)))
    }

    /// Arc-length form dx^2 + b(x)^2 dphi^2.
    pub fn axisym_arclength(b: Vec<f64>) -> Result<Self> {
        let a = vec![1.0; b.len()];
        Self::axisym(a, b)
    }

    /// Arc-length profile sampled from a function on `nodes` uniform points.
    pub fn axisym_from_fn(nodes: usize, b: impl Fn(f64) -> f64) -> Result<Self> {
        let h = PI / (nodes.max(2) - 1) as f64;
        Self::axisym_arclength((0..nodes).map(|i| b(i as f64 * h)).collect())
    }

    /// Unit round S^2 in axisymmetric form.
    pub fn std_axisym(nodes: usize) -> Result<Self> {
        Self::axisym_from_fn(nodes, f64::sin)
    }

    /// Surface of revolution with meridian speed a(y) and radius b(y), y in [0, pi].
    pub fn from_meridian(nodes: usize, a: impl Fn(f64) -> f64, b: impl Fn(f64) -> f64) -> Result<Self> {
        let h = PI / (nodes.max(2) - 1) as f64;
        let av = (0..nodes).map(|i| a(i as f64 * h)).collect();
        let bv = (0..nodes).map(|i| b(i as f64 * h)).collect();
        Self::axisym(av, bv)
    }

    /// Ellipsoid of revolution with meridian (p sin y, q cos y).
    pub fn ellipsoid(nodes: usize, p: f64, q: f64) -> Result<Self> {
        Self::from_meridian(nodes, |y| (p * p * y.cos().powi(2) + q * q * y.sin().powi(2)).sqrt(), |y| p * y.sin())
    }

    /// Reparametrizes a profile given by samples (x_i, b_i) on [0, L] to arc-length form on [0, pi].
    pub fn from_profile_samples(xs: &[f64], bs: &[f64], nodes: usize) -> Result<Self> {
        use crate::numeric::spline::CubicSpline;
        if xs.len() < 4 || xs.len() != bs.len() {
            return Err(Error::Resolution("profile needs at least 4 aligned samples".into()));
        }
        if xs[0].abs() > 1e-12 {
            return Err(Error::Domain("profile must start at x = 0".into()));
        }
        let len = *xs.last().unwrap();
        let spline = CubicSpline::new(xs.to_vec(), bs.to_vec())?;
        let scale = len / PI;
        let h = PI / (nodes - 1) as f64;
        let b: Vec<f64> = (0..nodes)
            .map(|i| if i == 0 || i == nodes - 1 { 0.0 } else { spline.eval(i as f64 * h * scale) / scale })
            .collect();
        let base = Self::axisym_arclength(b)?;
        Self::scaled(base, scale * scale)
    }

    pub fn scaled(base: SphereMetric, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::Domain(format!("scale factor {factor} must be positive")));
        }
        Ok(match base {
            SphereMetric::Scaled { base, factor: k } => SphereMetric::Scaled { base, factor: k * factor },
            SphereMetric::Round { n, radius } => SphereMetric::Round { n, radius: radius * factor.sqrt() },
            other => SphereMetric::Scaled { base: Box::new(other), factor },
        })
    }

    /// Ambient dimension n (the sphere is S^{n-1}).
    pub fn n(&self) -> usize {
        match self {
            SphereMetric::Round { n, .. } => *n,
            SphereMetric::Axisym(_) => 3,
            SphereMetric::Scaled { base, .. } => base.n(),
        }
    }

    pub fn grid_len(&self) -> usize {
        match self {
            SphereMetric::Round { .. } => 1,
            SphereMetric::Axisym(p) => p.nodes(),
            SphereMetric::Scaled { base, .. } => base.grid_len(),
        }
    }

    /// Grid coordinates (x-nodes, or a single 0 for round metrics).
    pub fn x_nodes(&self) -> Vec<f64> {
        match self {
            SphereMetric::Round { .. } => vec![0.0],
            SphereMetric::Axisym(p) => p.x(),
            SphereMetric::Scaled { base, .. } => base.x_nodes(),
        }
    }

    /// Profile and overall factor of an axisymmetric metric.
    pub fn profile(&self) -> Option<(&AxisProfile, f64)> {
        match self {
            SphereMetric::Axisym(p) => Some((p, 1.0)),
            SphereMetric::Scaled { base, factor } => base.profile().map(|(p, k)| (p, k * factor)),
            SphereMetric::Round { .. } => None,
        }
    }

    /// Field sampled from a function of x (round metrics require a constant function).
    pub fn field_from_fn(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField(self.x_nodes().into_iter().map(f).collect())
    }

    fn check_aligned(&self, field: &ScalarField) -> Result<()> {
        if field.len() != self.grid_len() {
            return Err(Error::Alignment(format!(
                "field has {} samples, metric grid has {}",
                field.len(),
                self.grid_len()
            )));
        }
        Ok(())
    }

    pub fn scalar_curvature(&self) -> Result<ScalarField> {
        Ok(match self {
            SphereMetric::Round { n, radius } => {
                ScalarField(vec![((n - 1) * (n - 2)) as f64 / (radius * radius)])
            }
            SphereMetric::Axisym(p) => ScalarField(p.gauss_curvature().into_iter().map(|k| 2.0 * k).collect()),
            SphereMetric::Scaled { base, factor } => base.scalar_curvature()?.map(|r| r / factor),
        })
    }

    pub fn laplace_beltrami(&self, field: &ScalarField) -> Result<ScalarField> {
        self.check_aligned(field)?;
        Ok(match self {
            SphereMetric::Round { .. } => ScalarField(vec![0.0]),
            SphereMetric::Axisym(p) => ScalarField(p.laplacian(&field.0)),
            SphereMetric::Scaled { base, factor } => base.laplace_beltrami(field)?.map(|v| v / factor),
        })
    }

    /// Laplacian rows as (column, weight) lists; a single zero row on round metrics.
    pub fn laplacian_rows(&self) -> Vec<Vec<(usize, f64)>> {
        match self {
            SphereMetric::Round { .. } => vec![vec![(0, 0.0)]],
            SphereMetric::Axisym(p) => p.laplacian_rows(),
            SphereMetric::Scaled { base, factor } => base
                .laplacian_rows()
                .into_iter()
                .map(|row| row.into_iter().map(|(j, w)| (j, w / factor)).collect())
                .collect(),
        }
    }

    /// |grad f|^2 in this metric.
    pub fn grad_sq(&self, field: &ScalarField) -> Result<ScalarField> {
        self.check_aligned(field)?;
        Ok(match self {
            SphereMetric::Round { .. } => ScalarField(vec![0.0]),
            SphereMetric::Axisym(p) => ScalarField(p.grad_sq(&field.0)),
            SphereMetric::Scaled { base, factor } => base.grad_sq(field)?.map(|v| v / factor),
        })
    }

    pub fn integrate(&self, field: &ScalarField) -> Result<f64> {
        self.check_aligned(field)?;
        Ok(match self {
            SphereMetric::Round { n, radius } => field.0[0] * unit_sphere_area(*n) * radius.powi(*n as i32 - 1),
            SphereMetric::Axisym(p) => p.integrate(&field.0),
            SphereMetric::Scaled { base, factor } => {
                factor.powf((self.n() - 1) as f64 / 2.0) * base.integrate(field)?
            }
        })
    }

    pub fn area(&self) -> f64 {
        self.integrate(&ScalarField::constant(self.grid_len(), 1.0)).unwrap()
    }

    pub fn tensor(&self) -> Tensor {
        match self {
            SphereMetric::Round { n, radius } => Tensor::Round { n: *n, r2: radius * radius },
            SphereMetric::Axisym(p) => Tensor::Axisym {
                gxx: p.a.iter().map(|v| v * v).collect(),
                gpp: p.b.iter().map(|v| v * v).collect(),
            },
            SphereMetric::Scaled { base, factor } => base.tensor().scale(*factor),
        }
    }

    /// Same metric in axisymmetric form (round metrics need n = 3).
    pub fn to_axisym(&self, nodes: usize) -> Result<Self> {
        match self {
            SphereMetric::Round { n: 3, radius } => {
                Self::scaled(Self::std_axisym(nodes)?, radius * radius)
            }
            SphereMetric::Round { n, .. } => {
                Err(Error::Domain(format!("only n = 3 round metrics have an axisymmetric form, got n = {n}")))
            }
            other => Ok(other.clone()),
        }
    }

    /// Gauss-Legendre check of the area of a meridian-defined surface; used in tests.
    pub fn meridian_area(a: impl Fn(f64) -> f64, b: impl Fn(f64) -> f64) -> f64 {
        let (xs, ws) = gauss_legendre(40);
        let mut total = 0.0;
        let pieces = 16;
        let hp = PI / pieces as f64;
        for k in 0..pieces {
            let mid = (k as f64 + 0.5) * hp;
            for (x, w) in xs.iter().zip(&ws) {
                let y = mid + 0.5 * hp * x;
                total += w * a(y) * b(y);
            }
        }
        2.0 * PI * total * 0.5 * hp
    }
}
