//! Quadrature rules.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; m];
    let mut ws = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if m == 0 { 1.0 } else if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = -x;
        xs[m - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ws[i] = w;
        ws[m - 1 - i] = w;
    }
    (xs, ws)
}

/// Integrates `f` over [a, b] with an m-point Gauss-Legendre rule on each of `pieces` subintervals.
pub fn integrate_gl(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize, pieces: usize) -> f64 {
    let (xs, ws) = gauss_legendre(m);
    let h = (b - a) / pieces as f64;
    let mut total = 0.0;
    for p in 0..pieces {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (x, w) in xs.iter().zip(&ws) {
            total += w * f(mid + 0.5 * h * x);
        }
    }
    total * 0.5 * h
}

/// Composite Simpson on uniform samples; an odd number of intervals gets a 3/8 tail.
pub fn simpson(vals: &[f64], h: f64) -> f64 {
    let n = vals.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (vals[0] + vals[1]),
        3 => h / 3.0 * (vals[0] + 4.0 * vals[1] + vals[2]),
        _ => {
            let intervals = n - 1;
            let (simp_end, tail) = if intervals % 2 == 0 { (n - 1, false) } else { (n - 4, true) };
            let mut s = vals[0] + vals[simp_end];
            for (i, v) in vals.iter().enumerate().take(simp_end).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            let mut total = s * h / 3.0;
            if tail {
                let k = simp_end;
                total += 3.0 * h / 8.0 * (vals[k] + 3.0 * vals[k + 1] + 3.0 * vals[k + 2] + vals[k + 3]);
            }
            total
        }
    }
}
