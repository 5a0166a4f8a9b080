//! Finite-difference weights.

/// Fornberg weights: `w[k][j]` is the weight of `xs[j]` in the k-th derivative at `x0`.
pub fn fornberg(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Index window of `width` consecutive nodes around `i`, clamped to `[0, len)`.
pub fn window(i: usize, len: usize, width: usize) -> usize {
    let half = width / 2;
    if len <= width || i < half {
        0
    } else if i + width - half > len {
        len - width
    } else {
        i - half
    }
}

/// First and second derivative of sampled data at node `i` on a possibly non-uniform grid.
pub fn derivs_at(xs: &[f64], vs: &[f64], i: usize) -> (f64, f64) {
    let w = 5.min(xs.len());
    let lo = window(i, xs.len(), w);
    let wts = fornberg(xs[i], &xs[lo..lo + w], 2);
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for j in 0..w {
        d1 += wts[1][j] * vs[lo + j];
        d2 += wts[2][j] * vs[lo + j];
    }
    (d1, d2)
}

/// Fourth-order centered stencils on a uniform grid of spacing h.
pub const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
pub const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
pub const D3: [f64; 7] = [1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0];
