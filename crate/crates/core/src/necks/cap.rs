use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::roots::bisect;

/// Root in (0,1) of x^{1-2/n} = mu (1-x).
pub fn solve_c_mu(n: usize, mu: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("n = {n} must be >= 3")));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Domain(format!("mu = {mu} must be positive")));
    }
    let p = 1.0 - 2.0 / n as f64;
    let c = bisect(|x| x.powf(p) - mu * (1.0 - x), 0.0, 1.0, 0.0)?;
    let residual = (c.powf(p) - mu * (1.0 - c)).abs();
    if residual > 1e-13 * mu.max(1.0) {
        return Err(Error::numerical("c_mu residual above tolerance", residual));
    }
    Ok(c)
}

#[derive(Debug, Clone, Serialize)]
pub struct CapResiduals {
    pub eq1: f64,
    pub eq2: f64,
    pub eq3: f64,
    pub eq4: f64,
    pub eq5: f64,
    pub sin_sq_t1: f64,
    pub closed_form_alpha: f64,
}

impl CapResiduals {
    pub fn max(&self) -> f64 {
        [self.eq1, self.eq2, self.eq3, self.eq4, self.eq5, self.closed_form_alpha]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Band dt^2 + c^2 sigma^{-2} sin^{4/n}(n sigma t / 2) gamma on [t1, t2].
#[derive(Debug, Clone, Serialize)]
pub struct CapNeck {
    pub n: usize,
    pub lambda: f64,
    pub theta: f64,
    pub epsilon: f64,
    pub sigma: f64,
    pub c: f64,
    pub t1: f64,
    pub t2: f64,
    pub alpha_eps: f64,
    pub mu_eps: f64,
    pub c_mu: f64,
    pub residuals: CapResiduals,
}

impl CapNeck {
    /// Warping factor alpha(t) with g = dt^2 + alpha(t)^2 gamma.
    pub fn alpha(&self, t: f64) -> f64 {
        let nf = self.n as f64;
        self.c / self.sigma * (nf * self.sigma * t / 2.0).sin().powf(2.0 / nf)
    }

    /// Mean curvature of the t-slice toward increasing t.
    pub fn mean_curvature(&self, t: f64) -> f64 {
        let nf = self.n as f64;
        (nf - 1.0) * self.sigma / (nf * self.sigma * t / 2.0).tan()
    }

    /// Scalar curvature of the band when gamma has scalar curvature r_gamma.
    pub fn scalar_curvature(&self, t: f64, r_gamma: f64) -> f64 {
        let nf = self.n as f64;
        let a = self.alpha(t);
        let phi = nf * self.sigma * t / 2.0;
        let a1 = self.c * phi.cos() * phi.sin().powf(2.0 / nf - 1.0);
        let a2 = -self.c * self.sigma * nf / 2.0
            * (phi.sin().powf(2.0 / nf) + (1.0 - 2.0 / nf) * phi.cos().powi(2) * phi.sin().powf(2.0 / nf - 2.0));
        r_gamma / (a * a) - 2.0 * (nf - 1.0) * a2 / a - (nf - 1.0) * (nf - 2.0) * a1 * a1 / (a * a)
    }
}

pub fn build_cap_neck(n: usize, lambda: f64, theta: f64, eps: f64) -> Result<CapNeck> {
    if n < 3 {
        return Err(Error::Domain(format!("n = {n} must be >= 3")));
    }
    if !(theta > 0.0) {
        return Err(Error::Domain(format!("theta = {theta} must be positive")));
    }
    if !(lambda > 1.0) {
        return Err(Error::Domain(format!("lambda = {lambda} must exceed 1")));
    }
    if !(eps >= 0.0 && eps < lambda - 1.0) {
        return Err(Error::Domain(format!("epsilon = {eps} outside [0, lambda - 1)")));
    }
    let nf = n as f64;
    let le = lambda - eps;
    let sigma = (theta / (nf * (nf - 1.0))).sqrt();
    let phi1 = ((nf - 1.0) * sigma).atan2(le);
    let t1 = 2.0 * phi1 / (nf * sigma);
    let c = sigma / phi1.sin().powf(2.0 / nf);
    let mu_eps = (nf - 1.0) / nf * (theta + nf * le * le / (nf - 1.0)).powf(2.0 / nf) * theta.powf(1.0 - 2.0 / nf);
    let c_mu = solve_c_mu(n, mu_eps)?;
    let phi2 = c_mu.sqrt().asin();
    let t2 = 2.0 * phi2 / (nf * sigma);
    let alpha_eps = c / sigma * phi2.sin().powf(2.0 / nf);
    let closed = ((1.0 - c_mu) * (le * le + (nf - 1.0) * theta / nf)).powf(1.0 / (nf - 2.0));

    let a = |phi: f64| c / sigma * phi.sin().powf(2.0 / nf);
    let residuals = CapResiduals {
        eq1: (nf * (nf - 1.0) * sigma * sigma - theta).abs(),
        eq2: ((nf - 1.0) * sigma / phi1.tan() - le).abs(),
        eq3: (a(phi1) - 1.0).abs(),
        eq4: (c * (nf - 1.0) / phi2.tan() * phi2.sin().powf(2.0 / nf) - 1.0).abs(),
        eq5: (alpha_eps - a(phi2)).abs(),
        sin_sq_t1: (phi1.sin().powi(2) - (nf - 1.0) * theta / (nf * le * le + (nf - 1.0) * theta)).abs(),
        closed_form_alpha: (alpha_eps - closed).abs(),
    };
    let neck = CapNeck {
        n,
        lambda,
        theta,
        epsilon: eps,
        sigma,
        c,
        t1,
        t2,
        alpha_eps,
        mu_eps,
        c_mu,
        residuals,
    };
    let worst = neck.residuals.max();
    if worst > 1e-10 * alpha_eps.max(1.0) {
        return Err(Error::numerical("cap neck residual above tolerance", worst));
    }
    Ok(neck)
}
