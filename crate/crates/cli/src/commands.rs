//! Argument structs and the mapping onto fillin-core operations.

use std::path::PathBuf;

use clap::Args;
use fillin_core::manifold::{lambda1, ScalarField, SphereMetric};
use fillin_core::necks::{build_cap_neck, build_isotopy_neck, build_schwarzschild_neck, rescale_neck_with};
use fillin_core::paths::{flatten_reparametrize, mollify, path_norms, MetricPath};
use fillin_core::quasispherical::{
    adm_mass, build_base, default_s_max, h0_threshold, mass_upper_bound, nnsc_fillin_test_with, run_flow_to,
    FlowOptions,
};
use fillin_core::theta::{
    decay_curve, fillin_lower_bound, spectral_lower_bound, theta_closed_form, uniform_decay_constants,
};
use fillin_core::validation::{run_suite, SuiteOptions};
use fillin_core::{tol, Error};
use serde::Serialize;
use serde_json::json;

use crate::input::{load_data, parse_metric, parse_path};
use crate::report::{value, Cell, Outcome};
use crate::Common;

type Res = Result<Outcome, Error>;

fn text(v: f64) -> String {
    format!("{v}\n")
}

fn metric_grid(m: &SphereMetric) -> serde_json::Value {
    json!({ "metric_nodes": m.grid_len() })
}

fn path_grid(p: &MetricPath) -> serde_json::Value {
    json!({ "path_t_nodes": p.nodes(), "slice_nodes": p.tensor(0.0).grid_len() })
}

fn flow_tolerances(o: &FlowOptions) -> serde_json::Value {
    json!({ "rtol": o.rtol, "atol": o.atol, "h_max": o.h_max, "monotonicity_slack": tol::MONOTONE })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NeckSchwarzschild {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long = "H")]
    #[serde(rename = "H")]
    pub big_h: f64,
    #[arg(long = "h", default_value_t = 0.0)]
    pub h: f64,
    /// Rescale onto --metric with curvature slack eps.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value = "round")]
    pub metric: String,
    /// Radial nodes of the rescaled band.
    #[arg(long, default_value_t = 401)]
    pub nodes: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl NeckSchwarzschild {
    pub fn run(&self) -> Res {
        let tolerances = json!({ "closed_form": tol::ALGEBRAIC, "mean_curvature": 1e-10, "fd": tol::FD_ORACLE });
        let mut o = match self.eps {
            None => {
                let nk = build_schwarzschild_neck(self.n, self.big_h, self.h)?;
                let mut o = Outcome::new(value(&nk));
                o.summary = vec![
                    ("m", Cell::Num(nk.m)),
                    ("r1", Cell::Num(nk.r1)),
                    ("r2", Cell::Num(nk.r2)),
                    ("mu", Cell::Num(nk.mu)),
                ];
                o.grid = json!({ "monotonicity_samples": 1000 });
                o
            }
            Some(eps) => {
                let g = parse_metric(&self.metric, self.n)?;
                let r = rescale_neck_with(self.n, &g, self.big_h, self.h, eps, self.nodes)?;
                let mut o = Outcome::new(value(&r));
                o.summary = vec![
                    ("m", Cell::Num(r.neck.m)),
                    ("r1", Cell::Num(r.neck.r1)),
                    ("r2", Cell::Num(r.neck.r2)),
                    ("mu", Cell::Num(r.neck.mu)),
                    ("bound", Cell::Num(r.bound)),
                    ("min_r_fd", Cell::Num(r.min_r_fd)),
                ];
                o.grid = json!({ "band_nodes": r.band_nodes, "metric_nodes": g.grid_len() });
                o
            }
        };
        o.tolerances = tolerances;
        Ok(o)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NeckCap {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl NeckCap {
    pub fn run(&self) -> Res {
        let nk = build_cap_neck(self.n, self.lambda, self.theta, self.eps)?;
        let mut o = Outcome::new(value(&nk));
        o.summary = vec![
            ("alpha_eps", Cell::Num(nk.alpha_eps)),
            ("mu_eps", Cell::Num(nk.mu_eps)),
            ("c_mu", Cell::Num(nk.c_mu)),
            ("max_residual", Cell::Num(nk.residuals.max())),
        ];
        o.tolerances = json!({ "residual": 1e-10, "c_mu_residual": 1e-13 });
        Ok(o)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NeckIsotopy {
    /// const[:METRIC], eccentric:Q[:NODES], to-round:Q[:NODES] or convex:A,B
    #[arg(long, default_value = "const")]
    pub path: String,
    #[arg(long, default_value = "round")]
    pub metric: String,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long)]
    pub eps0: f64,
    #[arg(long)]
    pub c0: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl NeckIsotopy {
    pub fn run(&self) -> Res {
        let p = parse_path(&self.path, &parse_metric(&self.metric, self.n)?)?;
        let nk = build_isotopy_neck(&p, self.eps0, self.c0)?;
        let mut o = Outcome::new(value(&nk));
        o.summary = vec![
            ("Lambda", Cell::Num(nk.lambda)),
            ("min_r", Cell::Num(nk.min_r)),
            ("min_r_fd", Cell::Num(nk.min_r_fd.unwrap_or(f64::NAN))),
            ("mu", Cell::Num(nk.mu)),
            ("eps1", Cell::Num(nk.eps1)),
        ];
        o.grid = path_grid(&p);
        o.grid["t_nodes"] = json!(nk.t.len());
        o.tolerances = json!({ "end_deviation": 1e-8, "fd_lambda_max": 64.0 });
        Ok(o)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Flow {
    #[arg(long, default_value = "const")]
    pub path: String,
    #[arg(long, default_value = "round")]
    pub metric: String,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps_target: f64,
    /// Defaults to the dimension's mass-extraction radius.
    #[arg(long)]
    pub s_max: Option<f64>,
    /// Constant initial lapse.
    #[arg(long)]
    pub u1: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl Flow {
    pub fn run(&self) -> Res {
        let p = parse_path(&self.path, &parse_metric(&self.metric, self.n)?)?;
        let s_max = self.s_max.unwrap_or_else(|| default_s_max(p.n()));
        let base = build_base(&p, self.eps_target, s_max)?;
        let opts = FlowOptions::default();
        let f = run_flow_to(&base, &ScalarField(vec![self.u1]), s_max, opts)?;
        let adm = adm_mass(&f).ok();
        let last = f.u.last().cloned().unwrap_or(ScalarField(vec![]));
        let mut o = Outcome::new(json!({
            "base": value(&base),
            "slices": f.s.len(),
            "s_end": f.s.last(),
            "steps": f.steps,
            "rejected": f.rejected,
            "u_end_min": last.min(),
            "u_end_max": last.max(),
            "total_mean_end": f.total_mean.last(),
            "certificate": value(&f.certificate),
            "adm_mass": value(&adm),
        }));
        o.summary = vec![
            ("s0", Cell::Num(base.s0)),
            ("u_end", Cell::Num(last.max())),
            ("adm_mass", Cell::Num(adm.map(|a| a.radial).unwrap_or(f64::NAN))),
            ("certificate", Cell::Text(f.certificate.holds.to_string())),
        ];
        o.csv = Some(f.to_csv());
        o.grid = path_grid(&p);
        o.grid["flow_slices"] = json!(f.s.len());
        o.grid["out_step_ln_s"] = json!(opts.out_step);
        o.tolerances = flow_tolerances(&opts);
        Ok(o)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MassBound {
    #[arg(long, default_value = "const")]
    pub path: String,
    #[arg(long, default_value = "round")]
    pub metric: String,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps_target: f64,
    #[arg(long)]
    pub s_max: Option<f64>,
    #[arg(long)]
    pub u1: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl MassBound {
    pub fn run(&self) -> Res {
        let p = parse_path(&self.path, &parse_metric(&self.metric, self.n)?)?;
        let base = build_base(&p, self.eps_target, self.s_max.unwrap_or_else(|| default_s_max(p.n())))?;
        let rep = mass_upper_bound(&base, &ScalarField(vec![self.u1]))?;
        let mut o = Outcome::new(value(&rep));
        o.summary = vec![
            ("bracket", Cell::Num(rep.bracket)),
            ("verdict", Cell::Text(value(&rep.verdict).as_str().unwrap_or("").into())),
            ("h0", Cell::Num(rep.h0)),
        ];
        o.grid = path_grid(&p);
        o.tolerances = flow_tolerances(&FlowOptions::default());
        Ok(o)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct H0 {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub s0: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl H0 {
    pub fn run(&self) -> Res {
        let v = h0_threshold(self.n, self.eps, self.s0)?;
        let mut o = Outcome::new(json!({ "h0": v }));
        o.summary = vec![("h0", Cell::Num(v))];
        o.text = Some(text(v));
        Ok(o)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NnscTest {
    /// Bartnik data JSON.
    #[arg(long)]
    pub data: PathBuf,
    /// `const` is the constant path at the data metric.
    #[arg(long, default_value = "const")]
    pub path: String,
    #[arg(long, default_value_t = 0.1)]
    pub eps_target: f64,
    #[arg(long)]
    pub s_max: Option<f64>,
    /// Constant mean curvature overriding the data file.
    #[arg(long = "H")]
    #[serde(rename = "H")]
    pub big_h: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl NnscTest {
    pub fn run(&self) -> Res {
        let mut data = load_data(&self.data)?;
        if let Some(h) = self.big_h {
            data.h = ScalarField::constant(data.metric.grid_len(), h);
        }
        let p = parse_path(&self.path, &data.metric)?;
        let rep = nnsc_fillin_test_with(&data, &p, self.eps_target, self.s_max.unwrap_or_else(|| default_s_max(data.n)))?;
        let mut o = Outcome::new(value(&rep));
        o.summary = vec![
            ("bracket", Cell::Num(rep.report.bracket)),
            ("verdict", Cell::Text(value(&rep.report.verdict).as_str().unwrap_or("").into())),
        ];
        o.grid = path_grid(&p);
        o.grid["data_nodes"] = json!(data.metric.grid_len());
        o.tolerances = flow_tolerances(&FlowOptions::default());
        Ok(o)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThetaClosed {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "H")]
    #[serde(rename = "H")]
    pub big_h: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl ThetaClosed {
    pub fn run(&self) -> Res {
        let b = theta_closed_form(self.n, self.big_h)?;
        let v = b.value.unwrap_or(f64::NAN);
        let mut o = Outcome::new(value(&b));
        o.summary = vec![("theta", Cell::Num(v))];
        o.text = Some(text(v));
        Ok(o)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThetaDecay {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long = "H0")]
    #[serde(rename = "H0")]
    pub h0: f64,
    /// Known upper bound on theta at H0.
    #[arg(long)]
    pub theta: f64,
    /// Largest H; defaults to 1000 H0.
    #[arg(long = "H-max")]
    #[serde(rename = "H_max")]
    pub h_max: Option<f64>,
    /// Log-spaced grid points.
    #[arg(long, default_value_t = 61)]
    pub points: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl ThetaDecay {
    pub fn run(&self) -> Res {
        if self.points < 2 {
            return Err(Error::Resolution(format!("need >= 2 grid points, got {}", self.points)));
        }
        let hi = self.h_max.unwrap_or(1e3 * self.h0);
        let ratio = hi / self.h0;
        let grid: Vec<f64> =
            (0..self.points).map(|k| self.h0 * ratio.powf(k as f64 / (self.points - 1) as f64)).collect();
        let curve = decay_curve(self.n, self.h0, self.theta, &grid)?;
        let consts = uniform_decay_constants(self.n)?;
        let mut o = Outcome::new(json!({ "bound": value(&curve), "uniform_decay": value(&consts) }));
        o.summary = vec![
            ("theta0", Cell::Num(consts.theta0)),
            ("alpha0", Cell::Num(consts.alpha0)),
            ("envelope_end", Cell::Num(curve.curve.as_ref().and_then(|c| c.last()).map(|p| p.envelope).unwrap_or(f64::NAN))),
        ];
        o.csv = Some(curve.to_csv());
        o.grid = json!({ "points": self.points, "H_max": hi });
        o.tolerances = json!({ "decay_certificate": 1e-10 });
        Ok(o)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThetaLower {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long)]
    pub min_r: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub max_h: f64,
    /// Use the spectral bound 2 lambda1 of this metric instead.
    #[arg(long)]
    pub metric: Option<String>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl ThetaLower {
    pub fn run(&self) -> Res {
        let (b, grid) = match (&self.metric, self.min_r) {
            (Some(spec), _) => {
                let g = parse_metric(spec, self.n)?;
                (spectral_lower_bound(&g)?, metric_grid(&g))
            }
            (None, Some(r)) => (fillin_lower_bound(self.n, r, self.max_h)?, json!({})),
            (None, None) => return Err(Error::Precondition("theta-lower needs --min-r or --metric".into())),
        };
        let v = b.value.unwrap_or(f64::NAN);
        let mut o = Outcome::new(value(&b));
        o.summary = vec![("theta_lower", Cell::Num(v))];
        o.text = Some(text(v));
        o.grid = grid;
        o.tolerances = json!({ "cylinder_fd": tol::FD_ORACLE, "eigen_residual": tol::EIGEN_RESIDUAL });
        Ok(o)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Lambda1 {
    #[arg(long, default_value = "round")]
    pub metric: String,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl Lambda1 {
    pub fn run(&self) -> Res {
        let g = parse_metric(&self.metric, self.n)?;
        let e = lambda1(&g)?;
        let mut o = Outcome::new(value(&e));
        o.summary = vec![("lambda1", Cell::Num(e.lambda)), ("residual", Cell::Num(e.residual))];
        o.text = Some(text(e.lambda));
        o.grid = metric_grid(&g);
        o.tolerances = json!({ "eigen_residual": tol::EIGEN_RESIDUAL });
        Ok(o)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PathBuild {
    #[arg(long, default_value = "const")]
    pub path: String,
    #[arg(long, default_value = "round")]
    pub metric: String,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Mollification width.
    #[arg(long)]
    pub mollify: Option<f64>,
    /// Flatten near the ends and reparametrize to length T.
    #[arg(long)]
    pub flatten: Option<f64>,
    /// Include every slice in the JSON report.
    #[arg(long)]
    pub samples: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl PathBuild {
    pub fn run(&self) -> Res {
        let mut p = parse_path(&self.path, &parse_metric(&self.metric, self.n)?)?;
        if let Some(s) = self.mollify {
            p = mollify(&p, s)?;
        }
        if let Some(t) = self.flatten {
            p = flatten_reparametrize(&p, t)?;
        }
        let norms = path_norms(&p)?;
        let mut csv = String::from("t,min_r,max_r\n");
        for t in p.t_nodes() {
            let r = p.metric(t)?.scalar_curvature()?;
            csv.push_str(&format!("{t:.16e},{:.16e},{:.16e}\n", r.min(), r.max()));
        }
        let mut result = json!({
            "label": p.label(),
            "length": p.param_length(),
            "corners": p.corners(),
            "flags": value(&p.flags()),
            "norms": value(&norms),
        });
        if self.samples {
            result["slices"] = value(&p.describe());
        }
        let mut o = Outcome::new(result);
        o.summary = vec![
            ("sup_d1", Cell::Num(norms.sup_d1)),
            ("sup_d2", Cell::Num(norms.sup_d2)),
            ("min_r", Cell::Num(norms.min_r)),
        ];
        o.csv = Some(csv);
        o.grid = path_grid(&p);
        Ok(o)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Validate {
    /// Multiply every upper tolerance by this factor.
    #[arg(long, default_value_t = 1.0)]
    pub stress: f64,
    /// Run only criteria whose name contains this text (or whose number matches).
    #[arg(long)]
    pub filter: Option<String>,
    #[arg(long, default_value_t = crate::DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl Validate {
    pub fn run(&self) -> Res {
        if !(self.stress > 0.0) {
            return Err(Error::Precondition(format!("stress factor {} must be positive", self.stress)));
        }
        let rep = run_suite(&SuiteOptions { stress: self.stress, filter: self.filter.clone(), seed: self.seed });
        let mut o = Outcome::new(value(&rep));
        o.summary = vec![
            ("rows", Cell::Num(rep.rows.len() as f64)),
            ("failing", Cell::Num(rep.failing().len() as f64)),
            ("pass", Cell::Text(rep.pass().to_string())),
        ];
        o.text = Some(rep.to_table());
        o.tolerances = json!({ "stress": self.stress });
        Ok(o)
    }
}
