use fillin_core::manifold::{
    conformal_mean, fd_band_curvature, Orientation, ScalarField, SphereMetric, WarpedBand,
};
use fillin_core::necks::*;
use fillin_core::paths::MetricPath;
use fillin_core::Error;

#[test]
fn schwarzschild_closed_forms_n3() {
    let nk = build_schwarzschild_neck(3, 1.0, 0.0).unwrap();
    assert!((nk.m - 0.375).abs() < 1e-15);
    assert!((nk.r2 - 9.0 / 16.0).abs() < 1e-15);
    assert!((nk.r1 - 3.0 / 16.0).abs() < 1e-15);
    assert!(nk.residuals.outer_radius < 1e-12);
    assert!(nk.residuals.outer_mean < 1e-10);
    assert!(nk.residuals.inner_mean < 1e-10);
    assert!(nk.flags.is_empty());
}

#[test]
fn schwarzschild_closed_forms_n4() {
    let nk = build_schwarzschild_neck(4, 1.0, 0.0).unwrap();
    assert!((nk.m - 4.0 / 9.0).abs() < 1e-15);
    assert!((nk.r2 - 2.0 / 3.0).abs() < 1e-15);
    assert!((nk.r1 - 2f64.sqrt() / 3.0).abs() < 1e-15);
}

#[test]
fn schwarzschild_zero_mass_limit() {
    let nk = build_schwarzschild_neck(3, 2.0 - 1e-9, 0.0).unwrap();
    assert!(nk.m.abs() < 1e-9);
}

#[test]
fn schwarzschild_domain_errors() {
    assert!(matches!(build_schwarzschild_neck(3, 2.0, 0.0), Err(Error::Domain(_))));
    assert!(matches!(build_schwarzschild_neck(3, 0.0, 0.0), Err(Error::Domain(_))));
    assert!(matches!(build_schwarzschild_neck(3, 1.0, 1.0), Err(Error::Domain(_))));
    assert!(matches!(build_schwarzschild_neck(3, 1.0, -0.1), Err(Error::Domain(_))));
}

#[test]
fn schwarzschild_radius_increasing_and_inner_root() {
    for n in 3..=6 {
        for &hh in &[0.3, 1.0, 1.9] {
            let nk = build_schwarzschild_neck(n, hh, 0.0).unwrap();
            assert!(nk.flags.is_empty(), "n={n} H={hh}");
            let p = nk.radius_profile(1000);
            assert!((p[999].1 - 1.0).abs() < 1e-12);
            let nk = build_schwarzschild_neck(n, hh, 0.5 * hh).unwrap();
            assert!(nk.residuals.inner_mean < 1e-10);
            assert!(nk.r1 < (nk.m / 2.0).powf(1.0 / (n as f64 - 2.0)));
            assert!(nk.mu < 1.0);
        }
    }
}

#[test]
fn rescaled_round_neck_meets_bound() {
    let g = SphereMetric::round(3, 1.0).unwrap();
    let nk = rescale_neck(3, &g, 1.0, 0.0, 0.5).unwrap();
    assert!((nk.bound - 1.0).abs() < 1e-14);
    assert!(nk.min_r_closed_form >= 1.0 - 1e-12);
    assert!(nk.min_r_fd >= 1.0 - 1e-4);
    assert!(nk.max_fd_error < 1e-4);
    assert!(nk.neck.mu < 1.0);
    assert!((nk.outer_mean_curvature - 1.0).abs() < 1e-10);
}

#[test]
fn rescaled_neck_infeasible() {
    let g = SphereMetric::round(3, 1.0).unwrap();
    assert!(matches!(rescale_neck(3, &g, 2.0, 0.0, 0.1), Err(Error::Precondition(_))));
    assert!(matches!(rescale_neck(3, &g, 1.0, 0.0, 1.5), Err(Error::Precondition(_))));
}

#[test]
fn rescaled_neck_inner_mean_curvature() {
    let g = SphereMetric::round(3, 1.0).unwrap();
    let nk = rescale_neck(3, &g, 1.0, 0.5, 0.1).unwrap();
    assert!(nk.neck.mu < 1.0);
    assert!((nk.inner_mean_curvature - 0.5).abs() < 1e-8);
}

#[test]
fn rescaled_neck_on_ellipsoid() {
    let g = SphereMetric::ellipsoid(101, 1.0, 1.1).unwrap();
    let min_r = g.scalar_curvature().unwrap().min();
    let hh = 0.8;
    let eps = 0.5 * (min_r - 0.5 * hh * hh);
    let nk = rescale_neck(3, &g, hh, 0.2, eps).unwrap();
    assert!(nk.min_r_fd >= nk.bound - 1e-4);
    assert!(nk.max_fd_error < 1e-4);
}

#[test]
fn c_mu_examples() {
    let c = solve_c_mu(4, 2.0).unwrap();
    assert!((c - (9.0 - 17f64.sqrt()) / 8.0).abs() < 1e-14);
    assert!(solve_c_mu(3, 1e-8).unwrap() < 1e-5);
    assert!(solve_c_mu(3, 1.0).unwrap() < solve_c_mu(3, 2.0).unwrap());
    for n in 3..=7 {
        for &mu in &[1e-3, 0.5, 1.0, 7.0, 100.0] {
            let c = solve_c_mu(n, mu).unwrap();
            let p = 1.0 - 2.0 / n as f64;
            assert!(c > 0.0 && c < 1.0);
            let f = c.powf(p) / (1.0 - c);
            assert!((f * (1.0 - c) / c.powf(p) - 1.0).abs() < 1e-12);
            assert!((f - mu).abs() < 1e-12 * mu.max(1.0) / (1.0 - c));
        }
    }
    assert!(matches!(solve_c_mu(3, 0.0), Err(Error::Domain(_))));
}

#[test]
fn cap_neck_example() {
    let nk = build_cap_neck(3, 2.0, 0.3, 0.0).unwrap();
    let mu = (2.0 / 3.0) * 6.3f64.powf(2.0 / 3.0) * 0.3f64.powf(1.0 / 3.0);
    assert!((nk.mu_eps - mu).abs() < 1e-14);
    let c_mu = solve_c_mu(3, mu).unwrap();
    assert!((nk.alpha_eps - (1.0 - c_mu) * 4.2).abs() < 1e-10);
    assert!(nk.residuals.max() < 1e-10);
    assert!(nk.residuals.sin_sq_t1 < 1e-12);
    assert!((nk.mu_eps - (nk.c * 2.0).powi(2)).abs() < 1e-12);
}

#[test]
fn cap_neck_small_theta_limit() {
    let nk = build_cap_neck(3, 2.0, 1e-9, 0.0).unwrap();
    assert!((nk.alpha_eps - 4.0).abs() < 1e-6);
}

#[test]
fn cap_neck_residual_grid() {
    for n in 3..=7 {
        for &lam in &[1.5, 2.0, 4.0] {
            for k in 0..10 {
                let theta = 1e-3 * 10f64.powf(4.0 * k as f64 / 9.0);
                let nk = build_cap_neck(n, lam, theta, 0.0).unwrap();
                assert!(nk.residuals.max() < 1e-10, "n={n} lam={lam} theta={theta}");
                assert!(nk.residuals.eq1 < 1e-12);
            }
        }
    }
}

#[test]
fn cap_neck_errors() {
    assert!(matches!(build_cap_neck(3, 2.0, 0.0, 0.0), Err(Error::Domain(_))));
    assert!(matches!(build_cap_neck(3, 1.0, 0.3, 0.0), Err(Error::Domain(_))));
    assert!(matches!(build_cap_neck(3, 2.0, 0.3, 1.0), Err(Error::Domain(_))));
}

#[test]
fn cap_neck_curvature_matches_fd() {
    let nk = build_cap_neck(3, 2.0, 0.3, 0.2).unwrap();
    let ts: Vec<f64> = (0..201).map(|k| nk.t1 + (nk.t2 - nk.t1) * k as f64 / 200.0).collect();
    let slices = ts.iter().map(|&t| SphereMetric::round(3, nk.alpha(t)).unwrap()).collect();
    let band = WarpedBand::product(ts.clone(), slices).unwrap();
    let c = fd_band_curvature(&band).unwrap();
    for (k, &t) in ts.iter().enumerate() {
        if c.extrapolated[k] {
            continue;
        }
        assert!((c.r[k].0[0] - nk.scalar_curvature(t, 2.0)).abs() < 1e-6);
        assert!((c.mean[k].0[0] - nk.mean_curvature(t)).abs() < 1e-6);
    }
    assert!((nk.mean_curvature(nk.t1) - 1.8).abs() < 1e-12);
    assert!((nk.alpha(nk.t1) - 1.0).abs() < 1e-12);
}

#[test]
fn isotopy_constant_path() {
    let p = MetricPath::constant(&SphereMetric::round(3, 1.0).unwrap()).unwrap();
    let nk = build_isotopy_neck(&p, 0.1, 0.05).unwrap();
    assert_eq!(nk.lambda, 1.0);
    assert!(nk.end_deviation < 1e-8);
    assert!((nk.hbar_min - 0.1).abs() < 1e-12);
    for (t, b) in nk.t.iter().zip(&nk.b) {
        assert!((b - 0.05 * t).abs() < 1e-12);
    }
    assert!((nk.mu - 0.1f64.exp()).abs() < 1e-12);
    assert!((nk.eps1 - 0.1 * (-1f64).exp()).abs() < 1e-15);
    assert!(nk.min_r > 0.0);
    assert!(nk.min_r_fd.unwrap() > 0.0);
}

#[test]
fn isotopy_eccentric_path() {
    let p = MetricPath::eccentric_to_round(61, 1.05).unwrap();
    let nk = build_isotopy_neck(&p, 0.1, 0.05).unwrap();
    assert!(nk.lambda.is_finite());
    assert!(nk.end_deviation < 1e-8);
    assert!(nk.hbar_min >= 0.05);
    assert!(nk.min_r > 0.0);
    assert!(nk.min_r_fd.expect("fd verified") > 0.0);
}

#[test]
fn isotopy_preconditions() {
    let p = MetricPath::constant(&SphereMetric::round(3, 1.0).unwrap()).unwrap();
    assert!(matches!(build_isotopy_neck(&p, 0.0, 0.0), Err(Error::Precondition(_))));
    assert!(matches!(build_isotopy_neck(&p, 0.1, 0.2), Err(Error::Precondition(_))));
}

fn round_collar(k: f64, omega: f64, t1: f64) -> CollarResult {
    let s: Vec<f64> = (0..121).map(|i| -0.3 + 0.3 * i as f64 / 120.0).collect();
    let slices = s.iter().map(|&t| SphereMetric::round(3, 1.0 + 0.5 * t).unwrap()).collect();
    let base = WarpedBand::product(s, slices).unwrap();
    let bend = CollarBend::new(base, ScalarField(vec![omega]), k, t1).unwrap();
    collar_bend(&bend, 3).unwrap()
}

#[test]
fn collar_round_matches_fd() {
    let res = round_collar(0.0, 0.4, 0.2);
    let fd = fd_band_curvature(res.band.as_ref().unwrap()).unwrap();
    for k in 0..res.s.len() {
        if !fd.extrapolated[k] {
            assert!((fd.r[k].0[0] - res.r_expansion[k].0[0]).abs() < 1e-4);
            assert!((fd.r[k].0[0] - res.r_expansion_literal[k].0[0]).abs() < 1e-4);
            assert!((fd.mean[k].0[0] - res.mean[k].0[0]).abs() < 1e-4);
        }
    }
}

#[test]
fn collar_boundary_mean_curvature() {
    let s: Vec<f64> = (0..41).map(|i| -0.2 + 0.2 * i as f64 / 40.0).collect();
    let slices: Vec<SphereMetric> =
        s.iter().map(|&t| SphereMetric::scaled(SphereMetric::ellipsoid(61, 1.0, 1.1).unwrap(), (1.0 + t).powi(2)).unwrap()).collect();
    let base = WarpedBand::product(s, slices).unwrap();
    let base_mean = fd_band_curvature(&base).unwrap().mean.last().unwrap().clone();
    let omega = base.slices()[0].field_from_fn(|x| 0.3 + 0.1 * x.cos());
    let bend = CollarBend::new(base, omega.clone(), 5.0, 0.1).unwrap();
    let res = collar_bend(&bend, 3).unwrap();
    let h4 = res.mean.last().unwrap();
    for i in 0..h4.len() {
        assert!((h4.0[i] - (base_mean.0[i] - 2.0 * omega.0[i])).abs() < 1e-12);
    }
}

#[test]
fn collar_axisym_matches_fd() {
    let s: Vec<f64> = (0..121).map(|i| -0.2 + 0.2 * i as f64 / 120.0).collect();
    let slices: Vec<SphereMetric> = s
        .iter()
        .map(|&t| SphereMetric::ellipsoid(81, 1.0 + 0.3 * t, 1.1).unwrap())
        .collect();
    let base = WarpedBand::product(s, slices).unwrap();
    let omega = base.slices()[0].field_from_fn(|x| 0.3 + 0.1 * x.cos() + 0.05 * (2.0 * x).cos());
    let bend = CollarBend::new(base, omega, 3.0, 0.2).unwrap();
    let res = collar_bend(&bend, 3).unwrap();
    let fd = fd_band_curvature(res.band.as_ref().unwrap()).unwrap();
    let mut lit_gap: f64 = 0.0;
    for k in 0..res.s.len() {
        if fd.extrapolated[k] {
            continue;
        }
        for i in 0..fd.r[k].len() {
            let err = (fd.r[k].0[i] - res.r_expansion[k].0[i]).abs();
            assert!(err < 1e-4, "slice {k} node {i}: {err}");
            lit_gap = lit_gap.max((res.r_expansion_literal[k].0[i] - res.r_expansion[k].0[i]).abs());
        }
    }
    assert!(lit_gap > 1e-3);
}

#[test]
fn collar_bend_grows_linearly_in_k() {
    let m: Vec<f64> = [10.0, 20.0, 40.0].iter().map(|&k| round_collar(k, 0.4, 0.02).min_r_bend).collect();
    let ratio = (m[2] - m[1]) / (m[1] - m[0]);
    assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
    assert!(m[0] > 0.0);
}

#[test]
fn collar_degenerate() {
    let s: Vec<f64> = (0..21).map(|i| -1.0 + i as f64 / 20.0).collect();
    let slices = s.iter().map(|_| SphereMetric::round(3, 1.0).unwrap()).collect();
    let base = WarpedBand::product(s, slices).unwrap();
    let bend = CollarBend::new(base, ScalarField(vec![0.5]), 10.0, 1.0).unwrap();
    assert!(matches!(collar_bend(&bend, 3), Err(Error::Degenerate(_))));
}

#[test]
fn transition_function_values() {
    let u = transition_function(1.0, 0.5, &[0.5, 1.0, 1.5, 2.0, 3.0]).unwrap();
    assert_eq!(u.0[0], 0.5);
    assert_eq!(u.0[1], 0.5);
    assert!((u.0[2] - 0.75).abs() < 1e-15);
    assert_eq!(u.0[3], 1.0);
    assert_eq!(u.0[4], 1.0);
    let grid: Vec<f64> = (0..=1000).map(|i| i as f64 * 3e-3).collect();
    let v = transition_function(1.0, 2.0, &grid).unwrap();
    assert!(v.0.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn transition_laplacian_decay() {
    let rs = [4.0, 8.0, 16.0, 32.0, 64.0];
    let sups: Vec<f64> = rs
        .iter()
        .map(|&r| {
            let grid: Vec<f64> = (0..=600).map(|i| 3.0 * r * i as f64 / 600.0).collect();
            cylinder_laplacian(r, 0.5, &grid).unwrap().iter().fold(0.0f64, |a, v| a.max(v.abs()))
        })
        .collect();
    let xs: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = sups.iter().map(|s| s.ln()).collect();
    let mx = xs.iter().sum::<f64>() / 5.0;
    let my = ys.iter().sum::<f64>() / 5.0;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!(slope > -2.2 && slope < -1.8, "slope {slope}");
}

fn cylinder(s: &[f64]) -> WarpedBand {
    WarpedBand::product(s.to_vec(), s.iter().map(|_| SphereMetric::round(3, 1.0).unwrap()).collect()).unwrap()
}

#[test]
fn bmn_identical_bands_fail() {
    let s: Vec<f64> = (0..21).map(|i| -0.1 + 0.005 * i as f64).collect();
    let rep = check_bmn_hypotheses(&cylinder(&s), &cylinder(&s)).unwrap();
    assert!(rep.metrics_match);
    assert!(!rep.pass);
    assert_eq!(rep.min_gap, 0.0);
}

#[test]
fn bmn_conformal_bump_passes() {
    let s: Vec<f64> = (0..21).map(|i| -0.1 + 0.005 * i as f64).collect();
    let a = 0.1;
    let u = |t: f64| 1.0 + a * t;
    let lapse = s.iter().map(|&t| ScalarField(vec![u(t).powi(2)])).collect();
    let slices = s.iter().map(|&t| SphereMetric::round(3, u(t).powi(2)).unwrap()).collect();
    let g = WarpedBand::new(s.clone(), lapse, slices, Orientation::Increasing).unwrap();
    let base = cylinder(&s);
    let rep = check_bmn_hypotheses(&g, &base).unwrap();
    assert!(rep.pass);
    let expected = conformal_mean(&ScalarField(vec![0.0]), &ScalarField(vec![a]), 3).unwrap();
    assert!((rep.min_gap - expected.0[0]).abs() < 1e-8);
    assert!((rep.min_gap - 4.0 * a).abs() < 1e-8);
    let swapped = check_bmn_hypotheses(&base, &g).unwrap();
    assert_eq!(swapped.gap.0[0], -rep.gap.0[0]);
}

#[test]
fn bmn_mismatch_fails() {
    let s: Vec<f64> = (0..21).map(|i| -0.1 + 0.005 * i as f64).collect();
    let other = WarpedBand::product(s.clone(), s.iter().map(|_| SphereMetric::round(3, 1.0005).unwrap()).collect()).unwrap();
    let rep = check_bmn_hypotheses(&cylinder(&s), &other).unwrap();
    assert!(!rep.pass);
    assert!((rep.boundary_discrepancy - (1.0005f64.powi(2) - 1.0)).abs() < 1e-12);
    let axi = WarpedBand::product(s.clone(), s.iter().map(|_| SphereMetric::std_axisym(41).unwrap()).collect()).unwrap();
    assert!(matches!(check_bmn_hypotheses(&cylinder(&s), &axi), Err(Error::Alignment(_))));
}

#[test]
fn bending_profile_certificate() {
    let p = bending_profile(&[0.0], 1.0).unwrap();
    assert_eq!(p.w[0], 0.0);
    assert_eq!(p.dw_dnu, 0.5);
    let d: Vec<f64> = (0..=100).map(|i| 0.002 * i as f64).collect();
    let p = bending_profile(&d, 1.0).unwrap();
    assert!(p.epsilon > 0.0);
    assert!(p.w[1..].iter().all(|w| *w < 0.0));
    assert!((p.bound[0] + 0.25).abs() < 1e-15);
    assert!(p.bound.iter().all(|b| *b <= -p.epsilon));
    assert!(matches!(bending_profile(&[0.0, 0.25], 1.0), Err(Error::Domain(_))));
}
