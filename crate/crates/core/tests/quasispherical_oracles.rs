use std::f64::consts::PI;

use fillin_core::manifold::{ScalarField, SphereMetric};
use fillin_core::paths::{smoothstep5, MetricPath};
use fillin_core::quasispherical::*;
use fillin_core::theta::theta_closed_form;
use fillin_core::Error;

fn euclidean(n: usize, s_max: f64) -> BaseAF {
    let p = MetricPath::constant(&SphereMetric::round(n, 1.0).unwrap()).unwrap();
    build_base(&p, 0.1, s_max).unwrap()
}

#[test]
fn ball_volumes() {
    assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
}

#[test]
fn constant_path_gives_euclidean_base() {
    let b = euclidean(3, 100.0);
    assert_eq!(b.s0, 1.0);
    assert_eq!(b.eps_achieved, 0.0);
    let sd = b.slice(3.0).unwrap();
    assert!((sd.hbar.0[0] - 2.0 / 3.0).abs() < 1e-15);
    assert!(sd.r_bar.0[0].abs() < 1e-15);
}

#[test]
fn schwarzschild_flow_oracle() {
    let b = euclidean(3, 100.0);
    let f = run_flow(&b, &ScalarField(vec![2.0])).unwrap();
    let mut worst: f64 = 0.0;
    for (s, u) in f.s.iter().zip(&f.u) {
        worst = worst.max((u.0[0] - (1.0 - 0.75 / s).powf(-0.5)).abs());
    }
    assert!(worst <= 1e-8, "L-inf error {worst}");
    assert!((f.s.last().unwrap() - 100.0).abs() < 1e-9);
}

#[test]
fn unit_lapse_is_fixed() {
    let b = euclidean(3, 50.0);
    let f = run_flow(&b, &ScalarField(vec![1.0])).unwrap();
    assert!(f.u.iter().all(|u| (u.0[0] - 1.0).abs() < 1e-14));
    for (s, i) in f.s.iter().zip(&f.total_mean) {
        assert!((i - 8.0 * PI * s).abs() < 1e-10 * s);
    }
    assert!(f.certificate.holds);
    let m = adm_mass(&f).unwrap();
    assert!(m.flux_extrapolated.abs() < 1e-10 && m.radial.abs() < 1e-10);
}

#[test]
fn schwarzschild_total_mean_curvature() {
    let b = euclidean(3, 100.0);
    let f = run_flow(&b, &ScalarField(vec![2.0])).unwrap();
    for (s, i) in f.s.iter().zip(&f.total_mean) {
        let exact = 2.0 / s * (1.0 - 0.75 / s).sqrt() * 4.0 * PI * s * s;
        assert!((i - exact).abs() < 1e-7 * exact);
    }
    assert!(f.total_mean.windows(2).all(|w| w[1] > w[0]));
    assert!(f.certificate.holds && f.certificate.applicable);
    let exact = 2.0 / 7.5 * (0.9f64).sqrt() * 4.0 * PI * 56.25;
    assert!((f.total_mean_curvature(7.5).unwrap() - exact).abs() < 1e-4 * exact);
    assert!(f.total_mean_curvature(200.0).is_err());
}

#[test]
fn two_mass_formulas_agree() {
    for n in [3, 4] {
        for m in [0.1f64, 0.375] {
            let b = euclidean(n, default_s_max(n));
            let u1 = (1.0 - 2.0 * m).powf(-0.5);
            let f = run_flow(&b, &ScalarField(vec![u1])).unwrap();
            let adm = adm_mass(&f).unwrap();
            assert!((adm.flux_extrapolated - adm.radial).abs() < 1e-6, "n={n} m={m}: {adm:?}");
            assert!((adm.radial - m).abs() < 1e-6);
        }
    }
}

#[test]
fn adm_refuses_short_flows() {
    let p = MetricPath::eccentric_excursion(41, 1.1).unwrap();
    let b = build_base(&p, 0.1, 50.0).unwrap();
    assert!(b.truncated || b.s_max < 10.0 * b.s0);
    let f = run_flow_to(&b, &ScalarField(vec![1.0]), 2.0, FlowOptions::default()).unwrap();
    assert!(matches!(adm_mass(&f), Err(Error::Refused(_))));
}

fn rk4_round(n: usize, rho: impl Fn(f64) -> (f64, f64, f64), delta: f64, u1: f64, s_end: f64) -> f64 {
    // independent reduced ODE for round slices of radius s rho(t(s))
    let nf = n as f64;
    let rhs = |s: f64, u: f64| {
        let l = s.ln();
        let t = 2.0 / PI * (delta * l).atan();
        let t1 = 2.0 * delta / (PI * s * (1.0 + delta * delta * l * l));
        let t2 = -2.0 * delta / (PI * s * s * (1.0 + delta * delta * l * l))
            - 2.0 * delta * delta * delta * 2.0 * l / (PI * s * s * (1.0 + delta * delta * l * l).powi(2));
        let (r, r1, r2) = rho(t);
        let a = s * r;
        let a1 = r + s * r1 * t1;
        let a2 = 2.0 * r1 * t1 + s * (r2 * t1 * t1 + r1 * t2);
        let hbar = (nf - 1.0) * a1 / a;
        let rg = (nf - 1.0) * (nf - 2.0) / (a * a);
        let rb = rg * (1.0 - a1 * a1) - 2.0 * (nf - 1.0) * a2 / a;
        (0.5 * (u - u * u * u) * rg - 0.5 * rb * u) / hbar
    };
    let steps = 200_000;
    let (mut s, mut u) = (1.0, u1);
    let h = (s_end - 1.0) / steps as f64;
    for _ in 0..steps {
        let k1 = rhs(s, u);
        let k2 = rhs(s + h / 2.0, u + h / 2.0 * k1);
        let k3 = rhs(s + h / 2.0, u + h / 2.0 * k2);
        let k4 = rhs(s + h, u + h * k3);
        u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s += h;
    }
    u
}

#[test]
fn round_base_matches_reduced_ode() {
    let (lo, hi) = (0.05, 5.0 / 6.0);
    let w = move |t: f64| 1.0 - 0.3 * (1.0 - smoothstep5((t - lo) / (hi - lo)));
    let p = MetricPath::round_radius(3, w, vec![]).unwrap();
    let b = build_base(&p, 0.2, 30.0).unwrap();
    assert!(b.eps_achieved <= 0.2);
    let f = run_flow_to(&b, &ScalarField(vec![1.3]), 30.0, FlowOptions::default()).unwrap();
    let delta = b.delta;
    let rho = move |t: f64| {
        let x = ((t - lo) / (hi - lo)).clamp(0.0, 1.0);
        let inside = t > lo && t < hi;
        let d = hi - lo;
        let sp = if inside { 30.0 * x * x * (1.0 - x) * (1.0 - x) / d } else { 0.0 };
        let spp = if inside { 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x) / (d * d) } else { 0.0 };
        (w(t), 0.3 * sp, 0.3 * spp)
    };
    let exact = rk4_round(3, rho, delta, 1.3, 30.0);
    let got = f.u.last().unwrap().0[0];
    assert!((got - exact).abs() < 1e-7, "{got} vs {exact}");
}

#[test]
fn deviation_formula_matches_measurement() {
    let p = MetricPath::eccentric_excursion(61, 1.1).unwrap();
    let b = build_base(&p, 0.1, 1e4).unwrap();
    assert!(b.eps_achieved <= 0.1);
    assert!((b.s0 - ((5.0 * PI / 12.0).tan() / b.delta).exp()).abs() < 1e-9 * b.s0);
    for smp in &b.samples {
        assert!((smp.measured - smp.formula).abs() < 1e-6, "{smp:?}");
    }
    let sd = b.slice(2.0 * b.s0).unwrap();
    let r = 2.0 * b.s0;
    assert!(sd.r_gamma.0.iter().all(|v| (v - 2.0 / (r * r)).abs() < 1e-6 / (r * r)));
}

#[test]
fn axisym_flow_is_scalar_flat_and_monotone() {
    let p = MetricPath::eccentric_excursion(41, 1.1).unwrap();
    let b = build_base(&p, 0.1, 1e4).unwrap();
    let first = b.slice(1.0).unwrap();
    let u1 = first.hbar.map(|h| h / 1.9);
    let f = run_flow_to(&b, &u1, (10.0 * b.s0).max(100.0), FlowOptions::default()).unwrap();
    assert!(f.u.iter().all(|u| u.min() > 0.0));
    assert!(f.certificate.holds, "{:?}", f.certificate);
    let flat = scalar_flatness(&f).unwrap();
    assert!(flat < 1e-3, "max |R| = {flat}");
    let last = f.u.last().unwrap();
    let mean = last.0.iter().sum::<f64>() / last.len() as f64;
    assert!(last.0.iter().all(|v| (v - mean).abs() < 1e-4));
}

#[test]
fn euclidean_threshold() {
    let std = SphereMetric::round(3, 1.0).unwrap();
    let path = MetricPath::constant(&std).unwrap();
    for (hh, verdict) in [(3.0, Verdict::NoNnscFillIn), (1.0, Verdict::Inconclusive)] {
        let data = BartnikData { n: 3, metric: std.clone(), h: ScalarField(vec![hh]) };
        let rep = nnsc_fillin_test(&data, &path, 0.1).unwrap();
        let expected = 8.0 * PI - 4.0 * PI * hh;
        assert!((rep.report.bracket - expected).abs() <= 1e-6 * expected.abs());
        assert_eq!(rep.report.verdict, verdict);
        assert!((rep.h0_constant.unwrap() - 2.0).abs() < 1e-6);
    }
    let zero = theta_closed_form(3, 2.0).unwrap().value.unwrap();
    assert!(zero.abs() < 1e-15);
}

#[test]
fn brown_york_slice_bound() {
    let std = SphereMetric::round(3, 1.0).unwrap();
    let base = euclidean(3, 10.0);
    let rep = mass_upper_bound(&base, &ScalarField(vec![2.0])).unwrap();
    assert!((rep.brown_york_bound - (2.0 - 1.0) * 4.0 * PI / (8.0 * PI)).abs() < 1e-12);
    assert!((rep.h0 - 8.0 * PI).abs() < 1e-12);
    let _ = std;
}

#[test]
fn h0_values() {
    assert!((h0_threshold(3, 0.0, 1.0).unwrap() - 8.0 * PI).abs() < 1e-12);
    assert!((h0_threshold(3, 0.0, 4.0).unwrap() - 16.0 * PI).abs() < 1e-12);
    assert!(h0_threshold(3, 0.2, 4.0).unwrap() > h0_threshold(3, 0.1, 4.0).unwrap());
    assert!(h0_threshold(3, 0.1, 5.0).unwrap() > h0_threshold(3, 0.1, 4.0).unwrap());
    assert!(matches!(h0_threshold(3, 1.0, 4.0), Err(Error::Domain(_))));
}

#[test]
fn nnsc_preconditions() {
    let std = SphereMetric::round(3, 1.0).unwrap();
    let path = MetricPath::constant(&std).unwrap();
    let data = BartnikData { n: 3, metric: std.clone(), h: ScalarField(vec![0.0]) };
    assert!(matches!(nnsc_fillin_test(&data, &path, 0.1), Err(Error::Precondition(_))));
    let other = SphereMetric::round(3, 2.0).unwrap();
    let data = BartnikData { n: 3, metric: other, h: ScalarField(vec![1.0]) };
    assert!(matches!(nnsc_fillin_test(&data, &path, 0.1), Err(Error::Precondition(_))));
}
