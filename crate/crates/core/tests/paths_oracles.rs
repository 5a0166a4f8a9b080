use fillin_core::manifold::{SphereMetric, Tensor};
use fillin_core::paths::*;
use fillin_core::Error;

fn r2(t: &Tensor) -> f64 {
    match t {
        Tensor::Round { r2, .. } => *r2,
        _ => panic!("expected round"),
    }
}

#[test]
fn convex_path_of_equal_metrics_is_constant() {
    let a = SphereMetric::round(3, 1.0).unwrap();
    let p = convex_path(&a, &a).unwrap();
    assert!(p.is_constant());
    let rep = path_norms(&p).unwrap();
    assert_eq!(rep.sup_d1, 0.0);
    assert_eq!(rep.sup_d2, 0.0);
    assert!((rep.sup_abs_r - 2.0).abs() < 1e-15);
}

#[test]
fn convex_path_combines_tensors() {
    let a = SphereMetric::round(3, 1.0).unwrap();
    let b = SphereMetric::round(3, 2.0).unwrap();
    let p = convex_path(&a, &b).unwrap();
    assert!((r2(&p.tensor(1.0 / 3.0)) - 2.5).abs() < 1e-15);
    assert_eq!(r2(&p.tensor(0.9)), 4.0);
    assert_eq!(p.corners(), &[2.0 / 3.0]);
}

#[test]
fn convex_path_is_affine_before_the_corner() {
    let a = SphereMetric::ellipsoid(101, 1.0, 1.1).unwrap();
    let b = SphereMetric::std_axisym(101).unwrap();
    let p = convex_path(&a, &b).unwrap();
    let h = 0.05;
    for k in 1..12 {
        let t = k as f64 * h;
        let d2 = p.tensor(t - h).combine(1.0, &p.tensor(t + h), 1.0).unwrap().combine(1.0, &p.tensor(t), -2.0).unwrap();
        assert!(d2.max_abs_diff(&d2.zeros_like()) < 1e-12);
    }
}

#[test]
fn convex_path_derivative_norm() {
    let a = SphereMetric::ellipsoid(101, 1.0, 1.1).unwrap();
    let b = SphereMetric::std_axisym(101).unwrap();
    let p = convex_path(&a, &b).unwrap();
    let diff = b.tensor().combine(1.5, &a.tensor(), -1.5).unwrap();
    for t in [0.1, 0.3, 0.5] {
        let g = p.tensor(t);
        let measured = tensor_norm(&p.derivative_auto(t, 1), &g);
        assert!((measured - tensor_norm(&diff, &g)).abs() < 1e-9);
    }
}

#[test]
fn convex_path_grid_mismatch() {
    let a = SphereMetric::std_axisym(101).unwrap();
    let b = SphereMetric::std_axisym(201).unwrap();
    assert!(matches!(convex_path(&a, &b), Err(Error::Alignment(_))));
}

#[test]
fn mollify_constant_path_is_unchanged() {
    let p = MetricPath::constant(&SphereMetric::std_axisym(101).unwrap()).unwrap();
    let m = mollify(&p, 0.1).unwrap();
    for k in 0..=20 {
        let t = k as f64 / 20.0;
        assert!(m.tensor(t).max_abs_diff(&p.tensor(t)) < 1e-13);
    }
}

#[test]
fn mollify_range_checks() {
    let p = MetricPath::constant(&SphereMetric::round(3, 1.0).unwrap()).unwrap();
    assert!(matches!(mollify(&p, 0.0), Err(Error::Domain(_))));
    assert!(matches!(mollify(&p, 0.2), Err(Error::Domain(_))));
}

#[test]
fn mollify_smooths_a_kink() {
    let raw = MetricPath::kinked_radius(3, vec![(0.0, 1.0), (0.6, 1.6), (1.0, 1.2)]).unwrap();
    let m = mollify(&raw, 0.1).unwrap();
    let second = |p: &MetricPath, h: f64| {
        let t = 0.6;
        (r2(&p.tensor(t + h)) - 2.0 * r2(&p.tensor(t)) + r2(&p.tensor(t - h))) / (h * h)
    };
    // the raw second difference grows like 1/h at the kink, the mollified one stays bounded
    let (a, b) = (second(&raw, 1e-2).abs(), second(&raw, 1e-3).abs());
    assert!(b > 5.0 * a);
    let (c, d) = (second(&m, 1e-2), second(&m, 1e-3));
    assert!((c - d).abs() < 1e-2 * c.abs().max(1.0));
    assert!(path_norms(&m).unwrap().sup_d2.is_finite());
    // endpoints untouched
    assert_eq!(r2(&m.tensor(0.0)), r2(&raw.tensor(0.0)));
    assert_eq!(r2(&m.tensor(1.0)), r2(&raw.tensor(1.0)));
}

#[test]
fn mollify_is_c1_at_the_junctions() {
    let a = SphereMetric::ellipsoid(101, 1.0, 1.1).unwrap();
    let b = SphereMetric::std_axisym(101).unwrap();
    let m = mollify(&convex_path(&a, &b).unwrap(), 0.1).unwrap();
    for t in [0.5, 5.0 / 6.0] {
        let l = m.derivative(t, 1, Side::Left);
        let r = m.derivative(t, 1, Side::Right);
        assert!(l.max_abs_diff(&r) < 1e-6);
    }
}

#[test]
fn mollify_commutes_with_shifts() {
    let a = SphereMetric::round(3, 1.0).unwrap();
    let b = SphereMetric::round(3, 2.0).unwrap();
    let p = convex_path(&a, &b).unwrap();
    let shifted = MetricPath::from_family("shifted", {
        let p = p.clone();
        move |t| match p.tensor(t) {
            Tensor::Round { n, r2 } => Tensor::Round { n, r2: r2 + 0.5 },
            other => other,
        }
    }, p.corners().to_vec())
    .unwrap();
    let (m, ms) = (mollify(&p, 0.1).unwrap(), mollify(&shifted, 0.1).unwrap());
    for k in 0..=30 {
        let t = k as f64 / 30.0;
        assert!((r2(&ms.tensor(t)) - r2(&m.tensor(t)) - 0.5).abs() < 1e-13);
    }
}

#[test]
fn flatten_reparametrize_endpoint() {
    let big_t = 2.0f64;
    let l = (6.0 * big_t).cbrt();
    let c = |t: f64| l / 2.0 * t * t - t * t * t / 3.0;
    assert!((c(l) - big_t).abs() < 1e-12);
    assert!((l * l - l * l).abs() == 0.0);
    let p = MetricPath::round_radius(3, |t| 1.0 + t, vec![]).unwrap();
    let f = flatten_reparametrize(&p, big_t).unwrap();
    assert!((f.param_length() - l).abs() < 1e-15);
    let d = f.derivative(1.0, 1, Side::Left);
    assert!(r2(&d).abs() / l < 1e-8);
    // same image set: slices coincide at corresponding parameters
    for k in 0..=10 {
        let tau = k as f64 / 10.0;
        let s = 3.0 * tau * tau - 2.0 * tau * tau * tau;
        assert_eq!(r2(&f.tensor(tau)), r2(&p.tensor(s)));
    }
    assert!(matches!(flatten_reparametrize(&p, 0.0), Err(Error::Domain(_))));
}

#[test]
fn round_radius_norms_match_hand_derivation() {
    let p = MetricPath::round_radius(3, |t| 1.0 + t, vec![]).unwrap();
    for t in [0.0, 0.2, 0.5, 0.9, 1.0] {
        let g = p.tensor(t);
        let measured = tensor_norm(&p.derivative_auto(t, 1), &g);
        let exact = 2.0 * 2f64.sqrt() / (1.0 + t);
        assert!((measured - exact).abs() < 1e-8, "t={t}: {measured} vs {exact}");
    }
    let rep = path_norms(&p).unwrap();
    assert!((rep.sup_d1 - 2.0 * 2f64.sqrt()).abs() < 1e-8);
}

#[test]
fn path_norms_need_five_nodes() {
    let p = MetricPath::constant(&SphereMetric::round(3, 1.0).unwrap()).unwrap().with_nodes(4);
    assert!(matches!(path_norms(&p), Err(Error::Resolution(_))));
}

#[test]
fn named_generators_are_flagged() {
    let p = MetricPath::eccentric_excursion(101, 1.05).unwrap();
    assert!(p.flags().constant_near_0 && p.flags().constant_near_1);
    let q = MetricPath::eccentric_to_round(101, 1.05).unwrap();
    assert!(q.flags().constant_near_0 && q.flags().constant_near_1);
    assert!(q.tensor(0.0).max_abs_diff(&SphereMetric::ellipsoid(101, 1.0, 1.05).unwrap().tensor()) < 1e-15);
}

#[test]
fn sampled_path_interpolates() {
    let ts: Vec<f64> = (0..11).map(|k| k as f64 / 10.0).collect();
    let ms: Vec<SphereMetric> = ts.iter().map(|t| SphereMetric::round(3, 1.0 + t * t).unwrap()).collect();
    let p = MetricPath::sampled(ts, &ms).unwrap();
    assert!((r2(&p.tensor(0.3)) - 1.09f64.powi(2)).abs() < 1e-15);
    assert!((r2(&p.tensor(0.35)) - (1.0 + 0.35f64 * 0.35).powi(2)).abs() < 1e-3);
}
