use std::sync::Arc;

use curtainlab::geom::{Geodesic, ModelSpace, StripLayout};
use curtainlab::morse::*;
use curtainlab::separation::{AxisFamilyOracle, CurtainPool, PoolOracle, DEFAULT_CAP};
use curtainlab::curtains::SampleBudget;

fn h2_axis(len: f64) -> (ModelSpace, Arc<Geodesic>) {
    let s = ModelSpace::hyperbolic();
    let g = s.geodesic(&s.point_xy(0.0, 1.0).unwrap(), &s.point_xy(0.0, len.exp()).unwrap()).unwrap();
    (s, Arc::new(g))
}

fn plane_line(len: f64) -> (ModelSpace, Arc<Geodesic>) {
    let s = ModelSpace::plane();
    let g = s.geodesic(&s.point_xy(0.0, 0.0).unwrap(), &s.point_xy(len, 0.0).unwrap()).unwrap();
    (s, Arc::new(g))
}

#[test]
fn hyperbolic_axis_contracts() {
    for len in [120.0, 240.0] {
        let (s, b) = h2_axis(len);
        let r = estimate_contraction(&s, &b, &SublinearFn::Const(1.0), &MorseBudget::default()).unwrap();
        assert!(r.d_est > 0.0 && r.d_est <= 10.0, "D_est {}", r.d_est);
        for x in &r.samples {
            assert!(x.dist_to_ray > x.radius + 1e-9);
        }
    }
}

#[test]
fn plane_line_does_not_contract() {
    let mut last = 0.0;
    for len in [100.0, 200.0, 400.0] {
        let (s, b) = plane_line(len);
        let r = estimate_contraction(&s, &b, &SublinearFn::Const(1.0), &MorseBudget::default()).unwrap();
        assert!(r.d_est > last * 1.3, "{} after {last}", r.d_est);
        last = r.d_est;
    }
}

#[test]
fn short_ray_rejected() {
    let (s, b) = plane_line(50.0);
    assert!(matches!(
        estimate_contraction(&s, &b, &SublinearFn::Const(1.0), &MorseBudget::default()),
        Err(curtainlab::Error::RayTooShort(_))
    ));
}

#[test]
fn tree_is_exactly_slim() {
    let mut rng = curtainlab::rng::stream(3, 0);
    let edges = curtainlab::geom::Tree::random_edges(40, 1.0, 8.0, &mut rng);
    let s = ModelSpace::tree(40, &edges).unwrap();
    let t = s.as_tree().unwrap();
    let far = (1..40).max_by(|&a, &b| t.vertex_dist(0, a).total_cmp(&t.vertex_dist(0, b))).unwrap();
    let b = s.geodesic(&s.vertex(0).unwrap(), &s.vertex(far).unwrap()).unwrap();
    let r = kappa_slim_test(&s, &b, &SublinearFn::Const(1.0), &MorseBudget::default(), None, None).unwrap();
    assert!(r.c_est < 1e-9, "{}", r.c_est);
}

#[test]
fn slimness_plane_vs_hyperbolic() {
    let mut prev = 0.0;
    for len in [50.0, 200.0, 800.0] {
        let (s, b) = plane_line(len);
        let r = kappa_slim_test(&s, &b, &SublinearFn::Const(1.0), &MorseBudget::default(), None, None).unwrap();
        assert!(r.c_est > prev);
        prev = r.c_est;
    }
    let (s, b) = h2_axis(200.0);
    let r = kappa_slim_test(&s, &b, &SublinearFn::Const(1.0), &MorseBudget::default(), None, None).unwrap();
    assert!(r.c_est < 1.0, "{}", r.c_est);
}

#[test]
fn hyperbolic_round_trip() {
    let (s, b) = h2_axis(200.0);
    let k = SublinearFn::Const(1.0);
    let d = estimate_contraction(&s, &b, &k, &MorseBudget::default()).unwrap().d_est;
    let probes: Vec<Geodesic> = (1..12)
        .map(|i| {
            let y = (i as f64 * 15.0).exp();
            s.geodesic(&s.point_xy(-3.0 * y, y).unwrap(), &s.point_xy(3.0 * y, y).unwrap()).unwrap()
        })
        .chain([(*b).clone()])
        .collect();
    let pool = CurtainPool::from_probes(&s, probes, 0.5, DEFAULT_CAP).unwrap();
    let o = PoolOracle::new(&pool, SampleBudget::default());
    let kc = build_kappa_chain(&s, &b, &k, d, 0.0, Some(&o)).unwrap();
    assert!(kc.check().is_empty(), "{:?}", kc.check());
    let rep = verify_excursion_implies_contracting(&s, &kc, &MorseBudget::default(), 5.0).unwrap();
    assert!(rep.ratio <= 5.0);
    assert_eq!(rep.confidence, Confidence::Normal);
}

#[test]
fn strip_axis_round_trip() {
    let s = ModelSpace::strip(StripLayout::example51(95, 128.0)).unwrap();
    let o = AxisFamilyOracle::new(&s, 0.25).unwrap();
    let b = o.axis().clone();
    let k = SublinearFn::Power(0.5);
    let rep = estimate_contraction(&s, &b, &k, &MorseBudget { centers: 24, ..Default::default() }).unwrap();
    eprintln!("strip D_est {}", rep.d_est);
    let kc = build_kappa_chain(&s, &b, &k, rep.d_est.max(0.1), 0.0, Some(&o)).unwrap();
    assert!(kc.check().is_empty(), "{:?}", kc.check());
    let ex = verify_excursion_implies_contracting(&s, &kc, &MorseBudget { pairs: 80, ..Default::default() }, 5.0).unwrap();
    eprintln!("strip slim {} ratio {}", ex.slim.c_est, ex.ratio);
    assert!(ex.ratio <= 5.0);
}

#[test]
fn ratio_bands_are_bounded() {
    for k in [SublinearFn::Const(2.0), SublinearFn::Log(1.0), SublinearFn::Log(3.0), SublinearFn::Power(0.5)] {
        for d0 in [1.0, 5.0, 10.0] {
            let (lo, hi) = ratio_band(&k, d0, 4000, 7);
            assert!(lo > 0.0 && hi < 1e3, "{k} {d0}: [{lo}, {hi}]");
            assert!(lo <= 1.0 && hi >= 1.0);
        }
    }
}
