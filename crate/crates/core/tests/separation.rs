use std::sync::Arc;

use curtainlab::curtains::{dual_chain, is_chain, Curtain, SampleBudget};
use curtainlab::geom::{Geodesic, ModelSpace, StripLayout};
use curtainlab::separation::*;
use curtainlab::Error;

fn seg(s: &ModelSpace, a: [f64; 2], b: [f64; 2]) -> Geodesic {
    s.geodesic(&s.point_xy(a[0], a[1]).unwrap(), &s.point_xy(b[0], b[1]).unwrap()).unwrap()
}

#[test]
fn band_witness_is_four() {
    let s = ModelSpace::strip(StripLayout::Band).unwrap();
    let axis = Arc::new(seg(&s, [0.0, 0.0], [18.0, 0.0]));
    let h = Curtain::new(&s, axis.clone(), 7.5).unwrap();
    let k = Curtain::new(&s, axis, 10.5).unwrap();
    let pool = CurtainPool::from_probes(&s, vec![seg(&s, [9.0, -2.25], [9.0, 2.25])], 0.1, DEFAULT_CAP).unwrap();
    let o = PoolOracle::new(&pool, SampleBudget::default());
    let (n, chain) = separation_witness(&h, &k, &o).unwrap();
    assert_eq!(n, 4);
    assert!(is_chain(&chain.curtains, &SampleBudget::default()).unwrap().is_valid());
}

#[test]
fn plane_window_grows() {
    let s = ModelSpace::plane();
    let axis = Arc::new(seg(&s, [0.0, 0.0], [20.0, 0.0]));
    let h = Curtain::new(&s, axis.clone(), 5.0).unwrap();
    let k = Curtain::new(&s, axis, 15.0).unwrap();
    for w in [5.0f64, 10.0, 17.0] {
        let pool = CurtainPool::from_probes(&s, vec![seg(&s, [3.0, -w / 2.0], [3.0, w / 2.0])], 0.02, DEFAULT_CAP).unwrap();
        let o = PoolOracle::new(&pool, SampleBudget::default());
        let (n, _) = separation_witness(&h, &k, &o).unwrap();
        assert_eq!(n, w.floor() as usize - 1, "window {w}");
    }
}

#[test]
fn tripod_legs_do_not_separate() {
    let s = ModelSpace::tripod(10.0).unwrap();
    let ab = Arc::new(s.geodesic(&s.vertex(1).unwrap(), &s.vertex(2).unwrap()).unwrap());
    let h = Curtain::new(&s, ab.clone(), 5.0).unwrap();
    let k = Curtain::new(&s, ab, 15.0).unwrap();
    let legs: Vec<Geodesic> = (1..4).map(|v| s.geodesic(&s.vertex(0).unwrap(), &s.vertex(v).unwrap()).unwrap()).collect();
    let pool = CurtainPool::from_probes(&s, legs, 0.5, DEFAULT_CAP).unwrap();
    let o = PoolOracle::new(&pool, SampleBudget::default());
    let (n, _) = separation_witness(&h, &k, &o).unwrap();
    assert!(n <= 1);
}

#[test]
fn empty_pool_rejected() {
    let s = ModelSpace::plane();
    let axis = Arc::new(seg(&s, [0.0, 0.0], [20.0, 0.0]));
    let h = Curtain::new(&s, axis.clone(), 5.0).unwrap();
    let k = Curtain::new(&s, axis, 15.0).unwrap();
    let pool = CurtainPool::from_curtains(&s, &[], DEFAULT_CAP).unwrap();
    let o = PoolOracle::new(&pool, SampleBudget::default());
    assert!(matches!(separation_witness(&h, &k, &o), Err(Error::EmptyPool)));
}

fn strip_space() -> ModelSpace {
    ModelSpace::strip(StripLayout::example51(7, 64.0)).unwrap()
}

#[test]
fn strip_axis_chains_match_closed_form() {
    let s = strip_space();
    let o = AxisFamilyOracle::new(&s, 0.05).unwrap();
    let x = s.origin();
    for i in 1..=6usize {
        let t = ((i + 1) * (i + 1) - 1) as f64;
        let y = s.point_xy(t, 0.0).unwrap();
        let prof = lchain_profile(&o, &x, &y, 8).unwrap();
        for e in &prof {
            let pred = (2 * e.l).min(2 * i) as f64 + 1.0;
            assert!((e.estimate.value - pred).abs() <= 1.0, "i={i} L={} got {} want {pred}", e.l, e.estimate.value);
            assert!(e.estimate.value < 1.0 + t + 1e-9);
        }
        for w in prof.windows(2) {
            assert!(w[1].estimate.value >= w[0].estimate.value);
        }
    }
}

#[test]
fn strip_witness_materialises() {
    let s = strip_space();
    let o = AxisFamilyOracle::new(&s, 0.05).unwrap();
    let a = Curtain::new(&s, o.axis().clone(), 10.0).unwrap();
    let b = Curtain::new(&s, o.axis().clone(), 14.0).unwrap();
    let (n, chain) = separation_witness(&a, &b, &o).unwrap();
    assert_eq!(n, 63);
    assert_eq!(chain.len(), 63);
    let c = Curtain::new(&s, o.axis().clone(), 3.5).unwrap();
    let (n, chain) = separation_witness(&c, &b, &o).unwrap();
    assert_eq!(n, 2);
    assert!(is_chain(&chain.curtains, &SampleBudget::default()).unwrap().is_valid());
}

#[test]
fn dhat_plane_unit_segment() {
    let s = ModelSpace::plane();
    let g = seg(&s, [0.0, 0.0], [1.0, 0.0]);
    let pool = CurtainPool::from_probes(&s, vec![seg(&s, [-5.0, 0.0], [5.0, 0.0])], 0.25, DEFAULT_CAP).unwrap();
    let o = PoolOracle::new(&pool, SampleBudget::default());
    let b = dhat(&o, g.start(), g.end(), DEFAULT_LMAX).unwrap();
    assert!(b.lower.value <= b.upper.value);
    assert!(b.upper.value <= 2.0 * curtainlab::numeric::ZETA3 + 1e-3);
    assert!(b.upper.tail > 0.0 && b.upper.tail < 1.3e-4 * 2.0);
}

#[test]
fn gromov_degenerate_cases() {
    let s = ModelSpace::plane();
    let pool = CurtainPool::from_probes(&s, vec![seg(&s, [-5.0, 0.0], [8.0, 0.0])], 0.25, DEFAULT_CAP).unwrap();
    let o = PoolOracle::new(&pool, SampleBudget::default());
    let origin = s.origin();
    let x = s.point_xy(4.0, 0.0).unwrap();
    let g = gromov_product(&o, &x, &origin, &origin, 16).unwrap();
    assert_eq!((g.lower.value, g.upper.value), (0.0, 0.0));
    let same = gromov_product(&o, &x, &x, &origin, 16).unwrap();
    let d = dhat(&o, &origin, &x, 16).unwrap();
    assert_eq!(same, d);
}

fn axis_chain(s: &ModelSpace, g: &Arc<Geodesic>, centers: &[f64]) -> curtainlab::curtains::Chain {
    let cs: Vec<Curtain> = centers.iter().map(|&c| Curtain::new(s, g.clone(), c).unwrap()).collect();
    match is_chain(&cs, &SampleBudget::default()).unwrap() {
        curtainlab::curtains::ChainCheck::Valid(c) => c,
        _ => panic!("not a chain"),
    }
}

#[test]
fn glue_cardinalities() {
    let s = ModelSpace::plane();
    let g = Arc::new(seg(&s, [0.0, 0.0], [40.0, 0.0]));
    let c = axis_chain(&s, &g, &[2.0, 4.0, 6.0, 8.0, 10.0]);
    let c2 = axis_chain(&s, &g, &(0..10).map(|i| 12.0 + 2.0 * i as f64).collect::<Vec<_>>());
    let b = SampleBudget::default();
    assert_eq!(glue_chains(&c, &c2, 3, &b).unwrap().len(), 10);
    let c = axis_chain(&s, &g, &[2.0, 4.0]);
    let c2 = axis_chain(&s, &g, &[12.0, 14.0, 16.0, 18.0, 20.0]);
    assert_eq!(glue_chains(&c, &c2, 3, &b).unwrap().len(), 2);
    // Reversed second chain: its first curtain's far side misses the first chain.
    let rev = axis_chain(&s, &g, &[20.0, 18.0, 16.0, 14.0, 12.0]);
    assert!(matches!(glue_chains(&c, &rev, 3, &b), Err(Error::HypothesisUnverified(_))));
}

#[test]
fn glue_strip_witness_chains() {
    let s = strip_space();
    let o = AxisFamilyOracle::new(&s, 0.05).unwrap();
    let prof = lchain_profile(&o, &s.origin(), &s.point_xy(40.0, 0.0).unwrap(), 4).unwrap();
    let ch: Vec<Curtain> = prof[3].chain.iter().map(|&i| o.curtain(i).clone()).collect();
    let mid = ch.len() / 2;
    let b = SampleBudget::default();
    let (c1, c2) = (axis_chain_from(&ch[..mid]), axis_chain_from(&ch[mid..]));
    let l = c2.len() - 2;
    let glued = glue_chains(&c1, &c2, l, &b).unwrap();
    assert_eq!(glued.len(), c1.len() + c2.len() - l - 2);
    assert!(is_chain(&glued.curtains, &b).unwrap().is_valid());
}

fn axis_chain_from(cs: &[Curtain]) -> curtainlab::curtains::Chain {
    match is_chain(cs, &SampleBudget::default()).unwrap() {
        curtainlab::curtains::ChainCheck::Valid(c) => c,
        _ => panic!("not a chain"),
    }
}

#[test]
fn dualize_plane_line() {
    let s = ModelSpace::plane();
    let g = Arc::new(seg(&s, [0.0, 0.0], [16.0, 0.0]));
    let chain = dual_chain(&s, &g, 0.0, 16.0).unwrap();
    let c = axis_chain_from(&chain.curtains[..14]);
    let x = s.point_xy(0.0, 0.0).unwrap();
    let y = s.point_xy(16.0, 0.0).unwrap();
    let b = SampleBudget::default();
    let d = dualize_chain(&c, &x, &y, 1, 1, None, &b).unwrap();
    assert_eq!(d.len(), 2);
    assert!(matches!(dualize_chain(&c, &x, &y, 1, 2, None, &b), Err(Error::InsufficientLength { need: 28, have: 14 })));
    assert!(matches!(dualize_chain(&c, &x, &y, 1, 0, None, &b), Err(Error::InvalidArgument(_))));
}

#[test]
fn dualize_strip_chain() {
    let s = ModelSpace::strip(StripLayout::example51(9, 128.0)).unwrap();
    let o = AxisFamilyOracle::new(&s, 0.05).unwrap();
    let y = s.point_xy(99.0, 0.0).unwrap();
    let x = s.origin();
    let chain = dual_chain(&s, o.axis(), 0.0, 99.0).unwrap();
    let c = axis_chain_from(&chain.curtains[..54]);
    let d = dualize_chain(&c, &x, &y, 2, 3, None, &SampleBudget::default()).unwrap();
    assert!(d.len() >= 4);
}
