use curtainlab::curtains::SampleBudget;
use curtainlab::experiments::*;
use curtainlab::geom::{Geodesic, ModelSpace, StripLayout};
use curtainlab::morse::{build_kappa_chain, estimate_contraction, MorseBudget, SublinearFn};
use curtainlab::separation::{AxisFamilyOracle, PoolOracle};

/// Brute-force count of the longest L-chain of vertical curtains separating
/// `(0,0)` from `(t,0)`: centres on a 0.05 grid plus the square gap centres,
/// gaps above 1, every non-final curtain at most L-separated from the next.
fn brute_chain(t: f64, l: usize, height: f64) -> usize {
    let strips: Vec<(f64, f64)> = (1..40).map(|j| ((j * j) as f64 + 0.5, ((j + 1) * (j + 1)) as f64 - 0.5)).collect();
    let over = |x: f64, (a, b): (f64, f64)| x - 0.5 < b && x + 0.5 > a;
    let sep = |r: f64, s: f64| {
        let mut c = ((r + 0.5).sqrt() - 1e-12).ceil() as usize;
        if strips.iter().any(|&st| over(r, st) && over(s, st)) {
            c = c.max((height - 1.0 - 1e-12).ceil() as usize);
        }
        c
    };
    let mut rs: Vec<f64> = (1..).map(|k| 0.5 + 0.05 * k as f64).take_while(|r| r + 0.5 < t).collect();
    rs.extend((1..40).map(|j| (j * j) as f64).filter(|&c| c > 0.5 && c + 0.5 < t));
    rs.sort_by(f64::total_cmp);
    rs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let mut best = vec![1usize; rs.len()];
    for j in 0..rs.len() {
        for k in 0..j {
            if rs[j] - rs[k] > 1.0 + 1e-9 && sep(rs[k], rs[j]) <= l {
                best[j] = best[j].max(best[k] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

#[test]
fn strip_table_matches_brute_force() {
    let t = example51(1..=4, 1..=6, 16.0, 0).unwrap();
    for r in &t.rows {
        assert_eq!(r.observed, brute_chain(r.t, r.l, 16.0), "i={} L={}", r.i, r.l);
    }
    assert!(t.all_within());
    // Frozen: min(2L−1, 2i) for L ≥ 2, one curtain for L = 1.
    let get = |i, l| t.rows.iter().find(|r| r.i == i && r.l == l).unwrap().observed;
    assert_eq!(get(3, 2), 3);
    assert_eq!(get(3, 5), 6);
    assert_eq!(get(1, 1), 1);
    assert_eq!(get(4, 4), 7);
}

#[test]
fn strip_dhat_series() {
    let t = example51(1..=6, 1..=8, 128.0, 64).unwrap();
    assert!(matches!(example51(1..=2, 1..=8, 64.0, 64), Err(curtainlab::Error::TruncationTooLow(_))));
    for r in &t.dhat {
        assert!(r.lower <= r.upper);
    }
    let s: Vec<f64> = t.dhat.iter().map(|r| r.chain_series).collect();
    assert!(s.windows(2).all(|w| w[1] >= w[0]));
    assert!(s.iter().all(|&v| v <= Example51Table::REFERENCE));
    // d_L = min(2L, 2i + 1) exactly, so the lower sum stays below 2ζ(2).
    for r in &t.dhat {
        let want: f64 = (1..=64).map(|l| (2 * l).min(2 * r.i + 1) as f64 / (l as f64).powi(3)).sum();
        assert!((r.lower - want).abs() < 1e-9, "i={} {} vs {want}", r.i, r.lower);
        assert!(r.lower <= Example51Table::REFERENCE);
    }
}

#[test]
fn tripod_injectivity() {
    let s = ModelSpace::tripod(40.0).unwrap();
    let legs: Vec<Geodesic> = (1..4).map(|v| s.geodesic(&s.vertex(0).unwrap(), &s.vertex(v).unwrap()).unwrap()).collect();
    let depths: Vec<f64> = (1..=8).map(|k| 4.0 * k as f64 + 0.3).collect();
    let pool = schedule_pool(&s, &legs[0], &legs[1], &depths).unwrap();
    let o = PoolOracle::new(&pool, SampleBudget::default());
    let rep = injectivity_probe(&o, &legs[0], &legs[1], &depths, 16).unwrap();
    // Exact pool: the product stays within the (1 + 1/2³ + …)/2 scale of the branch point.
    assert!(rep.pair.rows.iter().all(|r| r.upper < 1.0), "{:?}", rep.pair.rows);
    assert_eq!(rep.pair.verdict, Verdict::Bounded);
    assert_eq!(rep.control.verdict, Verdict::Diverging);
}

#[test]
fn hyperbolic_injectivity() {
    let (s, a) = h2_axis(40.0).unwrap();
    let (_, b) = h2_ray(0.6, 40.0).unwrap();
    let depths: Vec<f64> = (1..=8).map(|k| 2.5 * k as f64).collect();
    let pool = schedule_pool(&s, &a, &b, &depths).unwrap();
    let o = PoolOracle::new(&pool, SampleBudget::default());
    let rep = injectivity_probe(&o, &a, &b, &depths, 16).unwrap();
    assert_eq!(rep.pair.verdict, Verdict::Bounded);
    assert_eq!(rep.control.verdict, Verdict::Diverging);
}

#[test]
fn unboundedness_hyperbolic_log() {
    let (s, b) = h2_axis(560.0).unwrap();
    let k = SublinearFn::Log(1.0);
    let d = estimate_contraction(&s, &b, &k, &MorseBudget { centers: 24, ..Default::default() }).unwrap().d_est;
    let pool = axis_pool(&s, &b, h2_transversals(&s, 560.0, 10.0, 3.0).unwrap(), 0.5).unwrap();
    let o = PoolOracle::new(&pool, SampleBudget::default());
    let kc = build_kappa_chain(&s, &b, &k, d, 0.0, Some(&o)).unwrap();
    let rep = unboundedness_probe(&o, &kc, 0.0).unwrap();
    assert!(rep.lhs_increasing);
    assert!(rep.holds && rep.rhs_diverges, "{:?}", rep.rows);
}

#[test]
fn unboundedness_strip_sqrt() {
    let s = ModelSpace::strip(StripLayout::example51(95, 128.0)).unwrap();
    let o = AxisFamilyOracle::new(&s, 4.0).unwrap();
    let b = o.axis().clone();
    let k = SublinearFn::Power(0.5);
    let kc = build_kappa_chain(&s, &b, &k, 3.3, 0.0, None).unwrap();
    let rep = unboundedness_probe(&o, &kc, 0.0).unwrap();
    assert!(rep.holds && !rep.rhs_diverges);
    assert!(rep.extension.iter().all(|&(_, r)| r < 0.0));
}
