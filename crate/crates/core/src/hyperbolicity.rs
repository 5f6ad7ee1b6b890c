//! Four-point δ estimates in `d`, `d_L` and `d̂`; curtain-grid search; the
//! quasi-isometry sanity check between `d_E` and `d`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::curtains::{crosses, dual_chain, Chain, Curtain, SampleBudget};
use crate::error::{Error, Result};
use crate::geom::{Geodesic, ModelSpace, Point};
use crate::rng::stream;
use crate::separation::{dhat_from_profile, lchain_profile, SeparationOracle};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricKind {
    Ambient,
    DL(usize),
    Dhat(usize),
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKind::Ambient => write!(f, "ambient"),
            MetricKind::DL(l) => write!(f, "d_L({l})"),
            MetricKind::Dhat(m) => write!(f, "dhat({m})"),
        }
    }
}

impl MetricKind {
    pub fn l(&self) -> Option<usize> {
        match *self {
            MetricKind::Ambient => None,
            MetricKind::DL(l) | MetricKind::Dhat(l) => Some(l),
        }
    }
}

/// Ball from which quadruple points are drawn.
#[derive(Clone, Debug)]
pub struct Window {
    pub center: Point,
    pub radius: f64,
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B({}, {})", self.center, self.radius)
    }
}

#[derive(Clone, Debug)]
pub struct DeltaReport {
    pub kind: MetricKind,
    pub delta: f64,
    pub quadruples: usize,
    pub window: String,
    pub pool_id: Option<u64>,
}

/// Four-point defect: half the gap between the two largest pair sums.
pub fn four_point(d: impl Fn(usize, usize) -> f64) -> f64 {
    let mut s = [d(0, 1) + d(2, 3), d(0, 2) + d(1, 3), d(0, 3) + d(1, 2)];
    s.sort_by(|a, b| b.total_cmp(a));
    (0.5 * (s[0] - s[1])).max(0.0)
}

/// Distance between two points under the chosen metric.
pub fn metric_distance(kind: MetricKind, space: &ModelSpace, oracle: Option<&dyn SeparationOracle>, x: &Point, y: &Point) -> Result<f64> {
    match kind {
        MetricKind::Ambient => space.distance(x, y),
        MetricKind::DL(l) | MetricKind::Dhat(l) => {
            let o = oracle.ok_or_else(|| Error::InvalidArgument(format!("{kind} needs a pool")))?;
            let prof = lchain_profile(o, x, y, l)?;
            Ok(match kind {
                MetricKind::DL(_) => prof.last().map_or(0.0, |e| e.estimate.value),
                _ => dhat_from_profile(&prof, space.distance(x, y)?, o.pool_id()).lower.value,
            })
        }
    }
}

/// Largest four-point defect over sampled quadruples. Ambient scans draw fresh
/// points per quadruple; pool metrics draw quadruples from `points` shared
/// points so each pairwise estimate is computed once.
pub fn delta_scan(
    space: &ModelSpace,
    kind: MetricKind,
    window: &Window,
    n_quadruples: usize,
    points: usize,
    oracle: Option<&dyn SeparationOracle>,
    seed: u64,
) -> Result<DeltaReport> {
    if kind != MetricKind::Ambient && oracle.is_none() {
        return Err(Error::InvalidArgument(format!("{kind} needs a pool")));
    }
    let mut rng = stream(seed, 0xde1);
    let mut delta = 0.0f64;
    if kind == MetricKind::Ambient {
        for _ in 0..n_quadruples {
            let q: Vec<Point> = (0..4).map(|_| space.sample_near(&window.center, window.radius, &mut rng)).collect::<Result<_>>()?;
            let mut d = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in i + 1..4 {
                    d[i][j] = space.distance(&q[i], &q[j])?;
                    d[j][i] = d[i][j];
                }
            }
            delta = delta.max(four_point(|i, j| d[i][j]));
        }
    } else {
        let pts: Vec<Point> = (0..points.max(4)).map(|_| space.sample_near(&window.center, window.radius, &mut rng)).collect::<Result<_>>()?;
        let mut cache: HashMap<(usize, usize), f64> = HashMap::new();
        use rand::seq::index::sample;
        for _ in 0..n_quadruples {
            let idx = sample(&mut rng, pts.len(), 4).into_vec();
            let mut d = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in i + 1..4 {
                    let (a, b) = (idx[i].min(idx[j]), idx[i].max(idx[j]));
                    let v = match cache.get(&(a, b)) {
                        Some(&v) => v,
                        None => {
                            let v = metric_distance(kind, space, oracle, &pts[a], &pts[b])?;
                            cache.insert((a, b), v);
                            v
                        }
                    };
                    d[i][j] = v;
                    d[j][i] = v;
                }
            }
            delta = delta.max(four_point(|i, j| d[i][j]));
        }
    }
    Ok(DeltaReport { kind, delta, quadruples: n_quadruples, window: window.to_string(), pool_id: oracle.map(|o| o.pool_id()) })
}

/// Two chains whose curtains pairwise cross in both directions.
#[derive(Clone, Debug)]
pub struct Grid {
    pub h: Chain,
    pub k: Chain,
    /// `crossing[i][j]` for `h_i`, `k_j`; all true in a returned grid.
    pub crossing: Vec<Vec<bool>>,
    pub thinness: usize,
}

fn sub_chain(c: &Chain, idx: &[usize]) -> Chain {
    let curtains: Vec<Curtain> = idx.iter().map(|&i| c.curtains[i].clone()).collect();
    let certificate = match &c.certificate {
        crate::curtains::Certificate::PoleGaps(_) => crate::curtains::Certificate::PoleGaps(curtains.iter().map(|c| c.center()).collect()),
        other => other.clone(),
    };
    Chain { curtains, kind: c.kind.clone(), certificate }
}

/// Largest grid between two chains: greedily intersect crossing sets of the
/// `K` curtains with the most crossings. Subsets of chains are chains.
fn best_grid(h: &Chain, k: &Chain, budget: &SampleBudget) -> Result<Grid> {
    let (nh, nk) = (h.len(), k.len());
    let mut m = vec![vec![false; nk]; nh];
    for i in 0..nh {
        for j in 0..nk {
            m[i][j] = crosses(&h.curtains[i], &k.curtains[j], budget)?.is_yes() && crosses(&k.curtains[j], &h.curtains[i], budget)?.is_yes();
        }
    }
    let mut order: Vec<usize> = (0..nk).collect();
    let count = |j: usize| (0..nh).filter(|&i| m[i][j]).count();
    order.sort_by_key(|&j| (std::cmp::Reverse(count(j)), j));
    let mut alive: Vec<usize> = (0..nh).collect();
    let mut taken: Vec<usize> = Vec::new();
    let mut best: (usize, Vec<usize>, Vec<usize>) = (0, vec![], vec![]);
    for &j in &order {
        let next: Vec<usize> = alive.iter().copied().filter(|&i| m[i][j]).collect();
        if next.is_empty() {
            continue;
        }
        alive = next;
        taken.push(j);
        let th = alive.len().min(taken.len());
        if th > best.0 {
            best = (th, alive.clone(), taken.clone());
        }
    }
    let (thinness, mut hi, mut kj) = best;
    hi.sort_unstable();
    kj.sort_unstable();
    let crossing = hi.iter().map(|&i| kj.iter().map(|&j| m[i][j]).collect()).collect();
    Ok(Grid { h: sub_chain(h, &hi), k: sub_chain(k, &kj), crossing, thinness })
}

/// Grids between dual chains of every pair of probes from the two families,
/// thickest first.
pub fn grid_search(space: &ModelSpace, h_dir: &[Geodesic], k_dir: &[Geodesic], budget: &SampleBudget) -> Result<Vec<Grid>> {
    let chains = |gs: &[Geodesic]| -> Result<Vec<Chain>> {
        gs.iter()
            .filter(|g| g.length() >= 1.0)
            .map(|g| {
                let g = Arc::new(g.clone());
                dual_chain(space, &g, 0.0, g.length())
            })
            .collect()
    };
    let hs = chains(h_dir)?;
    let ks = chains(k_dir)?;
    let mut out = Vec::new();
    for h in &hs {
        for k in &ks {
            if h.is_empty() || k.is_empty() {
                continue;
            }
            out.push(best_grid(h, k, budget)?);
        }
    }
    out.sort_by_key(|g| std::cmp::Reverse(g.thinness));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QiReport {
    pub d: f64,
    pub d_e_lower: f64,
    pub e: usize,
    /// `d_E(E+2) + (E+2)` evaluated at the lower estimate.
    pub upper: f64,
    /// `d ≤ upper`; may fail because `d_E` is under-estimated.
    pub upper_holds: bool,
    /// `d_E ≤ d`, the literal lower side.
    pub lower_holds: bool,
    /// `d_E < 1 + d`, which always holds for the true metric.
    pub cap_holds: bool,
}

pub fn qi_sanity(oracle: &dyn SeparationOracle, x: &Point, y: &Point, e: usize) -> Result<QiReport> {
    let space = oracle.space();
    let d = space.distance(x, y)?;
    let de = if d == 0.0 { 0.0 } else { metric_distance(MetricKind::DL(e), space, Some(oracle), x, y)? };
    let upper = de * (e as f64 + 2.0) + if d == 0.0 { 0.0 } else { e as f64 + 2.0 };
    Ok(QiReport {
        d,
        d_e_lower: de,
        e,
        upper,
        upper_holds: d <= upper + 1e-9,
        lower_holds: de <= d + 1e-9,
        cap_holds: de < 1.0 + d + 1e-9,
    })
}

/// The upper side of the inequality for given `d_E` and `E`.
pub fn qi_upper(d_e: f64, e: usize) -> f64 {
    d_e * (e as f64 + 2.0) + e as f64 + 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_point_of_square() {
        // Unit square corners in the plane: sums 2, 2, 2√2.
        let p = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let d = |i: usize, j: usize| ((p[i][0] - p[j][0]) as f64).hypot(p[i][1] - p[j][1]);
        assert!((four_point(d) - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn qi_upper_arithmetic() {
        assert_eq!(qi_upper(3.0, 2), 16.0);
    }
}
