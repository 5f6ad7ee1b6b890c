//! Curtains, half-space classification, crossing and meeting tests, chains.
//!
//! A curtain is the preimage of a unit pole `[r-½, r+½]` of a base geodesic under
//! closest-point projection. Membership is always derived from the projection;
//! curtains are never materialised as point sets.

use std::sync::Arc;

use num_complex::Complex64 as C;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::geom::hyperbolic::{HypGeo, Ideal};
use crate::geom::{Coords, Geodesic, Kind, ModelSpace, Path, Point, PROJ_TOL};
use crate::numeric::bisect_predicate;
use crate::rng::stream;

pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Minus,
    On,
    Plus,
}

#[derive(Clone, Debug)]
pub struct Curtain {
    space: ModelSpace,
    base: Arc<Geodesic>,
    r: f64,
    tol: f64,
}

impl Curtain {
    /// Curtain dual to `base` at pole centre `r`.
    pub fn new(space: &ModelSpace, base: Arc<Geodesic>, r: f64) -> Result<Self> {
        if base.space() != space.id() {
            return Err(Error::MixedSpaces);
        }
        let (lo, hi, len) = (r - 0.5, r + 0.5, base.length());
        if !(lo > 0.0 && hi < len) {
            return Err(Error::PoleOutside { lo, hi, len });
        }
        Ok(Curtain { space: space.clone(), base, r, tol: DEFAULT_TOL })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn base(&self) -> &Arc<Geodesic> {
        &self.base
    }

    pub fn center(&self) -> f64 {
        self.r
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn pole(&self) -> (f64, f64) {
        (self.r - 0.5, self.r + 0.5)
    }

    /// The pole's midpoint on the base.
    pub fn center_point(&self) -> Point {
        self.base.eval(self.r)
    }

    /// Projection parameter of `p` on the base.
    pub fn param(&self, p: &Point) -> Result<f64> {
        Ok(self.space.project(p, &self.base, PROJ_TOL)?.t)
    }

    pub fn classify(&self, t: f64) -> Side {
        if t < self.r - 0.5 - self.tol {
            Side::Minus
        } else if t > self.r + 0.5 + self.tol {
            Side::Plus
        } else {
            Side::On
        }
    }

    pub fn side(&self, p: &Point) -> Result<Side> {
        Ok(self.classify(self.param(p)?))
    }

    pub fn same_base(&self, other: &Curtain) -> bool {
        Arc::ptr_eq(&self.base, &other.base) || self.base.id() == other.base.id()
    }
}

/// Sampling effort for the fibre/random crossing search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleBudget {
    pub fibers: usize,
    pub per_fiber: usize,
    pub random: usize,
    pub seed: u64,
}

impl Default for SampleBudget {
    fn default() -> Self {
        SampleBudget { fibers: 9, per_fiber: 32, random: 200, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub enum Crossing {
    /// Points of `k` on both strict sides of `h`.
    Yes { minus: Point, plus: Point },
    /// No witness found; `exact` is set when non-crossing is proved.
    NoEvidence { exact: bool },
}

impl Crossing {
    pub fn is_yes(&self) -> bool {
        matches!(self, Crossing::Yes { .. })
    }
}

#[derive(Clone, Debug)]
pub enum Meeting {
    /// The curtains meet; the witness is absent only when an exact range
    /// test decided the question but the point search failed.
    Yes(Option<Point>),
    /// Proved disjoint.
    Disjoint,
    NoEvidence,
}

impl Meeting {
    pub fn is_yes(&self) -> bool {
        matches!(self, Meeting::Yes(_))
    }
}

fn check_pair(h: &Curtain, k: &Curtain) -> Result<()> {
    if h.space.id() != k.space.id() {
        Err(Error::MixedSpaces)
    } else {
        Ok(())
    }
}

/// Range of `h`'s projection parameter over the curtain `k`, when it can be
/// computed exactly, together with points of `k` realising values near the ends.
struct Range {
    lo: f64,
    hi: f64,
    /// Exact range known; witnesses may still need a search.
    lo_pt: Option<Point>,
    hi_pt: Option<Point>,
}

/// Does `k` contain points on both strict sides of `h`?
pub fn crosses(h: &Curtain, k: &Curtain, budget: &SampleBudget) -> Result<Crossing> {
    check_pair(h, k)?;
    if h.same_base(k) {
        return Ok(Crossing::NoEvidence { exact: true });
    }
    if let Some(range) = exact_range(h, k)? {
        let (a, b) = (h.r - 0.5 - h.tol, h.r + 0.5 + h.tol);
        if !(range.lo < a && range.hi > b) {
            return Ok(Crossing::NoEvidence { exact: true });
        }
        if let (Some(m), Some(p)) = (range.lo_pt, range.hi_pt) {
            if k.side(&m)? == Side::On && k.side(&p)? == Side::On && h.side(&m)? == Side::Minus && h.side(&p)? == Side::Plus {
                return Ok(Crossing::Yes { minus: m, plus: p });
            }
        }
    }
    let pts = sample_curtain(k, budget)?;
    let mut minus = None;
    let mut plus = None;
    for p in pts {
        match h.side(&p)? {
            Side::Minus if minus.is_none() => minus = Some(p),
            Side::Plus if plus.is_none() => plus = Some(p),
            _ => {}
        }
        if minus.is_some() && plus.is_some() {
            break;
        }
    }
    Ok(match (minus, plus) {
        (Some(minus), Some(plus)) => Crossing::Yes { minus, plus },
        _ => Crossing::NoEvidence { exact: false },
    })
}

/// Crossing in both directions, as required for grids.
pub fn crosses_both(h: &Curtain, k: &Curtain, budget: &SampleBudget) -> Result<bool> {
    Ok(crosses(h, k, budget)?.is_yes() && crosses(k, h, budget)?.is_yes())
}

/// Do the (closed) curtains share a point?
pub fn meets(h: &Curtain, k: &Curtain, budget: &SampleBudget) -> Result<Meeting> {
    check_pair(h, k)?;
    if h.same_base(k) {
        if (h.r - k.r).abs() > 1.0 {
            return Ok(Meeting::Disjoint);
        }
        return Ok(Meeting::Yes(Some(h.base.eval(0.5 * (h.r + k.r)))));
    }
    if let Some(range) = exact_range(h, k)? {
        let (a, b) = (h.r - 0.5, h.r + 0.5);
        if range.hi < a || range.lo > b {
            return Ok(Meeting::Disjoint);
        }
        return Ok(Meeting::Yes(meet_witness(h, k, &range)?));
    }
    let pts = sample_curtain(k, budget)?;
    let mut minus = None;
    let mut plus = None;
    for p in pts {
        match h.side(&p)? {
            Side::On => return Ok(Meeting::Yes(Some(p))),
            Side::Minus if minus.is_none() => minus = Some(p),
            Side::Plus if plus.is_none() => plus = Some(p),
            _ => {}
        }
    }
    // k is path connected through its pole, and h separates its two sides.
    if let (Some(m), Some(p)) = (minus, plus) {
        if let Some(w) = bridge(h, k, &m, &p)? {
            return Ok(Meeting::Yes(Some(w)));
        }
    }
    for p in sample_curtain(h, budget)? {
        if k.side(&p)? == Side::On {
            return Ok(Meeting::Yes(Some(p)));
        }
    }
    Ok(Meeting::NoEvidence)
}

/// Exact meeting test without witness search; `None` when only sampling
/// could decide.
pub fn meets_exact(h: &Curtain, k: &Curtain) -> Result<Option<bool>> {
    check_pair(h, k)?;
    if h.same_base(k) {
        return Ok(Some((h.r - k.r).abs() <= 1.0));
    }
    let range = match (k.space.kind(), h.base.path(), k.base.path()) {
        (Kind::Hyperbolic, Path::Hyp(gh), Path::Hyp(gk)) => Some(hyp_range(k, gh, gk, false)),
        _ => exact_range(h, k)?,
    };
    Ok(range.map(|r| !(r.hi < h.r - 0.5 || r.lo > h.r + 0.5)))
}

/// Walk `m → π_P(m) → π_P(p) → p` inside `k` and bisect for a point on `h`.
fn bridge(h: &Curtain, k: &Curtain, m: &Point, p: &Point) -> Result<Option<Point>> {
    let (lo, hi) = k.pole();
    let pm = k.base.eval(k.param(m)?.clamp(lo, hi));
    let pp = k.base.eval(k.param(p)?.clamp(lo, hi));
    let stops = [m.clone(), pm, pp, p.clone()];
    for w in stops.windows(2) {
        let g = k.space.geodesic(&w[0], &w[1])?;
        let (s0, s1) = (h.side(g.start())?, h.side(g.end())?);
        if s0 == Side::On {
            return Ok(Some(g.start().clone()));
        }
        if s1 == Side::On {
            return Ok(Some(g.end().clone()));
        }
        if s0 != s1 {
            let t = bisect_predicate(|t| h.side(&g.eval(t)).map(|s| s != s0).unwrap_or(true), 0.0, g.length(), 1e-10);
            for q in [g.eval(t), g.eval((t + 1e-9).min(g.length()))] {
                if h.side(&q)? == Side::On {
                    return Ok(Some(q));
                }
            }
        }
    }
    Ok(None)
}

fn meet_witness(h: &Curtain, k: &Curtain, range: &Range) -> Result<Option<Point>> {
    let (Some(m), Some(p)) = (&range.lo_pt, &range.hi_pt) else { return Ok(None) };
    for q in [m, p] {
        if h.side(q)? == Side::On && k.side(q)? == Side::On {
            return Ok(Some(q.clone()));
        }
    }
    if k.side(m)? == Side::On && k.side(p)? == Side::On {
        if let Some(w) = bridge(h, k, m, p)? {
            if k.side(&w)? == Side::On {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

fn exact_range(h: &Curtain, k: &Curtain) -> Result<Option<Range>> {
    match (k.space.kind(), h.base.path(), k.base.path()) {
        (Kind::Plane, Path::Line { a: ah, u: uh }, Path::Line { a: ak, u: uk }) => Ok(Some(plane_range(h, k, *ah, *uh, *ak, *uk))),
        (Kind::Hyperbolic, Path::Hyp(gh), Path::Hyp(gk)) => Ok(Some(hyp_range(k, gh, gk, true))),
        (Kind::Tree(_), _, _) => tree_range(h, k).map(Some),
        _ => Ok(None),
    }
}

fn xy_point(space: &ModelSpace, p: [f64; 2]) -> Point {
    Point { space: space.id(), coords: Coords::Xy(p) }
}

fn plane_range(h: &Curtain, k: &Curtain, ah: [f64; 2], uh: [f64; 2], ak: [f64; 2], uk: [f64; 2]) -> Range {
    let nk = [-uk[1], uk[0]];
    let c = [ak[0] + k.r * uk[0], ak[1] + k.r * uk[1]];
    let hp = |z: [f64; 2]| (z[0] - ah[0]) * uh[0] + (z[1] - ah[1]) * uh[1];
    let slope = nk[0] * uh[0] + nk[1] * uh[1];
    let sp = &k.space;
    if slope.abs() > 1e-12 {
        let at = |target: f64| {
            let s = (target - hp(c)) / slope;
            xy_point(sp, [c[0] + s * nk[0], c[1] + s * nk[1]])
        };
        Range { lo: f64::NEG_INFINITY, hi: f64::INFINITY, lo_pt: Some(at(h.r - 1.0)), hi_pt: Some(at(h.r + 1.0)) }
    } else {
        let du = uk[0] * uh[0] + uk[1] * uh[1];
        let p0 = [c[0] - 0.5 * uk[0], c[1] - 0.5 * uk[1]];
        let p1 = [c[0] + 0.5 * uk[0], c[1] + 0.5 * uk[1]];
        let (a, b) = if du > 0.0 { (p0, p1) } else { (p1, p0) };
        Range { lo: hp(a), hi: hp(b), lo_pt: Some(xy_point(sp, a)), hi_pt: Some(xy_point(sp, b)) }
    }
}

fn ideal_abs(x: Ideal) -> f64 {
    match x {
        Ideal::Real(v) => v.abs(),
        Ideal::Inf => f64::INFINITY,
    }
}

fn hyp_range(k: &Curtain, gh: &HypGeo, gk: &HypGeo, witnesses: bool) -> Range {
    let a1 = gk.s0 + k.r - 0.5;
    let a2 = gk.s0 + k.r + 0.5;
    let map = |x: f64| gh.ideal_to_frame(gk.ideal_from_frame(Ideal::Real(x)));
    let zero = gk.ideal_to_frame(gh.ideal_from_frame(Ideal::Real(0.0)));
    let pole = gk.ideal_to_frame(gh.ideal_from_frame(Ideal::Inf));
    let (e1, e2) = (a1.exp(), a2.exp());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut cands: Vec<f64> = Vec::new();
    for (l, r) in [(e1, e2), (-e2, -e1)] {
        let inside = |x: Ideal| matches!(x, Ideal::Real(v) if v >= l && v <= r);
        let (vl, vr) = (ideal_abs(map(l)), ideal_abs(map(r)));
        let inf = if inside(zero) { 0.0 } else { vl.min(vr) };
        let sup = if inside(pole) { f64::INFINITY } else { vl.max(vr) };
        lo = lo.min(inf);
        hi = hi.max(sup);
        let pull = 1e-9 * (r - l);
        cands.push(l + pull);
        cands.push(r - pull);
        for x in [zero, pole] {
            if let Ideal::Real(v) = x {
                if v > l && v < r {
                    for f in [1e-3, 1e-6, 1e-9] {
                        let d = f * (r - l);
                        for y in [v - d, v, v + d] {
                            if y > l && y < r {
                                cands.push(y);
                            }
                        }
                    }
                }
            }
        }
        for j in 1..16 {
            cands.push(l + (r - l) * j as f64 / 16.0);
        }
    }
    let to_param = |v: f64| if v == 0.0 { f64::NEG_INFINITY } else { v.ln() - gh.s0 };
    let (plo, phi) = (to_param(lo), to_param(hi));
    if !witnesses {
        return Range { lo: plo, hi: phi, lo_pt: None, hi_pt: None };
    }
    // Witness points just inside the ideal arcs.
    let mut best_lo: Option<(f64, Point)> = None;
    let mut best_hi: Option<(f64, Point)> = None;
    for &x in &cands {
        if x == 0.0 || !x.is_finite() {
            continue;
        }
        for th in [1e-2f64, 1e-4, 1e-6, 1e-8] {
            let u = if x > 0.0 { C::new(th.cos(), th.sin()) } else { C::new(-th.cos(), th.sin()) };
            let z = gk.from_frame(x.abs().ln(), u);
            if !(z[1] > 0.0 && z[0].is_finite() && z[1].is_finite()) {
                continue;
            }
            let t = gh.param(z);
            let p = xy_point(&k.space, z);
            if best_lo.as_ref().map_or(true, |(v, _)| t < *v) {
                best_lo = Some((t, p.clone()));
            }
            if best_hi.as_ref().map_or(true, |(v, _)| t > *v) {
                best_hi = Some((t, p));
            }
        }
    }
    Range { lo: plo, hi: phi, lo_pt: best_lo.map(|x| x.1), hi_pt: best_hi.map(|x| x.1) }
}

fn tree_range(h: &Curtain, k: &Curtain) -> Result<Range> {
    let tree = k.space.as_tree().unwrap();
    let (plo, phi) = k.pole();
    let mut cands = vec![k.base.eval(plo), k.base.eval(phi)];
    for v in 0..tree.n_vertices() {
        let p = k.space.vertex(v)?;
        let t = k.param(&p)?;
        if t >= plo && t <= phi {
            cands.push(p);
        }
    }
    for p in [h.base.start(), h.base.end()] {
        let t = k.param(p)?;
        if t >= plo && t <= phi {
            cands.push(p.clone());
        }
    }
    let mut lo: Option<(f64, Point)> = None;
    let mut hi: Option<(f64, Point)> = None;
    for p in cands {
        let t = h.param(&p)?;
        if lo.as_ref().map_or(true, |(v, _)| t < *v) {
            lo = Some((t, p.clone()));
        }
        if hi.as_ref().map_or(true, |(v, _)| t > *v) {
            hi = Some((t, p));
        }
    }
    let (lo, hi) = (lo.unwrap(), hi.unwrap());
    Ok(Range { lo: lo.0, hi: hi.0, lo_pt: Some(lo.1), hi_pt: Some(hi.1) })
}

/// Candidate points of `k`, verified to lie on it: fibres through the pole
/// plus random points near its centre.
pub fn sample_curtain(k: &Curtain, budget: &SampleBudget) -> Result<Vec<Point>> {
    let sp = &k.space;
    let mut out = Vec::new();
    let (plo, phi) = k.pole();
    let reach = match sp.kind() {
        Kind::Polygon(p) => p.scale(),
        Kind::Strip(s) => s.polygon.scale(),
        Kind::Hyperbolic => 12.0,
        _ => 50.0,
    };
    if sp.is_planar_chart() {
        for j in 0..budget.fibers.max(1) {
            let f = if budget.fibers <= 1 { 0.5 } else { j as f64 / (budget.fibers - 1) as f64 };
            let t = plo + f * (phi - plo);
            let b = k.base.eval(t);
            let tan = k.base.chart_tangent(t).unwrap_or([1.0, 0.0]);
            let normal = tan[1].atan2(tan[0]) + std::f64::consts::FRAC_PI_2;
            for dir in [normal, normal + std::f64::consts::PI] {
                let e = sp.shoot(&b, dir, reach)?;
                let g = sp.geodesic(&b, &e)?;
                let n = budget.per_fiber.max(2);
                for i in 1..=n {
                    let s = g.length() * i as f64 / n as f64;
                    out.push(g.eval(s));
                }
                for m in 1..12 {
                    out.push(g.eval(g.length() * 0.5f64.powi(m as i32 + 4)));
                }
            }
        }
    }
    let mut rng = stream(budget.seed, k.base.id() ^ k.r.to_bits());
    let center = k.center_point();
    for i in 0..budget.random {
        let radius = reach * (0.05 + 0.95 * (i as f64 / budget.random.max(1) as f64));
        let p = if rng.gen_bool(0.5) {
            sp.sample_anywhere(&mut rng).map(Ok).unwrap_or_else(|| sp.sample_near(&center, radius, &mut rng))?
        } else {
            sp.sample_near(&center, radius, &mut rng)?
        };
        out.push(p);
    }
    let mut kept = Vec::with_capacity(out.len());
    for p in out {
        if k.side(&p)? == Side::On {
            kept.push(p);
        }
    }
    Ok(kept)
}

/// Bisection for a parameter where `g` meets `h`, if `g`'s endpoints lie
/// on opposite strict sides of `h`.
pub fn crossing_param(h: &Curtain, g: &Geodesic) -> Result<Option<f64>> {
    let s0 = h.side(g.start())?;
    let s1 = h.side(g.end())?;
    if s0 == Side::On {
        return Ok(Some(0.0));
    }
    if s0 == s1 {
        return Ok(None);
    }
    let t = bisect_predicate(|t| h.side(&g.eval(t)).map(|s| s != s0).unwrap_or(true), 0.0, g.length(), 1e-10);
    let hi = (t + 1e-10).min(g.length());
    for c in [t, hi] {
        if h.side(&g.eval(c))? == Side::On {
            return Ok(Some(c));
        }
    }
    Ok(Some(t))
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChainKind {
    CommonBase(u64),
    General,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// Pole centres along the common base; consecutive gaps exceed 1.
    PoleGaps(Vec<f64>),
    /// Pairwise disjointness and ordering checked; `exact` when every pair was
    /// decided by an exact predicate rather than sampling.
    Checked { pairs: usize, exact: bool },
}

#[derive(Clone, Debug)]
pub struct Chain {
    pub curtains: Vec<Curtain>,
    pub kind: ChainKind,
    pub certificate: Certificate,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.curtains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curtains.is_empty()
    }

    pub fn empty() -> Self {
        Chain { curtains: vec![], kind: ChainKind::General, certificate: Certificate::Checked { pairs: 0, exact: true } }
    }
}

const DUAL_SNAP: f64 = 1e-9;

/// `⌈d⌉ − 1` curtains dual to `g` separating `g(x)` from `g(y)`,
/// with evenly spaced gaps. Lengths within `1e-9` above an integer count as
/// that integer, since the gaps would vanish in floating point.
pub fn dual_chain(space: &ModelSpace, g: &Arc<Geodesic>, x_param: f64, y_param: f64) -> Result<Chain> {
    let (lo, hi) = (x_param.min(y_param), x_param.max(y_param));
    let d = hi - lo;
    if d < 1.0 {
        return Err(Error::TooShort(d));
    }
    let n = (d - DUAL_SNAP).ceil().max(1.0) as usize - 1;
    let gap = (d - n as f64) / (n as f64 + 1.0);
    let mut centers: Vec<f64> = (1..=n).map(|k| lo + (k - 1) as f64 * (1.0 + gap) + gap + 0.5).collect();
    if x_param > y_param {
        centers.reverse();
    }
    let curtains = centers.iter().map(|&c| Curtain::new(space, g.clone(), c)).collect::<Result<Vec<_>>>()?;
    Ok(Chain { curtains, kind: ChainKind::CommonBase(g.id()), certificate: Certificate::PoleGaps(centers) })
}

#[derive(Clone, Debug)]
pub enum ChainCheck {
    Valid(Chain),
    Invalid(String),
}

impl ChainCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, ChainCheck::Valid(_))
    }
}

pub fn is_chain(curtains: &[Curtain], budget: &SampleBudget) -> Result<ChainCheck> {
    if let Some(first) = curtains.first() {
        if curtains.iter().any(|c| c.space.id() != first.space.id()) {
            return Err(Error::MixedSpaces);
        }
    }
    if curtains.len() < 2 {
        let kind = curtains.first().map_or(ChainKind::General, |c| ChainKind::CommonBase(c.base.id()));
        let cert = Certificate::PoleGaps(curtains.iter().map(|c| c.r).collect());
        return Ok(ChainCheck::Valid(Chain { curtains: curtains.to_vec(), kind, certificate: cert }));
    }
    if curtains.iter().all(|c| c.same_base(&curtains[0])) {
        let rs: Vec<f64> = curtains.iter().map(|c| c.r).collect();
        let up = rs[1] > rs[0];
        for (i, w) in rs.windows(2).enumerate() {
            let gap = if up { w[1] - w[0] } else { w[0] - w[1] };
            if !(gap > 1.0) {
                return Ok(ChainCheck::Invalid(format!("pole gap {gap} between curtains {i} and {} is not > 1", i + 1)));
            }
        }
        return Ok(ChainCheck::Valid(Chain {
            curtains: curtains.to_vec(),
            kind: ChainKind::CommonBase(curtains[0].base.id()),
            certificate: Certificate::PoleGaps(rs),
        }));
    }
    let mut exact = true;
    let mut pairs = 0;
    for i in 0..curtains.len() {
        for j in i + 1..curtains.len() {
            pairs += 1;
            match meets(&curtains[i], &curtains[j], budget)? {
                Meeting::Yes(_) => return Ok(ChainCheck::Invalid(format!("curtains {i} and {j} meet"))),
                Meeting::Disjoint => {}
                Meeting::NoEvidence => exact = false,
            }
        }
    }
    for i in 1..curtains.len() - 1 {
        let a = curtains[i].side(&curtains[i - 1].center_point())?;
        let b = curtains[i].side(&curtains[i + 1].center_point())?;
        if a == Side::On || b == Side::On || a == b {
            return Ok(ChainCheck::Invalid(format!("curtain {i} does not separate its neighbours")));
        }
    }
    Ok(ChainCheck::Valid(Chain { curtains: curtains.to_vec(), kind: ChainKind::General, certificate: Certificate::Checked { pairs, exact } }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x_axis(s: &ModelSpace, len: f64) -> Arc<Geodesic> {
        Arc::new(s.geodesic(&s.point_xy(-len, 0.0).unwrap(), &s.point_xy(len, 0.0).unwrap()).unwrap())
    }

    fn y_axis(s: &ModelSpace, len: f64) -> Arc<Geodesic> {
        Arc::new(s.geodesic(&s.point_xy(0.0, -len).unwrap(), &s.point_xy(0.0, len).unwrap()).unwrap())
    }

    #[test]
    fn plane_sides() {
        let s = ModelSpace::plane();
        let base = Arc::new(s.geodesic(&s.point_xy(0.0, 0.0).unwrap(), &s.point_xy(10.0, 0.0).unwrap()).unwrap());
        let h = Curtain::new(&s, base, 5.0).unwrap();
        assert_eq!(h.side(&s.point_xy(5.2, 7.0).unwrap()).unwrap(), Side::On);
        assert_eq!(h.side(&s.point_xy(3.0, 1.0).unwrap()).unwrap(), Side::Minus);
        assert_eq!(h.side(&s.point_xy(8.0, -3.0).unwrap()).unwrap(), Side::Plus);
    }

    #[test]
    fn pole_must_be_interior() {
        let s = ModelSpace::plane();
        let base = Arc::new(s.geodesic(&s.point_xy(0.0, 0.0).unwrap(), &s.point_xy(2.0, 0.0).unwrap()).unwrap());
        assert!(matches!(Curtain::new(&s, base.clone(), 0.5), Err(Error::PoleOutside { .. })));
        assert!(Curtain::new(&s, base, 1.0).is_ok());
    }

    #[test]
    fn dual_chain_even_gaps() {
        let s = ModelSpace::plane();
        let base = Arc::new(s.geodesic(&s.point_xy(0.0, 0.0).unwrap(), &s.point_xy(5.0, 0.0).unwrap()).unwrap());
        let c = dual_chain(&s, &base, 0.0, 5.0).unwrap();
        let rs: Vec<f64> = c.curtains.iter().map(|h| h.center()).collect();
        for (a, b) in rs.iter().zip([0.7, 1.9, 3.1, 4.3]) {
            assert!((a - b).abs() < 1e-12, "{rs:?}");
        }
        assert_eq!(dual_chain(&s, &base, 0.0, 1.0).unwrap().len(), 0);
        assert!(matches!(dual_chain(&s, &base, 0.0, 0.5), Err(Error::TooShort(_))));
    }

    #[test]
    fn plane_axes_cross() {
        let s = ModelSpace::plane();
        let h = Curtain::new(&s, x_axis(&s, 10.0), 10.0).unwrap();
        let k = Curtain::new(&s, y_axis(&s, 10.0), 10.0).unwrap();
        assert!(crosses(&h, &k, &SampleBudget::default()).unwrap().is_yes());
        assert!(crosses(&k, &h, &SampleBudget::default()).unwrap().is_yes());
        let far = Curtain::new(&s, h.base().clone(), 15.0).unwrap();
        assert!(matches!(crosses(&h, &far, &SampleBudget::default()).unwrap(), Crossing::NoEvidence { exact: true }));
    }

    #[test]
    fn closed_poles_touching_is_invalid() {
        let s = ModelSpace::plane();
        let b = x_axis(&s, 10.0);
        let cs = vec![Curtain::new(&s, b.clone(), 1.0).unwrap(), Curtain::new(&s, b, 2.0).unwrap()];
        assert!(!is_chain(&cs, &SampleBudget::default()).unwrap().is_valid());
    }

    #[test]
    fn tripod_leg_projects_to_branch() {
        let s = ModelSpace::tripod(10.0).unwrap();
        let a = s.vertex(1).unwrap();
        let b = s.vertex(2).unwrap();
        let g = Arc::new(s.geodesic(&a, &b).unwrap());
        let h = Curtain::new(&s, g.clone(), 10.0).unwrap();
        let c = s.point_tree(2, 4.0).unwrap();
        assert_eq!(h.side(&c).unwrap(), Side::On);
        let pr = s.project(&c, &g, PROJ_TOL).unwrap();
        assert!((pr.t - 10.0).abs() < 1e-12 && (pr.dist - 4.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_param_bisection() {
        let s = ModelSpace::hyperbolic();
        let base = Arc::new(s.geodesic(&s.point_xy(0.0, 1.0).unwrap(), &s.point_xy(0.0, 1e3).unwrap()).unwrap());
        let h = Curtain::new(&s, base, 3.0).unwrap();
        let g = s.geodesic(&s.point_xy(-2.0, 0.5).unwrap(), &s.point_xy(3.0, 200.0).unwrap()).unwrap();
        let t = crossing_param(&h, &g).unwrap().unwrap();
        assert_eq!(h.side(&g.eval(t)).unwrap(), Side::On);
    }

    #[test]
    fn hyperbolic_exact_crossing_has_witnesses() {
        let s = ModelSpace::hyperbolic();
        let up = Arc::new(s.geodesic(&s.point_xy(0.0, (-10f64).exp()).unwrap(), &s.point_xy(0.0, 10f64.exp()).unwrap()).unwrap());
        let h = Curtain::new(&s, up, 10.0).unwrap();
        // The unit circle is perpendicular to the axis at (0, 1).
        let circ = Arc::new(s.geodesic(&s.point_xy(-(0.9f64).cos(), 0.9f64.sin()).unwrap(), &s.point_xy(0.9f64.cos(), 0.9f64.sin()).unwrap()).unwrap());
        let mid = circ.length() / 2.0;
        let k = Curtain::new(&s, circ, mid).unwrap();
        let c = crosses(&h, &k, &SampleBudget::default()).unwrap();
        assert!(c.is_yes(), "{c:?}");
        assert!(crosses(&k, &h, &SampleBudget::default()).unwrap().is_yes());
        // A curtain around x = 10 at height 1 sees the axis parameter only in [12.1, 12.5].
        let v = Arc::new(s.geodesic(&s.point_xy(10.0, (-3f64).exp()).unwrap(), &s.point_xy(10.0, 3f64.exp()).unwrap()).unwrap());
        let k = Curtain::new(&s, v, 3.0).unwrap();
        let b = SampleBudget::default();
        assert!(matches!(meets(&h, &k, &b).unwrap(), Meeting::Disjoint));
        let near = Curtain::new(&s, h.base().clone(), 12.3).unwrap();
        assert!(meets(&near, &k, &b).unwrap().is_yes());
        assert!(matches!(crosses(&near, &k, &b).unwrap(), Crossing::NoEvidence { exact: true }));
    }
}
