//! Sublinear functions, contraction and slimness estimates, κ-chains and the
//! persistent-shadow fit.
//!
//! Every verdict here is a fitted constant plus a count of violations; both
//! sides of each equivalence are sampled estimates.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng as _;

use crate::curtains::{Certificate, Chain, ChainKind, Curtain};
use crate::error::{Error, Result};
use crate::geom::{Geodesic, Kind, ModelSpace, Point, PROJ_TOL};
use crate::numeric::{bisect_root, golden_min};
use crate::rng::{stream, Rng};
use crate::separation::{dhat_from_profile, lchain_profile, SeparationOracle};

/// Concave, nondecreasing `κ ≥ 1` with `κ(t)/t → 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SublinearFn {
    /// `t ↦ c`, `c ≥ 1`.
    Const(f64),
    /// `t ↦ (1 + ln(1+t))^p`, `p ≥ 1`.
    Log(f64),
    /// `t ↦ (1+t)^a`, `0 < a < 1`.
    Power(f64),
}

impl SublinearFn {
    pub fn new_const(c: f64) -> Result<Self> {
        if c >= 1.0 && c.is_finite() {
            Ok(SublinearFn::Const(c))
        } else {
            Err(Error::InvalidArgument(format!("const κ needs c ≥ 1, got {c}")))
        }
    }

    pub fn new_log(p: f64) -> Result<Self> {
        if p >= 1.0 && p.is_finite() {
            Ok(SublinearFn::Log(p))
        } else {
            Err(Error::InvalidArgument(format!("log κ needs p ≥ 1, got {p}")))
        }
    }

    pub fn new_power(a: f64) -> Result<Self> {
        if a > 0.0 && a < 1.0 {
            Ok(SublinearFn::Power(a))
        } else {
            Err(Error::InvalidArgument(format!("power κ needs 0 < a < 1, got {a}")))
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match *self {
            SublinearFn::Const(c) => c,
            SublinearFn::Log(p) => (1.0 + t.ln_1p()).powf(p),
            SublinearFn::Power(a) => (1.0 + t).powf(a),
        }
    }

    /// `κ(t)^k`.
    pub fn eval_pow(&self, t: f64, k: i32) -> f64 {
        self.eval(t).powi(k)
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match *self {
            SublinearFn::Const(_) => 0.0,
            SublinearFn::Log(p) => p * (1.0 + t.ln_1p()).powf(p - 1.0) / (1.0 + t),
            SublinearFn::Power(a) => a * (1.0 + t).powf(a - 1.0),
        }
    }

    /// Whether `κ⁴` is still sublinear.
    pub fn kappa4_sublinear(&self) -> bool {
        match *self {
            SublinearFn::Const(_) | SublinearFn::Log(_) => true,
            SublinearFn::Power(a) => a < 0.25,
        }
    }
}

impl fmt::Display for SublinearFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SublinearFn::Const(c) => write!(f, "const:{c}"),
            SublinearFn::Log(p) => write!(f, "log:{p}"),
            SublinearFn::Power(a) => write!(f, "power:{a}"),
        }
    }
}

impl FromStr for SublinearFn {
    type Err = Error;

    /// `const:c`, `log:p`, `power:a`, or `sqrt`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "sqrt" {
            return Self::new_power(0.5);
        }
        let (fam, val) = s.split_once(':').ok_or_else(|| Error::InvalidArgument(format!("bad κ {s:?}")))?;
        let v: f64 = val.parse().map_err(|_| Error::InvalidArgument(format!("bad κ parameter {val:?}")))?;
        match fam {
            "const" => Self::new_const(v),
            "log" => Self::new_log(v),
            "power" => Self::new_power(v),
            _ => Err(Error::InvalidArgument(format!("unknown κ family {fam:?}"))),
        }
    }
}

/// Sampling effort for the Monte-Carlo estimators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MorseBudget {
    pub centers: usize,
    pub angles: usize,
    pub ball_points: usize,
    pub pairs: usize,
    pub seed: u64,
}

impl Default for MorseBudget {
    fn default() -> Self {
        MorseBudget { centers: 48, angles: 24, ball_points: 64, pairs: 200, seed: 0 }
    }
}

pub const THETAS: [f64; 3] = [0.5, 0.9, 0.99];

#[derive(Clone, Debug, PartialEq)]
pub struct BallSample {
    pub center: Point,
    pub radius: f64,
    pub dist_to_ray: f64,
    pub diameter: f64,
    pub kappa: f64,
}

#[derive(Clone, Debug)]
pub struct ContractionReport {
    pub d_est: f64,
    pub samples: Vec<BallSample>,
}

fn check_ray(b: &Geodesic, kappa: &SublinearFn, factor: f64) -> Result<()> {
    let need = factor * kappa.eval(0.0);
    if b.length() < need {
        return Err(Error::RayTooShort(format!("length {} < {need}", b.length())));
    }
    Ok(())
}

/// A point off `b` at roughly distance `s` from `b(t)`, with its true distance
/// to `b`, or `None` when the space leaves no room there.
fn off_ray(space: &ModelSpace, b: &Geodesic, t: f64, s: f64, rng: &mut Rng) -> Result<Option<(Point, f64)>> {
    let foot = b.eval(t);
    let p = if space.is_planar_chart() {
        let tan = b.chart_tangent(t).unwrap_or([1.0, 0.0]);
        let side = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let mut best = None;
        for sgn in [side, -side] {
            let ang = tan[1].atan2(tan[0]) + sgn * std::f64::consts::FRAC_PI_2;
            let q = space.shoot(&foot, ang, s)?;
            let d = space.project(&q, b, PROJ_TOL)?.dist;
            if d > 1e-6 {
                best = Some((q, d));
                break;
            }
        }
        return Ok(best);
    } else {
        space.sample_near(&foot, s, rng)?
    };
    let d = space.project(&p, b, PROJ_TOL)?.dist;
    Ok((d > 1e-6).then_some((p, d)))
}

/// Projection parameters of points on the boundary of the ball, refined near
/// the extremes.
fn ball_projection_range(space: &ModelSpace, b: &Geodesic, c: &Point, rho: f64, budget: &MorseBudget, rng: &mut Rng) -> Result<(f64, f64)> {
    let param = |p: &Point| space.project(p, b, PROJ_TOL).map(|x| x.t);
    let mut lo = param(c)?;
    let mut hi = lo;
    if space.is_planar_chart() {
        let n = budget.angles.max(4);
        let step = std::f64::consts::TAU / n as f64;
        let mut ts = Vec::with_capacity(n);
        for i in 0..n {
            let q = space.shoot(c, i as f64 * step, rho)?;
            ts.push(param(&q)?);
        }
        let imax = (0..n).max_by(|&a, &b| ts[a].total_cmp(&ts[b])).unwrap();
        let imin = (0..n).min_by(|&a, &b| ts[a].total_cmp(&ts[b])).unwrap();
        let at = |th: f64| space.shoot(c, th, rho).and_then(|q| param(&q)).unwrap_or(f64::NAN);
        let (_, tmax) = golden_min(|th| -at(th), (imax as f64 - 1.0) * step, (imax as f64 + 1.0) * step, 1e-7);
        let (_, tmin) = golden_min(at, (imin as f64 - 1.0) * step, (imin as f64 + 1.0) * step, 1e-7);
        for t in ts.into_iter().chain([-tmax, tmin]) {
            if t.is_finite() {
                lo = lo.min(t);
                hi = hi.max(t);
            }
        }
    } else {
        for _ in 0..budget.ball_points {
            let q = space.sample_near(c, rho, rng)?;
            let t = param(&q)?;
            lo = lo.min(t);
            hi = hi.max(t);
        }
        if let Kind::Tree(tree) = space.kind() {
            for v in 0..tree.n_vertices() {
                let q = space.vertex(v)?;
                if space.distance(c, &q)? <= rho {
                    let t = param(&q)?;
                    lo = lo.min(t);
                    hi = hi.max(t);
                }
            }
        }
    }
    Ok((lo, hi))
}

/// Lower bound for the contraction constant of `b` relative to `κ`: the
/// largest ratio `diam π_b(B) / κ(‖x‖)` over sampled balls `B` centred at `x`
/// and disjoint from `b`.
pub fn estimate_contraction(space: &ModelSpace, b: &Geodesic, kappa: &SublinearFn, budget: &MorseBudget) -> Result<ContractionReport> {
    check_ray(b, kappa, 100.0)?;
    let mut rng = stream(budget.seed, 0xc0);
    let len = b.length();
    let o = b.start().clone();
    let window = 0.5 * len;
    let mut samples = Vec::new();
    for i in 0..budget.centers {
        let t = len * rng.gen::<f64>();
        let s = (0.5f64.ln() + (window / 0.5).ln() * (i as f64 + rng.gen::<f64>()) / budget.centers as f64).exp();
        let Some((c, d)) = off_ray(space, b, t, s, &mut rng)? else { continue };
        let k = kappa.eval(space.distance(&o, &c)?);
        for th in THETAS {
            let rho = th * d;
            if !(rho + 1e-9 < d) {
                continue;
            }
            let (lo, hi) = ball_projection_range(space, b, &c, rho, budget, &mut rng)?;
            samples.push(BallSample { center: c.clone(), radius: rho, dist_to_ray: d, diameter: hi - lo, kappa: k });
        }
    }
    let d_est = samples.iter().map(|s| s.diameter / s.kappa).fold(0.0, f64::max);
    Ok(ContractionReport { d_est, samples })
}

#[derive(Clone, Debug)]
pub struct SlimReport {
    pub c_est: f64,
    /// `d(π_b(x), [x, y]) / κ(π_b(x))` per sample.
    pub ratios: Vec<f64>,
    /// Samples whose ratio exceeds the threshold, when one was given.
    pub violations: usize,
    /// Contraction estimate on the same ray, for the equivalence cross-check.
    pub contraction: Option<f64>,
}

/// Sampled slimness constant of `b`: `max d(π_b(x), [x, y]) / κ(π_b(x))` over
/// points `x` off the ray and `y` on it, restricted to parameters `≤ t_max`.
pub fn kappa_slim_test(
    space: &ModelSpace,
    b: &Geodesic,
    kappa: &SublinearFn,
    budget: &MorseBudget,
    t_max: Option<f64>,
    threshold: Option<f64>,
) -> Result<SlimReport> {
    let mut rng = stream(budget.seed, 0x51);
    let len = t_max.unwrap_or(b.length()).min(b.length());
    let window = 0.5 * len.max(2.0);
    let mut ratios = Vec::new();
    for i in 0..budget.pairs {
        let t = len * rng.gen::<f64>();
        let s = (0.5f64.ln() + (window / 0.5).ln() * (i as f64 + rng.gen::<f64>()) / budget.pairs as f64).exp();
        let Some((x, _)) = off_ray(space, b, t, s, &mut rng)? else { continue };
        let pi = space.project(&x, b, PROJ_TOL)?;
        let p = b.eval(pi.t);
        let y = b.eval(len * rng.gen::<f64>());
        if y == x {
            continue;
        }
        let g = space.geodesic(&x, &y)?;
        let d = space.project(&p, &g, PROJ_TOL)?.dist;
        ratios.push(d / kappa.eval(pi.t));
    }
    let c_est = ratios.iter().copied().fold(0.0, f64::max);
    let violations = threshold.map_or(0, |th| ratios.iter().filter(|&&r| r > th).count());
    Ok(SlimReport { c_est, ratios, violations, contraction: None })
}

/// Separation evidence for one consecutive pair of a κ-chain.
#[derive(Clone, Debug, PartialEq)]
pub struct PairEvidence {
    pub i: usize,
    pub witness: Option<usize>,
    pub target: f64,
}

#[derive(Clone, Debug)]
pub struct KappaChain {
    pub chain: Chain,
    pub t: Vec<f64>,
    pub d: f64,
    /// Excursion constant `10D + 3`.
    pub c: f64,
    pub kappa: SublinearFn,
    pub evidence: Vec<PairEvidence>,
    pub pool_id: Option<u64>,
}

impl KappaChain {
    /// Violations of the spacing bound and of the separation target.
    pub fn check(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, w) in self.t.windows(2).enumerate() {
            let gap = w[1] - w[0];
            let want = 10.0 * self.d * self.kappa.eval(w[1]);
            if (gap - want).abs() > 1e-6 {
                out.push(format!("spacing {i}: {gap} vs 10Dκ = {want}"));
            }
            if gap > self.c * self.kappa.eval(w[1]) + 1e-6 {
                out.push(format!("spacing {i}: {gap} exceeds Cκ"));
            }
        }
        for e in &self.evidence {
            if let Some(n) = e.witness {
                if n as f64 > e.target {
                    out.push(format!("pair {}: witness chain of {n} exceeds {}", e.i, e.target));
                }
            }
        }
        out
    }

    /// One line per element: `i, t_i, witness cardinality, target bound`.
    pub fn records(&self) -> String {
        let mut s = format!("# kappa={} D={} C={} pool={}\n", self.kappa, self.d, self.c, self.pool_id.map_or("none".into(), |p| format!("{p:016x}")));
        s.push_str("i,t_i,witness,target\n");
        for (i, t) in self.t.iter().enumerate() {
            let ev = if i == 0 { None } else { self.evidence.get(i - 1) };
            let w = ev.and_then(|e| e.witness).map_or(String::new(), |n| n.to_string());
            let tg = ev.map_or(String::new(), |e| format!("{}", e.target));
            s.push_str(&format!("{i},{t},{w},{tg}\n"));
        }
        s
    }
}

/// Next chain parameter: the root of `s ↦ s − t − 10Dκ(s)` above `t`.
pub fn next_t(t: f64, kappa: &SublinearFn, d: f64) -> Result<f64> {
    let phi = |s: f64| s - t - 10.0 * d * kappa.eval(s);
    let lo = t + 10.0 * d * kappa.eval(t);
    let mut width = 10.0 * d * kappa.eval(lo).max(1.0);
    let mut hi = lo + width;
    let mut n = 0;
    while phi(hi) <= 0.0 {
        width *= 2.0;
        hi = lo + width;
        n += 1;
        if n > 200 || !hi.is_finite() {
            return Err(Error::NoRoot(format!("κ = {kappa}, t = {t}")));
        }
    }
    if phi(lo) >= 0.0 {
        return Ok(lo);
    }
    Ok(bisect_root(phi, lo, hi, 1e-15))
}

/// Curtains dual to `b` at `t_{i+1} = t_i + 10Dκ(t_{i+1})` starting from `t0`,
/// with separation evidence for each consecutive pair when an oracle is given.
pub fn build_kappa_chain(
    space: &ModelSpace,
    b: &Arc<Geodesic>,
    kappa: &SublinearFn,
    d: f64,
    t0: f64,
    oracle: Option<&dyn SeparationOracle>,
) -> Result<KappaChain> {
    if !(d > 0.0) {
        return Err(Error::InvalidArgument(format!("D must be positive, got {d}")));
    }
    let len = b.length();
    let mut t = vec![t0];
    loop {
        let nt = next_t(*t.last().unwrap(), kappa, d)?;
        if !(nt + 0.5 < len) {
            break;
        }
        t.push(nt);
    }
    if t0 - 0.5 <= 0.0 {
        t.remove(0);
    }
    if t.len() < 3 {
        return Err(Error::RayTooShort(format!("only {} chain elements fit in length {len}", t.len())));
    }
    let curtains = t.iter().map(|&r| Curtain::new(space, b.clone(), r)).collect::<Result<Vec<_>>>()?;
    let mut evidence = Vec::new();
    for i in 0..curtains.len() - 1 {
        let target = 10.0 * d * kappa.eval(t[i + 1]) + 3.0;
        let witness = match oracle {
            Some(o) => Some(o.witness(&curtains[i], &curtains[i + 1])?.0),
            None => None,
        };
        evidence.push(PairEvidence { i, witness, target });
    }
    let chain = Chain { curtains, kind: ChainKind::CommonBase(b.id()), certificate: Certificate::PoleGaps(t.clone()) };
    Ok(KappaChain { chain, t, d, c: 10.0 * d + 3.0, kappa: *kappa, evidence, pool_id: oracle.map(|o| o.pool_id()) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Confidence {
    Normal,
    /// Too few chain elements for the fit to mean much.
    LowConfidence,
}

#[derive(Clone, Debug)]
pub struct ExcursionReport {
    pub slim: SlimReport,
    pub excursion_c: f64,
    /// Fitted slim constant over the excursion constant.
    pub ratio: f64,
    pub confidence: Confidence,
}

/// Slimness of the ray underlying a κ-chain, compared with its excursion constant.
pub fn verify_excursion_implies_contracting(space: &ModelSpace, kc: &KappaChain, budget: &MorseBudget, multiple: f64) -> Result<ExcursionReport> {
    let base = kc.chain.curtains.first().ok_or(Error::EmptyPool)?.base().clone();
    let t_max = kc.t.last().copied().unwrap_or(base.length()) + 0.5;
    let slim = kappa_slim_test(space, &base, &kc.kappa, budget, Some(t_max), Some(multiple * kc.c))?;
    let confidence = if kc.t.len() <= 3 { Confidence::LowConfidence } else { Confidence::Normal };
    Ok(ExcursionReport { ratio: slim.c_est / kc.c, excursion_c: kc.c, slim, confidence })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShadowSample {
    pub s: f64,
    pub t: f64,
    pub dhat_lower: f64,
    /// `(t − s)/κ(t)^k − 1`; the fit needs `d̂ ≥ C·q`.
    pub q: f64,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct ShadowReport {
    pub c_fit: f64,
    pub kappa_power: i32,
    pub samples: Vec<ShadowSample>,
}

/// Largest `C` with `d̂_lower(b(s), b(t)) ≥ C(t−s)/κ(t)^k − C` on sampled pairs.
pub fn persistent_shadow_test(
    oracle: &dyn SeparationOracle,
    b: &Geodesic,
    kappa: &SublinearFn,
    kappa_power: i32,
    l_max: usize,
    pairs: &[(f64, f64)],
) -> Result<ShadowReport> {
    let space = oracle.space();
    if b.length() < 200.0 {
        return Err(Error::RayTooShort(format!("length {} < 200", b.length())));
    }
    let mut samples = Vec::new();
    for &(s, t) in pairs {
        let (s, t) = (s.min(t), s.max(t));
        let (x, y) = (b.eval(s), b.eval(t));
        let prof = lchain_profile(oracle, &x, &y, l_max)?;
        let dl = dhat_from_profile(&prof, space.distance(&x, &y)?, oracle.pool_id()).lower.value;
        let q = (t - s) / kappa.eval_pow(t, kappa_power) - 1.0;
        samples.push(ShadowSample { s, t, dhat_lower: dl, q, residual: 0.0 });
    }
    let c_fit = samples.iter().filter(|x| x.q > 0.0).map(|x| x.dhat_lower / x.q).fold(f64::INFINITY, f64::min);
    let c_fit = if c_fit.is_finite() { c_fit } else { 0.0 };
    for x in &mut samples {
        x.residual = x.dhat_lower - c_fit * x.q;
    }
    Ok(ShadowReport { c_fit, kappa_power, samples })
}

/// Observed range of `κ(y)/κ(x)` over sampled `x, y ≥ 0` with `|x − y| ≤ D₀κ(x)`.
pub fn ratio_band(kappa: &SublinearFn, d0: f64, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = stream(seed, 0x32);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for _ in 0..samples {
        let x = (rng.gen::<f64>() * 14.0).exp() - 1.0;
        let r = d0 * kappa.eval(x);
        let y = (x + r * (2.0 * rng.gen::<f64>() - 1.0)).max(0.0);
        let q = kappa.eval(y) / kappa.eval(x);
        lo = lo.min(q);
        hi = hi.max(q);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        for s in ["const:1", "log:2", "power:0.5"] {
            assert_eq!(s.parse::<SublinearFn>().unwrap().to_string(), s);
        }
        assert!("power:1".parse::<SublinearFn>().is_err());
        assert!("const:0.5".parse::<SublinearFn>().is_err());
    }

    #[test]
    fn const_spacing_is_arithmetic() {
        let k = SublinearFn::Const(1.0);
        let mut t = 0.0;
        for i in 1..5 {
            t = next_t(t, &k, 2.0).unwrap();
            assert!((t - 20.0 * i as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn sqrt_first_step_solves_quadratic() {
        let t1 = next_t(0.0, &SublinearFn::Power(0.5), 1.0).unwrap();
        assert!((t1 - (50.0 + 2600f64.sqrt())).abs() < 1e-9);
        assert!((t1 - 10.0 * (1.0 + t1).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn kappa4_flags() {
        assert!(SublinearFn::Log(1.0).kappa4_sublinear());
        assert!(!SublinearFn::Power(0.5).kappa4_sublinear());
        assert!(SublinearFn::Power(0.2).kappa4_sublinear());
    }
}
