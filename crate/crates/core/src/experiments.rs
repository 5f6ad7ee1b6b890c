//! Named end-to-end runs. Each returns a plain result struct with a
//! [`Table`](crate::report::Table) view (frozen columns, see `docs/csv_columns.md`)
//! and a [`Plot`](crate::report::Plot).

use std::ops::RangeInclusive;
use std::sync::Arc;

use rand::Rng as _;

use crate::curtains::{dual_chain, SampleBudget};
use crate::error::{Error, Result};
use crate::geom::{Geodesic, ModelSpace, Point, StripLayout};
use crate::morse::{estimate_contraction, persistent_shadow_test, KappaChain, MorseBudget, SublinearFn};
use crate::numeric::ZETA2;
use crate::report::{num, Plot, Series, Table};
use crate::rng::stream;
use crate::separation::{
    dhat_from_profile, gromov_product, lchain_profile, longest_lchain, AxisFamilyOracle, CurtainPool, PoolOracle, SeparationOracle,
    DEFAULT_CAP,
};

// ---------------------------------------------------------------- fixtures

/// Vertical axis of ℍ² from `o = (0, 1)` of hyperbolic length `len`.
pub fn h2_axis(len: f64) -> Result<(ModelSpace, Arc<Geodesic>)> {
    h2_ray(std::f64::consts::FRAC_PI_2, len)
}

/// Geodesic from `o` in chart direction `angle`.
pub fn h2_ray(angle: f64, len: f64) -> Result<(ModelSpace, Arc<Geodesic>)> {
    let s = ModelSpace::hyperbolic();
    let o = s.origin();
    let end = if (angle - std::f64::consts::FRAC_PI_2).abs() < 1e-15 { s.point_xy(0.0, len.exp())? } else { s.shoot(&o, angle, len)? };
    let g = s.geodesic(&o, &end)?;
    Ok((s, Arc::new(g)))
}

/// Segments perpendicular to the vertical axis at parameters `spacing, 2·spacing, …`,
/// reaching hyperbolic distance `half` on each side.
pub fn h2_transversals(s: &ModelSpace, len: f64, spacing: f64, half: f64) -> Result<Vec<Geodesic>> {
    let mut out = Vec::new();
    let (th, sech) = (half.tanh(), 1.0 / half.cosh());
    let mut u = spacing;
    while u < len {
        let r = u.exp();
        out.push(s.geodesic(&s.point_xy(-r * th, r * sech)?, &s.point_xy(r * th, r * sech)?)?);
        u += spacing;
    }
    Ok(out)
}

/// Horizontal line `[0, len] × {0}` in the plane.
pub fn plane_line(len: f64) -> Result<(ModelSpace, Arc<Geodesic>)> {
    let s = ModelSpace::plane();
    let g = s.geodesic(&s.point_xy(0.0, 0.0)?, &s.point_xy(len, 0.0)?)?;
    Ok((s, Arc::new(g)))
}

/// Vertical segments `{x} × [−half, half]` at `x = spacing, 2·spacing, … < len`.
pub fn plane_transversals(s: &ModelSpace, len: f64, spacing: f64, half: f64) -> Result<Vec<Geodesic>> {
    let mut out = Vec::new();
    let mut x = spacing;
    while x < len {
        out.push(s.geodesic(&s.point_xy(x, -half)?, &s.point_xy(x, half)?)?);
        x += spacing;
    }
    Ok(out)
}

/// Pool of curtains dual to `axis` and to the given transversals.
pub fn axis_pool(s: &ModelSpace, axis: &Geodesic, transversals: Vec<Geodesic>, density: f64) -> Result<CurtainPool> {
    let mut probes = vec![axis.clone()];
    probes.extend(transversals);
    CurtainPool::from_probes(s, probes, density, DEFAULT_CAP)
}

/// Union of the dual chains of the given segments.
pub fn segment_pool(s: &ModelSpace, segments: &[(Point, Point)]) -> Result<CurtainPool> {
    let mut curtains = Vec::new();
    for (p, q) in segments {
        let g = Arc::new(s.geodesic(p, q)?);
        if g.length() >= 2.0 {
            curtains.extend(dual_chain(s, &g, 0.0, g.length())?.curtains);
        }
    }
    CurtainPool::from_curtains(s, &curtains, DEFAULT_CAP)
}

/// Pool for an injectivity schedule: dual chains of `[o, x_i]`, `[o, y_i]` and
/// `[x_i, y_i]` for every depth.
pub fn schedule_pool(s: &ModelSpace, ray1: &Geodesic, ray2: &Geodesic, depths: &[f64]) -> Result<CurtainPool> {
    let o = ray1.start().clone();
    let mut segs = Vec::new();
    for &d in depths {
        let (x, y) = (ray1.eval(d), ray2.eval(d));
        segs.push((o.clone(), x.clone()));
        segs.push((o.clone(), y.clone()));
        segs.push((x, y));
    }
    segment_pool(s, &segs)
}

/// `κ²` when it is again a sublinear function.
pub fn kappa_squared(k: &SublinearFn) -> Option<SublinearFn> {
    match *k {
        SublinearFn::Const(c) => Some(SublinearFn::Const(c * c)),
        SublinearFn::Log(p) => Some(SublinearFn::Log(2.0 * p)),
        SublinearFn::Power(a) if 2.0 * a < 1.0 => Some(SublinearFn::Power(2.0 * a)),
        SublinearFn::Power(_) => None,
    }
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

// ---------------------------------------------------------------- strip table

/// Spacing of the exact axis family used by [`example51`].
pub const EXAMPLE51_STEP: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct Example51Row {
    pub i: usize,
    pub l: usize,
    pub t: f64,
    /// Cardinality of the longest L-chain found.
    pub observed: usize,
    pub predicted: usize,
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DhatRow {
    pub i: usize,
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
    /// `Σ_L |c_L| / L³`: the lower sum without the `+1` of `d_L`.
    pub chain_series: f64,
}

#[derive(Clone, Debug)]
pub struct Example51Table {
    pub rows: Vec<Example51Row>,
    pub dhat: Vec<DhatRow>,
    pub dhat_lmax: usize,
    pub height: f64,
    pub pool_id: u64,
}

impl Example51Table {
    /// `2ζ(2)`, the bound for the chain series.
    pub const REFERENCE: f64 = 2.0 * ZETA2;

    pub fn all_within(&self) -> bool {
        self.rows.iter().all(|r| r.within)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["kind", "i", "L", "t", "observed", "predicted", "within", "dhat_lower", "dhat_upper", "chain_series", "reference"]);
        for r in &self.rows {
            t.push(vec![
                "chain".into(),
                r.i.to_string(),
                r.l.to_string(),
                num(r.t),
                r.observed.to_string(),
                r.predicted.to_string(),
                r.within.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]);
        }
        for r in &self.dhat {
            t.push(vec![
                "dhat".into(),
                r.i.to_string(),
                self.dhat_lmax.to_string(),
                num(r.t),
                String::new(),
                String::new(),
                String::new(),
                num(r.lower),
                num(r.upper),
                num(r.chain_series),
                num(Self::REFERENCE),
            ]);
        }
        t
    }

    pub fn plot(&self) -> Plot {
        let mut p = Plot::new("longest L-chain along the strip axis", "L", "chain cardinality");
        let mut is: Vec<usize> = self.rows.iter().map(|r| r.i).collect();
        is.dedup();
        for i in is {
            let pts = self.rows.iter().filter(|r| r.i == i).map(|r| (r.l as f64, r.observed as f64)).collect();
            let pred = self.rows.iter().filter(|r| r.i == i).map(|r| (r.l as f64, r.predicted as f64)).collect();
            p = p.with(Series::new(format!("i={i}"), pts)).with(Series::new(format!("min(2L,{})", 2 * i), pred).dashed());
        }
        p
    }

    pub fn dhat_plot(&self) -> Plot {
        Plot::new("dhat lower bound along the axis", "i", "value")
            .with(Series::new("dhat lower", self.dhat.iter().map(|r| (r.i as f64, r.lower)).collect()))
            .with(Series::new("sum |c|/L^3", self.dhat.iter().map(|r| (r.i as f64, r.chain_series)).collect()))
            .hline(Self::REFERENCE, "2 zeta(2)")
    }
}

/// Longest L-chains dual to `[o, b(t_i)]`, `t_i = (i+1)² − 1`, in the square-gap
/// strip space truncated at `height`, using the exact axis-aligned family, and
/// the truncated `d̂` sum up to `dhat_lmax` (0 skips it).
pub fn example51(i_range: RangeInclusive<usize>, l_range: RangeInclusive<usize>, height: f64, dhat_lmax: usize) -> Result<Example51Table> {
    let (i_lo, i_hi) = (*i_range.start(), *i_range.end());
    let (l_lo, l_hi) = (*l_range.start(), *l_range.end());
    if i_lo == 0 || l_lo == 0 || i_lo > i_hi || l_lo > l_hi {
        return Err(Error::InvalidArgument(format!("ranges must be nonempty and start at 1: i {i_range:?}, L {l_range:?}")));
    }
    if !(height > 2.0 * l_hi as f64) {
        return Err(Error::TruncationTooLow(format!("H = {height} must exceed 2·max L = {}", 2 * l_hi)));
    }
    // Strips stop separating once L reaches ⌈H − 1⌉.
    if dhat_lmax > 0 && !(height - 1.0 > dhat_lmax as f64) {
        return Err(Error::TruncationTooLow(format!("H = {height} must exceed 1 + {dhat_lmax} for the dhat sum")));
    }
    let space = ModelSpace::strip(StripLayout::example51(i_hi + 1, height))?;
    let oracle = AxisFamilyOracle::new(&space, EXAMPLE51_STEP)?;
    let o = space.origin();
    let lmax = l_hi.max(dhat_lmax);
    let mut rows = Vec::new();
    let mut dh = Vec::new();
    for i in i_range {
        let t = ((i + 1) * (i + 1) - 1) as f64;
        let y = space.point_xy(t, 0.0)?;
        let prof = lchain_profile(&oracle, &o, &y, lmax)?;
        for e in &prof[l_lo - 1..l_hi] {
            let observed = e.chain.len();
            let predicted = (2 * e.l).min(2 * i);
            rows.push(Example51Row { i, l: e.l, t, observed, predicted, within: observed.abs_diff(predicted) <= 1 });
        }
        if dhat_lmax > 0 {
            let b = dhat_from_profile(&prof[..dhat_lmax], t, oracle.pool_id());
            let chain_series = prof[..dhat_lmax].iter().map(|e| e.chain.len() as f64 / (e.l as f64).powi(3)).sum();
            dh.push(DhatRow { i, t, lower: b.lower.value, upper: b.upper.value, chain_series });
        }
    }
    Ok(Example51Table { rows, dhat: dh, dhat_lmax, height, pool_id: oracle.pool_id() })
}

// ---------------------------------------------------------------- slanted pool

#[derive(Clone, Debug, PartialEq)]
pub struct SlantedRow {
    pub i: usize,
    pub l: usize,
    pub t: f64,
    pub axis_count: usize,
    pub pool_count: usize,
}

#[derive(Clone, Debug)]
pub struct SlantedReport {
    pub rows: Vec<SlantedRow>,
    pub pool_size: usize,
    pub pool_id: u64,
}

impl SlantedReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["i", "L", "t", "axis_count", "pool_count", "pool_size"]);
        for r in &self.rows {
            t.push(vec![r.i.to_string(), r.l.to_string(), num(r.t), r.axis_count.to_string(), r.pool_count.to_string(), self.pool_size.to_string()]);
        }
        t
    }

    pub fn plot(&self) -> Plot {
        let mut p = Plot::new("axis family vs slanted pool", "L", "chain cardinality");
        let mut is: Vec<usize> = self.rows.iter().map(|r| r.i).collect();
        is.dedup();
        for i in is {
            p = p
                .with(Series::new(format!("axis i={i}"), self.rows.iter().filter(|r| r.i == i).map(|r| (r.l as f64, r.axis_count as f64)).collect()))
                .with(
                    Series::new(format!("pool i={i}"), self.rows.iter().filter(|r| r.i == i).map(|r| (r.l as f64, r.pool_count as f64)).collect())
                        .dashed(),
                );
        }
        p
    }
}

/// Meeting tests in the slanted pool are sampled; polygon projections make
/// the default budget too slow for more than a handful of probes.
pub const SLANTED_BUDGET: SampleBudget = SampleBudget { fibers: 3, per_fiber: 8, random: 24, seed: 0 };

/// Longest L-chains from a pool of curtains that need not be dual to the axis:
/// the axis, a vertical probe through every strip, and `n_slanted` geodesics
/// between random points of the region. Findings are reported, not judged.
pub fn slanted_search(i_max: usize, l_max: usize, height: f64, n_slanted: usize, seed: u64) -> Result<SlantedReport> {
    let axis_tab = example51(1..=i_max, 1..=l_max, height, 0)?;
    let space = ModelSpace::strip(StripLayout::example51(i_max + 1, height))?;
    let strip = space.as_strip().unwrap();
    let axis = space.geodesic(&space.origin(), &space.point_xy(strip.x_end, 0.0)?)?;
    let mut probes = vec![axis];
    for &(a, b) in &strip.strips {
        let x = 0.5 * (a + b);
        probes.push(space.geodesic(&space.point_xy(x, 0.0)?, &space.point_xy(x, height)?)?);
    }
    let mut rng = stream(seed, 0x51a);
    while probes.len() < 1 + strip.strips.len() + n_slanted {
        let p = space.sample_anywhere(&mut rng).ok_or_else(|| Error::InvalidArgument("cannot sample the region".into()))?;
        let q = space.sample_anywhere(&mut rng).unwrap();
        if space.distance(&p, &q)? >= 2.0 {
            probes.push(space.geodesic(&p, &q)?);
        }
    }
    let pool = CurtainPool::from_probes(&space, probes, 1.0, DEFAULT_CAP)?;
    let oracle = PoolOracle::new(&pool, SLANTED_BUDGET);
    let o = space.origin();
    let mut rows = Vec::new();
    for i in 1..=i_max {
        let t = ((i + 1) * (i + 1) - 1) as f64;
        let prof = lchain_profile(&oracle, &o, &space.point_xy(t, 0.0)?, l_max)?;
        for e in prof {
            let axis_count = axis_tab.rows.iter().find(|r| r.i == i && r.l == e.l).map_or(0, |r| r.observed);
            rows.push(SlantedRow { i, l: e.l, t, axis_count, pool_count: e.chain.len() });
        }
    }
    Ok(SlantedReport { rows, pool_size: pool.len(), pool_id: pool.id() })
}

// ---------------------------------------------------------------- injectivity

/// A pair trajectory plateaus when its upper endpoints grow at most this
/// fraction of the control's growth rate.
pub const PLATEAU_RATIO: f64 = 0.1;
/// A trajectory diverges when its lower endpoints grow at least this fraction
/// of the control's growth rate.
pub const DIVERGE_RATIO: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Bounded,
    Diverging,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Bounded => "bounded",
            Verdict::Diverging => "diverging",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GromovRow {
    pub i: usize,
    pub j: usize,
    pub depth: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub rows: Vec<GromovRow>,
    pub lower_slope: f64,
    pub upper_slope: f64,
    pub verdict: Verdict,
}

impl Trajectory {
    /// Slopes over the second half of the schedule; the verdict is set later.
    fn new(rows: Vec<GromovRow>) -> Self {
        let h = (rows.len() / 2).min(rows.len().saturating_sub(2));
        let tail = &rows[h..];
        let xs: Vec<f64> = tail.iter().map(|r| r.depth).collect();
        let lower_slope = slope(&xs, &tail.iter().map(|r| r.lower).collect::<Vec<_>>());
        let upper_slope = slope(&xs, &tail.iter().map(|r| r.upper).collect::<Vec<_>>());
        Trajectory { rows, lower_slope, upper_slope, verdict: Verdict::Inconclusive }
    }

    fn judge(&mut self, scale: f64) {
        self.verdict = if !(scale > 0.0) {
            Verdict::Inconclusive
        } else if self.upper_slope <= PLATEAU_RATIO * scale {
            Verdict::Bounded
        } else if self.lower_slope >= DIVERGE_RATIO * scale {
            Verdict::Diverging
        } else {
            Verdict::Inconclusive
        };
    }
}

#[derive(Clone, Debug)]
pub struct InjectivityReport {
    pub pair: Trajectory,
    /// Same ray against itself.
    pub control: Trajectory,
    pub pool_id: u64,
}

impl InjectivityReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["trajectory", "i", "j", "depth", "lower", "upper", "verdict"]);
        for (name, tr) in [("pair", &self.pair), ("control", &self.control)] {
            for r in &tr.rows {
                t.push(vec![name.into(), r.i.to_string(), r.j.to_string(), num(r.depth), num(r.lower), num(r.upper), tr.verdict.to_string()]);
            }
        }
        t
    }

    pub fn plot(&self) -> Plot {
        let s = |tr: &Trajectory, lo: bool| tr.rows.iter().map(|r| (r.depth, if lo { r.lower } else { r.upper })).collect();
        Plot::new("Gromov product along the depth schedule", "depth", "(x_i . y_i)_o")
            .with(Series::new("pair upper", s(&self.pair, false)))
            .with(Series::new("pair lower", s(&self.pair, true)).dashed())
            .with(Series::new("control upper", s(&self.control, false)))
            .with(Series::new("control lower", s(&self.control, true)).dashed())
    }
}

/// Gromov-product intervals `(x_i · y_i)_o` with `x_i = ray1(depth_i)`,
/// `y_i = ray2(depth_i)` and `o = ray1(0)`, plus the control `(x_i · x_i)_o`.
/// Verdicts compare second-half slopes with the control's lower-endpoint slope.
pub fn injectivity_probe(oracle: &dyn SeparationOracle, ray1: &Geodesic, ray2: &Geodesic, depths: &[f64], l_max: usize) -> Result<InjectivityReport> {
    let o = ray1.start().clone();
    let mut pair = Vec::new();
    let mut control = Vec::new();
    for (i, &d) in depths.iter().enumerate() {
        if d > ray1.length() || d > ray2.length() {
            return Err(Error::InvalidArgument(format!("depth {d} beyond the rays")));
        }
        let (x, y) = (ray1.eval(d), ray2.eval(d));
        let g = gromov_product(oracle, &x, &y, &o, l_max)?;
        pair.push(GromovRow { i, j: i, depth: d, lower: g.lower.value, upper: g.upper.value });
        let c = gromov_product(oracle, &x, &x, &o, l_max)?;
        control.push(GromovRow { i, j: i, depth: d, lower: c.lower.value, upper: c.upper.value });
    }
    let (mut pair, mut control) = (Trajectory::new(pair), Trajectory::new(control));
    let scale = control.lower_slope;
    pair.judge(scale);
    control.judge(scale);
    Ok(InjectivityReport { pair, control, pool_id: oracle.pool_id() })
}

// ---------------------------------------------------------------- unboundedness

#[derive(Clone, Debug, PartialEq)]
pub struct UnbndRow {
    pub i: usize,
    pub t: f64,
    pub m: usize,
    pub d_m: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct UnbndReport {
    pub rows: Vec<UnbndRow>,
    pub c: f64,
    pub kappa: SublinearFn,
    /// Right side evaluated analytically past the computed range.
    pub extension: Vec<(f64, f64)>,
    /// Left side at least right side minus slack for every computed `i`.
    pub holds: bool,
    pub lhs_increasing: bool,
    pub rhs_diverges: bool,
    pub pool_id: u64,
}

impl UnbndReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["kind", "i", "t", "m", "d_m", "lhs", "rhs"]);
        for r in &self.rows {
            t.push(vec!["computed".into(), r.i.to_string(), num(r.t), r.m.to_string(), num(r.d_m), num(r.lhs), num(r.rhs)]);
        }
        for &(tt, rhs) in &self.extension {
            t.push(vec!["analytic".into(), String::new(), num(tt), String::new(), String::new(), String::new(), num(rhs)]);
        }
        t
    }

    pub fn plot(&self) -> Plot {
        Plot::new(&format!("d_m(o,b(t_i))/m^3 vs analytic side, kappa = {}", self.kappa), "t_i", "value")
            .with(Series::new("lhs", self.rows.iter().map(|r| (r.t, r.lhs)).collect()))
            .with(Series::new("rhs", self.rows.iter().map(|r| (r.t, r.rhs)).collect()).dashed())
    }
}

/// `(t − t₁)/(Cκ(t)+1)⁴ − 1`.
pub fn analytic_rhs(t: f64, t1: f64, c: f64, kappa: &SublinearFn) -> f64 {
    (t - t1) / (c * kappa.eval(t) + 1.0).powi(4) - 1.0
}

/// Left side `d_m(o, b(t_i))/m³` with `m = ⌈Cκ(t_i)⌉` from pool estimates along
/// the κ-chain, against the analytic right side.
pub fn unboundedness_probe(oracle: &dyn SeparationOracle, kc: &KappaChain, slack: f64) -> Result<UnbndReport> {
    let b = kc.chain.curtains.first().ok_or(Error::EmptyPool)?.base().clone();
    let o = b.start().clone();
    let t1 = kc.t[0];
    let mut rows = Vec::new();
    for (k, &t) in kc.t.iter().enumerate() {
        let m = (kc.c * kc.kappa.eval(t)).ceil() as usize;
        let d_m = longest_lchain(oracle, &o, &b.eval(t), m)?.estimate.value;
        let lhs = d_m / (m as f64).powi(3);
        rows.push(UnbndRow { i: k + 1, t, m, d_m, lhs, rhs: analytic_rhs(t, t1, kc.c, &kc.kappa) });
    }
    let extension: Vec<(f64, f64)> = (1..=14).map(|e| 10f64.powi(3 * e)).map(|t| (t, analytic_rhs(t, t1, kc.c, &kc.kappa))).collect();
    let r20 = analytic_rhs(1e20, t1, kc.c, &kc.kappa);
    let r40 = analytic_rhs(1e40, t1, kc.c, &kc.kappa);
    Ok(UnbndReport {
        holds: rows.iter().all(|r| r.lhs >= r.rhs - slack),
        lhs_increasing: rows.len() >= 2 && rows.last().unwrap().lhs > rows[0].lhs,
        rhs_diverges: r40 > 0.0 && r40 > 10.0 * r20.abs().max(1.0),
        rows,
        c: kc.c,
        kappa: kc.kappa,
        extension,
        pool_id: oracle.pool_id(),
    })
}

// ---------------------------------------------------------------- shadow phase

/// `n` pairs `s < t` drawn uniformly from `[start, start + window]`, always
/// including the full window.
pub fn shadow_pairs(start: f64, window: f64, n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = stream(seed, 0x5ad);
    let mut out = vec![(start, start + window)];
    while out.len() < n {
        let a = start + rng.gen::<f64>() * window;
        let b = start + rng.gen::<f64>() * window;
        if (a - b).abs() >= 1.0 {
            out.push((a.min(b), a.max(b)));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRow {
    pub space: String,
    pub kappa: SublinearFn,
    pub power: i32,
    pub c_fit: f64,
    pub samples: usize,
    /// Contraction estimate under `κ²`; `None` when `κ²` is not sublinear.
    pub d_est_k2: Option<f64>,
}

pub struct ShadowCase<'a> {
    pub label: String,
    pub oracle: &'a dyn SeparationOracle,
    pub ray: Arc<Geodesic>,
}

#[derive(Clone, Debug)]
pub struct PhaseReport {
    pub rows: Vec<PhaseRow>,
}

impl PhaseReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["space", "kappa", "power", "c_fit", "samples", "d_est_k2"]);
        for r in &self.rows {
            t.push(vec![
                r.space.clone(),
                r.kappa.to_string(),
                r.power.to_string(),
                num(r.c_fit),
                r.samples.to_string(),
                r.d_est_k2.map_or(String::new(), num),
            ]);
        }
        t
    }

    pub fn plot(&self) -> Plot {
        let mut p = Plot::new("persistent shadow constants", "case", "C_fit");
        let mut labels: Vec<&str> = self.rows.iter().map(|r| r.space.as_str()).collect();
        labels.dedup();
        for l in labels {
            let pts = self.rows.iter().filter(|r| r.space == l).enumerate().map(|(k, r)| (k as f64, r.c_fit)).collect();
            p = p.with(Series::new(l, pts));
        }
        p
    }
}

/// Shadow fits for every case, κ and power, with the `κ²` contraction estimate
/// for the reverse direction.
pub fn shadow_phase(cases: &[ShadowCase<'_>], kappas: &[SublinearFn], powers: &[i32], pairs: &[(f64, f64)], l_max: usize) -> Result<PhaseReport> {
    let mut rows = Vec::new();
    for case in cases {
        for k in kappas {
            for &pw in powers {
                let rep = persistent_shadow_test(case.oracle, &case.ray, k, pw, l_max, pairs)?;
                let d_est_k2 = match kappa_squared(k) {
                    Some(k2) if case.ray.length() >= 100.0 * k2.eval(0.0) => {
                        Some(estimate_contraction(case.oracle.space(), &case.ray, &k2, &MorseBudget { centers: 24, ..Default::default() })?.d_est)
                    }
                    _ => None,
                };
                rows.push(PhaseRow { space: case.label.clone(), kappa: *k, power: pw, c_fit: rep.c_fit, samples: rep.samples.len(), d_est_k2 });
            }
        }
    }
    Ok(PhaseReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_line() {
        assert!((slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-12);
        assert_eq!(slope(&[1.0], &[1.0]), 0.0);
    }

    #[test]
    fn squared_kappas() {
        assert_eq!(kappa_squared(&SublinearFn::Const(2.0)), Some(SublinearFn::Const(4.0)));
        assert_eq!(kappa_squared(&SublinearFn::Power(0.5)), None);
        assert_eq!(kappa_squared(&SublinearFn::Power(0.2)), Some(SublinearFn::Power(0.4)));
    }

    #[test]
    fn rhs_log_vs_sqrt() {
        let l = SublinearFn::Log(1.0);
        let s = SublinearFn::Power(0.5);
        assert!(analytic_rhs(1e40, 0.0, 23.0, &l) > 1e20);
        assert!(analytic_rhs(1e40, 0.0, 23.0, &s) < 0.0);
        assert!(analytic_rhs(500.0, 0.0, 23.0, &l) < -0.99);
    }

    #[test]
    fn truncation_guard() {
        assert!(matches!(example51(1..=2, 1..=8, 16.0, 0), Err(Error::TruncationTooLow(_))));
    }

    #[test]
    fn pairs_include_window() {
        let p = shadow_pairs(0.0, 200.0, 10, 1);
        assert_eq!(p[0], (0.0, 200.0));
        assert_eq!(p.len(), 10);
        assert!(p.iter().all(|&(s, t)| s < t && t <= 200.0));
    }
}
