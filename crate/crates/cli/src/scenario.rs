//! Scenario documents and the experiments they name.
//!
//! A scenario is a TOML file with tables `space{kind, params}`,
//! `kappa{family, param}`, `pool{density, cap, probes}`, `experiment{name, params}`
//! and top-level `seed` and `out_dir`. Column layouts are listed in
//! `docs/csv_columns.md`.

use std::path::Path;
use std::sync::Arc;

use curtainlab::curtains::SampleBudget;
use curtainlab::experiments::{self as ex, Example51Table, ShadowCase, Verdict};
use curtainlab::geom::{Geodesic, ModelSpace, StripLayout};
use curtainlab::hyperbolicity::{delta_scan, grid_search, MetricKind, Window};
use curtainlab::morse::{build_kappa_chain, estimate_contraction, MorseBudget, SublinearFn};
use curtainlab::report::{num, Plot, Series, Table};
use curtainlab::separation::{AxisFamilyOracle, CurtainPool, PoolOracle, SeparationOracle, DEFAULT_CAP, DEFAULT_DENSITY};
use serde::Deserialize;

use crate::spaces::{self, params};
use crate::CliError;

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub space: SpaceSpec,
    pub kappa: Option<KappaSpec>,
    #[serde(default)]
    pub pool: PoolSpec,
    pub experiment: ExperimentSpec,
    #[serde(default)]
    pub seed: u64,
    pub out_dir: Option<String>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub kind: String,
    #[serde(default)]
    pub params: toml::Table,
}

#[derive(Deserialize, Debug, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct KappaSpec {
    pub family: KappaFamily,
    pub param: f64,
}

#[derive(Deserialize, Debug, Clone, Copy)]
#[serde(rename_all = "lowercase")]
pub enum KappaFamily {
    Const,
    Log,
    Power,
}

impl KappaSpec {
    fn build(&self) -> Result<SublinearFn, CliError> {
        let k = match self.family {
            KappaFamily::Const => SublinearFn::new_const(self.param),
            KappaFamily::Log => SublinearFn::new_log(self.param),
            KappaFamily::Power => SublinearFn::new_power(self.param),
        };
        k.map_err(|e| CliError::Validation(format!("kappa: {e}")))
    }
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct PoolSpec {
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default = "default_cap")]
    pub cap: usize,
    #[serde(default)]
    pub probes: Probes,
}

impl Default for PoolSpec {
    fn default() -> Self {
        PoolSpec { density: DEFAULT_DENSITY, cap: DEFAULT_CAP, probes: Probes::default() }
    }
}

fn default_density() -> f64 {
    DEFAULT_DENSITY
}

fn default_cap() -> usize {
    DEFAULT_CAP
}

/// `"auto"` picks the experiment's own probe set; a list gives planar
/// segments `[x0, y0, x1, y1]`.
#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum Probes {
    Named(String),
    Segments(Vec<[f64; 4]>),
}

impl Default for Probes {
    fn default() -> Self {
        Probes::Named("auto".into())
    }
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default)]
    pub params: toml::Table,
}

pub const EXPERIMENTS: &str = "example51, slanted, injectivity, unboundedness, kchain, shadow, deltascan, gridscan";

/// Read, override and validate a scenario file.
pub fn load(path: &Path, overrides: &[(String, toml::Value)]) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Validation(format!("{}: {}", path.display(), e.message())))?;
    for (key, v) in overrides {
        set_path(&mut doc, key, v.clone())?;
    }
    serde_path_to_error::deserialize(toml::Value::Table(doc))
        .map_err(|e| CliError::Validation(format!("{}: {}: {}", path.display(), e.path(), e.inner().message())))
}

/// Assign `value` at a dotted path, creating tables on the way.
pub fn set_path(doc: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), CliError> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| CliError::Validation(format!("empty override key {key:?}")))?;
    let mut t = doc;
    for p in parts {
        let e = t.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        t = e.as_table_mut().ok_or_else(|| CliError::Validation(format!("{key}: {p} is not a table")))?;
    }
    t.insert(last.to_string(), value);
    Ok(())
}

/// Everything an experiment produces.
pub struct Outcome {
    pub name: String,
    pub table: Table,
    pub plot: Plot,
    pub pool_id: Option<u64>,
    /// Acceptance thresholds that failed; only acted on under `--check`.
    pub violations: Vec<String>,
    pub summary: String,
    /// Extra files for the output directory, such as `kappa_chain.txt`.
    pub files: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    pub fn csv(&self, seed: u64) -> Vec<u8> {
        self.table.to_csv(seed, self.pool_id)
    }
}

struct Ctx<'a> {
    space: ModelSpace,
    kind: &'a str,
    kappa: Option<SublinearFn>,
    pool: &'a PoolSpec,
    seed: u64,
    params: &'a toml::Table,
}

impl Ctx<'_> {
    fn params<T: serde::de::DeserializeOwned>(&self) -> Result<T, CliError> {
        params(self.params, "experiment.params")
    }

    fn kappa_or(&self, k: SublinearFn) -> SublinearFn {
        self.kappa.unwrap_or(k)
    }

    fn need_kind(&self, allowed: &[&str], exp: &str) -> Result<(), CliError> {
        if allowed.contains(&self.kind) {
            Ok(())
        } else {
            Err(CliError::Validation(format!("space.kind: {exp} runs on {}, not {:?}", allowed.join(", "), self.kind)))
        }
    }

    /// The explicit probe list, if one was given.
    fn explicit_pool(&self) -> Result<Option<CurtainPool>, CliError> {
        match &self.pool.probes {
            Probes::Named(n) if n == "auto" => Ok(None),
            Probes::Named(n) => Err(CliError::Validation(format!("pool.probes: unknown probe set {n:?} (auto or a segment list)"))),
            Probes::Segments(segs) => {
                let mut gs = Vec::new();
                for (i, s) in segs.iter().enumerate() {
                    let at = |e: curtainlab::Error| CliError::Validation(format!("pool.probes[{i}]: {e}"));
                    let p = self.space.point_xy(s[0], s[1]).map_err(at)?;
                    let q = self.space.point_xy(s[2], s[3]).map_err(at)?;
                    gs.push(self.space.geodesic(&p, &q).map_err(at)?);
                }
                Ok(Some(self.probe_pool(gs)?))
            }
        }
    }

    fn probe_pool(&self, probes: Vec<Geodesic>) -> Result<CurtainPool, CliError> {
        Ok(CurtainPool::from_probes(&self.space, probes, self.pool.density, self.pool.cap)?)
    }

    fn morse(&self) -> MorseBudget {
        MorseBudget { centers: 24, seed: self.seed, ..Default::default() }
    }

    fn strip_height(&self) -> Result<f64, CliError> {
        match self.space.as_strip().map(|s| &s.layout) {
            Some(StripLayout::Gaps { height, .. }) => Ok(*height),
            _ => Err(CliError::Validation("space: needs kind = \"strip\" with a gap layout".into())),
        }
    }
}

/// Run the experiment named in the scenario.
pub fn run(sc: &Scenario) -> Result<Outcome, CliError> {
    let space = spaces::build(&sc.space.kind, &sc.space.params, sc.seed, "space")?;
    let kappa = sc.kappa.as_ref().map(KappaSpec::build).transpose()?;
    let kind = match sc.space.kind.as_str() {
        "hyperbolic" => "h2",
        k => k,
    };
    let cx = Ctx { space, kind, kappa, pool: &sc.pool, seed: sc.seed, params: &sc.experiment.params };
    let name = sc.experiment.name.as_str();
    let mut out = match name {
        "example51" => strip_table(&cx),
        "slanted" => slanted(&cx),
        "injectivity" => injectivity(&cx),
        "unboundedness" => unboundedness(&cx),
        "kchain" => kchain(&cx),
        "shadow" => shadow(&cx),
        "deltascan" => deltascan(&cx),
        "gridscan" => gridscan(&cx),
        other => Err(CliError::Validation(format!("experiment.name: unknown experiment {other:?} ({EXPERIMENTS})"))),
    }?;
    out.name = name.to_string();
    Ok(out)
}

fn outcome(table: Table, plot: Plot, pool_id: Option<u64>, violations: Vec<String>, summary: String) -> Outcome {
    Outcome { name: String::new(), table, plot, pool_id, violations, summary, files: Vec::new() }
}

// ------------------------------------------------------------------ strip table

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StripTableParams {
    #[serde(default = "one")]
    i_min: usize,
    #[serde(default = "six")]
    i_max: usize,
    #[serde(default = "one")]
    l_min: usize,
    #[serde(default = "eight")]
    l_max: usize,
    #[serde(default = "sixty_four")]
    dhat_lmax: usize,
    /// Allowed excess of the `d̂` lower bound over `2ζ(2)`.
    #[serde(default = "tenth2")]
    dhat_slack: f64,
}

fn one() -> usize {
    1
}
fn six() -> usize {
    6
}
fn eight() -> usize {
    8
}
fn sixteen() -> usize {
    16
}
fn sixty_four() -> usize {
    64
}
fn tenth2() -> f64 {
    0.2
}

fn strip_table(cx: &Ctx) -> Result<Outcome, CliError> {
    cx.need_kind(&["strip"], "example51")?;
    let p: StripTableParams = cx.params()?;
    let t = ex::example51(p.i_min..=p.i_max, p.l_min..=p.l_max, cx.strip_height()?, p.dhat_lmax)?;
    let mut v = Vec::new();
    for r in t.rows.iter().filter(|r| !r.within) {
        v.push(format!("i={} L={}: observed {} vs min(2L,2i) = {}", r.i, r.l, r.observed, r.predicted));
    }
    let bound = Example51Table::REFERENCE + p.dhat_slack;
    for r in t.dhat.iter().filter(|r| r.lower > bound) {
        v.push(format!("i={}: dhat lower {} exceeds {bound}", r.i, r.lower));
    }
    let max_dhat = t.dhat.iter().map(|r| r.lower).fold(0.0, f64::max);
    let summary = format!("{} chain rows, {} outside ±1, max dhat lower {}", t.rows.len(), t.rows.iter().filter(|r| !r.within).count(), num(max_dhat));
    Ok(outcome(t.table(), t.plot(), Some(t.pool_id), v, summary))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SlantedParams {
    #[serde(default = "two")]
    i_max: usize,
    #[serde(default = "three")]
    l_max: usize,
    #[serde(default = "three")]
    n_slanted: usize,
}

fn two() -> usize {
    2
}
fn three() -> usize {
    3
}

fn slanted(cx: &Ctx) -> Result<Outcome, CliError> {
    cx.need_kind(&["strip"], "slanted")?;
    let p: SlantedParams = cx.params()?;
    let r = ex::slanted_search(p.i_max, p.l_max, cx.strip_height()?, p.n_slanted, cx.seed)?;
    let more = r.rows.iter().filter(|r| r.pool_count > r.axis_count).count();
    let summary = format!("pool of {} curtains; {more} of {} rows exceed the axis family", r.pool_size, r.rows.len());
    Ok(outcome(r.table(), r.plot(), Some(r.pool_id), Vec::new(), summary))
}

// ------------------------------------------------------------------ injectivity

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InjectivityParams {
    depths: Option<Vec<f64>>,
    #[serde(default = "sixteen")]
    l_max: usize,
    /// Chart angle of the second ℍ² ray.
    #[serde(default = "angle")]
    angle: f64,
}

fn angle() -> f64 {
    0.6
}

fn injectivity(cx: &Ctx) -> Result<Outcome, CliError> {
    cx.need_kind(&["tripod", "tree", "h2"], "injectivity")?;
    let p: InjectivityParams = cx.params()?;
    let (a, b, default_depths): (Geodesic, Geodesic, Vec<f64>) = if cx.kind == "h2" {
        let (_, a) = ex::h2_axis(40.0)?;
        let (_, b) = ex::h2_ray(p.angle, 40.0)?;
        ((*a).clone(), (*b).clone(), (1..=8).map(|k| 2.5 * k as f64).collect())
    } else {
        let s = &cx.space;
        let o = s.vertex(0)?;
        let a = s.geodesic(&o, &s.vertex(1)?)?;
        let b = s.geodesic(&o, &s.vertex(2)?)?;
        let reach = a.length().min(b.length());
        let depths = (1..=8).map(|k| 0.1 * reach * k as f64 + 0.3).collect();
        (a, b, depths)
    };
    let depths = p.depths.unwrap_or(default_depths);
    let pool = match cx.explicit_pool()? {
        Some(pool) => pool,
        None => ex::schedule_pool(&cx.space, &a, &b, &depths)?,
    };
    let o = PoolOracle::new(&pool, SampleBudget::default());
    let r = ex::injectivity_probe(&o, &a, &b, &depths, p.l_max)?;
    let mut v = Vec::new();
    if r.pair.verdict != Verdict::Bounded {
        v.push(format!("pair verdict {} (want bounded)", r.pair.verdict));
    }
    if r.control.verdict != Verdict::Diverging {
        v.push(format!("control verdict {} (want diverging)", r.control.verdict));
    }
    let summary = format!("pair {}, control {}", r.pair.verdict, r.control.verdict);
    Ok(outcome(r.table(), r.plot(), Some(r.pool_id), v, summary))
}

// ------------------------------------------------------------------ κ-chains

/// `"auto"` estimates the contraction constant from the space.
#[derive(Deserialize, Debug, Clone, Copy)]
#[serde(untagged)]
enum DParam {
    Value(f64),
    Auto(Auto),
}

#[derive(Deserialize, Debug, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum Auto {
    Auto,
}

impl Default for DParam {
    fn default() -> Self {
        DParam::Auto(Auto::Auto)
    }
}

impl DParam {
    fn resolve(self, space: &ModelSpace, b: &Geodesic, k: &SublinearFn, budget: &MorseBudget) -> Result<f64, CliError> {
        match self {
            DParam::Value(d) => Ok(d),
            DParam::Auto(_) => Ok(estimate_contraction(space, b, k, budget)?.d_est.max(0.1)),
        }
    }
}

/// The ray and separation oracle an experiment works along.
enum Along {
    Pool(Arc<Geodesic>, CurtainPool),
    Axis(AxisFamilyOracle),
}

impl Along {
    fn ray(&self) -> &Arc<Geodesic> {
        match self {
            Along::Pool(b, _) => b,
            Along::Axis(o) => o.axis(),
        }
    }

    fn with_oracle<T>(&self, f: impl FnOnce(&dyn SeparationOracle) -> T) -> T {
        match self {
            Along::Pool(_, pool) => f(&PoolOracle::new(pool, SampleBudget::default())),
            Along::Axis(o) => f(o),
        }
    }
}

/// Axis plus transversal probes in ℍ² or the plane, or the exact axis family in
/// a strip space.
fn along(cx: &Ctx, len: f64, spacing: f64, half: f64, step: f64) -> Result<Along, CliError> {
    match cx.kind {
        "strip" => Ok(Along::Axis(AxisFamilyOracle::new(&cx.space, step)?)),
        "h2" | "plane" => {
            let (b, tr) = if cx.kind == "h2" {
                let (_, b) = ex::h2_axis(len)?;
                (b, ex::h2_transversals(&cx.space, len, spacing, half)?)
            } else {
                let (_, b) = ex::plane_line(len)?;
                (b, ex::plane_transversals(&cx.space, len, spacing, half)?)
            };
            let pool = match cx.explicit_pool()? {
                Some(p) => p.union(&CurtainPool::from_probes(&cx.space, vec![(*b).clone()], cx.pool.density, cx.pool.cap)?, cx.pool.cap)?,
                None => ex::axis_pool(&cx.space, &b, tr, cx.pool.density)?,
            };
            Ok(Along::Pool(b, pool))
        }
        other => Err(CliError::Validation(format!("space.kind: needs h2, plane or strip, not {other:?}"))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UnbndParams {
    len: Option<f64>,
    #[serde(default = "ten")]
    spacing: f64,
    #[serde(default = "three_f")]
    half: f64,
    /// Axis-family spacing in strip spaces.
    #[serde(default = "four")]
    step: f64,
    #[serde(default, rename = "D")]
    d: DParam,
    #[serde(default)]
    slack: f64,
    expect_diverge: Option<bool>,
    expect_lhs_increasing: Option<bool>,
}

fn ten() -> f64 {
    10.0
}
fn three_f() -> f64 {
    3.0
}
fn four() -> f64 {
    4.0
}

fn unboundedness(cx: &Ctx) -> Result<Outcome, CliError> {
    let p: UnbndParams = cx.params()?;
    let al = along(cx, p.len.unwrap_or(560.0), p.spacing, p.half, p.step)?;
    let k = cx.kappa_or(if cx.kind == "strip" { SublinearFn::Power(0.5) } else { SublinearFn::Log(1.0) });
    let b = al.ray().clone();
    let d = p.d.resolve(&cx.space, &b, &k, &cx.morse())?;
    let (r, records) = al.with_oracle(|o| -> Result<_, CliError> {
        let pooled = matches!(al, Along::Pool(..));
        let kc = build_kappa_chain(&cx.space, &b, &k, d, 0.0, pooled.then_some(o))?;
        Ok((ex::unboundedness_probe(o, &kc, p.slack)?, kc.records()))
    })?;
    let mut v = Vec::new();
    if !r.holds {
        v.push("left side fell below the analytic side".to_string());
    }
    if let Some(e) = p.expect_diverge.filter(|&e| e != r.rhs_diverges) {
        v.push(format!("analytic side diverges = {}, expected {e}", r.rhs_diverges));
    }
    if let Some(e) = p.expect_lhs_increasing.filter(|&e| e != r.lhs_increasing) {
        v.push(format!("left side increasing = {}, expected {e}", r.lhs_increasing));
    }
    let summary = format!("kappa {k}, D {}, {} chain points, holds {}, rhs diverges {}", num(d), r.rows.len(), r.holds, r.rhs_diverges);
    let mut out = outcome(r.table(), r.plot(), Some(r.pool_id), v, summary);
    out.files.push(("kappa_chain.txt".into(), records.into_bytes()));
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KchainParams {
    #[serde(default = "two_hundred")]
    len: f64,
    #[serde(default = "fifteen")]
    spacing: f64,
    #[serde(default = "two_f")]
    half: f64,
    #[serde(default = "quarter")]
    step: f64,
    #[serde(default, rename = "D")]
    d: DParam,
    /// Also compare the sampled slimness with `multiple` times the excursion constant.
    multiple: Option<f64>,
}

fn two_hundred() -> f64 {
    200.0
}
fn fifteen() -> f64 {
    15.0
}
fn two_f() -> f64 {
    2.0
}
fn quarter() -> f64 {
    0.25
}

/// κ-chain along the default ray of the space.
fn kchain(cx: &Ctx) -> Result<Outcome, CliError> {
    let p: KchainParams = cx.params()?;
    let (kc, ex_ratio) = kappa_chain(cx, &p)?;
    let mut v = kc.check();
    if let (Some(m), Some(r)) = (p.multiple, ex_ratio) {
        if r > m {
            v.push(format!("slimness ratio {r} exceeds {m}"));
        }
    }
    let mut t = Table::new(&["i", "t_i", "gap", "bound", "witness", "target"]);
    for (i, &ti) in kc.t.iter().enumerate() {
        let ev = if i == 0 { None } else { kc.evidence.get(i - 1) };
        let gap = if i == 0 { String::new() } else { num(ti - kc.t[i - 1]) };
        let bound = if i == 0 { String::new() } else { num(10.0 * kc.d * kc.kappa.eval(ti)) };
        t.push(vec![
            i.to_string(),
            num(ti),
            gap,
            bound,
            ev.and_then(|e| e.witness).map_or(String::new(), |n| n.to_string()),
            ev.map_or(String::new(), |e| num(e.target)),
        ]);
    }
    let plot = Plot::new(&format!("kappa-chain, kappa = {}, D = {}", kc.kappa, num(kc.d)), "i", "t_i")
        .with(Series::new("t_i", kc.t.iter().enumerate().map(|(i, &t)| (i as f64, t)).collect()));
    let summary = format!("{} curtains, D {}, C {}{}", kc.t.len(), num(kc.d), num(kc.c), ex_ratio.map_or(String::new(), |r| format!(", slim ratio {}", num(r))));
    let mut out = outcome(t, plot, kc.pool_id, v, summary);
    out.files.push(("kappa_chain.txt".into(), kc.records().into_bytes()));
    Ok(out)
}

fn kappa_chain(cx: &Ctx, p: &KchainParams) -> Result<(curtainlab::morse::KappaChain, Option<f64>), CliError> {
    let al = along(cx, p.len, p.spacing, p.half, p.step)?;
    let k = cx.kappa_or(if cx.kind == "strip" { SublinearFn::Power(0.5) } else { SublinearFn::Const(1.0) });
    let b = al.ray().clone();
    let d = p.d.resolve(&cx.space, &b, &k, &cx.morse())?;
    let kc = al.with_oracle(|o| build_kappa_chain(&cx.space, &b, &k, d, 0.0, Some(o)))?;
    let ratio = match p.multiple {
        Some(m) => {
            let budget = MorseBudget { pairs: 80, seed: cx.seed, ..Default::default() };
            Some(curtainlab::morse::verify_excursion_implies_contracting(&cx.space, &kc, &budget, m)?.ratio)
        }
        None => None,
    };
    Ok((kc, ratio))
}

/// Listing for the `kchain` subcommand.
pub fn kchain_listing(sc: &Scenario) -> Result<String, CliError> {
    let space = spaces::build(&sc.space.kind, &sc.space.params, sc.seed, "space")?;
    let kappa = sc.kappa.as_ref().map(KappaSpec::build).transpose()?;
    let kind = if sc.space.kind == "hyperbolic" { "h2" } else { sc.space.kind.as_str() };
    let cx = Ctx { space, kind, kappa, pool: &sc.pool, seed: sc.seed, params: &sc.experiment.params };
    let p: KchainParams = cx.params()?;
    let (kc, _) = kappa_chain(&cx, &p)?;
    let mut s = kc.records();
    s.push_str(&format!("# spacing t_(i+1) - t_i = 10*D*kappa(t_(i+1)), 10D = {}\n", num(10.0 * kc.d)));
    Ok(s)
}

// ------------------------------------------------------------------ shadows

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ShadowParams {
    #[serde(default = "two_ten")]
    len: f64,
    #[serde(default)]
    start: f64,
    #[serde(default = "two_hundred")]
    window: f64,
    #[serde(default = "forty")]
    pairs: usize,
    #[serde(default = "sixty_four")]
    l_max: usize,
    #[serde(default = "first_power")]
    powers: Vec<i32>,
    spacing: Option<f64>,
    half: Option<f64>,
    min_c_fit: Option<f64>,
    max_c_fit: Option<f64>,
}

fn two_ten() -> f64 {
    210.0
}
fn forty() -> usize {
    40
}
fn first_power() -> Vec<i32> {
    vec![1]
}

fn shadow(cx: &Ctx) -> Result<Outcome, CliError> {
    cx.need_kind(&["h2", "plane"], "shadow")?;
    let p: ShadowParams = cx.params()?;
    let (sp, hf) = if cx.kind == "h2" { (5.0, 4.0) } else { (10.0, 20.0) };
    let al = along(cx, p.len, p.spacing.unwrap_or(sp), p.half.unwrap_or(hf), 1.0)?;
    let k = cx.kappa_or(SublinearFn::Const(1.0));
    let pairs = ex::shadow_pairs(p.start, p.window, p.pairs, cx.seed);
    let (r, pool_id) = al.with_oracle(|o| -> Result<_, CliError> {
        let case = ShadowCase { label: cx.kind.to_string(), oracle: o, ray: al.ray().clone() };
        Ok((ex::shadow_phase(&[case], &[k], &p.powers, &pairs, p.l_max)?, o.pool_id()))
    })?;
    let mut v = Vec::new();
    for row in &r.rows {
        if let Some(m) = p.min_c_fit.filter(|&m| row.c_fit < m) {
            v.push(format!("power {}: C_fit {} below {m}", row.power, row.c_fit));
        }
        if let Some(m) = p.max_c_fit.filter(|&m| row.c_fit >= m) {
            v.push(format!("power {}: C_fit {} not below {m}", row.power, row.c_fit));
        }
    }
    let fits: Vec<String> = r.rows.iter().map(|x| num(x.c_fit)).collect();
    let summary = format!("{} over {} pairs: C_fit {}", cx.kind, pairs.len(), fits.join(", "));
    Ok(outcome(r.table(), r.plot(), Some(pool_id), v, summary))
}

// ------------------------------------------------------------------ hyperbolicity

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeltaParams {
    #[serde(default = "ambient")]
    metric: String,
    #[serde(default = "sixteen")]
    l: usize,
    #[serde(default = "radii")]
    radii: Vec<f64>,
    #[serde(default = "ten_thousand")]
    quadruples: usize,
    #[serde(default = "ten_points")]
    points: usize,
    max_delta: Option<f64>,
    /// `grows` (strictly increasing in the radius) or `bounded` (within twice the first).
    expect: Option<String>,
}

fn ambient() -> String {
    "ambient".into()
}
fn radii() -> Vec<f64> {
    vec![10.0, 20.0, 40.0]
}
fn ten_thousand() -> usize {
    10_000
}
fn ten_points() -> usize {
    10
}

const SCAN_COLUMNS: [&str; 5] = ["metric_kind", "L", "window", "delta_or_thinness", "samples"];

fn expect_trend(expect: Option<&str>, vals: &[f64], what: &str) -> Result<Vec<String>, CliError> {
    let mut v = Vec::new();
    match expect {
        None => {}
        Some("grows") => {
            if !vals.windows(2).all(|w| w[1] > w[0]) {
                v.push(format!("{what} not strictly increasing: {vals:?}"));
            }
        }
        Some("bounded") => {
            if let Some(&f) = vals.first() {
                if vals.iter().any(|&x| x > 2.0 * f + 1e-9) {
                    v.push(format!("{what} exceeds twice its first value: {vals:?}"));
                }
            }
        }
        Some(o) => return Err(CliError::Validation(format!("experiment.params.expect: {o:?} is not grows or bounded"))),
    }
    Ok(v)
}

fn deltascan(cx: &Ctx) -> Result<Outcome, CliError> {
    let p: DeltaParams = cx.params()?;
    let kind = match p.metric.as_str() {
        "ambient" => MetricKind::Ambient,
        "dl" => MetricKind::DL(p.l),
        "dhat" => MetricKind::Dhat(p.l),
        o => return Err(CliError::Validation(format!("experiment.params.metric: {o:?} is not ambient, dl or dhat"))),
    };
    let pool = if kind == MetricKind::Ambient {
        None
    } else if let Some(pool) = cx.explicit_pool()? {
        Some(pool)
    } else {
        if !cx.space.is_planar_chart() {
            return Err(CliError::Validation("pool.probes: pool metrics need explicit probes outside planar spaces".into()));
        }
        let mut probes = Vec::new();
        let c = cx.space.origin().xy().unwrap();
        for &r in &p.radii {
            for f in [-0.5f64, 0.0, 0.5] {
                for (a, b) in [([c[0] - r, c[1] + f * r], [c[0] + r, c[1] + f * r]), ([c[0] + f * r, c[1] - r], [c[0] + f * r, c[1] + r])] {
                    if let (Ok(a), Ok(b)) = (cx.space.point_xy(a[0], a[1]), cx.space.point_xy(b[0], b[1])) {
                        probes.push(cx.space.geodesic(&a, &b)?);
                    }
                }
            }
        }
        Some(cx.probe_pool(probes)?)
    };
    let oracle = pool.as_ref().map(|p| PoolOracle::new(p, SampleBudget::default()));
    let mut t = Table::new(&SCAN_COLUMNS);
    let mut deltas = Vec::new();
    let mut v = Vec::new();
    for &r in &p.radii {
        let w = Window { center: cx.space.origin(), radius: r };
        let rep = delta_scan(&cx.space, kind, &w, p.quadruples, p.points, oracle.as_ref().map(|o| o as &dyn SeparationOracle), cx.seed)?;
        if let Some(m) = p.max_delta.filter(|&m| !(rep.delta < m)) {
            v.push(format!("radius {r}: delta {} not below {m}", rep.delta));
        }
        deltas.push(rep.delta);
        t.push(vec![kind.to_string(), kind.l().map_or(String::new(), |l| l.to_string()), num(r), num(rep.delta), rep.quadruples.to_string()]);
    }
    v.extend(expect_trend(p.expect.as_deref(), &deltas, "delta")?);
    let plot = Plot::new(&format!("four-point delta, {kind}"), "window radius", "delta")
        .with(Series::new(cx.kind, p.radii.iter().copied().zip(deltas.iter().copied()).collect()));
    let summary = format!("{kind} deltas {}", deltas.iter().map(|d| num(*d)).collect::<Vec<_>>().join(", "));
    Ok(outcome(t, plot, pool.as_ref().map(|p| p.id()), v, summary))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridParams {
    #[serde(default = "radii")]
    radii: Vec<f64>,
    /// `grows` checks thinness ≥ ⌊R⌋ − 2, `thin` checks thinness ≤ `max_thin`.
    expect: Option<String>,
    #[serde(default = "three")]
    max_thin: usize,
}

fn gridscan(cx: &Ctx) -> Result<Outcome, CliError> {
    cx.need_kind(&["plane", "h2", "tripod", "tree"], "gridscan")?;
    let p: GridParams = cx.params()?;
    let s = &cx.space;
    let seg = |a: [f64; 2], b: [f64; 2]| -> Result<Geodesic, CliError> { Ok(s.geodesic(&s.point_xy(a[0], a[1])?, &s.point_xy(b[0], b[1])?)?) };
    let mut t = Table::new(&SCAN_COLUMNS);
    let mut th = Vec::new();
    let mut v = Vec::new();
    for &r in &p.radii {
        let (h, k) = match cx.kind {
            "plane" => (vec![seg([-r, 0.0], [r, 0.0])?], vec![seg([0.0, -r], [0.0, r])?]),
            "h2" => {
                let e = (r / 2.0).exp();
                let (a, y) = ((r / 2.0).tanh(), 1.0 / (r / 2.0).cosh());
                (vec![seg([0.0, 1.0 / e], [0.0, e])?], vec![seg([-a, y], [a, y])?])
            }
            _ => {
                let vx = |i| s.vertex(i);
                (vec![s.geodesic(&vx(1)?, &vx(2)?)?], vec![s.geodesic(&vx(1)?, &vx(3)?)?, s.geodesic(&vx(2)?, &vx(3)?)?])
            }
        };
        let grids = grid_search(s, &h, &k, &SampleBudget::default())?;
        let best = grids.first().map_or(0, |g| g.thinness);
        match p.expect.as_deref() {
            None => {}
            Some("grows") if best + 2 < r.floor() as usize => v.push(format!("radius {r}: thinness {best} below ⌊R⌋ − 2")),
            Some("thin") if best > p.max_thin => v.push(format!("radius {r}: thinness {best} above {}", p.max_thin)),
            Some("grows") | Some("thin") => {}
            Some(o) => return Err(CliError::Validation(format!("experiment.params.expect: {o:?} is not grows or thin"))),
        }
        th.push(best as f64);
        t.push(vec!["grid".into(), String::new(), num(r), best.to_string(), grids.len().to_string()]);
    }
    let plot = Plot::new("largest curtain grid", "window radius", "thinness").with(Series::new(cx.kind, p.radii.iter().copied().zip(th.iter().copied()).collect()));
    let summary = format!("thinness {}", th.iter().map(|d| num(*d)).collect::<Vec<_>>().join(", "));
    Ok(outcome(t, plot, None, v, summary))
}
