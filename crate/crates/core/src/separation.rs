//! Pool-relative L-separation: witness search, `d_L` and `d̂` estimates with
//! explicit bound directions, Gromov products, gluing and dualizing chains.
//!
//! Separation quantifies over every chain in the space, so everything here is
//! relative to a finite pool of curtains. Chains found in the pool refute
//! separation; they never prove it.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::sync::{Arc, OnceLock};

use sha2::{Digest, Sha256};

use crate::curtains::{
    crossing_param, is_chain, meets, meets_exact, sample_curtain, Certificate, Chain, ChainCheck, ChainKind, Curtain,
    SampleBudget, Side,
};
use crate::error::{Error, Result};
use crate::geom::{Coords, Geodesic, ModelSpace, Point};
use crate::numeric::cube_tail_bound;

pub const DEFAULT_DENSITY: f64 = 0.5;
pub const DEFAULT_CAP: usize = 20_000;
pub const DEFAULT_LMAX: usize = 64;
pub const POOL_MAGIC: &[u8; 8] = b"CURTPOOL";
pub const POOL_VERSION: u32 = 1;

/// Finite search universe of curtains generated from probe geodesics.
#[derive(Clone, Debug)]
pub struct CurtainPool {
    space: ModelSpace,
    probes: Vec<Arc<Geodesic>>,
    /// `(probe index, pole centre)`, sorted by probe then centre.
    entries: Vec<(u32, f64)>,
    curtains: Vec<Curtain>,
    density: f64,
    id: u64,
}

impl CurtainPool {
    /// Curtains on each probe at centres `½ + k·density`, `k ≥ 1`, while the
    /// pole stays interior.
    pub fn from_probes(space: &ModelSpace, probes: Vec<Geodesic>, density: f64, cap: usize) -> Result<Self> {
        if !(density > 0.0) {
            return Err(Error::InvalidArgument(format!("density must be positive, got {density}")));
        }
        let mut entries = Vec::new();
        for (i, g) in probes.iter().enumerate() {
            if g.space() != space.id() {
                return Err(Error::MixedSpaces);
            }
            let mut k = 1;
            loop {
                let c = 0.5 + density * k as f64;
                if !(c + 0.5 < g.length()) {
                    break;
                }
                entries.push((i as u32, c));
                if entries.len() > cap {
                    return Err(Error::PoolCap { size: entries.len(), cap });
                }
                k += 1;
            }
        }
        Self::assemble(space, probes.into_iter().map(Arc::new).collect(), entries, density)
    }

    /// Pool holding exactly the given curtains; curtains sharing a base share a probe.
    pub fn from_curtains(space: &ModelSpace, curtains: &[Curtain], cap: usize) -> Result<Self> {
        if curtains.len() > cap {
            return Err(Error::PoolCap { size: curtains.len(), cap });
        }
        let mut probes: Vec<Arc<Geodesic>> = Vec::new();
        let mut index: HashMap<u64, u32> = HashMap::new();
        let mut entries = Vec::new();
        for c in curtains {
            if c.space().id() != space.id() {
                return Err(Error::MixedSpaces);
            }
            let id = c.base().id();
            let p = *index.entry(id).or_insert_with(|| {
                probes.push(c.base().clone());
                (probes.len() - 1) as u32
            });
            entries.push((p, c.center()));
        }
        Self::assemble(space, probes, entries, 0.0)
    }

    pub fn from_chain(chain: &Chain, cap: usize) -> Result<Self> {
        let first = chain.curtains.first().ok_or(Error::EmptyPool)?;
        Self::from_curtains(&first.space().clone(), &chain.curtains, cap)
    }

    /// Union of two pools over the same space.
    pub fn union(&self, other: &CurtainPool, cap: usize) -> Result<Self> {
        let all: Vec<Curtain> = self.curtains.iter().chain(&other.curtains).cloned().collect();
        let mut pool = Self::from_curtains(&self.space, &all, cap)?;
        pool.density = if self.density == other.density { self.density } else { 0.0 };
        pool.id = hash_bytes(&pool.to_bytes());
        Ok(pool)
    }

    fn assemble(space: &ModelSpace, probes: Vec<Arc<Geodesic>>, mut entries: Vec<(u32, f64)>, density: f64) -> Result<Self> {
        entries.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        entries.dedup_by(|a, b| a.0 == b.0 && a.1.to_bits() == b.1.to_bits());
        let curtains = entries
            .iter()
            .map(|&(p, c)| Curtain::new(space, probes[p as usize].clone(), c))
            .collect::<Result<Vec<_>>>()?;
        let mut pool = CurtainPool { space: space.clone(), probes, entries, curtains, density, id: 0 };
        pool.id = hash_bytes(&pool.to_bytes());
        Ok(pool)
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn len(&self) -> usize {
        self.curtains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curtains.is_empty()
    }

    pub fn curtains(&self) -> &[Curtain] {
        &self.curtains
    }

    pub fn probes(&self) -> &[Arc<Geodesic>] {
        &self.probes
    }

    /// Probe index of curtain `i`.
    pub fn probe_of(&self, i: usize) -> usize {
        self.entries[i].0 as usize
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(POOL_MAGIC)?;
        w.write_all(&POOL_VERSION.to_le_bytes())?;
        w.write_all(&self.space.id().to_le_bytes())?;
        w.write_all(&self.density.to_le_bytes())?;
        w.write_all(&(self.probes.len() as u32).to_le_bytes())?;
        for g in &self.probes {
            write_coords(w, &g.start().coords)?;
            write_coords(w, &g.end().coords)?;
        }
        w.write_all(&(self.entries.len() as u64).to_le_bytes())?;
        for &(p, c) in &self.entries {
            w.write_all(&p.to_le_bytes())?;
            w.write_all(&c.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(space: &ModelSpace, r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        read_exact(r, &mut magic)?;
        if &magic != POOL_MAGIC {
            return Err(Error::PoolFormat("bad magic".into()));
        }
        let version = u32::from_le_bytes(read_n(r)?);
        if version != POOL_VERSION {
            return Err(Error::PoolFormat(format!("unsupported version {version}")));
        }
        let hash = u64::from_le_bytes(read_n(r)?);
        if hash != space.id() {
            return Err(Error::PoolFormat(format!("pool built for space {hash:016x}, not {:016x}", space.id())));
        }
        let density = f64::from_le_bytes(read_n(r)?);
        let n_probes = u32::from_le_bytes(read_n(r)?) as usize;
        let mut probes = Vec::with_capacity(n_probes.min(1 << 16));
        for _ in 0..n_probes {
            let a = Point { space: space.id(), coords: read_coords(r, 0)? };
            let b = Point { space: space.id(), coords: read_coords(r, 0)? };
            probes.push(Arc::new(space.geodesic(&a, &b)?));
        }
        let n = u64::from_le_bytes(read_n(r)?) as usize;
        let mut entries = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            let p = u32::from_le_bytes(read_n(r)?);
            let c = f64::from_le_bytes(read_n(r)?);
            if p as usize >= probes.len() {
                return Err(Error::PoolFormat(format!("probe index {p} out of range")));
            }
            entries.push((p, c));
        }
        Self::assemble(space, probes, entries, density)
    }

    pub fn from_bytes(space: &ModelSpace, mut bytes: &[u8]) -> Result<Self> {
        Self::read_from(space, &mut bytes)
    }
}

fn hash_bytes(b: &[u8]) -> u64 {
    u64::from_le_bytes(Sha256::digest(b)[..8].try_into().unwrap())
}

fn write_coords<W: Write>(w: &mut W, c: &Coords) -> std::io::Result<()> {
    match c {
        Coords::Xy([x, y]) => {
            w.write_all(&[0])?;
            w.write_all(&x.to_le_bytes())?;
            w.write_all(&y.to_le_bytes())
        }
        Coords::Tree { edge, offset } => {
            w.write_all(&[1])?;
            w.write_all(&(*edge as u32).to_le_bytes())?;
            w.write_all(&offset.to_le_bytes())
        }
        Coords::Product(cs) => {
            w.write_all(&[2])?;
            w.write_all(&(cs.len() as u32).to_le_bytes())?;
            for c in cs {
                write_coords(w, c)?;
            }
            Ok(())
        }
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| Error::PoolFormat(e.to_string()))
}

fn read_n<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    read_exact(r, &mut b)?;
    Ok(b)
}

fn read_coords<R: Read>(r: &mut R, depth: usize) -> Result<Coords> {
    if depth > 8 {
        return Err(Error::PoolFormat("product nesting too deep".into()));
    }
    let [tag] = read_n::<R, 1>(r)?;
    match tag {
        0 => Ok(Coords::Xy([f64::from_le_bytes(read_n(r)?), f64::from_le_bytes(read_n(r)?)])),
        1 => Ok(Coords::Tree { edge: u32::from_le_bytes(read_n(r)?) as usize, offset: f64::from_le_bytes(read_n(r)?) }),
        2 => {
            let n = u32::from_le_bytes(read_n(r)?) as usize;
            (0..n).map(|_| read_coords(r, depth + 1)).collect::<Result<Vec<_>>>().map(Coords::Product)
        }
        t => Err(Error::PoolFormat(format!("unknown coordinate tag {t}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and_ones(&self, other: &Bits) -> impl Iterator<Item = usize> + '_ {
        let other = other.0.clone();
        self.0.iter().zip(other).enumerate().flat_map(|(w, (a, b))| {
            let mut m = a & b;
            std::iter::from_fn(move || {
                if m == 0 {
                    return None;
                }
                let t = m.trailing_zeros() as usize;
                m &= m - 1;
                Some(w * 64 + t)
            })
        })
    }
}

/// Source of separation evidence between curtains.
pub trait SeparationOracle: Sync {
    fn space(&self) -> &ModelSpace;
    fn pool_id(&self) -> u64;
    /// Number of candidate curtains.
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn curtain(&self, i: usize) -> &Curtain;
    /// Are candidates `i` and `j` disjoint?
    fn disjoint(&self, i: usize, j: usize) -> Result<bool>;
    /// Cardinality of the longest chain found meeting candidates `i` and `j`.
    fn sep_count(&self, i: usize, j: usize) -> Result<usize>;
    /// Longest chain found meeting both `h` and `k`.
    fn witness(&self, h: &Curtain, k: &Curtain) -> Result<(usize, Chain)>;
    /// Whether `sep_count` is exact rather than a lower bound.
    fn exact_separation(&self) -> bool {
        false
    }
}

/// Separation evidence from a curtain pool. Meeting sets are computed lazily,
/// exactly where a closed form exists and by sampling otherwise.
pub struct PoolOracle<'a> {
    pool: &'a CurtainPool,
    budget: SampleBudget,
    meeters: Vec<OnceLock<Bits>>,
}

impl<'a> PoolOracle<'a> {
    pub fn new(pool: &'a CurtainPool, budget: SampleBudget) -> Self {
        PoolOracle { pool, budget, meeters: (0..pool.len()).map(|_| OnceLock::new()).collect() }
    }

    pub fn pool(&self) -> &CurtainPool {
        self.pool
    }

    fn meet(&self, h: &Curtain, k: &Curtain) -> Result<bool> {
        match meets_exact(h, k)? {
            Some(b) => Ok(b),
            None => Ok(meets(h, k, &self.budget)?.is_yes()),
        }
    }

    fn meeting_set(&self, h: &Curtain) -> Result<Bits> {
        let mut b = Bits::new(self.pool.len());
        for (j, c) in self.pool.curtains.iter().enumerate() {
            if self.meet(c, h)? {
                b.set(j);
            }
        }
        Ok(b)
    }

    fn meeters(&self, i: usize) -> Result<&Bits> {
        if let Some(b) = self.meeters[i].get() {
            return Ok(b);
        }
        let b = self.meeting_set(&self.pool.curtains[i])?;
        Ok(self.meeters[i].get_or_init(|| b))
    }

    /// Longest single-probe chain among the common meeters, greedy by centre.
    fn greedy(&self, a: &Bits, b: &Bits) -> Vec<usize> {
        let mut best: Vec<usize> = Vec::new();
        let mut cur: Vec<usize> = Vec::new();
        let mut probe = usize::MAX;
        for j in a.and_ones(b) {
            let p = self.pool.probe_of(j);
            if p != probe {
                if cur.len() > best.len() {
                    best = std::mem::take(&mut cur);
                }
                cur.clear();
                probe = p;
            }
            let c = self.pool.entries[j].1;
            if cur.last().map_or(true, |&l| c - self.pool.entries[l].1 > 1.0) {
                cur.push(j);
            }
        }
        if cur.len() > best.len() {
            best = cur;
        }
        best
    }

    fn chain_of(&self, idx: &[usize]) -> Chain {
        let curtains: Vec<Curtain> = idx.iter().map(|&j| self.pool.curtains[j].clone()).collect();
        let centers = curtains.iter().map(|c| c.center()).collect();
        let kind = curtains.first().map_or(ChainKind::General, |c| ChainKind::CommonBase(c.base().id()));
        Chain { curtains, kind, certificate: Certificate::PoleGaps(centers) }
    }
}

impl SeparationOracle for PoolOracle<'_> {
    fn space(&self) -> &ModelSpace {
        &self.pool.space
    }

    fn pool_id(&self) -> u64 {
        self.pool.id
    }

    fn len(&self) -> usize {
        self.pool.len()
    }

    fn curtain(&self, i: usize) -> &Curtain {
        &self.pool.curtains[i]
    }

    fn disjoint(&self, i: usize, j: usize) -> Result<bool> {
        Ok(!self.meet(&self.pool.curtains[i], &self.pool.curtains[j])?)
    }

    fn sep_count(&self, i: usize, j: usize) -> Result<usize> {
        Ok(self.greedy(self.meeters(i)?, self.meeters(j)?).len())
    }

    fn witness(&self, h: &Curtain, k: &Curtain) -> Result<(usize, Chain)> {
        if self.pool.is_empty() {
            return Err(Error::EmptyPool);
        }
        let a = self.meeting_set(h)?;
        let b = self.meeting_set(k)?;
        let idx = self.greedy(&a, &b);
        Ok((idx.len(), self.chain_of(&idx)))
    }
}

/// Exact separation for curtains dual to the axis of a gap-layout strip space.
///
/// Candidates are vertical curtains on the axis `[o, (x_end, 0)]` at a fine grid
/// plus every gap centre. Two such curtains at `r < s` are met by the horizontal
/// curtains whose pole starts below the ceiling at `r + ½`, and, when both sit
/// over the same tall strip, by the horizontal curtains of that strip.
pub struct AxisFamilyOracle {
    space: ModelSpace,
    axis: Arc<Geodesic>,
    curtains: Vec<Curtain>,
    id: u64,
}

impl AxisFamilyOracle {
    pub fn new(space: &ModelSpace, step: f64) -> Result<Self> {
        let strip = space.as_strip().ok_or_else(|| Error::InvalidArgument("axis family needs a strip space".into()))?;
        if strip.ceiling().is_none() {
            return Err(Error::InvalidArgument("axis family needs a gap layout".into()));
        }
        if !(step > 0.0) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
        }
        let axis = Arc::new(space.geodesic(&space.point_xy(0.0, 0.0)?, &space.point_xy(strip.x_end, 0.0)?)?);
        let len = axis.length();
        let mut rs: Vec<f64> = Vec::new();
        let mut k = 1;
        loop {
            let r = 0.5 + step * k as f64;
            if !(r + 0.5 < len) {
                break;
            }
            rs.push(r);
            k += 1;
        }
        rs.extend(strip.gap_centers().iter().copied().filter(|&c| c > 0.5 && c + 0.5 < len));
        rs.sort_by(f64::total_cmp);
        rs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let curtains = rs.iter().map(|&r| Curtain::new(space, axis.clone(), r)).collect::<Result<Vec<_>>>()?;
        let id = hash_bytes(format!("axis-family:{:016x}:{step}", space.id()).as_bytes());
        Ok(AxisFamilyOracle { space: space.clone(), axis, curtains, id })
    }

    pub fn axis(&self) -> &Arc<Geodesic> {
        &self.axis
    }

    /// Closed-form separation count between axis curtains at `r` and `s`.
    pub fn sep_between(&self, r: f64, s: f64) -> usize {
        let strip = self.space.as_strip().unwrap();
        let (r, s) = (r.min(s), r.max(s));
        let ceil = strip.ceiling().unwrap().at(r + 0.5);
        let mut c = (ceil - 1e-12).ceil().max(0.0) as usize;
        let over = |x: f64, (a, b): (f64, f64)| x - 0.5 < b && x + 0.5 > a;
        let first = strip.strips.partition_point(|&(_, b)| b <= r - 0.5);
        if strip.strips[first..].iter().take_while(|&&(a, _)| a < r + 0.5).any(|&st| over(s, st)) {
            c = c.max((strip.height() - 1.0 - 1e-12).ceil() as usize);
        }
        c
    }

    /// Horizontal curtains realising `sep_between`, based on a vertical segment
    /// tall enough to hold them.
    fn materialise(&self, r: f64, s: f64, n: usize) -> Result<Chain> {
        let strip = self.space.as_strip().unwrap();
        let (r, s) = (r.min(s), r.max(s));
        let over = |x: f64, (a, b): (f64, f64)| x - 0.5 < b && x + 0.5 > a;
        let shared = strip.strips.iter().find(|&&st| over(r, st) && over(s, st));
        let right = strip.strips.iter().find(|&&(a, _)| a > r);
        let (xb, top) = match shared.or(right) {
            Some(&(a, b)) => {
                let x = if shared.is_some() { (a.max(r - 0.5) + b.min(s + 0.5)) / 2.0 } else { (a + b) / 2.0 };
                (x, strip.height())
            }
            None => (strip.x_end, strip.ceiling().unwrap().at(strip.x_end)),
        };
        let base = Arc::new(self.space.geodesic(&self.space.point_xy(xb, 0.0)?, &self.space.point_xy(xb, top)?)?);
        let eps = 1e-3;
        let mut curtains = Vec::new();
        for k in 0..n {
            let c = 0.5 + k as f64 * (1.0 + eps) + eps;
            if c + 0.5 >= base.length() {
                break;
            }
            curtains.push(Curtain::new(&self.space, base.clone(), c)?);
        }
        let centers = curtains.iter().map(|c| c.center()).collect();
        Ok(Chain { curtains, kind: ChainKind::CommonBase(base.id()), certificate: Certificate::PoleGaps(centers) })
    }

    fn axis_center(&self, h: &Curtain) -> Result<f64> {
        if h.base().id() != self.axis.id() {
            return Err(Error::InvalidArgument("axis family only answers for curtains dual to the axis".into()));
        }
        Ok(h.center())
    }
}

impl SeparationOracle for AxisFamilyOracle {
    fn space(&self) -> &ModelSpace {
        &self.space
    }

    fn pool_id(&self) -> u64 {
        self.id
    }

    fn len(&self) -> usize {
        self.curtains.len()
    }

    fn curtain(&self, i: usize) -> &Curtain {
        &self.curtains[i]
    }

    fn disjoint(&self, i: usize, j: usize) -> Result<bool> {
        Ok((self.curtains[i].center() - self.curtains[j].center()).abs() > 1.0)
    }

    fn sep_count(&self, i: usize, j: usize) -> Result<usize> {
        Ok(self.sep_between(self.curtains[i].center(), self.curtains[j].center()))
    }

    fn witness(&self, h: &Curtain, k: &Curtain) -> Result<(usize, Chain)> {
        let (r, s) = (self.axis_center(h)?, self.axis_center(k)?);
        let n = self.sep_between(r, s);
        Ok((n, self.materialise(r, s, n)?))
    }

    fn exact_separation(&self) -> bool {
        true
    }
}

/// Longest chain found meeting both curtains.
pub fn separation_witness(h: &Curtain, k: &Curtain, oracle: &dyn SeparationOracle) -> Result<(usize, Chain)> {
    if oracle.is_empty() {
        return Err(Error::EmptyPool);
    }
    if h.space().id() != oracle.space().id() || k.space().id() != oracle.space().id() {
        return Err(Error::MixedSpaces);
    }
    oracle.witness(h, k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Lower,
    Upper,
    Exact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricEstimate {
    pub value: f64,
    pub bound: Bound,
    pub l_max: Option<usize>,
    pub pool_id: u64,
    /// Analytic tail included in an upper bound.
    pub tail: f64,
}

impl MetricEstimate {
    fn new(value: f64, bound: Bound, l_max: Option<usize>, pool_id: u64) -> Self {
        MetricEstimate { value, bound, l_max, pool_id, tail: 0.0 }
    }
}

/// `d_L` estimate together with the chain realising it.
#[derive(Clone, Debug)]
pub struct LChain {
    pub l: usize,
    pub estimate: MetricEstimate,
    /// Oracle indices of the chain, ordered from `x` to `y`.
    pub chain: Vec<usize>,
    /// Crossing parameters of the chain along `[x, y]`.
    pub params: Vec<f64>,
    pub candidates: usize,
}

/// Candidates separating `x` from `y`, sorted along `[x, y]`, with their pairwise
/// disjointness and separation counts.
struct Problem {
    idx: Vec<usize>,
    params: Vec<f64>,
    /// Row-major `sep[a·n + b]` for `a < b`; `NONE` when the pair meets or is misordered.
    sep: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl Problem {
    fn sep(&self, a: usize, b: usize) -> Option<usize> {
        let v = self.sep[a * self.idx.len() + b];
        (v != NONE).then_some(v as usize)
    }
}

fn build_problem(oracle: &dyn SeparationOracle, x: &Point, y: &Point) -> Result<Problem> {
    let space = oracle.space();
    let g = space.geodesic(x, y)?;
    let mut cands: Vec<(f64, usize)> = Vec::new();
    for i in 0..oracle.len() {
        let h = oracle.curtain(i);
        let (sx, sy) = (h.side(x)?, h.side(y)?);
        if sx == Side::On || sy == Side::On || sx == sy {
            continue;
        }
        if let Some(t) = crossing_param(h, &g)? {
            cands.push((t, i));
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let n = cands.len();
    let mut sep = vec![NONE; n * n];
    for a in 0..n {
        for b in a + 1..n {
            if cands[b].0 > cands[a].0 && oracle.disjoint(cands[a].1, cands[b].1)? {
                sep[a * n + b] = oracle.sep_count(cands[a].1, cands[b].1)?.min(NONE as usize - 1) as u32;
            }
        }
    }
    Ok(Problem { idx: cands.iter().map(|c| c.1).collect(), params: cands.iter().map(|c| c.0).collect(), sep })
}

/// Longest chain whose consecutive pairs have separation count at most `l`,
/// lexicographically smallest in crossing parameters among the longest.
fn solve(p: &Problem, l: usize) -> Vec<usize> {
    let n = p.idx.len();
    let ok = |a: usize, b: usize| p.sep(a, b).map_or(false, |s| s <= l);
    let mut f = vec![1usize; n];
    for a in (0..n).rev() {
        for b in a + 1..n {
            if ok(a, b) && f[b] + 1 > f[a] {
                f[a] = f[b] + 1;
            }
        }
    }
    let Some(&best) = f.iter().max() else { return vec![] };
    let mut out = vec![f.iter().position(|&v| v == best).unwrap()];
    while f[*out.last().unwrap()] > 1 {
        let a = *out.last().unwrap();
        let b = (a + 1..n).find(|&b| ok(a, b) && f[b] + 1 == f[a]).unwrap();
        out.push(b);
    }
    out
}

/// `d_L(x, y)` lower estimates for every `L = 1..=l_max`.
pub fn lchain_profile(oracle: &dyn SeparationOracle, x: &Point, y: &Point, l_max: usize) -> Result<Vec<LChain>> {
    let space = oracle.space();
    space.check(x)?;
    space.check(y)?;
    if x == y || space.distance(x, y)? == 0.0 {
        return Ok((1..=l_max)
            .map(|l| LChain {
                l,
                estimate: MetricEstimate::new(0.0, Bound::Exact, None, oracle.pool_id()),
                chain: vec![],
                params: vec![],
                candidates: 0,
            })
            .collect());
    }
    let p = build_problem(oracle, x, y)?;
    let thresholds: Vec<usize> =
        p.sep.iter().filter(|&&v| v != NONE).map(|&v| v as usize).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let mut cache: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut out = Vec::with_capacity(l_max);
    for l in 1..=l_max {
        let key = thresholds.partition_point(|&s| s <= l);
        let sol = cache.entry(key).or_insert_with(|| solve(&p, l)).clone();
        out.push(LChain {
            l,
            estimate: MetricEstimate::new(1.0 + sol.len() as f64, Bound::Lower, None, oracle.pool_id()),
            chain: sol.iter().map(|&a| p.idx[a]).collect(),
            params: sol.iter().map(|&a| p.params[a]).collect(),
            candidates: p.idx.len(),
        });
    }
    Ok(out)
}

pub fn longest_lchain(oracle: &dyn SeparationOracle, x: &Point, y: &Point, l: usize) -> Result<LChain> {
    if l == 0 {
        return Err(Error::InvalidArgument("L must be at least 1".into()));
    }
    Ok(lchain_profile(oracle, x, y, l)?.pop().unwrap())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bounds {
    pub lower: MetricEstimate,
    pub upper: MetricEstimate,
}

/// Truncated `d̂` bounds from a profile of `d_L` lower estimates.
pub fn dhat_from_profile(profile: &[LChain], d: f64, pool_id: u64) -> Bounds {
    let m = profile.len();
    if d == 0.0 {
        let z = MetricEstimate::new(0.0, Bound::Exact, Some(m), pool_id);
        return Bounds { lower: z.clone(), upper: z };
    }
    let cap = (d - 1e-9).ceil().max(1.0);
    let mut lo = 0.0;
    let mut hi = 0.0;
    for e in profile {
        let w = (e.l as f64).powi(-3);
        lo += e.estimate.value * w;
        hi += e.estimate.value.max(cap.min(1.0 + d.ceil())) * w;
    }
    let tail = (1.0 + d) * cube_tail_bound(m);
    let lower = MetricEstimate::new(lo, Bound::Lower, Some(m), pool_id);
    let mut upper = MetricEstimate::new(hi + tail, Bound::Upper, Some(m), pool_id);
    upper.tail = tail;
    Bounds { lower, upper }
}

pub fn dhat(oracle: &dyn SeparationOracle, x: &Point, y: &Point, l_max: usize) -> Result<Bounds> {
    if l_max == 0 {
        return Err(Error::InvalidArgument("L_max must be at least 1".into()));
    }
    let d = oracle.space().distance(x, y)?;
    let profile = lchain_profile(oracle, x, y, l_max)?;
    Ok(dhat_from_profile(&profile, d, oracle.pool_id()))
}

/// Gromov product interval assembled from `d̂` bounds, clamped at 0.
pub fn gromov_from_bounds(ox: &Bounds, oy: &Bounds, xy: &Bounds) -> Bounds {
    let lo = (0.5 * (ox.lower.value + oy.lower.value - xy.upper.value)).max(0.0);
    let hi = (0.5 * (ox.upper.value + oy.upper.value - xy.lower.value)).max(0.0);
    let exact = [ox, oy, xy].iter().all(|b| b.lower.bound == Bound::Exact);
    let (bl, bu) = if exact { (Bound::Exact, Bound::Exact) } else { (Bound::Lower, Bound::Upper) };
    let mut upper = MetricEstimate::new(hi, bu, ox.upper.l_max, ox.upper.pool_id);
    upper.tail = 0.5 * (ox.upper.tail + oy.upper.tail);
    Bounds { lower: MetricEstimate::new(lo, bl, ox.lower.l_max, ox.lower.pool_id), upper }
}

pub fn gromov_product(oracle: &dyn SeparationOracle, x: &Point, y: &Point, o: &Point, l_max: usize) -> Result<Bounds> {
    if x == o || y == o {
        let z = MetricEstimate::new(0.0, Bound::Exact, Some(l_max), oracle.pool_id());
        return Ok(Bounds { lower: z.clone(), upper: z });
    }
    let ox = dhat(oracle, o, x, l_max)?;
    if x == y {
        return Ok(ox);
    }
    let oy = dhat(oracle, o, y, l_max)?;
    let xy = dhat(oracle, x, y, l_max)?;
    Ok(gromov_from_bounds(&ox, &oy, &xy))
}

/// Does some sampled point of `k` lie on side `want` of `h`?
fn has_point_on(h: &Curtain, want: Side, k: &Curtain, budget: &SampleBudget) -> Result<bool> {
    if h.side(&k.center_point())? == want {
        return Ok(true);
    }
    for p in [k.base().eval(k.pole().0), k.base().eval(k.pole().1)] {
        if h.side(&p)? == want {
            return Ok(true);
        }
    }
    for p in sample_curtain(k, budget)? {
        if h.side(&p)? == want {
            return Ok(true);
        }
    }
    Ok(false)
}

fn opposite(s: Side) -> Side {
    match s {
        Side::Minus => Side::Plus,
        Side::Plus => Side::Minus,
        Side::On => Side::On,
    }
}

/// Glue `c = {h_1..h_n}` and `c' = {h'_1..h'_m}` into
/// `{h_1..h_{n-1}, h'_{L+2}..h'_m}` of cardinality `n + m − L − 2`.
pub fn glue_chains(c: &Chain, c2: &Chain, l: usize, budget: &SampleBudget) -> Result<Chain> {
    let (n, m) = (c.len(), c2.len());
    if n < 2 || m < l + 2 {
        return Err(Error::InvalidArgument(format!("need |c| > 1 and |c'| > L+1, got {n}, {m} with L = {l}")));
    }
    let h1p = &c2.curtains[0];
    let toward = h1p.side(&c2.curtains[1].center_point())?;
    if toward == Side::On {
        return Err(Error::HypothesisUnverified("h'_2 is not off h'_1".into()));
    }
    for (j, h) in c.curtains.iter().enumerate() {
        if !has_point_on(h1p, opposite(toward), h, budget)? {
            return Err(Error::HypothesisUnverified(format!("no point of h_{} found beyond h'_1", j + 1)));
        }
    }
    let hn = &c.curtains[n - 1];
    let back = hn.side(&c.curtains[n - 2].center_point())?;
    if back == Side::On {
        return Err(Error::HypothesisUnverified("h_{n-1} is not off h_n".into()));
    }
    for (i, h) in c2.curtains.iter().enumerate() {
        if !has_point_on(hn, opposite(back), h, budget)? {
            return Err(Error::HypothesisUnverified(format!("no point of h'_{} found beyond h_n", i + 1)));
        }
    }
    let glued: Vec<Curtain> = c.curtains[..n - 1].iter().chain(&c2.curtains[l + 1..]).cloned().collect();
    debug_assert_eq!(glued.len(), n + m - l - 2);
    match is_chain(&glued, budget)? {
        ChainCheck::Valid(ch) => Ok(ch),
        ChainCheck::Invalid(why) => Err(Error::HypothesisUnverified(format!("glued set is not a chain: {why}"))),
    }
}

/// Cardinality bound for chains meeting a geodesic that backtracks through an
/// `L`-chain.
pub fn backtrack_bound(l: usize) -> usize {
    1 + l / 2
}

/// Curtains dual to `[x, y]` at the crossings of every `(4L+10)`-th element of
/// `c`, each separating the first element of `c` from the last.
pub fn dualize_chain(
    c: &Chain,
    x: &Point,
    y: &Point,
    l: usize,
    n: usize,
    oracle: Option<&dyn SeparationOracle>,
    budget: &SampleBudget,
) -> Result<Chain> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let need = (4 * l + 10) * n;
    if c.len() < need {
        return Err(Error::InsufficientLength { need, have: c.len() });
    }
    let first = &c.curtains[0];
    let space = first.space().clone();
    let g = Arc::new(space.geodesic(x, y)?);
    let mut taus = Vec::with_capacity(c.len());
    for (j, h) in c.curtains.iter().enumerate() {
        let (sx, sy) = (h.side(x)?, h.side(y)?);
        if sx == Side::On || sy == Side::On || sx == sy {
            return Err(Error::InvalidArgument(format!("curtain {j} does not separate x from y")));
        }
        taus.push(crossing_param(h, &g)?.unwrap());
    }
    let mut order: Vec<usize> = (0..c.len()).collect();
    order.sort_by(|&a, &b| taus[a].total_cmp(&taus[b]));
    let total = c.len();
    let span = (total - 3) as f64 / n as f64;
    let mut duals: Vec<Curtain> = Vec::new();
    for k in 0..=n {
        let pos = 1 + (k as f64 * span).round() as usize;
        let t = taus[order[pos.min(total - 2)]];
        if !(t - 0.5 > 0.0 && t + 0.5 < g.length()) {
            continue;
        }
        if duals.last().map_or(false, |d| t - d.center() <= 1.0) {
            continue;
        }
        duals.push(Curtain::new(&space, g.clone(), t)?);
    }
    let (hf, hl) = (&c.curtains[order[0]], &c.curtains[order[total - 1]]);
    for (i, d) in duals.iter().enumerate() {
        let a = d.side(&hf.center_point())?;
        let b = d.side(&hl.center_point())?;
        if a == Side::On || b == Side::On || a == b {
            return Err(Error::HypothesisUnverified(format!("dual {i} does not separate the ends of the chain")));
        }
        for (p, want) in [(hf, a), (hl, b)] {
            if has_point_on(d, opposite(want), p, budget)? {
                return Err(Error::HypothesisUnverified(format!("dual {i} meets an end of the chain")));
            }
        }
    }
    if let Some(o) = oracle {
        for w in duals.windows(2) {
            let (s, _) = o.witness(&w[0], &w[1])?;
            if s > l {
                return Err(Error::HypothesisUnverified(format!("pool refutes {l}-separation of consecutive duals ({s})")));
            }
        }
    }
    let centers = duals.iter().map(|d| d.center()).collect();
    Ok(Chain { curtains: duals, kind: ChainKind::CommonBase(g.id()), certificate: Certificate::PoleGaps(centers) })
}
