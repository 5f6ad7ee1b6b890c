//! Model spaces: exact distances, geodesics and closest-point projections.

pub mod hyperbolic;
pub mod plane;
pub mod polygon;
pub mod strip;
pub mod tree;

use std::fmt;
use std::sync::Arc;

use rand::Rng as _;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numeric::convex_min;
use crate::rng::{derive, Rng};

pub use hyperbolic::HypGeo;
pub use polygon::Polygon;
pub use strip::{StripLayout, StripSpace};
pub use tree::Tree;

pub type Xy = [f64; 2];

/// Default projection tolerance.
pub const PROJ_TOL: f64 = 1e-9;
/// Default ray truncation length.
pub const T_MAX: f64 = 1e4;
/// Longest hyperbolic segment representable in the upper half-plane chart
/// without overflowing `f64` coordinates.
pub const HYP_MAX_LEN: f64 = 600.0;

#[derive(Clone, Debug, PartialEq)]
pub enum Coords {
    Xy(Xy),
    Tree { edge: usize, offset: f64 },
    Product(Vec<Coords>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub space: u64,
    pub coords: Coords,
}

impl Point {
    pub fn xy(&self) -> Option<Xy> {
        match self.coords {
            Coords::Xy(p) => Some(p),
            _ => None,
        }
    }

    fn bits(&self, out: &mut Vec<u64>) {
        fn walk(c: &Coords, out: &mut Vec<u64>) {
            match c {
                Coords::Xy([x, y]) => {
                    out.push(0);
                    out.push(x.to_bits());
                    out.push(y.to_bits());
                }
                Coords::Tree { edge, offset } => {
                    out.push(1);
                    out.push(*edge as u64);
                    out.push(offset.to_bits());
                }
                Coords::Product(cs) => {
                    out.push(2);
                    out.push(cs.len() as u64);
                    for c in cs {
                        walk(c, out);
                    }
                }
            }
        }
        walk(&self.coords, out)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn walk(c: &Coords, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match c {
                Coords::Xy([x, y]) => write!(f, "({x},{y})"),
                Coords::Tree { edge, offset } => write!(f, "(e{edge}@{offset})"),
                Coords::Product(cs) => {
                    write!(f, "[")?;
                    for (i, c) in cs.iter().enumerate() {
                        if i > 0 {
                            write!(f, ";")?;
                        }
                        walk(c, f)?;
                    }
                    write!(f, "]")
                }
            }
        }
        walk(&self.coords, f)
    }
}

#[derive(Clone, Debug)]
pub enum Kind {
    Plane,
    Hyperbolic,
    Tree(Tree),
    Product(Vec<ModelSpace>),
    Polygon(Polygon),
    Strip(StripSpace),
}

/// A CAT(0) model space. Cheap to clone; all data is shared and immutable.
#[derive(Clone, Debug)]
pub struct ModelSpace {
    inner: Arc<SpaceInner>,
}

#[derive(Debug)]
struct SpaceInner {
    id: u64,
    descriptor: String,
    kind: Kind,
}

fn hash_str(s: &str) -> u64 {
    let digest = Sha256::digest(s.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

impl ModelSpace {
    fn build(descriptor: String, kind: Kind) -> Self {
        let id = hash_str(&descriptor);
        ModelSpace { inner: Arc::new(SpaceInner { id, descriptor, kind }) }
    }

    pub fn plane() -> Self {
        Self::build("plane".into(), Kind::Plane)
    }

    pub fn hyperbolic() -> Self {
        Self::build("h2".into(), Kind::Hyperbolic)
    }

    pub fn tree(n_vertices: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let t = Tree::new(n_vertices, edges)?;
        let desc = format!("tree:{}", t.descriptor());
        Ok(Self::build(desc, Kind::Tree(t)))
    }

    /// Three legs of length `leg` meeting at vertex 0; tips are vertices 1, 2, 3.
    pub fn tripod(leg: f64) -> Result<Self> {
        Self::tree(4, &[(0, 1, leg), (0, 2, leg), (0, 3, leg)])
    }

    pub fn product(factors: Vec<ModelSpace>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidSpace("product needs at least one factor".into()));
        }
        let desc = format!(
            "product({})",
            factors.iter().map(|f| f.descriptor().to_string()).collect::<Vec<_>>().join(";")
        );
        Ok(Self::build(desc, Kind::Product(factors)))
    }

    pub fn polygon(vertices: Vec<Xy>) -> Result<Self> {
        let p = Polygon::new(vertices)?;
        let desc = format!("polygon:{}", p.descriptor());
        Ok(Self::build(desc, Kind::Polygon(p)))
    }

    pub fn strip(layout: StripLayout) -> Result<Self> {
        let s = StripSpace::new(layout)?;
        let desc = format!("strip:{}", s.layout.descriptor());
        Ok(Self::build(desc, Kind::Strip(s)))
    }

    pub fn id(&self) -> u64 {
        self.inner.id
    }

    pub fn descriptor(&self) -> &str {
        &self.inner.descriptor
    }

    pub fn kind(&self) -> &Kind {
        &self.inner.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind() {
            Kind::Plane => "plane",
            Kind::Hyperbolic => "h2",
            Kind::Tree(_) => "tree",
            Kind::Product(_) => "product",
            Kind::Polygon(_) => "polygon",
            Kind::Strip(_) => "strip",
        }
    }

    /// Polygon backing a polygon or strip space.
    pub fn as_polygon(&self) -> Option<&Polygon> {
        match self.kind() {
            Kind::Polygon(p) => Some(p),
            Kind::Strip(s) => Some(&s.polygon),
            _ => None,
        }
    }

    pub fn as_tree(&self) -> Option<&Tree> {
        match self.kind() {
            Kind::Tree(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_strip(&self) -> Option<&StripSpace> {
        match self.kind() {
            Kind::Strip(s) => Some(s),
            _ => None,
        }
    }

    /// True for the kinds whose points are planar coordinates.
    pub fn is_planar_chart(&self) -> bool {
        matches!(self.kind(), Kind::Plane | Kind::Hyperbolic | Kind::Polygon(_) | Kind::Strip(_))
    }

    /// The basepoint `o`.
    pub fn origin(&self) -> Point {
        let coords = match self.kind() {
            Kind::Plane | Kind::Polygon(_) | Kind::Strip(_) => {
                let p = match self.kind() {
                    Kind::Polygon(p) => p.vertices()[0],
                    _ => [0.0, 0.0],
                };
                Coords::Xy(p)
            }
            Kind::Hyperbolic => Coords::Xy([0.0, 1.0]),
            Kind::Tree(t) => t.vertex_coords(0),
            Kind::Product(fs) => Coords::Product(fs.iter().map(|f| f.origin().coords).collect()),
        };
        Point { space: self.id(), coords }
    }

    pub fn point_xy(&self, x: f64, y: f64) -> Result<Point> {
        let p = Point { space: self.id(), coords: Coords::Xy([x, y]) };
        self.check(&p)?;
        Ok(p)
    }

    pub fn point_tree(&self, edge: usize, offset: f64) -> Result<Point> {
        let p = Point { space: self.id(), coords: Coords::Tree { edge, offset } };
        self.check(&p)?;
        Ok(p)
    }

    pub fn point_product(&self, factors: Vec<Point>) -> Result<Point> {
        let p = Point { space: self.id(), coords: Coords::Product(factors.into_iter().map(|f| f.coords).collect()) };
        self.check(&p)?;
        Ok(p)
    }

    /// Tree vertex as a point.
    pub fn vertex(&self, v: usize) -> Result<Point> {
        let t = self.as_tree().ok_or_else(|| Error::InvalidArgument("not a tree".into()))?;
        if v >= t.n_vertices() {
            return Err(Error::OutsideDomain(format!("vertex {v}")));
        }
        Ok(Point { space: self.id(), coords: t.vertex_coords(v) })
    }

    fn check_coords(&self, c: &Coords) -> Result<()> {
        match (self.kind(), c) {
            (Kind::Plane, Coords::Xy([x, y])) if x.is_finite() && y.is_finite() => Ok(()),
            (Kind::Hyperbolic, Coords::Xy([x, y])) if x.is_finite() && y.is_finite() && *y > 0.0 => Ok(()),
            (Kind::Tree(t), Coords::Tree { edge, offset }) => t.check(*edge, *offset),
            (Kind::Polygon(p), Coords::Xy(q)) => {
                if p.contains(*q) {
                    Ok(())
                } else {
                    Err(Error::OutsideDomain(format!("({}, {}) not in polygon", q[0], q[1])))
                }
            }
            (Kind::Strip(s), Coords::Xy(q)) => {
                if s.polygon.contains(*q) {
                    Ok(())
                } else {
                    Err(Error::OutsideDomain(format!("({}, {}) not in strip region", q[0], q[1])))
                }
            }
            (Kind::Product(fs), Coords::Product(cs)) if fs.len() == cs.len() => {
                for (f, c) in fs.iter().zip(cs) {
                    f.check_coords(c)?;
                }
                Ok(())
            }
            _ => Err(Error::OutsideDomain(format!("coordinates {c:?} invalid for {}", self.kind_name()))),
        }
    }

    /// Validate space membership and chart constraints.
    pub fn check(&self, p: &Point) -> Result<()> {
        if p.space != self.id() {
            return Err(Error::MixedSpaces);
        }
        self.check_coords(&p.coords)
    }

    fn same(&self, p: &Point, q: &Point) -> Result<()> {
        if p.space != self.id() || q.space != self.id() {
            return Err(Error::MixedSpaces);
        }
        Ok(())
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.same(p, q)?;
        self.dist_coords(&p.coords, &q.coords)
    }

    fn dist_coords(&self, p: &Coords, q: &Coords) -> Result<f64> {
        match (self.kind(), p, q) {
            (Kind::Plane, Coords::Xy(a), Coords::Xy(b)) => Ok(plane::dist(*a, *b)),
            (Kind::Hyperbolic, Coords::Xy(a), Coords::Xy(b)) => {
                if a[1] <= 0.0 || b[1] <= 0.0 {
                    return Err(Error::OutsideDomain("hyperbolic point with y <= 0".into()));
                }
                Ok(hyperbolic::dist(*a, *b))
            }
            (Kind::Tree(t), Coords::Tree { edge: e1, offset: o1 }, Coords::Tree { edge: e2, offset: o2 }) => {
                Ok(t.dist((*e1, *o1), (*e2, *o2)))
            }
            (Kind::Polygon(poly), Coords::Xy(a), Coords::Xy(b)) => poly.dist(*a, *b),
            (Kind::Strip(s), Coords::Xy(a), Coords::Xy(b)) => s.polygon.dist(*a, *b),
            (Kind::Product(fs), Coords::Product(ps), Coords::Product(qs)) if ps.len() == fs.len() && qs.len() == fs.len() => {
                let mut s = 0.0;
                for ((f, a), b) in fs.iter().zip(ps).zip(qs) {
                    let d = f.dist_coords(a, b)?;
                    s += d * d;
                }
                Ok(s.sqrt())
            }
            _ => Err(Error::OutsideDomain(format!("coordinates invalid for {}", self.kind_name()))),
        }
    }

    pub fn geodesic(&self, p: &Point, q: &Point) -> Result<Geodesic> {
        self.same(p, q)?;
        self.check(p)?;
        self.check(q)?;
        let (length, path) = self.path_between(&p.coords, &q.coords)?;
        Ok(Geodesic::new(self.id(), p.clone(), q.clone(), length, path))
    }

    fn path_between(&self, p: &Coords, q: &Coords) -> Result<(f64, Path)> {
        Ok(match (self.kind(), p, q) {
            (Kind::Plane, Coords::Xy(a), Coords::Xy(b)) => {
                let (len, u) = plane::direction(*a, *b);
                (len, Path::Line { a: *a, u })
            }
            (Kind::Hyperbolic, Coords::Xy(a), Coords::Xy(b)) => {
                let g = HypGeo::through(*a, *b);
                (hyperbolic::dist(*a, *b), Path::Hyp(g))
            }
            (Kind::Tree(t), Coords::Tree { edge: e1, offset: o1 }, Coords::Tree { edge: e2, offset: o2 }) => {
                let tp = t.path((*e1, *o1), (*e2, *o2));
                (tp.length(), Path::Tree(tp))
            }
            (Kind::Polygon(poly), Coords::Xy(a), Coords::Xy(b)) => {
                let pl = poly.shortest_path(*a, *b)?;
                (pl.length(), Path::Polyline(pl))
            }
            (Kind::Strip(s), Coords::Xy(a), Coords::Xy(b)) => {
                let pl = s.polygon.shortest_path(*a, *b)?;
                (pl.length(), Path::Polyline(pl))
            }
            (Kind::Product(fs), Coords::Product(ps), Coords::Product(qs)) => {
                let mut factors = Vec::with_capacity(fs.len());
                let mut total = 0.0;
                for ((f, a), b) in fs.iter().zip(ps).zip(qs) {
                    let pa = Point { space: f.id(), coords: a.clone() };
                    let pb = Point { space: f.id(), coords: b.clone() };
                    let g = f.geodesic(&pa, &pb)?;
                    total += g.length() * g.length();
                    factors.push(g);
                }
                let len = total.sqrt();
                let speeds = factors.iter().map(|g| if len > 0.0 { g.length() / len } else { 0.0 }).collect();
                (len, Path::Product { factors, speeds })
            }
            _ => return Err(Error::OutsideDomain(format!("coordinates invalid for {}", self.kind_name()))),
        })
    }

    /// Closest-point projection onto `g`: returns the parameter and the distance.
    pub fn project(&self, p: &Point, g: &Geodesic, tol: f64) -> Result<Projection> {
        if p.space != self.id() || g.space != self.id() {
            return Err(Error::MixedSpaces);
        }
        if g.length() == 0.0 {
            let d = self.distance(p, g.start())?;
            return Ok(Projection { t: 0.0, dist: d, zero_length: true });
        }
        let closed = match (&g.path, &p.coords) {
            (Path::Line { a, u }, Coords::Xy(q)) => Some(plane::project_param(*a, *u, g.length(), *q)),
            (Path::Hyp(h), Coords::Xy(q)) => Some(h.project_param(*q, g.length())),
            (Path::Tree(_), _) => {
                let dx = self.distance(g.start(), p)?;
                let dy = self.distance(g.end(), p)?;
                Some(((dx + g.length() - dy) / 2.0).clamp(0.0, g.length()))
            }
            (Path::Polyline(pl), Coords::Xy(q)) => self.as_polygon().and_then(|poly| poly.straight_projection(pl, *q)),
            _ => None,
        };
        let t = match closed {
            Some(t) => t,
            None => {
                let mut err = None;
                let (t, _) = convex_min(
                    |t| match self.distance(p, &g.eval(t)) {
                        Ok(d) => d,
                        Err(e) => {
                            err = Some(e);
                            f64::INFINITY
                        }
                    },
                    0.0,
                    g.length(),
                    tol,
                );
                if let Some(e) = err {
                    return Err(e);
                }
                t
            }
        };
        let dist = self.distance(p, &g.eval(t))?;
        Ok(Projection { t, dist, zero_length: false })
    }

    /// Projection by the generic golden-section solver only, for cross-checks.
    pub fn project_numeric(&self, p: &Point, g: &Geodesic, tol: f64) -> Result<Projection> {
        if g.length() == 0.0 {
            let d = self.distance(p, g.start())?;
            return Ok(Projection { t: 0.0, dist: d, zero_length: true });
        }
        let (t, dist) = convex_min(|t| self.distance(p, &g.eval(t)).unwrap_or(f64::INFINITY), 0.0, g.length(), tol);
        Ok(Projection { t, dist, zero_length: false })
    }

    /// Geodesic starting at `p` in chart direction `angle`, of the given length.
    /// Planar kinds only; polygon and strip kinds stop at the boundary.
    pub fn shoot(&self, p: &Point, angle: f64, length: f64) -> Result<Point> {
        let q = p.xy().ok_or_else(|| Error::InvalidArgument("shoot needs planar coordinates".into()))?;
        let out = match self.kind() {
            Kind::Plane => [q[0] + length * angle.cos(), q[1] + length * angle.sin()],
            Kind::Hyperbolic => hyperbolic::exp(q, angle, length),
            Kind::Polygon(poly) => poly.shoot(q, angle, length),
            Kind::Strip(s) => s.polygon.shoot(q, angle, length),
            _ => return Err(Error::InvalidArgument("shoot needs a planar kind".into())),
        };
        Ok(Point { space: self.id(), coords: Coords::Xy(out) })
    }

    /// Random point at distance at most `radius` from `center`.
    pub fn sample_near(&self, center: &Point, radius: f64, rng: &mut Rng) -> Result<Point> {
        match (self.kind(), &center.coords) {
            (Kind::Plane, Coords::Xy(c)) => {
                let r = radius * rng.gen::<f64>().sqrt();
                let a = rng.gen::<f64>() * std::f64::consts::TAU;
                Ok(Point { space: self.id(), coords: Coords::Xy([c[0] + r * a.cos(), c[1] + r * a.sin()]) })
            }
            (Kind::Hyperbolic, Coords::Xy(c)) => {
                let r = radius * rng.gen::<f64>();
                let a = rng.gen::<f64>() * std::f64::consts::TAU;
                Ok(Point { space: self.id(), coords: Coords::Xy(hyperbolic::exp(*c, a, r)) })
            }
            (Kind::Tree(t), _) => {
                for _ in 0..10_000 {
                    let (e, o) = t.random_point(rng);
                    let p = Point { space: self.id(), coords: Coords::Tree { edge: e, offset: o } };
                    if self.distance(center, &p)? <= radius {
                        return Ok(p);
                    }
                }
                Ok(center.clone())
            }
            (Kind::Polygon(_) | Kind::Strip(_), Coords::Xy(c)) => {
                let poly = self.as_polygon().unwrap();
                for _ in 0..10_000 {
                    let r = radius * rng.gen::<f64>().sqrt();
                    let a = rng.gen::<f64>() * std::f64::consts::TAU;
                    let q = [c[0] + r * a.cos(), c[1] + r * a.sin()];
                    if poly.contains(q) {
                        let p = Point { space: self.id(), coords: Coords::Xy(q) };
                        if self.distance(center, &p)? <= radius {
                            return Ok(p);
                        }
                    }
                }
                Ok(center.clone())
            }
            (Kind::Product(fs), Coords::Product(cs)) => {
                let share = radius / (fs.len() as f64).sqrt();
                let mut out = Vec::with_capacity(fs.len());
                for (f, c) in fs.iter().zip(cs) {
                    let fc = Point { space: f.id(), coords: c.clone() };
                    out.push(f.sample_near(&fc, share, rng)?.coords);
                }
                Ok(Point { space: self.id(), coords: Coords::Product(out) })
            }
            _ => Err(Error::OutsideDomain("sample center invalid".into())),
        }
    }

    /// Random point anywhere in a bounded space (trees, polygons, strips).
    pub fn sample_anywhere(&self, rng: &mut Rng) -> Option<Point> {
        match self.kind() {
            Kind::Tree(t) => {
                let (e, o) = t.random_point(rng);
                Some(Point { space: self.id(), coords: Coords::Tree { edge: e, offset: o } })
            }
            Kind::Polygon(_) | Kind::Strip(_) => {
                let poly = self.as_polygon().unwrap();
                poly.random_point(rng).map(|q| Point { space: self.id(), coords: Coords::Xy(q) })
            }
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub t: f64,
    pub dist: f64,
    /// Set when the geodesic is degenerate; `t` is 0 by convention.
    pub zero_length: bool,
}

#[derive(Clone, Debug)]
pub enum Path {
    Line { a: Xy, u: Xy },
    Hyp(HypGeo),
    Tree(tree::TreePath),
    Polyline(polygon::Polyline),
    Product { factors: Vec<Geodesic>, speeds: Vec<f64> },
}

/// Constant-speed geodesic segment `[0, length] → X`.
#[derive(Clone, Debug)]
pub struct Geodesic {
    space: u64,
    id: u64,
    start: Point,
    end: Point,
    length: f64,
    path: Path,
}

impl Geodesic {
    fn new(space: u64, start: Point, end: Point, length: f64, path: Path) -> Self {
        let mut bits = vec![space];
        start.bits(&mut bits);
        end.bits(&mut bits);
        let id = bits.iter().fold(0x51_7cc1_b727_220a_u64, |h, b| derive(h, *b));
        Geodesic { space, id, start, end, length, path }
    }

    pub fn space(&self) -> u64 {
        self.space
    }

    /// Identity derived from the space and endpoints.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn start(&self) -> &Point {
        &self.start
    }

    pub fn end(&self) -> &Point {
        &self.end
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Point at arclength `t`, clamped to `[0, length]`.
    pub fn eval(&self, t: f64) -> Point {
        if t <= 0.0 || self.length == 0.0 {
            return self.start.clone();
        }
        if t >= self.length {
            return self.end.clone();
        }
        Point { space: self.space, coords: self.eval_coords(t) }
    }

    fn eval_coords(&self, t: f64) -> Coords {
        match &self.path {
            Path::Line { a, u } => Coords::Xy([a[0] + t * u[0], a[1] + t * u[1]]),
            Path::Hyp(h) => Coords::Xy(h.eval(t)),
            Path::Tree(tp) => {
                let (e, o) = tp.eval(t);
                Coords::Tree { edge: e, offset: o }
            }
            Path::Polyline(pl) => Coords::Xy(pl.eval(t)),
            Path::Product { factors, speeds } => {
                Coords::Product(factors.iter().zip(speeds).map(|(g, s)| g.eval(t * s).coords).collect())
            }
        }
    }

    /// Corner sequence for polyline geodesics.
    pub fn corners(&self) -> Option<&[Xy]> {
        match &self.path {
            Path::Polyline(pl) => Some(pl.points()),
            _ => None,
        }
    }

    /// Unit tangent in the chart at parameter `t` (planar kinds).
    pub fn chart_tangent(&self, t: f64) -> Option<Xy> {
        match &self.path {
            Path::Line { u, .. } => Some(*u),
            Path::Polyline(pl) => Some(pl.tangent(t)),
            Path::Hyp(h) => Some(h.tangent(t)),
            _ => None,
        }
    }
}
