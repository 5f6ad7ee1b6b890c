//! Simply connected polygonal domains with the intrinsic (shortest-path) metric.
//!
//! The region is ear-clipped once; the dual graph of the triangulation is a tree,
//! so two triangles are joined by a unique sleeve. Shortest paths are pulled
//! taut through the sleeve's portals with the funnel algorithm.

use std::collections::HashMap;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::Rng;

use super::plane::{cross, dist, lerp};
use super::Xy;

const NONE: u32 = u32::MAX;
/// Membership tolerance in plane units.
pub const MEMBER_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Polyline {
    pts: Vec<Xy>,
    cum: Vec<f64>,
}

impl Polyline {
    pub fn new(pts: Vec<Xy>) -> Self {
        let mut cum = Vec::with_capacity(pts.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for w in pts.windows(2) {
            acc += dist(w[0], w[1]);
            cum.push(acc);
        }
        Polyline { pts, cum }
    }

    pub fn length(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    pub fn points(&self) -> &[Xy] {
        &self.pts
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.pts.len();
        if n < 2 {
            return 0;
        }
        self.cum.partition_point(|&c| c <= t).saturating_sub(1).min(n - 2)
    }

    pub fn eval(&self, t: f64) -> Xy {
        if self.pts.len() < 2 {
            return self.pts[0];
        }
        let i = self.segment(t);
        let seg = self.cum[i + 1] - self.cum[i];
        if seg == 0.0 {
            return self.pts[i];
        }
        lerp(self.pts[i], self.pts[i + 1], ((t - self.cum[i]) / seg).clamp(0.0, 1.0))
    }

    pub fn tangent(&self, t: f64) -> Xy {
        if self.pts.len() < 2 {
            return [1.0, 0.0];
        }
        let i = self.segment(t);
        let (a, b) = (self.pts[i], self.pts[i + 1]);
        let l = dist(a, b).max(f64::MIN_POSITIVE);
        [(b[0] - a[0]) / l, (b[1] - a[1]) / l]
    }
}

#[derive(Clone, Debug)]
struct Grid {
    x0: f64,
    y0: f64,
    cw: f64,
    ch: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl Grid {
    fn cell(&self, p: Xy) -> Option<usize> {
        let i = ((p[0] - self.x0) / self.cw).floor();
        let j = ((p[1] - self.y0) / self.ch).floor();
        let i = if i == self.nx as f64 { i - 1.0 } else { i };
        let j = if j == self.ny as f64 { j - 1.0 } else { j };
        if i < 0.0 || j < 0.0 || i >= self.nx as f64 || j >= self.ny as f64 {
            return None;
        }
        Some(j as usize * self.nx + i as usize)
    }
}

#[derive(Clone, Debug)]
pub struct Polygon {
    verts: Vec<Xy>,
    tris: Vec<[u32; 3]>,
    /// Neighbour across edge `(v_k, v_{k+1})` of each triangle.
    nbr: Vec<[u32; 3]>,
    parent: Vec<u32>,
    depth: Vec<u32>,
    grid: Grid,
    area_cum: Vec<f64>,
    scale: f64,
}

fn on_segment(p: Xy, a: Xy, b: Xy, eps: f64) -> bool {
    let l = dist(a, b);
    if l == 0.0 {
        return dist(p, a) <= eps;
    }
    let c = cross(a, b, p).abs() / l;
    let s = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / (l * l);
    c <= eps && (-eps / l..=1.0 + eps / l).contains(&s)
}

/// Closed segments `ab` and `cd` share a point.
fn segments_touch(a: Xy, b: Xy, c: Xy, d: Xy) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(a, c, d, 0.0))
        || (d2 == 0.0 && on_segment(b, c, d, 0.0))
        || (d3 == 0.0 && on_segment(c, a, b, 0.0))
        || (d4 == 0.0 && on_segment(d, a, b, 0.0))
}

/// Open segments cross at a single interior point.
fn segments_cross(a: Xy, b: Xy, c: Xy, d: Xy) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn in_triangle_closed(p: Xy, a: Xy, b: Xy, c: Xy) -> bool {
    cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0
}

fn clean(mut v: Vec<Xy>) -> Result<Vec<Xy>> {
    if v.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::InvalidSpace("non-finite polygon vertex".into()));
    }
    v.dedup();
    while v.len() > 1 && v.first() == v.last() {
        v.pop();
    }
    if v.len() < 3 {
        return Err(Error::InvalidSpace("polygon needs at least 3 distinct vertices".into()));
    }
    let area2: f64 = (0..v.len()).map(|i| {
        let (a, b) = (v[i], v[(i + 1) % v.len()]);
        a[0] * b[1] - a[1] * b[0]
    }).sum();
    if area2 == 0.0 {
        return Err(Error::InvalidSpace("polygon has zero area".into()));
    }
    if area2 < 0.0 {
        v.reverse();
    }
    // Drop vertices whose neighbours are collinear with them.
    loop {
        let n = v.len();
        let idx = (0..n).find(|&i| {
            let (a, b, c) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
            let s = dist(a, b) * dist(b, c);
            cross(a, b, c).abs() <= 1e-14 * s && (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1]) > 0.0
        });
        match idx {
            Some(i) if n > 3 => {
                v.remove(i);
            }
            _ => break,
        }
    }
    Ok(v)
}

fn check_simple(v: &[Xy]) -> Result<()> {
    let n = v.len();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (v[j], v[(j + 1) % n]);
            if segments_touch(a, b, c, d) {
                return Err(Error::InvalidSpace(format!("boundary self-intersects at edges {i} and {j}")));
            }
        }
    }
    // Adjacent edges folding back onto each other.
    for i in 0..n {
        let (a, b, c) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
        if cross(a, b, c) == 0.0 && on_segment(c, a, b, 0.0) {
            return Err(Error::InvalidSpace(format!("boundary folds back at vertex {i}")));
        }
    }
    Ok(())
}

fn ear_clip(v: &[Xy]) -> Result<Vec<[u32; 3]>> {
    let n = v.len();
    let mut prev: Vec<usize> = (0..n).map(|i| (i + n - 1) % n).collect();
    let mut next: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let mut alive = vec![true; n];
    let reflex = |i: usize, prev: &[usize], next: &[usize]| cross(v[prev[i]], v[i], v[next[i]]) <= 0.0;
    let mut is_reflex: Vec<bool> = (0..n).map(|i| reflex(i, &prev, &next)).collect();
    let mut tris = Vec::with_capacity(n - 2);
    let mut remaining = n;
    let mut cur = 0;
    let mut stall = 0;
    while remaining > 3 {
        let (p, c, q) = (prev[cur], cur, next[cur]);
        let (a, b, d) = (v[p], v[c], v[q]);
        if cross(a, b, d).abs() <= 1e-14 * dist(a, b) * dist(b, d)
            && (b[0] - a[0]) * (d[0] - b[0]) + (b[1] - a[1]) * (d[1] - b[1]) > 0.0
        {
            // A straight vertex left behind by clipping: drop it without a triangle.
            alive[c] = false;
            next[p] = q;
            prev[q] = p;
            remaining -= 1;
            is_reflex[p] = reflex(p, &prev, &next);
            is_reflex[q] = reflex(q, &prev, &next);
            cur = q;
            stall = 0;
            continue;
        }
        let mut ear = !is_reflex[c];
        if ear {
            let mut k = next[q];
            while k != p {
                if is_reflex[k] && in_triangle_closed(v[k], v[p], v[c], v[q]) {
                    ear = false;
                    break;
                }
                k = next[k];
            }
        }
        if ear {
            tris.push([p as u32, c as u32, q as u32]);
            alive[c] = false;
            next[p] = q;
            prev[q] = p;
            remaining -= 1;
            is_reflex[p] = reflex(p, &prev, &next);
            is_reflex[q] = reflex(q, &prev, &next);
            cur = q;
            stall = 0;
        } else {
            cur = next[cur];
            stall += 1;
            if stall > remaining {
                return Err(Error::InvalidSpace("triangulation failed (degenerate boundary)".into()));
            }
        }
    }
    let c = (0..n).find(|&i| alive[i]).unwrap();
    tris.push([prev[c] as u32, c as u32, next[c] as u32]);
    Ok(tris)
}

impl Polygon {
    pub fn new(vertices: Vec<Xy>) -> Result<Self> {
        let verts = clean(vertices)?;
        check_simple(&verts)?;
        let tris = ear_clip(&verts)?;
        let mut edge_map: HashMap<(u32, u32), (u32, usize)> = HashMap::new();
        let mut nbr = vec![[NONE; 3]; tris.len()];
        for (ti, t) in tris.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if let Some((tj, kj)) = edge_map.remove(&(b, a)) {
                    nbr[ti][k] = tj;
                    nbr[tj as usize][kj] = ti as u32;
                } else {
                    edge_map.insert((a, b), (ti as u32, k));
                }
            }
        }
        let m = tris.len();
        let mut parent = vec![NONE; m];
        let mut depth = vec![u32::MAX; m];
        depth[0] = 0;
        let mut queue = std::collections::VecDeque::from([0u32]);
        while let Some(t) = queue.pop_front() {
            for &u in &nbr[t as usize] {
                if u != NONE && depth[u as usize] == u32::MAX {
                    depth[u as usize] = depth[t as usize] + 1;
                    parent[u as usize] = t;
                    queue.push_back(u);
                }
            }
        }
        if depth.iter().any(|&d| d == u32::MAX) {
            return Err(Error::InvalidSpace("triangulation is disconnected".into()));
        }
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &verts {
            x0 = x0.min(p[0]);
            y0 = y0.min(p[1]);
            x1 = x1.max(p[0]);
            y1 = y1.max(p[1]);
        }
        let pad = 1e-7 * (x1 - x0).max(y1 - y0);
        let (x0, y0, x1, y1) = (x0 - pad, y0 - pad, x1 + pad, y1 + pad);
        let side = ((m as f64).sqrt().ceil() as usize).clamp(1, 256);
        let (nx, ny) = (side, side);
        let (cw, ch) = ((x1 - x0) / nx as f64, (y1 - y0) / ny as f64);
        let mut cells = vec![Vec::new(); nx * ny];
        let mut area_cum = Vec::with_capacity(m);
        let mut acc = 0.0;
        for (ti, t) in tris.iter().enumerate() {
            let ps = t.map(|i| verts[i as usize]);
            acc += 0.5 * cross(ps[0], ps[1], ps[2]).abs();
            area_cum.push(acc);
            let bx0 = ps.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min) - MEMBER_TOL;
            let bx1 = ps.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max) + MEMBER_TOL;
            let by0 = ps.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min) - MEMBER_TOL;
            let by1 = ps.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max) + MEMBER_TOL;
            let i0 = (((bx0 - x0) / cw).floor().max(0.0) as usize).min(nx - 1);
            let i1 = (((bx1 - x0) / cw).floor().max(0.0) as usize).min(nx - 1);
            let j0 = (((by0 - y0) / ch).floor().max(0.0) as usize).min(ny - 1);
            let j1 = (((by1 - y0) / ch).floor().max(0.0) as usize).min(ny - 1);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    cells[j * nx + i].push(ti as u32);
                }
            }
        }
        let scale = (x1 - x0).max(y1 - y0);
        Ok(Polygon { verts, tris, nbr, parent, depth, grid: Grid { x0, y0, cw, ch, nx, ny, cells }, area_cum, scale })
    }

    pub fn descriptor(&self) -> String {
        self.verts.iter().map(|p| format!("{},{}", p[0], p[1])).collect::<Vec<_>>().join(";")
    }

    pub fn vertices(&self) -> &[Xy] {
        &self.verts
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.tris
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn tri_pts(&self, t: usize) -> [Xy; 3] {
        self.tris[t].map(|i| self.verts[i as usize])
    }

    /// Smallest signed distance from `p` to the triangle's edge lines (positive inside).
    fn depth_in(&self, t: usize, p: Xy) -> f64 {
        let [a, b, c] = self.tri_pts(t);
        let e = |u: Xy, v: Xy| cross(u, v, p) / dist(u, v);
        e(a, b).min(e(b, c)).min(e(c, a))
    }

    /// Triangle containing `p`, preferring the one where `p` is deepest.
    pub fn locate(&self, p: Xy) -> Option<usize> {
        let cell = self.grid.cell(p)?;
        let mut best: Option<(usize, f64)> = None;
        for &t in &self.grid.cells[cell] {
            let d = self.depth_in(t as usize, p);
            if d >= -MEMBER_TOL && best.map_or(true, |(_, bd)| d > bd) {
                best = Some((t as usize, d));
            }
        }
        best.map(|(t, _)| t)
    }

    pub fn contains(&self, p: Xy) -> bool {
        self.locate(p).is_some()
    }

    fn sleeve(&self, ta: usize, tb: usize) -> Vec<usize> {
        let (mut x, mut y) = (ta, tb);
        let mut left = vec![x];
        let mut right = vec![y];
        while self.depth[x] > self.depth[y] {
            x = self.parent[x] as usize;
            left.push(x);
        }
        while self.depth[y] > self.depth[x] {
            y = self.parent[y] as usize;
            right.push(y);
        }
        while x != y {
            x = self.parent[x] as usize;
            y = self.parent[y] as usize;
            left.push(x);
            right.push(y);
        }
        right.pop();
        left.extend(right.into_iter().rev());
        left
    }

    pub fn shortest_path(&self, a: Xy, b: Xy) -> Result<Polyline> {
        let ta = self.locate(a).ok_or_else(|| Error::OutsideDomain(format!("({}, {}) not in region", a[0], a[1])))?;
        let tb = self.locate(b).ok_or_else(|| Error::OutsideDomain(format!("({}, {}) not in region", b[0], b[1])))?;
        if ta == tb {
            return Ok(Polyline::new(vec![a, b]));
        }
        let sleeve = self.sleeve(ta, tb);
        let mut portals = Vec::with_capacity(sleeve.len() + 1);
        portals.push((a, a));
        for w in sleeve.windows(2) {
            let (s, t) = (w[0], w[1]);
            let k = (0..3).find(|&k| self.nbr[s][k] == t as u32).expect("sleeve triangles share an edge");
            let tri = self.tris[s];
            let right = self.verts[tri[k] as usize];
            let left = self.verts[tri[(k + 1) % 3] as usize];
            portals.push((left, right));
        }
        portals.push((b, b));
        Ok(Polyline::new(funnel(&portals)))
    }

    pub fn dist(&self, a: Xy, b: Xy) -> Result<f64> {
        Ok(self.shortest_path(a, b)?.length())
    }

    /// The segment `pq` stays inside the closed region.
    pub fn visible(&self, p: Xy, q: Xy) -> bool {
        let n = self.verts.len();
        let eps = 1e-12 * self.scale;
        for i in 0..n {
            let (c, d) = (self.verts[i], self.verts[(i + 1) % n]);
            if segments_cross(p, q, c, d) {
                return false;
            }
            if dist(c, p) > eps && dist(c, q) > eps && on_segment(c, p, q, eps) {
                return false;
            }
        }
        self.contains(lerp(p, q, 0.5))
    }

    /// Exact projection onto a straight geodesic when the perpendicular foot is
    /// visible from `q`: the Euclidean bound then certifies it.
    pub fn straight_projection(&self, g: &Polyline, q: Xy) -> Option<f64> {
        let pts = g.points();
        if pts.len() != 2 {
            return None;
        }
        let len = g.length();
        let u = g.tangent(0.0);
        let t = (q[0] - pts[0][0]) * u[0] + (q[1] - pts[0][1]) * u[1];
        if !(0.0..=len).contains(&t) {
            return None;
        }
        let foot = g.eval(t);
        if dist(foot, q) <= 1e-12 * self.scale || self.visible(q, foot) {
            Some(t)
        } else {
            None
        }
    }

    /// Walk from `p` in direction `angle` for `len`, stopping at the boundary.
    pub fn shoot(&self, p: Xy, angle: f64, len: f64) -> Xy {
        let d = [angle.cos(), angle.sin()];
        let n = self.verts.len();
        let mut tmax = len;
        for i in 0..n {
            let (a, b) = (self.verts[i], self.verts[(i + 1) % n]);
            let e = [b[0] - a[0], b[1] - a[1]];
            let den = d[0] * e[1] - d[1] * e[0];
            if den.abs() < 1e-300 {
                continue;
            }
            let w = [a[0] - p[0], a[1] - p[1]];
            let t = (w[0] * e[1] - w[1] * e[0]) / den;
            let s = (w[0] * d[1] - w[1] * d[0]) / den;
            if t > 1e-12 * self.scale && (0.0..=1.0).contains(&s) {
                tmax = tmax.min(t);
            }
        }
        let mut t = tmax;
        for _ in 0..60 {
            let q = [p[0] + t * d[0], p[1] + t * d[1]];
            if self.contains(q) {
                return q;
            }
            t *= 0.999;
        }
        p
    }

    pub fn random_point(&self, rng: &mut Rng) -> Option<Xy> {
        let total = *self.area_cum.last()?;
        let x = rng.gen::<f64>() * total;
        let t = self.area_cum.partition_point(|&c| c < x).min(self.tris.len() - 1);
        let [a, b, c] = self.tri_pts(t);
        let (mut u, mut v) = (rng.gen::<f64>(), rng.gen::<f64>());
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        Some([a[0] + u * (b[0] - a[0]) + v * (c[0] - a[0]), a[1] + u * (b[1] - a[1]) + v * (c[1] - a[1])])
    }
}

/// String pulling through portals given as `(left, right)` pairs in travel
/// order; the first and last portals are the degenerate start and goal.
pub fn funnel(portals: &[(Xy, Xy)]) -> Vec<Xy> {
    let start = portals[0].0;
    let goal = portals[portals.len() - 1].0;
    let mut path = vec![start];
    let (mut apex, mut left, mut right) = (start, start, start);
    let (mut left_i, mut right_i) = (0usize, 0usize);
    let mut i = 1;
    while i < portals.len() {
        let (l, r) = portals[i];
        if cross(apex, right, r) >= 0.0 {
            if apex == right || cross(apex, left, r) < 0.0 {
                right = r;
                right_i = i;
            } else {
                path.push(left);
                apex = left;
                right = apex;
                right_i = left_i;
                i = left_i + 1;
                continue;
            }
        }
        if cross(apex, left, l) <= 0.0 {
            if apex == left || cross(apex, right, l) > 0.0 {
                left = l;
                left_i = i;
            } else {
                path.push(right);
                apex = right;
                left = apex;
                left_i = right_i;
                i = right_i + 1;
                continue;
            }
        }
        i += 1;
    }
    if *path.last().unwrap() != goal {
        path.push(goal);
    }
    path.dedup();
    path
}
