use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::Rng;

use super::Coords;

/// Finite metric tree with all-pairs vertex distances precomputed.
#[derive(Clone, Debug)]
pub struct Tree {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    dist: Vec<f64>,
    /// `toward[v * n + t]`: edge leaving `v` on the path to `t`.
    toward: Vec<u32>,
    total: f64,
}

#[derive(Clone, Debug)]
pub struct TreePath {
    /// `(edge, from offset, to offset)` pieces in travel order.
    pieces: Vec<(usize, f64, f64)>,
    cum: Vec<f64>,
}

impl TreePath {
    pub fn length(&self) -> f64 {
        *self.cum.last().unwrap_or(&0.0)
    }

    pub fn eval(&self, t: f64) -> (usize, f64) {
        if self.pieces.is_empty() {
            return (0, 0.0);
        }
        let i = self.cum.partition_point(|&c| c <= t).saturating_sub(1).min(self.pieces.len() - 1);
        let (e, a, b) = self.pieces[i];
        let s = t - self.cum[i];
        let o = if b >= a { (a + s).min(b) } else { (a - s).max(b) };
        (e, o)
    }

    pub fn pieces(&self) -> &[(usize, f64, f64)] {
        &self.pieces
    }
}

impl Tree {
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n < 2 || edges.len() != n - 1 {
            return Err(Error::InvalidSpace(format!("tree on {n} vertices needs {} edges, got {}", n.saturating_sub(1), edges.len())));
        }
        let mut adj = vec![Vec::new(); n];
        for (i, &(u, v, len)) in edges.iter().enumerate() {
            if u >= n || v >= n || u == v {
                return Err(Error::InvalidSpace(format!("edge {i} has bad endpoints ({u}, {v})")));
            }
            if !(len > 0.0 && len.is_finite()) {
                return Err(Error::InvalidSpace(format!("edge {i} has non-positive length {len}")));
            }
            adj[u].push((v, i));
            adj[v].push((u, i));
        }
        let mut dist = vec![f64::INFINITY; n * n];
        let mut toward = vec![u32::MAX; n * n];
        let mut stack = Vec::new();
        for t in 0..n {
            dist[t * n + t] = 0.0;
            stack.push(t);
            while let Some(v) = stack.pop() {
                for &(w, e) in &adj[v] {
                    if dist[w * n + t].is_infinite() {
                        dist[w * n + t] = dist[v * n + t] + edges[e].2;
                        toward[w * n + t] = e as u32;
                        stack.push(w);
                    }
                }
            }
            if (0..n).any(|v| dist[v * n + t].is_infinite()) {
                return Err(Error::InvalidSpace("tree is not connected".into()));
            }
        }
        let total = edges.iter().map(|e| e.2).sum();
        Ok(Tree { n, edges: edges.to_vec(), dist, toward, total })
    }

    pub fn descriptor(&self) -> String {
        let es: Vec<String> = self.edges.iter().map(|(u, v, l)| format!("{u}-{v}:{l}")).collect();
        format!("{}[{}]", self.n, es.join(","))
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn vertex_dist(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.n + b]
    }

    pub fn vertex_coords(&self, v: usize) -> Coords {
        let (e, &(u, _, len)) = self.edges.iter().enumerate().find(|(_, &(u, w, _))| u == v || w == v).unwrap();
        Coords::Tree { edge: e, offset: if u == v { 0.0 } else { len } }
    }

    pub fn check(&self, edge: usize, offset: f64) -> Result<()> {
        match self.edges.get(edge) {
            Some(&(_, _, len)) if offset >= -1e-9 && offset <= len + 1e-9 => Ok(()),
            Some(&(_, _, len)) => Err(Error::OutsideDomain(format!("offset {offset} outside edge {edge} of length {len}"))),
            None => Err(Error::OutsideDomain(format!("no edge {edge}"))),
        }
    }

    /// Endpoint vertices of a point's edge with the distances to each.
    fn anchors(&self, (e, o): (usize, f64)) -> [(usize, f64); 2] {
        let (u, v, len) = self.edges[e];
        [(u, o), (v, len - o)]
    }

    pub fn dist(&self, p: (usize, f64), q: (usize, f64)) -> f64 {
        if p.0 == q.0 {
            return (p.1 - q.1).abs();
        }
        let mut best = f64::INFINITY;
        for (a, da) in self.anchors(p) {
            for (b, db) in self.anchors(q) {
                best = best.min(da + self.vertex_dist(a, b) + db);
            }
        }
        best
    }

    /// Distance from a point to vertex `w`.
    pub fn dist_to_vertex(&self, p: (usize, f64), w: usize) -> f64 {
        let [(u, du), (v, dv)] = self.anchors(p);
        (du + self.vertex_dist(u, w)).min(dv + self.vertex_dist(v, w))
    }

    fn offset_of(&self, e: usize, vertex: usize) -> f64 {
        if self.edges[e].0 == vertex {
            0.0
        } else {
            self.edges[e].2
        }
    }

    pub fn path(&self, p: (usize, f64), q: (usize, f64)) -> TreePath {
        let mut pieces = Vec::new();
        if p.0 == q.0 {
            pieces.push((p.0, p.1, q.1));
        } else {
            let mut best = (f64::INFINITY, 0, 0);
            for (a, da) in self.anchors(p) {
                for (b, db) in self.anchors(q) {
                    let d = da + self.vertex_dist(a, b) + db;
                    if d < best.0 {
                        best = (d, a, b);
                    }
                }
            }
            let (_, a, b) = best;
            pieces.push((p.0, p.1, self.offset_of(p.0, a)));
            let mut v = a;
            while v != b {
                let e = self.toward[v * self.n + b] as usize;
                let (x, y, _) = self.edges[e];
                let w = if x == v { y } else { x };
                pieces.push((e, self.offset_of(e, v), self.offset_of(e, w)));
                v = w;
            }
            pieces.push((q.0, self.offset_of(q.0, b), q.1));
        }
        pieces.retain(|&(_, a, b)| a != b);
        let mut cum = Vec::with_capacity(pieces.len());
        let mut acc = 0.0;
        for &(_, a, b) in &pieces {
            cum.push(acc);
            acc += (b - a).abs();
        }
        cum.push(acc);
        TreePath { pieces, cum }
    }

    /// Point chosen uniformly by length.
    pub fn random_point(&self, rng: &mut Rng) -> (usize, f64) {
        let mut x = rng.gen::<f64>() * self.total;
        for (e, &(_, _, len)) in self.edges.iter().enumerate() {
            if x <= len {
                return (e, x);
            }
            x -= len;
        }
        let last = self.edges.len() - 1;
        (last, self.edges[last].2)
    }

    /// Random tree on `n` vertices with edge lengths in `[lo, hi]`.
    pub fn random_edges(n: usize, lo: f64, hi: f64, rng: &mut Rng) -> Vec<(usize, usize, f64)> {
        (1..n).map(|v| (rng.gen_range(0..v), v, rng.gen_range(lo..=hi))).collect()
    }
}
