use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::delaunay::Edge;

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
            components: n,
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.components -= 1;
        true
    }

    pub fn components(&self) -> usize {
        self.components
    }
}

/// Minimum-cost spanning tree over a candidate edge set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpanningTree {
    pub n_points: usize,
    /// Sorted by `(a, b)`.
    pub edges: Vec<Edge>,
    pub total_length: f64,
}

impl SpanningTree {
    pub fn contains(&self, a: usize, b: usize) -> bool {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edges.binary_search_by(|e| e.key().cmp(&key)).is_ok()
    }
}

/// Kruskal over `candidates`; equal lengths are ordered by vertex indices.
pub fn euclidean_mcst(n_points: usize, candidates: &[Edge]) -> Result<SpanningTree> {
    let mut order: Vec<&Edge> = candidates.iter().collect();
    order.sort_by(|x, y| {
        x.length
            .total_cmp(&y.length)
            .then(x.a.min(x.b).cmp(&y.a.min(y.b)))
            .then(x.a.max(x.b).cmp(&y.a.max(y.b)))
    });
    let mut uf = UnionFind::new(n_points);
    let mut edges = Vec::with_capacity(n_points.saturating_sub(1));
    for e in order {
        if e.a >= n_points || e.b >= n_points {
            return Err(Error::Shape(format!(
                "edge ({}, {}) references a point outside 0..{n_points}",
                e.a, e.b
            )));
        }
        if uf.union(e.a, e.b) {
            edges.push(Edge {
                a: e.a.min(e.b),
                b: e.a.max(e.b),
                length: e.length,
            });
            if edges.len() + 1 == n_points {
                break;
            }
        }
    }
    if uf.components() > 1 {
        return Err(Error::Disconnected(n_points));
    }
    edges.sort_by_key(|e| e.key());
    let total_length = edges.iter().map(|e| e.length).sum();
    Ok(SpanningTree {
        n_points,
        edges,
        total_length,
    })
}
