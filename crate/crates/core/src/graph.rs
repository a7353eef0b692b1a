//! The alpha-approximation graph of a point cloud and its geodesic distances.
//!
//! Delaunay edges are tested at each endpoint with the statistic
//! `T = |e|² / Σ |e'|²` over the edges incident to that endpoint. Under a
//! locally isotropic Gaussian neighbourhood in `p` dimensions with `k`
//! incident edges, `T` follows Beta(p/2, (k-1)p/2); an edge whose statistic
//! exceeds the `alpha` quantile is dropped unless it belongs to the minimum
//! spanning tree.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{SpanningTree, Tessellation};
use crate::numerics::beta_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
    pub mcst: bool,
}

/// How vertex degrees evolve during the edge sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegreeUpdate {
    /// Vertices are scanned in index order; a vertex sees the graph left by
    /// the removals of all earlier vertices.
    #[default]
    PerVertex,
    /// Every vertex is tested against the unpruned tessellation.
    Frozen,
    /// Every vertex is tested against the graph left by the previous
    /// sweep; sweeps repeat until one removes nothing. The result does not
    /// depend on vertex order.
    UntilStable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifoldGraph {
    pub n_points: usize,
    pub dim: usize,
    pub alpha: f64,
    /// Sorted by `(a, b)`, `a < b`.
    pub edges: Vec<GraphEdge>,
    /// Surviving full-dimensional cells.
    pub simplices: Vec<Vec<usize>>,
    #[serde(skip)]
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl ManifoldGraph {
    pub fn new(
        n_points: usize,
        dim: usize,
        alpha: f64,
        mut edges: Vec<GraphEdge>,
        simplices: Vec<Vec<usize>>,
    ) -> Self {
        edges.sort_by_key(|e| (e.a, e.b));
        let mut adjacency = vec![Vec::new(); n_points];
        for e in &edges {
            adjacency[e.a].push((e.b, e.length));
            adjacency[e.b].push((e.a, e.length));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(v, _)| v);
        }
        Self {
            n_points,
            dim,
            alpha,
            edges,
            simplices,
            adjacency,
        }
    }

    /// The unpruned graph: every tessellation edge, every cell.
    pub fn from_tessellation(tess: &Tessellation, mcst: &SpanningTree) -> Self {
        let edges = tess
            .edges
            .iter()
            .map(|e| GraphEdge {
                a: e.a,
                b: e.b,
                length: e.length,
                mcst: mcst.contains(e.a, e.b),
            })
            .collect();
        Self::new(tess.n_points, tess.dim, 1.0, edges, tess.simplices.clone())
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edges
            .binary_search_by(|e| (e.a, e.b).cmp(&key))
            .is_ok()
    }

    pub fn is_connected(&self) -> bool {
        if self.n_points == 0 {
            return true;
        }
        let mut seen = vec![false; self.n_points];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n_points
    }

    /// Edge-list text: a header line `# n=<n> p=<p> alpha=<alpha>` followed
    /// by one `i j length mcst_flag` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!(
            "# n={} p={} alpha={}\n",
            self.n_points, self.dim, self.alpha
        );
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {} {}", e.a, e.b, e.length, u8::from(e.mcst));
        }
        out
    }

    /// Parses the format written by [`ManifoldGraph::to_edge_list`]. Cells
    /// are not part of the format, so the parsed graph has none.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty edge list".into(),
        })?;
        let header = header.trim().strip_prefix('#').ok_or(Error::Parse {
            line: 1,
            message: "missing `# n=.. p=.. alpha=..` header".into(),
        })?;
        let (mut n, mut p, mut alpha) = (None, None, None);
        for field in header.split_whitespace() {
            let parse_err = |m: String| Error::Parse {
                line: 1,
                message: m,
            };
            match field.split_once('=') {
                Some(("n", v)) => {
                    n = Some(v.parse::<usize>().map_err(|e| parse_err(e.to_string()))?)
                }
                Some(("p", v)) => {
                    p = Some(v.parse::<usize>().map_err(|e| parse_err(e.to_string()))?)
                }
                Some(("alpha", v)) => {
                    alpha = Some(v.parse::<f64>().map_err(|e| parse_err(e.to_string()))?)
                }
                _ => return Err(parse_err(format!("unexpected header field `{field}`"))),
            }
        }
        let (n, p, alpha) = match (n, p, alpha) {
            (Some(n), Some(p), Some(a)) => (n, p, a),
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: "header needs n, p and alpha".into(),
                })
            }
        };
        let mut edges = Vec::new();
        for (idx, line) in lines {
            let lineno = idx as u64 + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |m: &str| Error::Parse {
                line: lineno,
                message: m.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(bad("expected `i j length mcst_flag`"));
            }
            let a: usize = fields[0].parse().map_err(|_| bad("bad vertex index"))?;
            let b: usize = fields[1].parse().map_err(|_| bad("bad vertex index"))?;
            let length: f64 = fields[2].parse().map_err(|_| bad("bad edge length"))?;
            let mcst = match fields[3] {
                "0" => false,
                "1" => true,
                _ => return Err(bad("mcst flag must be 0 or 1")),
            };
            if a >= n || b >= n || a == b {
                return Err(bad("edge endpoint out of range"));
            }
            if !length.is_finite() || length < 0.0 {
                return Err(bad("edge length must be finite and non-negative"));
            }
            edges.push(GraphEdge {
                a: a.min(b),
                b: a.max(b),
                length,
                mcst,
            });
        }
        Ok(Self::new(n, p, alpha, edges, Vec::new()))
    }
}

/// `T_j = ‖e_j‖² / Σ ‖e‖²` over the squared lengths of one vertex star;
/// `None` when every length is zero.
pub fn edge_statistics(sq_lengths: &[f64]) -> Option<Vec<f64>> {
    let total: f64 = sq_lengths.iter().sum();
    (total > 0.0).then(|| sq_lengths.iter().map(|s| s / total).collect())
}

/// Removes long non-tree edges from the tessellation.
pub fn prune_edges(tess: &Tessellation, mcst: &SpanningTree, alpha: f64) -> Result<ManifoldGraph> {
    prune_edges_with(tess, mcst, alpha, DegreeUpdate::PerVertex)
}

pub fn prune_edges_with(
    tess: &Tessellation,
    mcst: &SpanningTree,
    alpha: f64,
    update: DegreeUpdate,
) -> Result<ManifoldGraph> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "pruning level alpha must lie in (0, 1), got {alpha}"
        )));
    }
    for e in &mcst.edges {
        if !tess.has_edge(e.a, e.b) {
            return Err(Error::InvalidParameter(format!(
                "spanning-tree edge ({}, {}) is not a tessellation edge",
                e.a, e.b
            )));
        }
    }
    let n = tess.n_points;
    let p = tess.dim as f64;
    let m = tess.edges.len();
    let is_tree: Vec<bool> = tess.edges.iter().map(|e| mcst.contains(e.a, e.b)).collect();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (idx, e) in tess.edges.iter().enumerate() {
        incident[e.a].push(idx);
        incident[e.b].push(idx);
    }
    let mut alive = vec![true; m];
    let mut thresholds: Vec<Option<f64>> = Vec::new();

    loop {
        let mut removed = 0;
        let snapshot = alive.clone();
        for v in 0..n {
            let star: Vec<usize> = match update {
                DegreeUpdate::Frozen => incident[v].clone(),
                DegreeUpdate::PerVertex => {
                    incident[v].iter().copied().filter(|&e| alive[e]).collect()
                }
                DegreeUpdate::UntilStable => incident[v]
                    .iter()
                    .copied()
                    .filter(|&e| snapshot[e])
                    .collect(),
            };
            let k = star.len();
            if k < 2 {
                continue;
            }
            if thresholds.len() <= k {
                thresholds.resize(k + 1, None);
            }
            let threshold = match thresholds[k] {
                Some(t) => t,
                None => {
                    let t = beta_quantile(p / 2.0, (k as f64 - 1.0) * p / 2.0, alpha)?;
                    thresholds[k] = Some(t);
                    t
                }
            };
            let sq: Vec<f64> = star.iter().map(|&e| tess.edges[e].length.powi(2)).collect();
            let Some(stats) = edge_statistics(&sq) else {
                continue;
            };
            let rejected: Vec<usize> = star
                .iter()
                .zip(&stats)
                .filter(|&(&e, &t)| !is_tree[e] && t > threshold)
                .map(|(&e, _)| e)
                .collect();
            for e in rejected {
                if alive[e] {
                    alive[e] = false;
                    removed += 1;
                }
            }
        }
        if removed == 0 || update != DegreeUpdate::UntilStable {
            break;
        }
    }

    let survivors: HashSet<(usize, usize)> = tess
        .edges
        .iter()
        .zip(&alive)
        .filter(|(_, &a)| a)
        .map(|(e, _)| e.key())
        .collect();
    let simplices = tess
        .simplices
        .iter()
        .filter(|s| {
            (0..s.len()).all(|i| ((i + 1)..s.len()).all(|j| survivors.contains(&(s[i], s[j]))))
        })
        .cloned()
        .collect();
    let edges = tess
        .edges
        .iter()
        .zip(&alive)
        .zip(&is_tree)
        .filter(|((_, &a), _)| a)
        .map(|((e, _), &t)| GraphEdge {
            a: e.a,
            b: e.b,
            length: e.length,
            mcst: t,
        })
        .collect();
    Ok(ManifoldGraph::new(n, tess.dim, alpha, edges, simplices))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, vertex)
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multi-source Dijkstra: distance from each vertex to the nearest source.
pub fn dijkstra(g: &ManifoldGraph, sources: &[usize]) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.n_points];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        if dist[s] > 0.0 {
            dist[s] = 0.0;
            heap.push(HeapItem {
                dist: 0.0,
                vertex: s,
            });
        }
    }
    while let Some(HeapItem { dist: d, vertex: v }) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, len) in g.neighbors(v) {
            let nd = d + len;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(HeapItem {
                    dist: nd,
                    vertex: w,
                });
            }
        }
    }
    dist
}

/// The `k` vertices nearest to `source` in graph distance, excluding the
/// source itself; ties are broken by vertex index. Fewer are returned when
/// the component is smaller.
pub fn graph_nearest(g: &ManifoldGraph, source: usize, k: usize) -> Vec<usize> {
    let mut dist: std::collections::HashMap<usize, f64> = std::collections::HashMap::new();
    let mut done: HashSet<usize> = HashSet::new();
    let mut heap = BinaryHeap::new();
    let mut out = Vec::with_capacity(k);
    dist.insert(source, 0.0);
    heap.push(HeapItem {
        dist: 0.0,
        vertex: source,
    });
    while let Some(HeapItem { dist: d, vertex: v }) = heap.pop() {
        if !done.insert(v) {
            continue;
        }
        if v != source {
            out.push(v);
            if out.len() == k {
                break;
            }
        }
        for &(w, len) in g.neighbors(v) {
            let nd = d + len;
            if dist.get(&w).is_none_or(|&old| nd < old) {
                dist.insert(w, nd);
                heap.push(HeapItem {
                    dist: nd,
                    vertex: w,
                });
            }
        }
    }
    out
}

/// [`graph_nearest`] for every vertex.
pub fn graph_knn(g: &ManifoldGraph, k: usize) -> Vec<Vec<usize>> {
    (0..g.n_points)
        .into_par_iter()
        .map(|v| graph_nearest(g, v, k))
        .collect()
}

/// Shortest-path lengths from a set of source vertices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeodesicDistances {
    pub sources: Vec<usize>,
    /// `rows[i][j]` is the graph distance from `sources[i]` to vertex `j`.
    pub rows: Vec<Vec<f64>>,
}

impl GeodesicDistances {
    /// Distance between two vertices, if `a` is among the sources.
    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        self.sources
            .iter()
            .position(|&s| s == a)
            .map(|i| self.rows[i][b])
    }
}

/// Single-source Dijkstra from every source, run in parallel.
pub fn graph_distances(g: &ManifoldGraph, sources: &[usize]) -> Result<GeodesicDistances> {
    if sources.is_empty() {
        return Err(Error::InvalidParameter("no source vertices".into()));
    }
    if let Some(&bad) = sources.iter().find(|&&s| s >= g.n_points) {
        return Err(Error::InvalidParameter(format!(
            "source {bad} out of range"
        )));
    }
    let rows = sources.par_iter().map(|&s| dijkstra(g, &[s])).collect();
    Ok(GeodesicDistances {
        sources: sources.to_vec(),
        rows,
    })
}

/// All-pairs graph distances.
pub fn all_pairs(g: &ManifoldGraph) -> Result<GeodesicDistances> {
    let all: Vec<usize> = (0..g.n_points).collect();
    graph_distances(g, &all)
}
