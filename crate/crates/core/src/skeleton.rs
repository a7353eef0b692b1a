//! Boundary detection and skeletal points of a manifold graph.

use std::collections::HashMap;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{dijkstra, graph_knn, GeodesicDistances, ManifoldGraph};

pub const DEFAULT_K: usize = 3;
const SKELETON_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonReport {
    /// Sorted ascending.
    pub boundary_points: Vec<usize>,
    pub boundary_distance: Vec<f64>,
    /// Sorted ascending.
    pub skeletal_points: Vec<usize>,
    pub k_neighbours: usize,
    /// Set when every point lies on the boundary.
    pub all_boundary: bool,
}

impl SkeletonReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Endpoints of edges shared by at most one surviving cell.
///
/// A graph without cells marks every point as boundary.
pub fn detect_boundary(g: &ManifoldGraph) -> Vec<usize> {
    if g.simplices.is_empty() {
        warn!("graph has no surviving cells; every point is treated as boundary");
        return (0..g.n_points).collect();
    }
    let mut count: HashMap<(usize, usize), u32> = HashMap::with_capacity(g.edges.len());
    for s in &g.simplices {
        for i in 0..s.len() {
            for j in (i + 1)..s.len() {
                let key = (s[i].min(s[j]), s[i].max(s[j]));
                *count.entry(key).or_insert(0) += 1;
            }
        }
    }
    let mut boundary = vec![false; g.n_points];
    for e in &g.edges {
        if count.get(&(e.a, e.b)).copied().unwrap_or(0) <= 1 {
            boundary[e.a] = true;
            boundary[e.b] = true;
        }
    }
    // isolated vertices have no cell around them either
    for (v, flag) in boundary.iter_mut().enumerate() {
        if g.degree(v) == 0 {
            *flag = true;
        }
    }
    (0..g.n_points).filter(|&v| boundary[v]).collect()
}

/// Graph distance from every point to its nearest boundary point.
pub fn boundary_distances(g: &ManifoldGraph, boundary: &[usize]) -> Result<Vec<f64>> {
    if boundary.is_empty() {
        return Err(Error::InvalidParameter("boundary set is empty".into()));
    }
    if let Some(&bad) = boundary.iter().find(|&&b| b >= g.n_points) {
        return Err(Error::InvalidParameter(format!(
            "boundary index {bad} out of range"
        )));
    }
    Ok(dijkstra(g, boundary))
}

/// The `k` graph-nearest neighbours of every point, self excluded, ties by
/// index.
pub fn graph_neighbours(geo: &GeodesicDistances, k: usize) -> Vec<Vec<usize>> {
    geo.rows
        .par_iter()
        .zip(&geo.sources)
        .map(|(row, &src)| {
            let mut order: Vec<usize> = (0..row.len()).filter(|&j| j != src).collect();
            order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
            order.truncate(k);
            order
        })
        .collect()
}

/// Points whose boundary distance is at least that of each of their `k`
/// graph-nearest neighbours.
///
/// `geo` must hold a row for every vertex, in vertex order.
pub fn mark_skeleton(geo: &GeodesicDistances, d_b: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let n = d_b.len();
    if geo.rows.len() != n || geo.sources.iter().enumerate().any(|(i, &s)| i != s) {
        return Err(Error::Shape(
            "skeleton marking needs all-pairs graph distances".into(),
        ));
    }
    Ok(mark_skeleton_with_neighbours(
        &graph_neighbours(geo, k),
        d_b,
    ))
}

/// The skeleton test against precomputed neighbour lists.
///
/// Boundary points (`d_B = 0`) are never skeletal.
pub fn mark_skeleton_with_neighbours(nn: &[Vec<usize>], d_b: &[f64]) -> Vec<usize> {
    (0..d_b.len())
        .into_par_iter()
        .filter(|&i| d_b[i] > 0.0)
        .filter(|&i| {
            let best = nn[i]
                .iter()
                .map(|&j| d_b[j])
                .fold(f64::NEG_INFINITY, f64::max);
            d_b[i] >= best - SKELETON_TOL
        })
        .collect()
}

/// Boundary, boundary distances and skeleton in one pass.
pub fn skeletonize(g: &ManifoldGraph, k: usize) -> Result<SkeletonReport> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let boundary_points = detect_boundary(g);
    let boundary_distance = boundary_distances(g, &boundary_points)?;
    let all_boundary = boundary_points.len() == g.n_points;
    let skeletal_points = if all_boundary {
        warn!("every point lies on the boundary; marking all points skeletal");
        (0..g.n_points).collect()
    } else {
        mark_skeleton_with_neighbours(&graph_knn(g, k), &boundary_distance)
    };
    Ok(SkeletonReport {
        boundary_points,
        boundary_distance,
        skeletal_points,
        k_neighbours: k,
        all_boundary,
    })
}
