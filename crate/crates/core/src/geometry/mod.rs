//! Delaunay tessellation and the Euclidean minimum-cost spanning tree.

pub mod delaunay;
pub mod mst;

pub use delaunay::{
    delaunay_tessellation, Edge, Tessellation, TessellationOptions, DEFAULT_MAX_DIM,
};
pub use mst::{euclidean_mcst, SpanningTree, UnionFind};
