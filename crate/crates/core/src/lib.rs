//! Localized skeletonization and dimensionality reduction (LSDR).
//!
//! The pipeline approximates the data manifold by a pruned Delaunay graph,
//! extracts a skeleton of points far from the graph boundary, embeds the
//! skeleton with metric MDS on graph-geodesic distances and spreads the
//! embedding to all points with a kernel smoother. The [`indices`] module
//! scores any reduction algorithm by its trustability and tractable
//! consistency indices.

pub mod embedding;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod indices;
pub mod io;
pub mod numerics;
pub mod pipeline;
pub mod rng;
pub mod skeleton;

pub use embedding::{Embedding, EmbeddingParams, KernelModel, KernelSpec, Reconstructor};
pub use error::{Error, Result};
pub use graph::{GeodesicDistances, ManifoldGraph};
pub use indices::{DimReducer, IndexReport, ProcrustesFit};
pub use numerics::{Matrix, PointCloud};
pub use pipeline::{lsdr, Dataset, DatasetSpec, Family, LsdrConfig, LsdrOutput, LsdrReducer};
pub use skeleton::SkeletonReport;
