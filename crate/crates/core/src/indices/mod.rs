//! Procrustes alignment, trustability and consistency indices, kNN
//! neighbourhood scores and the PCA baseline.

pub mod adapter;
pub mod knn;
pub mod pca;
pub mod procrustes;
pub mod trust;

pub use adapter::{ConstantReducer, DimReducer, IdentityReducer, PcaReducer, Rotated};
pub use knn::{knn_metrics, neighbour_ranks, KnnMetrics};
pub use pca::{pca_reduce, principal_axes};
pub use procrustes::{procrustes_fit, procrustes_residual, ProcrustesFit};
pub use trust::{
    tractable_consistency_index, transform_order, trustability_from, trustability_index,
    IndexReport, TciOptions, TciReport, TransformContribution,
};
