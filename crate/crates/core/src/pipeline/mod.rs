//! The LSDR pipeline and synthetic datasets.

pub mod datasets;
pub mod lsdr;

pub use datasets::{generate, Dataset, DatasetSpec, Family};
pub use lsdr::{
    lsdr, manifold_graph, pre_reduce, Fallback, KernelFamily, LsdrConfig, LsdrOutput, LsdrReducer,
};
