//! Metric MDS, kernel smoothing, the out-of-sample estimator and the
//! reconstruction function.

pub mod kernel;
pub mod mds;
pub mod reconstruct;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub use kernel::{
    fit_out_of_sample, median_heuristic, nadaraya_embed, nearest_neighbour_scale,
    recommended_bandwidth, KernelModel, KernelSpec,
};
pub use mds::{
    classical_scaling, metric_mds, metric_mds_with, stress, validate_distances, MdsOptions,
    MdsResult,
};
pub use reconstruct::{
    centre_gram, cross_covariance, fit_reconstruction, fit_reconstruction_with_alpha, Reconstructor,
};

/// Parameters recorded alongside an embedding.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
}

/// An `n x d` reduced representation and where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub coords: Matrix,
    pub algorithm: String,
    pub params: EmbeddingParams,
}

impl Embedding {
    pub fn new(
        coords: Matrix,
        algorithm: impl Into<String>,
        params: EmbeddingParams,
    ) -> Result<Self> {
        if !coords.is_finite() {
            return Err(Error::NonFinite("embedding coordinates"));
        }
        if params.d != coords.cols() {
            return Err(Error::Shape(format!(
                "embedding has {} columns but d = {}",
                coords.cols(),
                params.d
            )));
        }
        Ok(Self {
            coords,
            algorithm: algorithm.into(),
            params,
        })
    }

    pub fn n(&self) -> usize {
        self.coords.rows()
    }

    pub fn d(&self) -> usize {
        self.coords.cols()
    }
}
