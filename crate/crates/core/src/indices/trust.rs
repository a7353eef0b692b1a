//! Trustability and tractable consistency indices.

use log::warn;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{fit_reconstruction, median_heuristic, nearest_neighbour_scale, KernelSpec};
use crate::error::{Error, Result};
use crate::indices::adapter::DimReducer;
use crate::indices::knn::KnnMetrics;
use crate::indices::procrustes::procrustes_residual;
use crate::numerics::{nuclear_norm, sq_dist, Matrix};
use crate::rng::{stream, Stream};

/// `Σsing(Σ_YY) - Σsing(Σ_XY)² / Σsing(Σ_XX)` on centred cross-products.
pub fn trustability_from(x: &Matrix, y: &Matrix) -> Result<f64> {
    if x.rows() != y.rows() {
        return Err(Error::Shape(format!(
            "{} data rows but {} output rows",
            x.rows(),
            y.rows()
        )));
    }
    let xc = x.centered();
    let yc = y.centered();
    let sxx = nuclear_norm(&xc.t_matmul(&xc)?)?;
    if sxx <= 0.0 {
        return Err(Error::Degenerate("data has zero total variance".into()));
    }
    let syy = nuclear_norm(&yc.t_matmul(&yc)?)?;
    let sxy = nuclear_norm(&xc.t_matmul(&yc)?)?;
    Ok(syy - sxy * sxy / sxx)
}

/// Trustability index of `alg` on `x`, reducing to `d = p`.
pub fn trustability_index<R: DimReducer + ?Sized>(alg: &R, x: &Matrix) -> Result<f64> {
    let y = alg
        .reduce(x, x.cols())
        .map_err(|e| Error::Algorithm(alg.name(), e.to_string()))?;
    trustability_from(x, &y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TciOptions {
    pub d: usize,
    /// Bandwidth of the Gaussian transforms `k(·, x_i) e_j`.
    pub bandwidth: f64,
    /// Evaluate only this many transforms, chosen by a seeded shuffle.
    pub subsample: Option<usize>,
    pub seed: u64,
    /// Kernel for the embedding coefficients; defaults to a Gaussian at the
    /// mean nearest-neighbour distance of the data.
    pub kernel_x: Option<KernelSpec>,
    /// Kernel on the embedding; defaults to a Gaussian at the median
    /// pairwise embedding distance.
    pub kernel_y: Option<KernelSpec>,
}

impl TciOptions {
    pub fn new(d: usize, bandwidth: f64) -> Self {
        Self {
            d,
            bandwidth,
            subsample: None,
            seed: 0,
            kernel_x: None,
            kernel_y: None,
        }
    }
}

/// Misalignment caused by one transform `k(·, x_point) e_coord`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformContribution {
    pub point: usize,
    pub coord: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TciReport {
    pub tci: f64,
    pub tci_normalized: f64,
    /// Set when only part of the transform set was evaluated; `tci` is then
    /// a lower bound.
    pub lower_bound: bool,
    pub transforms_total: usize,
    pub transforms_failed: usize,
    pub bandwidth: f64,
    pub contributions: Vec<TransformContribution>,
}

/// The transform order used for subsampling: a seeded shuffle of all
/// `(point, coord)` pairs. Prefixes of this order are nested.
pub fn transform_order(n: usize, p: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut all: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..p).map(move |j| (i, j))).collect();
    all.shuffle(&mut stream(seed, Stream::TransformSubsample));
    all
}

/// Tractable consistency index: the worst Procrustes misfit between
/// `alg(X)` and `alg(X̃)` over transforms `T = k(·, x_i) e_j`, where
/// `X̃ = T(X_rec) + (X - X_rec)` and `X_rec` is the kernel reconstruction of
/// `X` from `alg(X)`.
pub fn tractable_consistency_index<R: DimReducer + ?Sized>(
    alg: &R,
    x: &Matrix,
    opts: &TciOptions,
) -> Result<TciReport> {
    let (n, p) = x.shape();
    if !(opts.bandwidth > 0.0 && opts.bandwidth.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "transform bandwidth must be positive, got {}",
            opts.bandwidth
        )));
    }
    let y = alg
        .reduce(x, opts.d)
        .map_err(|e| Error::Algorithm(alg.name(), e.to_string()))?;
    let kernel_x = match opts.kernel_x {
        Some(k) => k,
        None => KernelSpec::gaussian(nearest_neighbour_scale(x))?,
    };
    let kernel_y = match opts.kernel_y {
        Some(k) => k,
        None => KernelSpec::gaussian(median_heuristic(&y))?,
    };
    let recon = fit_reconstruction(x, &y, &kernel_x, &kernel_y)
        .map_err(|e| Error::Algorithm("reconstruction".into(), e.to_string()))?;
    let x_rec = recon.reconstruct_all(&y)?;
    let resid = x.sub(&x_rec)?;

    let mut order = transform_order(n, p, opts.seed);
    let total = order.len();
    if let Some(m) = opts.subsample {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "transform subsample must be positive".into(),
            ));
        }
        order.truncate(m);
    }
    let h = 2.0 * opts.bandwidth * opts.bandwidth;
    let evaluate = |&(i, j): &(usize, usize)| -> TransformContribution {
        let mut xt = resid.clone();
        for r in 0..n {
            xt[(r, j)] += (-sq_dist(x_rec.row(r), x.row(i)) / h).exp();
        }
        let outcome = alg
            .reduce(&xt, opts.d)
            .and_then(|yt| procrustes_residual(&yt, &y));
        match outcome {
            Ok(res) => TransformContribution {
                point: i,
                coord: j,
                residual: Some(res),
                error: None,
            },
            Err(e) => TransformContribution {
                point: i,
                coord: j,
                residual: None,
                error: Some(e.to_string()),
            },
        }
    };
    let contributions: Vec<TransformContribution> = if alg.reentrant() {
        order.par_iter().map(evaluate).collect()
    } else {
        order.iter().map(evaluate).collect()
    };
    let failed = contributions
        .iter()
        .filter(|c| c.residual.is_none())
        .count();
    if failed > 0 {
        warn!("{failed} transform(s) failed and were excluded from the index");
    }
    let tci = contributions
        .iter()
        .filter_map(|c| c.residual)
        .fold(f64::NEG_INFINITY, f64::max);
    if tci == f64::NEG_INFINITY {
        return Err(Error::Algorithm(
            alg.name(),
            "every transformed dataset failed to reduce".into(),
        ));
    }
    Ok(TciReport {
        tci,
        tci_normalized: tci / n as f64,
        lower_bound: contributions.len() < total,
        transforms_total: total,
        transforms_failed: failed,
        bandwidth: opts.bandwidth,
        contributions,
    })
}

/// All indices computed for one algorithm on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub algorithm: String,
    pub dataset: String,
    pub n: usize,
    pub p: usize,
    pub d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ti: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ti_normalized: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tci: Option<TciReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knn: Option<KnnMetrics>,
}

impl IndexReport {
    pub fn new(
        algorithm: impl Into<String>,
        dataset: impl Into<String>,
        n: usize,
        p: usize,
        d: usize,
    ) -> Self {
        Self {
            algorithm: algorithm.into(),
            dataset: dataset.into(),
            n,
            p,
            d,
            ti: None,
            ti_normalized: None,
            tci: None,
            knn: None,
        }
    }

    pub fn with_ti(mut self, ti: f64) -> Self {
        self.ti = Some(ti);
        self.ti_normalized = Some(ti / self.n as f64);
        self
    }

    pub const CSV_HEADER: &'static str =
        "algorithm,dataset,n,p,d,ti,ti_normalized,tci,tci_normalized,tci_lower_bound,tsi,trustworthiness,continuity";

    /// One row in the layout of [`IndexReport::CSV_HEADER`]; missing values
    /// are left empty.
    pub fn csv_row(&self) -> String {
        fn opt(v: Option<f64>) -> String {
            v.map(|x| format!("{x}")).unwrap_or_default()
        }
        let tci = self.tci.as_ref();
        [
            self.algorithm.clone(),
            self.dataset.clone(),
            self.n.to_string(),
            self.p.to_string(),
            self.d.to_string(),
            opt(self.ti),
            opt(self.ti_normalized),
            opt(tci.map(|t| t.tci)),
            opt(tci.map(|t| t.tci_normalized)),
            tci.map(|t| t.lower_bound.to_string()).unwrap_or_default(),
            opt(self.knn.map(|k| k.tsi)),
            opt(self.knn.map(|k| k.trustworthiness)),
            opt(self.knn.map(|k| k.continuity)),
        ]
        .join(",")
    }
}
