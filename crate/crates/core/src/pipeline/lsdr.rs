//! The end-to-end LSDR reduction.

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::embedding::{
    classical_scaling, metric_mds_with, nadaraya_embed, recommended_bandwidth, Embedding,
    EmbeddingParams, KernelSpec, MdsOptions,
};
use crate::error::{Error, Result};
use crate::geometry::{
    delaunay_tessellation, euclidean_mcst, Edge, TessellationOptions, DEFAULT_MAX_DIM,
};
use crate::graph::{
    all_pairs, graph_distances, prune_edges_with, DegreeUpdate, GeodesicDistances, GraphEdge,
    ManifoldGraph,
};
use crate::indices::{pca_reduce, DimReducer};
use crate::numerics::{pairwise_dists, sq_dist, Matrix};
use crate::skeleton::{skeletonize, SkeletonReport, DEFAULT_K};

pub const DEFAULT_ALPHA: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    #[default]
    Gaussian,
    BregmanIndicator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsdrConfig {
    pub alpha: f64,
    pub k: usize,
    pub d: usize,
    pub kernel: KernelFamily,
    /// Gaussian bandwidth; the recommended rule when `None`.
    pub bandwidth: Option<f64>,
    pub seed: u64,
    pub max_tess_dim: usize,
    /// Project onto this many principal coordinates before tessellating.
    pub pre_reduce_dim: Option<usize>,
    /// Compute graph distances only from skeletal points.
    pub restrict_distances: bool,
}

impl LsdrConfig {
    pub fn new(d: usize) -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            k: DEFAULT_K,
            d,
            kernel: KernelFamily::Gaussian,
            bandwidth: None,
            seed: 0,
            max_tess_dim: DEFAULT_MAX_DIM,
            pre_reduce_dim: None,
            restrict_distances: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_pre_reduce(mut self, dim: usize) -> Self {
        self.pre_reduce_dim = Some(dim);
        self
    }

    /// Checks the configuration against a `p`-dimensional input.
    pub fn validate(&self, p: usize) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if self.d == 0 || self.d >= p {
            return Err(Error::InvalidParameter(format!(
                "target dimension must satisfy 1 <= d < p = {p}, got {}",
                self.d
            )));
        }
        if let Some(bw) = self.bandwidth {
            if !(bw > 0.0 && bw.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "bandwidth must be positive, got {bw}"
                )));
            }
        }
        if let Some(m) = self.pre_reduce_dim {
            if m < self.d || m > p {
                return Err(Error::InvalidParameter(format!(
                    "pre-reduction dimension must lie in [d, p] = [{}, {p}], got {m}",
                    self.d
                )));
            }
        }
        Ok(())
    }
}

/// Why the skeleton step was bypassed in favour of MDS on all points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    /// The points do not span the ambient space; no tessellation exists.
    DegenerateGeometry,
    /// Every point lies on the graph boundary.
    AllBoundary,
    /// Too few skeletal points for a `d`-dimensional MDS.
    SmallSkeleton,
}

impl Fallback {
    pub fn describe(&self) -> &'static str {
        match self {
            Fallback::DegenerateGeometry => "points are affinely degenerate",
            Fallback::AllBoundary => "every point lies on the boundary",
            Fallback::SmallSkeleton => "skeleton is too small for the target dimension",
        }
    }
}

/// Every intermediate artifact of one LSDR run.
#[derive(Debug, Clone)]
pub struct LsdrOutput {
    pub embedding: Embedding,
    pub skeleton: SkeletonReport,
    pub graph: ManifoldGraph,
    pub geodesics: GeodesicDistances,
    /// MDS coordinates of the skeletal points, in skeleton order.
    pub skeletal_coords: Option<Matrix>,
    pub stress_trace: Vec<f64>,
    pub bandwidth: Option<f64>,
    pub fallback: Option<Fallback>,
    /// The coordinates the graph was built on.
    pub working_points: Matrix,
}

/// Localized skeletonization and dimensionality reduction of `x`.
pub fn lsdr(x: &Matrix, cfg: &LsdrConfig) -> Result<LsdrOutput> {
    let (n, p) = x.shape();
    if !x.is_finite() {
        return Err(Error::NonFinite("input points"));
    }
    cfg.validate(p)?;
    let work = match cfg.pre_reduce_dim {
        Some(m) if m < p => pca_reduce(x, m)?.coords,
        _ => x.clone(),
    };
    let wp = work.cols();
    if wp > cfg.max_tess_dim {
        return Err(Error::DimensionTooHigh {
            dim: wp,
            cap: cfg.max_tess_dim,
        });
    }
    if n <= wp {
        return Err(Error::TooFewPoints {
            n,
            required: wp + 1,
        });
    }

    let (graph, degenerate) = manifold_graph(&work, cfg.alpha, cfg.seed, cfg.max_tess_dim)?;
    debug_assert!(graph.is_connected());

    let skeleton = skeletonize(&graph, cfg.k)?;
    let fallback = if degenerate {
        Some(Fallback::DegenerateGeometry)
    } else if skeleton.all_boundary {
        Some(Fallback::AllBoundary)
    } else if skeleton.skeletal_points.len() <= cfg.d {
        Some(Fallback::SmallSkeleton)
    } else {
        None
    };

    if let Some(reason) = fallback {
        warn!(
            "{}; falling back to metric MDS on all points",
            reason.describe()
        );
        if cfg.d >= n {
            return Err(Error::TooFewPoints {
                n,
                required: cfg.d + 1,
            });
        }
        let geodesics = all_pairs(&graph)?;
        let q = symmetric_block(&geodesics, &(0..n).collect::<Vec<_>>());
        let mds = metric_mds_with(&q, cfg.d, &MdsOptions::default())?;
        let embedding = Embedding::new(
            mds.coords,
            "lsdr",
            EmbeddingParams {
                d: cfg.d,
                alpha: Some(cfg.alpha),
                k: Some(cfg.k),
                bandwidth: None,
            },
        )?;
        return Ok(LsdrOutput {
            embedding,
            skeleton,
            graph,
            geodesics,
            skeletal_coords: None,
            stress_trace: mds.stress_trace,
            bandwidth: None,
            fallback,
            working_points: work,
        });
    }

    let sk = &skeleton.skeletal_points;
    let geodesics = if cfg.restrict_distances {
        graph_distances(&graph, sk)?
    } else {
        all_pairs(&graph)?
    };
    let q = symmetric_block(&geodesics, sk);
    let mds = metric_mds_with(&q, cfg.d, &MdsOptions::default())?;
    info!(
        "skeleton of {} points embedded with stress {:.4e} after {} iterations",
        sk.len(),
        mds.final_stress(),
        mds.iterations
    );

    let (kernel, bandwidth) = match cfg.kernel {
        KernelFamily::Gaussian => {
            let bw = match cfg.bandwidth {
                Some(bw) => bw,
                None => recommended_bandwidth(&skeleton, &geodesics)?,
            };
            (KernelSpec::gaussian(bw)?, Some(bw))
        }
        KernelFamily::BregmanIndicator => (KernelSpec::BregmanIndicator, None),
    };
    let coords = nadaraya_embed(&mds.coords, &work.select_rows(sk), &work, &kernel)?;
    let embedding = Embedding::new(
        coords,
        "lsdr",
        EmbeddingParams {
            d: cfg.d,
            alpha: Some(cfg.alpha),
            k: Some(cfg.k),
            bandwidth,
        },
    )?;
    Ok(LsdrOutput {
        embedding,
        skeleton,
        graph,
        geodesics,
        skeletal_coords: Some(mds.coords),
        stress_trace: mds.stress_trace,
        bandwidth,
        fallback: None,
        working_points: work,
    })
}

/// The pruned tessellation graph of `x`, or the spanning tree of the
/// complete graph when `x` is affinely degenerate (flagged by the `bool`).
pub fn manifold_graph(
    x: &Matrix,
    alpha: f64,
    seed: u64,
    max_dim: usize,
) -> Result<(ManifoldGraph, bool)> {
    let opts = TessellationOptions {
        max_dim,
        jitter_seed: seed,
    };
    match delaunay_tessellation(x, &opts) {
        Ok(tess) => {
            let mcst = euclidean_mcst(x.rows(), &tess.edges)?;
            let g = prune_edges_with(&tess, &mcst, alpha, DegreeUpdate::UntilStable)?;
            Ok((g, false))
        }
        Err(Error::Degenerate(msg)) => {
            warn!("tessellation impossible ({msg}); using the spanning tree of the complete graph");
            Ok((spanning_tree_graph(x, alpha)?, true))
        }
        Err(e) => Err(e),
    }
}

/// Geodesic distances among `idx`, averaged with the transpose.
fn symmetric_block(geo: &GeodesicDistances, idx: &[usize]) -> Matrix {
    let row_of: std::collections::HashMap<usize, usize> = geo
        .sources
        .iter()
        .enumerate()
        .map(|(r, &s)| (s, r))
        .collect();
    let m = idx.len();
    let mut q = Matrix::zeros(m, m);
    for a in 0..m {
        for b in (a + 1)..m {
            let ab = geo.rows[row_of[&idx[a]]][idx[b]];
            let ba = geo.rows[row_of[&idx[b]]][idx[a]];
            let v = 0.5 * (ab + ba);
            q[(a, b)] = v;
            q[(b, a)] = v;
        }
    }
    q
}

/// Minimum spanning tree of the complete Euclidean graph, as a cell-free
/// manifold graph.
fn spanning_tree_graph(x: &Matrix, alpha: f64) -> Result<ManifoldGraph> {
    let n = x.rows();
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            edges.push(Edge {
                a,
                b,
                length: sq_dist(x.row(a), x.row(b)).sqrt(),
            });
        }
    }
    let tree = euclidean_mcst(n, &edges)?;
    let edges = tree
        .edges
        .iter()
        .map(|e| GraphEdge {
            a: e.a,
            b: e.b,
            length: e.length,
            mcst: true,
        })
        .collect();
    Ok(ManifoldGraph::new(n, x.cols(), alpha, edges, vec![]))
}

/// Distance-preserving coordinates of `x` in `min(p, n - 1)` dimensions by
/// classical scaling at full rank.
pub fn pre_reduce(x: &Matrix) -> Result<Matrix> {
    let (n, p) = x.shape();
    if !x.is_finite() {
        return Err(Error::NonFinite("input points"));
    }
    if n < 2 {
        return Matrix::from_vec(n, 1, vec![0.0; n]);
    }
    classical_scaling(&pairwise_dists(x), p.min(n - 1))
}

/// LSDR as a [`DimReducer`]; the target dimension of `reduce` overrides
/// `config.d`.
#[derive(Debug, Clone)]
pub struct LsdrReducer {
    pub config: LsdrConfig,
}

impl LsdrReducer {
    pub fn new(config: LsdrConfig) -> Self {
        Self { config }
    }
}

impl DimReducer for LsdrReducer {
    fn name(&self) -> String {
        "lsdr".into()
    }

    fn reduce(&self, x: &Matrix, d: usize) -> Result<Matrix> {
        let cfg = LsdrConfig {
            d,
            ..self.config.clone()
        };
        Ok(lsdr(x, &cfg)?.embedding.coords)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(LsdrConfig::new(1).validate(2).is_ok());
        assert!(LsdrConfig::new(2).validate(2).is_err());
        assert!(LsdrConfig::new(0).validate(2).is_err());
        let mut c = LsdrConfig::new(1);
        c.alpha = 1.0;
        assert!(c.validate(2).is_err());
        c.alpha = 0.9;
        c.k = 0;
        assert!(c.validate(2).is_err());
        assert!(LsdrConfig::new(1).with_pre_reduce(4).validate(3).is_err());
    }

    #[test]
    fn collinear_points_fall_back_to_mds() {
        let x = Matrix::from_vec(
            50,
            2,
            (0..50).flat_map(|i| [i as f64, 2.0 * i as f64]).collect(),
        )
        .unwrap();
        let out = lsdr(&x, &LsdrConfig::new(1)).unwrap();
        assert_eq!(out.fallback, Some(Fallback::DegenerateGeometry));
        let y = out.embedding.coords.col(0);
        let step = 5f64.sqrt();
        let sign = (y[1] - y[0]).signum();
        for i in 1..50 {
            assert!((sign * (y[i] - y[i - 1]) - step).abs() < 1e-8);
        }
    }

    #[test]
    fn pre_reduce_keeps_distances() {
        let x = Matrix::from_rows(&[
            [1.0, 0.0, 2.0, 0.0, 5.0],
            [0.0, 3.0, 1.0, 1.0, 0.0],
            [2.0, 2.0, 0.0, 4.0, 1.0],
        ])
        .unwrap();
        let y = pre_reduce(&x).unwrap();
        assert_eq!(y.cols(), 2);
        let (dx, dy) = (pairwise_dists(&x), pairwise_dists(&y));
        assert!(dx.sub(&dy).unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn too_high_dimension_needs_pre_reduction() {
        let x =
            Matrix::from_vec(20, 8, (0..160).map(|v| ((v * 37) % 11) as f64).collect()).unwrap();
        assert!(matches!(
            lsdr(&x, &LsdrConfig::new(2)),
            Err(Error::DimensionTooHigh { dim: 8, cap: 6 })
        ));
    }
}
