use std::collections::HashMap;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GeodesicDistances;
use crate::numerics::{dot, solve_spd, sq_dist, Matrix};
use crate::skeleton::SkeletonReport;

/// Scalar kernels on ℝᵖ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `exp(-|x - x'|² / (2σ²))`.
    Gaussian { bandwidth: f64 },
    /// 1 on identical points, 0 elsewhere.
    BregmanIndicator,
    /// `<x, x'>`.
    Linear,
}

impl KernelSpec {
    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kernel bandwidth must be positive, got {bandwidth}"
            )));
        }
        Ok(KernelSpec::Gaussian { bandwidth })
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            KernelSpec::Gaussian { bandwidth } => {
                (-sq_dist(a, b) / (2.0 * bandwidth * bandwidth)).exp()
            }
            KernelSpec::BregmanIndicator => f64::from(u8::from(a == b)),
            KernelSpec::Linear => dot(a, b),
        }
    }

    /// `k(x_i, x_j)` over the rows of `x`.
    pub fn gram(&self, x: &Matrix) -> Matrix {
        let n = x.rows();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| self.eval(x.row(i), x.row(j))).collect())
            .collect();
        let mut k = Matrix::zeros(n, n);
        for (i, r) in rows.into_iter().enumerate() {
            k.row_mut(i).copy_from_slice(&r);
        }
        k
    }

    fn validate(&self) -> Result<()> {
        if let KernelSpec::Gaussian { bandwidth } = *self {
            KernelSpec::gaussian(bandwidth)?;
        }
        Ok(())
    }
}

/// Median of the non-zero pairwise distances between rows; 1 when every row
/// coincides.
pub fn median_heuristic(x: &Matrix) -> f64 {
    let n = x.rows();
    let mut d: Vec<f64> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| sq_dist(x.row(i), x.row(j)).sqrt())
        .filter(|&v| v > 0.0)
        .collect();
    if d.is_empty() {
        return 1.0;
    }
    let mid = d.len() / 2;
    *d.select_nth_unstable_by(mid, f64::total_cmp).1
}

/// Mean distance from each row to its nearest other row; 1 when undefined.
pub fn nearest_neighbour_scale(x: &Matrix) -> f64 {
    let n = x.rows();
    let nn: Vec<f64> = (0..n)
        .into_par_iter()
        .filter_map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| sq_dist(x.row(i), x.row(j)))
                .filter(|&v| v > 0.0)
                .min_by(f64::total_cmp)
                .map(f64::sqrt)
        })
        .collect();
    if nn.is_empty() {
        1.0
    } else {
        nn.iter().sum::<f64>() / nn.len() as f64
    }
}

/// Kernel-weighted average of skeletal embeddings at every point.
///
/// Gaussian weights are shifted by the smallest squared distance before
/// exponentiation, which leaves the ratios unchanged. Points whose weights
/// still sum to zero take the embedding of their nearest skeletal point.
pub fn nadaraya_embed(
    skeletal_coords: &Matrix,
    skeletal_points: &Matrix,
    all_points: &Matrix,
    kernel: &KernelSpec,
) -> Result<Matrix> {
    kernel.validate()?;
    let m = skeletal_points.rows();
    if m == 0 || skeletal_coords.rows() != m {
        return Err(Error::Shape(format!(
            "need matching skeletal points and coordinates, got {} and {}",
            m,
            skeletal_coords.rows()
        )));
    }
    if skeletal_points.cols() != all_points.cols() {
        return Err(Error::Shape(
            "skeletal points and data differ in dimension".into(),
        ));
    }
    let d = skeletal_coords.cols();
    let results: Vec<(Vec<f64>, bool)> = (0..all_points.rows())
        .into_par_iter()
        .map(|i| {
            let x = all_points.row(i);
            let sq: Vec<f64> = (0..m).map(|j| sq_dist(x, skeletal_points.row(j))).collect();
            let nearest = (0..m)
                .min_by(|&a, &b| sq[a].total_cmp(&sq[b]).then(a.cmp(&b)))
                .expect("m > 0");
            let weights: Vec<f64> = match *kernel {
                KernelSpec::Gaussian { bandwidth } => {
                    let shift = sq[nearest];
                    let h = 2.0 * bandwidth * bandwidth;
                    sq.iter().map(|&s| (-(s - shift) / h).exp()).collect()
                }
                _ => (0..m)
                    .map(|j| kernel.eval(x, skeletal_points.row(j)))
                    .collect(),
            };
            let total: f64 = weights.iter().sum();
            if !(total > 0.0 && total.is_finite()) {
                return (skeletal_coords.row(nearest).to_vec(), true);
            }
            let mut out = vec![0.0; d];
            for (j, &w) in weights.iter().enumerate() {
                for (o, &v) in out.iter_mut().zip(skeletal_coords.row(j)) {
                    *o += w * v;
                }
            }
            out.iter_mut().for_each(|o| *o /= total);
            (out, false)
        })
        .collect();
    let fallbacks = results.iter().filter(|(_, f)| *f).count();
    if fallbacks > 0 {
        warn!("{fallbacks} point(s) had no kernel weight; used the nearest skeletal point");
    }
    let mut y = Matrix::zeros(all_points.rows(), d);
    for (i, (row, _)) in results.into_iter().enumerate() {
        y.row_mut(i).copy_from_slice(&row);
    }
    Ok(y)
}

/// `σ = max_i sqrt(d_B(x_i)² + min_{j≠i} d_G(x_i, x_j)²)` over skeletal
/// points `i, j`.
///
/// `geo` must contain a row for every skeletal point.
pub fn recommended_bandwidth(report: &SkeletonReport, geo: &GeodesicDistances) -> Result<f64> {
    let sk = &report.skeletal_points;
    if sk.is_empty() {
        return Err(Error::InvalidParameter("skeleton is empty".into()));
    }
    if sk.len() == 1 {
        warn!("single skeletal point; bandwidth falls back to its boundary distance");
        return positive(report.boundary_distance[sk[0]]);
    }
    let row_of: HashMap<usize, usize> = geo
        .sources
        .iter()
        .enumerate()
        .map(|(r, &s)| (s, r))
        .collect();
    let mut sigma = 0.0_f64;
    for &i in sk {
        let row = row_of
            .get(&i)
            .ok_or_else(|| Error::Shape(format!("no graph distances from skeletal point {i}")))?;
        let nearest = sk
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| geo.rows[*row][j])
            .fold(f64::INFINITY, f64::min);
        let db = report.boundary_distance[i];
        sigma = sigma.max((db * db + nearest * nearest).sqrt());
    }
    positive(sigma)
}

fn positive(sigma: f64) -> Result<f64> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(sigma)
    } else {
        Err(Error::Degenerate(format!(
            "bandwidth rule produced {sigma}"
        )))
    }
}

/// Kernel interpolant `φ(x) = Σ_i α_i k(x, x_i)` of a training embedding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelModel {
    pub kernel: KernelSpec,
    /// Training points after removal of duplicates.
    pub train: Matrix,
    pub train_embedding: Matrix,
    /// `n x d`; solves `(K + εI) α = Y`.
    pub alpha: Matrix,
    pub ridge: f64,
    /// Input rows dropped as duplicates of an earlier row.
    pub dropped: Vec<usize>,
}

impl KernelModel {
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let d = self.alpha.cols();
        let mut out = vec![0.0; d];
        for i in 0..self.train.rows() {
            let k = self.kernel.eval(x, self.train.row(i));
            if k != 0.0 {
                for (o, &a) in out.iter_mut().zip(self.alpha.row(i)) {
                    *o += k * a;
                }
            }
        }
        out
    }

    pub fn eval_many(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.train.cols() {
            return Err(Error::Shape(format!(
                "model expects {} columns, got {}",
                self.train.cols(),
                x.cols()
            )));
        }
        let rows: Vec<Vec<f64>> = (0..x.rows())
            .into_par_iter()
            .map(|i| self.eval(x.row(i)))
            .collect();
        let mut y = Matrix::zeros(x.rows(), self.alpha.cols());
        for (i, r) in rows.into_iter().enumerate() {
            y.row_mut(i).copy_from_slice(&r);
        }
        Ok(y)
    }
}

/// Fits the kernel interpolant with ridge `1e-8 · tr(K) / n`.
pub fn fit_out_of_sample(
    train: &Matrix,
    embedding: &Matrix,
    kernel: &KernelSpec,
) -> Result<KernelModel> {
    kernel.validate()?;
    if train.rows() != embedding.rows() {
        return Err(Error::Shape(format!(
            "{} training points but {} embedding rows",
            train.rows(),
            embedding.rows()
        )));
    }
    let mut keep = Vec::with_capacity(train.rows());
    let mut dropped = Vec::new();
    for i in 0..train.rows() {
        if keep.iter().any(|&j: &usize| train.row(j) == train.row(i)) {
            dropped.push(i);
        } else {
            keep.push(i);
        }
    }
    if !dropped.is_empty() {
        warn!(
            "dropped {} duplicate training point(s) before the kernel solve",
            dropped.len()
        );
    }
    let x = train.select_rows(&keep);
    let y = embedding.select_rows(&keep);
    let mut k = kernel.gram(&x);
    let n = x.rows();
    let ridge = 1e-8 * k.trace() / n as f64;
    for i in 0..n {
        k[(i, i)] += ridge;
    }
    let alpha = solve_spd(&k, &y).map_err(|_| {
        Error::Numerical("kernel matrix is not positive definite on the training points".into())
    })?;
    Ok(KernelModel {
        kernel: *kernel,
        train: x,
        train_embedding: y,
        alpha,
        ridge,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{all_pairs, GraphEdge, ManifoldGraph};

    #[test]
    fn single_skeletal_point_is_constant_map() {
        let s = Matrix::from_rows(&[[0.0, 0.0]]).unwrap();
        let c = Matrix::from_rows(&[[2.5]]).unwrap();
        let all = Matrix::from_rows(&[[0.0, 0.0], [3.0, 1.0], [100.0, 0.0]]).unwrap();
        let y = nadaraya_embed(&c, &s, &all, &KernelSpec::Gaussian { bandwidth: 0.5 }).unwrap();
        assert_eq!(y.col(0), vec![2.5; 3]);
    }

    #[test]
    fn midpoint_averages_to_zero() {
        let s = Matrix::from_rows(&[[-1.0, 0.0], [1.0, 0.0]]).unwrap();
        let c = Matrix::from_rows(&[[-1.0], [1.0]]).unwrap();
        let q = Matrix::from_rows(&[[0.0, 3.0]]).unwrap();
        let y = nadaraya_embed(&c, &s, &q, &KernelSpec::Gaussian { bandwidth: 1.0 }).unwrap();
        assert!(y[(0, 0)].abs() < 1e-15);
    }

    #[test]
    fn indicator_kernel_falls_back_to_nearest() {
        let s = Matrix::from_rows(&[[0.0], [10.0]]).unwrap();
        let c = Matrix::from_rows(&[[1.0], [2.0]]).unwrap();
        let q = Matrix::from_rows(&[[0.0], [8.0]]).unwrap();
        let y = nadaraya_embed(&c, &s, &q, &KernelSpec::BregmanIndicator).unwrap();
        assert_eq!(y.col(0), vec![1.0, 2.0]);
    }

    fn unit_path(n: usize) -> ManifoldGraph {
        let edges = (0..n - 1)
            .map(|i| GraphEdge {
                a: i,
                b: i + 1,
                length: 1.0,
                mcst: true,
            })
            .collect();
        ManifoldGraph::new(n, 1, 0.95, edges, vec![])
    }

    fn report(skeletal: Vec<usize>, d_b: Vec<f64>) -> SkeletonReport {
        SkeletonReport {
            boundary_points: vec![],
            boundary_distance: d_b,
            skeletal_points: skeletal,
            k_neighbours: 3,
            all_boundary: false,
        }
    }

    #[test]
    fn bandwidth_examples() {
        let g = unit_path(3);
        let geo = all_pairs(&g).unwrap();
        let r = report(vec![0, 2], vec![0.0; 3]);
        assert_eq!(recommended_bandwidth(&r, &geo).unwrap(), 2.0);

        let g = unit_path(5);
        let geo = all_pairs(&g).unwrap();
        let r = report(vec![0, 1, 2, 3, 4], vec![1.0; 5]);
        assert!((recommended_bandwidth(&r, &geo).unwrap() - 2f64.sqrt()).abs() < 1e-15);

        let r = report(vec![2], vec![0.0, 0.5, 0.75, 0.5, 0.0]);
        assert_eq!(recommended_bandwidth(&r, &geo).unwrap(), 0.75);
    }

    #[test]
    fn interpolates_training_points() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.2], [0.3, 1.1], [2.0, 2.0]]).unwrap();
        let y = Matrix::from_rows(&[[1.0], [-2.0], [0.5], [3.0]]).unwrap();
        let m = fit_out_of_sample(&x, &y, &KernelSpec::Gaussian { bandwidth: 0.5 }).unwrap();
        let fitted = m.eval_many(&x).unwrap();
        assert!(fitted.sub(&y).unwrap().max_abs() < 1e-5 * y.max_abs());
    }

    #[test]
    fn one_point_model_scales_by_kernel() {
        let x = Matrix::from_rows(&[[0.0, 0.0]]).unwrap();
        let y = Matrix::from_rows(&[[4.0, -2.0]]).unwrap();
        let k = KernelSpec::Gaussian { bandwidth: 1.0 };
        let m = fit_out_of_sample(&x, &y, &k).unwrap();
        let q = [1.0, 1.0];
        let w = k.eval(&q, &[0.0, 0.0]);
        let v = m.eval(&q);
        assert!((v[0] - 4.0 * w).abs() < 1e-7 && (v[1] + 2.0 * w).abs() < 1e-7);
    }

    #[test]
    fn duplicates_are_dropped() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [0.0]]).unwrap();
        let y = Matrix::from_rows(&[[0.0], [1.0], [5.0]]).unwrap();
        let m = fit_out_of_sample(&x, &y, &KernelSpec::Gaussian { bandwidth: 1.0 }).unwrap();
        assert_eq!(m.dropped, vec![2]);
        assert_eq!(m.train.rows(), 2);
    }

    #[test]
    fn heuristics() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [3.0]]).unwrap();
        assert_eq!(median_heuristic(&x), 2.0);
        assert_eq!(nearest_neighbour_scale(&x), (1.0 + 1.0 + 2.0) / 3.0);
        assert_eq!(median_heuristic(&Matrix::zeros(3, 1)), 1.0);
    }
}
