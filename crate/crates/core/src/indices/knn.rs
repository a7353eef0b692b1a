use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{pairwise_sq_dists, Matrix};

/// Neighbourhood-preservation scores for one `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnnMetrics {
    pub k: usize,
    pub tsi: f64,
    pub trustworthiness: f64,
    pub continuity: f64,
}

/// `ranks[i][j]`: rank of `j` by distance from `i` (nearest = 1, ties by
/// index, `ranks[i][i] = 0`).
pub fn neighbour_ranks(x: &Matrix) -> Vec<Vec<usize>> {
    let d = pairwise_sq_dists(x);
    let n = x.rows();
    (0..n)
        .map(|i| {
            let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            order.sort_by(|&a, &b| d[(i, a)].total_cmp(&d[(i, b)]).then(a.cmp(&b)));
            let mut rank = vec![0; n];
            for (r, &j) in order.iter().enumerate() {
                rank[j] = r + 1;
            }
            rank
        })
        .collect()
}

/// TSI, trustworthiness and continuity of `y` as a reduction of `x`.
///
/// Trustworthiness penalises embedding neighbours that are not data
/// neighbours by their data-space rank; continuity penalises data
/// neighbours missing from the embedding neighbourhood by their
/// embedding-space rank.
pub fn knn_metrics(x: &Matrix, y: &Matrix, k: usize) -> Result<KnnMetrics> {
    let n = x.rows();
    if y.rows() != n {
        return Err(Error::Shape(format!(
            "{n} data rows but {} embedding rows",
            y.rows()
        )));
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "neighbour count must satisfy 1 <= k < n (k = {k}, n = {n})"
        )));
    }
    let rx = neighbour_ranks(x);
    let ry = neighbour_ranks(y);
    let mut missing = 0usize;
    let mut trust_pen = 0usize;
    let mut cont_pen = 0usize;
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            let in_a = rx[i][j] <= k;
            let in_b = ry[i][j] <= k;
            if in_a && !in_b {
                missing += 1;
                cont_pen += ry[i][j] - k;
            }
            if in_b && !in_a {
                trust_pen += rx[i][j] - k;
            }
        }
    }
    let (nf, kf) = (n as f64, k as f64);
    let norm = nf * kf * (2.0 * nf - 3.0 * kf - 1.0);
    let scaled = |pen: usize| -> Result<f64> {
        if pen == 0 {
            Ok(1.0)
        } else if norm == 0.0 {
            Err(Error::InvalidParameter(format!(
                "rank normaliser vanishes for n = {n}, k = {k}"
            )))
        } else {
            Ok(1.0 - 2.0 * pen as f64 / norm)
        }
    };
    Ok(KnnMetrics {
        k,
        tsi: 1.0 - missing as f64 / (nf * kf),
        trustworthiness: scaled(trust_pen)?,
        continuity: scaled(cont_pen)?,
    })
}
