use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{sq_dist, sym_eigen, Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdsOptions {
    pub max_iter: usize,
    /// Stop once the relative decrease of the stress falls below this.
    pub rel_tol: f64,
}

impl Default for MdsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            rel_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MdsResult {
    pub coords: Matrix,
    /// Stress of the classical start followed by one entry per iteration.
    pub stress_trace: Vec<f64>,
    pub iterations: usize,
}

impl MdsResult {
    pub fn final_stress(&self) -> f64 {
        *self
            .stress_trace
            .last()
            .expect("trace holds the starting stress")
    }
}

/// Checks that `q` is a square, symmetric, non-negative matrix with a zero
/// diagonal.
pub fn validate_distances(q: &Matrix) -> Result<()> {
    if !q.is_square() {
        return Err(Error::Shape(format!(
            "distance matrix must be square, got {}x{}",
            q.rows(),
            q.cols()
        )));
    }
    if !q.is_finite() {
        return Err(Error::NonFinite("distance matrix"));
    }
    let scale = q.max_abs().max(1.0);
    let asym = q.asymmetry();
    if asym > 1e-9 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let n = q.rows();
    for i in 0..n {
        if q[(i, i)].abs() > 1e-12 * scale {
            return Err(Error::InvalidParameter(format!(
                "distance matrix has non-zero diagonal entry at {i}"
            )));
        }
    }
    if q.as_slice().iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidParameter(
            "distance matrix has negative entries".into(),
        ));
    }
    Ok(())
}

/// Classical (Torgerson) scaling: top-`d` eigenpairs of `-1/2 H Q∘Q H`.
/// Negative eigenvalues are clamped to zero.
pub fn classical_scaling(q: &Matrix, d: usize) -> Result<Matrix> {
    validate_distances(q)?;
    let n = q.rows();
    check_dim(n, d)?;
    let mut b = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = q[(i, j)] * q[(i, j)];
        }
    }
    let row_means: Vec<f64> = (0..n)
        .map(|i| b.row(i).iter().sum::<f64>() / n as f64)
        .collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            // row and column means coincide by symmetry
            b[(i, j)] = -0.5 * (b[(i, j)] - row_means[i] - row_means[j] + grand);
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (b[(i, j)] + b[(j, i)]);
            b[(i, j)] = avg;
            b[(j, i)] = avg;
        }
    }
    let (values, vectors) = sym_eigen(&b)?;
    let mut y = Matrix::zeros(n, d);
    for c in 0..d {
        let s = values[c].max(0.0).sqrt();
        for i in 0..n {
            y[(i, c)] = vectors[(i, c)] * s;
        }
    }
    Ok(y)
}

/// Square root of `Σ_{i<j} (q_ij - |y_i - y_j|)²`.
pub fn stress(q: &Matrix, y: &Matrix) -> Result<f64> {
    if !q.is_square() || q.rows() != y.rows() {
        return Err(Error::Shape(format!(
            "stress needs an n x n distance matrix and n embedding rows, got {}x{} and {}",
            q.rows(),
            q.cols(),
            y.rows()
        )));
    }
    Ok(raw_stress(q, y).sqrt())
}

// Row sums are collected before adding so the total does not depend on the
// thread schedule.
fn raw_stress(q: &Matrix, y: &Matrix) -> f64 {
    let n = q.rows();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let yi = y.row(i);
            ((i + 1)..n)
                .map(|j| {
                    let r = q[(i, j)] - sq_dist(yi, y.row(j)).sqrt();
                    r * r
                })
                .sum::<f64>()
        })
        .collect();
    rows.iter().sum()
}

fn check_dim(n: usize, d: usize) -> Result<()> {
    if d == 0 || d >= n {
        return Err(Error::InvalidParameter(format!(
            "target dimension must satisfy 1 <= d < n (d = {d}, n = {n})"
        )));
    }
    Ok(())
}

/// Metric MDS with default options.
pub fn metric_mds(q: &Matrix, d: usize) -> Result<Matrix> {
    Ok(metric_mds_with(q, d, &MdsOptions::default())?.coords)
}

/// Classical scaling start refined by Guttman-transform stress majorization
/// with unit weights.
pub fn metric_mds_with(q: &Matrix, d: usize, opts: &MdsOptions) -> Result<MdsResult> {
    let mut y = classical_scaling(q, d)?;
    let total: f64 = q.as_slice().iter().map(|v| v * v).sum::<f64>() / 2.0;
    let mut current = raw_stress(q, &y);
    let mut trace = vec![current.sqrt()];
    let mut iterations = 0;
    while iterations < opts.max_iter && current > 1e-28 * total {
        let next = guttman(q, &y);
        let s = raw_stress(q, &next);
        iterations += 1;
        if s > current {
            // rounding at the optimum; keep the better iterate
            break;
        }
        y = next;
        let decrease = current - s;
        current = s;
        trace.push(s.sqrt());
        if decrease <= opts.rel_tol * trace[trace.len() - 2].powi(2) {
            break;
        }
    }
    if !y.is_finite() {
        return Err(Error::Numerical("stress majorization diverged".into()));
    }
    Ok(MdsResult {
        coords: y,
        stress_trace: trace,
        iterations,
    })
}

// Y+ = n⁻¹ B(Y) Y
fn guttman(q: &Matrix, y: &Matrix) -> Matrix {
    let (n, d) = y.shape();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let yi = y.row(i);
            let mut out = vec![0.0; d];
            let mut diag = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let dist = sq_dist(yi, y.row(j)).sqrt();
                if dist > 0.0 {
                    let b = q[(i, j)] / dist;
                    diag += b;
                    for (o, &v) in out.iter_mut().zip(y.row(j)) {
                        *o -= b * v;
                    }
                }
            }
            for (o, &v) in out.iter_mut().zip(yi) {
                *o = (*o + diag * v) / n as f64;
            }
            out
        })
        .collect();
    let mut next = Matrix::zeros(n, d);
    for (i, r) in rows.into_iter().enumerate() {
        next.row_mut(i).copy_from_slice(&r);
    }
    next
}
