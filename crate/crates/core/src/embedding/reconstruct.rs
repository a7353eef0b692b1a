//! Kernel reconstruction `f: ℝᵈ → ℝᵖ` whose residuals are uncorrelated with
//! the embedding on the training data.
//!
//! With `H` the centring matrix, `G = H K H` the centred Gram matrices and
//! `c_l` the empirical covariances between the `l`-th data coordinate and
//! the embedding, each coordinate is
//!
//! ```text
//! f_l(y) = mean_l + Σ_i β_il (k_y(y, y_i) - n⁻¹ Σ_j k_y(y_j, y_i))
//! β_l    = A (AᵀA)⁺ c_l,   A = n⁻¹ G_y H Y   (n x d)
//! ```
//!
//! When `1ᵀα = 0` and `K_x α = Y`, `G_x α = H Y`, so `A = n⁻¹ G_y G_x α`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::kernel::{fit_out_of_sample, KernelSpec};
use crate::error::{Error, Result};
use crate::numerics::{pinv, Matrix};

const PINV_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Reconstructor {
    pub kernel_x: KernelSpec,
    pub kernel_y: KernelSpec,
    /// Column means of the training data (length `p`).
    pub means: Vec<f64>,
    /// `n x p`.
    pub beta: Matrix,
    pub gram_x: Matrix,
    pub gram_y: Matrix,
    /// `d x p` empirical covariances `c_jl`.
    pub c: Matrix,
    /// `n x d`.
    pub a: Matrix,
    /// Embedding coefficients of the training points, `n x d`.
    pub alpha: Matrix,
    pub train_embedding: Matrix,
    /// `n⁻¹ Σ_j k_y(y_j, y_i)` per training point.
    pub ky_means: Vec<f64>,
    /// Numerical rank of `AᵀA`.
    pub rank: usize,
}

/// `H K H` for a Gram matrix `K`.
pub fn centre_gram(k: &Matrix) -> Matrix {
    let n = k.rows();
    let row_means: Vec<f64> = (0..n)
        .map(|i| k.row(i).iter().sum::<f64>() / n as f64)
        .collect();
    let col_means = k.col_means();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let mut g = k.clone();
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = k[(i, j)] - col_means[j] - row_means[i] + grand;
        }
    }
    g
}

/// `c_jl = n⁻¹ Σ_i x_il y_ij - x̄_l ȳ_j`, laid out `d x p`.
pub fn cross_covariance(x: &Matrix, y: &Matrix) -> Result<Matrix> {
    if x.rows() != y.rows() {
        return Err(Error::Shape(
            "cross-covariance needs equal row counts".into(),
        ));
    }
    let n = x.rows() as f64;
    Ok(y.centered().t_matmul(&x.centered())?.scale(1.0 / n))
}

/// Fits the embedding coefficients with [`fit_out_of_sample`], then the
/// reconstruction.
pub fn fit_reconstruction(
    train: &Matrix,
    embedding: &Matrix,
    kernel_x: &KernelSpec,
    kernel_y: &KernelSpec,
) -> Result<Reconstructor> {
    let model = fit_out_of_sample(train, embedding, kernel_x)?;
    fit_reconstruction_with_alpha(train, embedding, &model.alpha, kernel_x, kernel_y)
}

/// Fits the reconstruction from given embedding coefficients `alpha`.
pub fn fit_reconstruction_with_alpha(
    train: &Matrix,
    embedding: &Matrix,
    alpha: &Matrix,
    kernel_x: &KernelSpec,
    kernel_y: &KernelSpec,
) -> Result<Reconstructor> {
    let n = train.rows();
    if embedding.rows() != n {
        return Err(Error::Shape(format!(
            "{n} training points but {} embedding rows",
            embedding.rows()
        )));
    }
    if alpha.cols() != embedding.cols() {
        return Err(Error::Shape(
            "coefficient and embedding widths differ".into(),
        ));
    }
    if embedding.cols() >= n {
        return Err(Error::InvalidParameter(format!(
            "reconstruction needs d < n (d = {}, n = {n})",
            embedding.cols()
        )));
    }
    let ky = kernel_y.gram(embedding);
    let gram_y = centre_gram(&ky);
    let gram_x = centre_gram(&kernel_x.gram(train));
    let c = cross_covariance(train, embedding)?;
    let a = gram_y.matmul(&embedding.centered())?.scale(1.0 / n as f64);
    let (ata_inv, rank) = pinv(&a.t_matmul(&a)?, PINV_TOL)?;
    let beta = a.matmul(&ata_inv)?.matmul(&c)?;
    Ok(Reconstructor {
        kernel_x: *kernel_x,
        kernel_y: *kernel_y,
        means: train.col_means(),
        beta,
        gram_x,
        gram_y,
        c,
        a,
        alpha: alpha.clone(),
        train_embedding: embedding.clone(),
        ky_means: ky.col_means(),
        rank,
    })
}

impl Reconstructor {
    pub fn dim_in(&self) -> usize {
        self.train_embedding.cols()
    }

    pub fn dim_out(&self) -> usize {
        self.means.len()
    }

    /// `f(y)` for one embedding row.
    pub fn reconstruct(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.dim_in() {
            return Err(Error::Shape(format!(
                "expected an embedding row of length {}, got {}",
                self.dim_in(),
                y.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embedding row"));
        }
        let mut out = self.means.clone();
        for i in 0..self.train_embedding.rows() {
            let w = self.kernel_y.eval(y, self.train_embedding.row(i)) - self.ky_means[i];
            for (o, &b) in out.iter_mut().zip(self.beta.row(i)) {
                *o += w * b;
            }
        }
        Ok(out)
    }

    pub fn reconstruct_all(&self, y: &Matrix) -> Result<Matrix> {
        let rows: Vec<Vec<f64>> = (0..y.rows())
            .into_par_iter()
            .map(|i| self.reconstruct(y.row(i)))
            .collect::<Result<_>>()?;
        let mut out = Matrix::zeros(y.rows(), self.dim_out());
        for (i, r) in rows.into_iter().enumerate() {
            out.row_mut(i).copy_from_slice(&r);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Matrix {
        Matrix::from_rows(&[
            [0.0, 1.0, 2.0],
            [1.0, 0.5, -1.0],
            [2.0, 2.5, 0.0],
            [-1.0, 0.0, 1.5],
            [0.5, -2.0, 0.3],
            [1.5, 1.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn identity_reduction_with_linear_kernel_is_exact() {
        let x = sample();
        let r = fit_reconstruction(
            &x,
            &x,
            &KernelSpec::Gaussian { bandwidth: 1.0 },
            &KernelSpec::Linear,
        )
        .unwrap();
        let back = r.reconstruct_all(&x).unwrap();
        assert!(back.sub(&x).unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn constant_embedding_gives_mean_reconstruction() {
        let x = sample();
        let y = Matrix::from_vec(6, 1, vec![3.0; 6]).unwrap();
        let r = fit_reconstruction(
            &x,
            &y,
            &KernelSpec::Gaussian { bandwidth: 1.0 },
            &KernelSpec::Gaussian { bandwidth: 1.0 },
        )
        .unwrap();
        assert_eq!(r.beta.max_abs(), 0.0);
        assert_eq!(r.rank, 0);
        let f = r.reconstruct(&[-7.0]).unwrap();
        for (a, b) in f.iter().zip(x.col_means()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_wrong_width() {
        let x = sample();
        let y = x.leading_cols(1);
        let k = KernelSpec::Gaussian { bandwidth: 1.0 };
        let r = fit_reconstruction(&x, &y, &k, &k).unwrap();
        assert!(r.reconstruct(&[1.0, 2.0]).is_err());
    }
}
