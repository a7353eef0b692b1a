use crate::embedding::{Embedding, EmbeddingParams};
use crate::error::{Error, Result};
use crate::numerics::{sym_eigen, Matrix};

/// Principal axes of `x`: eigenvalues of the `1/n` covariance (descending)
/// and unit eigenvectors as columns, each signed so that its
/// largest-magnitude entry is positive.
pub fn principal_axes(x: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let xc = x.centered();
    let cov = xc.t_matmul(&xc)?.scale(1.0 / x.rows() as f64);
    let (values, mut vectors) = sym_eigen(&cov)?;
    let p = x.cols();
    for c in 0..p {
        let col = vectors.col(c);
        let pivot = (0..p)
            .max_by(|&a, &b| col[a].abs().total_cmp(&col[b].abs()).then(b.cmp(&a)))
            .expect("p >= 1");
        if col[pivot] < 0.0 {
            let flipped: Vec<f64> = col.iter().map(|v| -v).collect();
            vectors.set_col(c, &flipped);
        }
    }
    Ok((values, vectors))
}

/// Projection of the centred data onto the top `d` principal axes.
pub fn pca_reduce(x: &Matrix, d: usize) -> Result<Embedding> {
    if d == 0 || d > x.cols() {
        return Err(Error::InvalidParameter(format!(
            "PCA needs 1 <= d <= p (d = {d}, p = {})",
            x.cols()
        )));
    }
    let (_, vectors) = principal_axes(x)?;
    let coords = x.centered().matmul(&vectors.leading_cols(d))?;
    Embedding::new(
        coords,
        "pca",
        EmbeddingParams {
            d,
            ..Default::default()
        },
    )
}
