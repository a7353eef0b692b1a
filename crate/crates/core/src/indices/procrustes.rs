use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{svd, Matrix};

/// Similarity transform `a_i ≈ μ + λ P b_i` minimising the squared
/// Frobenius misfit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcrustesFit {
    pub mu: Vec<f64>,
    pub lambda: f64,
    /// Orthogonal, `p x p`.
    pub rotation: Matrix,
    /// `‖A - 1μᵀ - λ B Pᵀ‖²_F` evaluated directly.
    pub residual: f64,
    /// `tr(ÃᵀÃ) - (Σ s_i)² / tr(B̃ᵀB̃)` from the singular values `s_i` of
    /// `ÃᵀB̃`.
    pub closed_form_residual: f64,
}

impl ProcrustesFit {
    /// `1μᵀ + λ B Pᵀ`.
    pub fn apply(&self, b: &Matrix) -> Result<Matrix> {
        let mut out = b.matmul(&self.rotation.transpose())?.scale(self.lambda);
        for i in 0..out.rows() {
            for (v, m) in out.row_mut(i).iter_mut().zip(&self.mu) {
                *v += m;
            }
        }
        Ok(out)
    }
}

fn check_shapes(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "Procrustes needs equal shapes, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

/// Aligns `b` onto `a` by translation, uniform scale and an orthogonal map.
pub fn procrustes_fit(a: &Matrix, b: &Matrix) -> Result<ProcrustesFit> {
    check_shapes(a, b)?;
    let at = a.centered();
    let bt = b.centered();
    let bb: f64 = bt.as_slice().iter().map(|v| v * v).sum();
    if bb <= 0.0 {
        return Err(Error::Degenerate(
            "Procrustes target is constant; the scale is undefined".into(),
        ));
    }
    let aa: f64 = at.as_slice().iter().map(|v| v * v).sum();
    let m = at.t_matmul(&bt)?;
    let dec = svd(&m)?;
    let rotation = dec.u.matmul(&dec.v.transpose())?;
    let trace_s: f64 = dec.singular_values.iter().sum();
    let lambda = trace_s / bb;
    let a_mean = a.col_means();
    let pb_mean = Matrix::from_vec(1, b.cols(), b.col_means())?.matmul(&rotation.transpose())?;
    let mu: Vec<f64> = a_mean
        .iter()
        .zip(pb_mean.as_slice())
        .map(|(am, pb)| am - lambda * pb)
        .collect();
    let mut fit = ProcrustesFit {
        mu,
        lambda,
        rotation,
        residual: 0.0,
        closed_form_residual: (aa - trace_s * trace_s / bb).max(0.0),
    };
    let fitted = fit.apply(b)?;
    fit.residual = a.sub(&fitted)?.as_slice().iter().map(|v| v * v).sum();
    Ok(fit)
}

/// The minimal misfit, also when `b` is constant: then only the translation
/// can be fitted and the misfit is `tr(ÃᵀÃ)`.
pub fn procrustes_residual(a: &Matrix, b: &Matrix) -> Result<f64> {
    check_shapes(a, b)?;
    match procrustes_fit(a, b) {
        Ok(fit) => Ok(fit.residual),
        Err(Error::Degenerate(_)) => Ok(a.centered().as_slice().iter().map(|v| v * v).sum()),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Matrix {
        Matrix::from_rows(&[[0.0, 1.0], [2.0, -1.0], [3.0, 3.0], [-1.0, 0.5], [0.2, 0.1]]).unwrap()
    }

    #[test]
    fn self_alignment_is_exact() {
        let b = sample();
        let fit = procrustes_fit(&b, &b).unwrap();
        assert!((fit.lambda - 1.0).abs() < 1e-12);
        assert!(fit.rotation.sub(&Matrix::identity(2)).unwrap().max_abs() < 1e-12);
        assert!(fit.residual < 1e-20);
    }

    #[test]
    fn scaled_and_shifted_copy() {
        let b = sample();
        let mut a = b.scale(2.0);
        a.as_mut_slice().iter_mut().for_each(|v| *v += 1.0);
        let fit = procrustes_fit(&a, &b).unwrap();
        assert!((fit.lambda - 2.0).abs() < 1e-12);
        assert!(fit.mu.iter().all(|m| (m - 1.0).abs() < 1e-12));
        assert!(fit.residual < 1e-20 && fit.closed_form_residual < 1e-12);
    }

    #[test]
    fn constant_target() {
        let a = sample();
        let b = Matrix::from_vec(5, 2, vec![1.0; 10]).unwrap();
        assert!(matches!(procrustes_fit(&a, &b), Err(Error::Degenerate(_))));
        let expected: f64 = a.centered().as_slice().iter().map(|v| v * v).sum();
        assert_eq!(procrustes_residual(&a, &b).unwrap(), expected);
        assert_eq!(procrustes_residual(&b, &b).unwrap(), 0.0);
    }
}
