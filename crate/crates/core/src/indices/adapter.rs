use crate::error::{Error, Result};
use crate::indices::pca::pca_reduce;
use crate::numerics::Matrix;

/// A named dimensionality-reduction procedure `(X, d) -> Y`.
///
/// Implementations must be deterministic: the same input yields the same
/// output.
pub trait DimReducer: Send + Sync {
    fn name(&self) -> String;

    fn reduce(&self, x: &Matrix, d: usize) -> Result<Matrix>;

    /// Whether concurrent calls to [`DimReducer::reduce`] are safe.
    fn reentrant(&self) -> bool {
        true
    }
}

/// Returns the data unchanged; only `d = p` is accepted.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityReducer;

impl DimReducer for IdentityReducer {
    fn name(&self) -> String {
        "identity".into()
    }

    fn reduce(&self, x: &Matrix, d: usize) -> Result<Matrix> {
        if d != x.cols() {
            return Err(Error::InvalidParameter(format!(
                "identity reduction needs d = p = {}, got {d}",
                x.cols()
            )));
        }
        Ok(x.clone())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PcaReducer;

impl DimReducer for PcaReducer {
    fn name(&self) -> String {
        "pca".into()
    }

    fn reduce(&self, x: &Matrix, d: usize) -> Result<Matrix> {
        Ok(pca_reduce(x, d)?.coords)
    }
}

/// Maps every point to the same value.
#[derive(Debug, Clone, Copy)]
pub struct ConstantReducer(pub f64);

impl Default for ConstantReducer {
    fn default() -> Self {
        ConstantReducer(0.0)
    }
}

impl DimReducer for ConstantReducer {
    fn name(&self) -> String {
        "constant".into()
    }

    fn reduce(&self, x: &Matrix, d: usize) -> Result<Matrix> {
        Matrix::from_vec(x.rows(), d, vec![self.0; x.rows() * d])
    }
}

/// Another reducer followed by a fixed orthogonal map of its output.
pub struct Rotated<R> {
    pub inner: R,
    pub rotation: Matrix,
}

impl<R: DimReducer> DimReducer for Rotated<R> {
    fn name(&self) -> String {
        format!("rotated-{}", self.inner.name())
    }

    fn reduce(&self, x: &Matrix, d: usize) -> Result<Matrix> {
        if self.rotation.shape() != (d, d) {
            return Err(Error::Shape(format!("rotation must be {d}x{d}")));
        }
        self.inner.reduce(x, d)?.matmul(&self.rotation)
    }

    fn reentrant(&self) -> bool {
        self.inner.reentrant()
    }
}

impl<R: DimReducer + ?Sized> DimReducer for Box<R> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn reduce(&self, x: &Matrix, d: usize) -> Result<Matrix> {
        (**self).reduce(x, d)
    }

    fn reentrant(&self) -> bool {
        (**self).reentrant()
    }
}
