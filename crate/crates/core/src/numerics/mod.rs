//! Dense linear algebra and special functions shared by every stage.

pub mod linalg;
pub mod matrix;
pub mod special;

pub use linalg::{
    cholesky, nuclear_norm, pairwise_dists, pairwise_sq_dists, pinv, solve_spd, svd, sym_eigen,
    SvdResult,
};
pub use matrix::{dot, sq_dist, Matrix, PointCloud};
pub use special::{beta_inc, beta_pdf, beta_quantile, ln_beta, ln_gamma};
