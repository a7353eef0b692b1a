//! Shared fixtures for the criterion benches.

use lsdr_core::pipeline::generate;
use lsdr_core::{DatasetSpec, Family, Matrix};

/// Spiral points used by every bench at size `n`.
pub fn spiral(n: usize) -> Matrix {
    generate(&DatasetSpec::new(Family::Spiral, n, 11))
        .expect("spiral generation")
        .points
}

/// Swiss roll points at size `n`.
pub fn swiss_roll(n: usize) -> Matrix {
    generate(&DatasetSpec::new(Family::SwissRoll, n, 12))
        .expect("swiss roll generation")
        .points
}
