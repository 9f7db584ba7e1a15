//! Numerical kernel shared by every other module.

mod linalg;
mod matrix;
mod random;
mod special;

pub use linalg::{pseudoinverse, solve_hermitian_loaded, solve_linear, LuDecomposition};
pub use matrix::ComplexMatrix;
pub use random::{sample_complex_gaussian, RandomStream, StreamPurpose};
pub use special::{erfc, ln_half_erfc};

use num_complex::Complex64;

/// `(M^H)` of a matrix: transposed and conjugated.
pub fn hermitian_transpose(m: &ComplexMatrix) -> ComplexMatrix {
    m.hermitian()
}

/// Squared Euclidean norm of a complex vector.
pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}
