//! Shared helpers for unit tests.

use num_complex::Complex64;

use crate::linalg::ComplexMatrix;
use crate::rng::SeededRng;

pub const TOL: f64 = 1e-10;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}


pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// Random Hermitian matrix with O(1) entries.
pub fn rand_hermitian(dim: usize, rng: &mut SeededRng) -> ComplexMatrix {
    crate::states::random_hermitian(dim, rng)
}
