//! Brute-force reference values that certify every variational estimate:
//! exact trace distance, exact fidelity, positive-eigenvalue counts and the
//! partial-spectrum optimum with its constructive witness.

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, mat_sqrt_psd, top_k_eig_sum, ComplexMatrix};
use crate::states::DensityMatrix;

/// Default threshold above which an eigenvalue counts as positive.
pub const POSITIVE_EIG_THRESHOLD: f64 = 1e-10;

fn check_same_dims(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.n_qubits() != sigma.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "states act on {} and {} qubits",
            rho.n_qubits(),
            sigma.n_qubits()
        )));
    }
    Ok(())
}

/// D(rho, sigma) = (1/2) sum |eigenvalues of rho - sigma|.
pub fn exact_trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dims(rho, sigma)?;
    let diff = rho.mat().sub(sigma.mat());
    Ok(crate::linalg::trace_norm(&diff)? / 2.0)
}

/// F(rho, sigma) = tr sqrt(sqrt(rho) sigma sqrt(rho)) = ||sqrt(rho) sqrt(sigma)||_1.
///
/// Computed as the singular-value sum of B = sqrt(rho) sqrt(sigma) through
/// the Hermitian dilation [[0, B], [B^dag, 0]] (eigenvalues are the signed
/// singular values). Rooting the eigenvalues of sqrt(rho) sigma sqrt(rho)
/// directly amplifies round-off near zero beyond the symmetry tolerance.
pub fn exact_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dims(rho, sigma)?;
    let b = mat_sqrt_psd(rho.mat())?.matmul(&mat_sqrt_psd(sigma.mat())?);
    let d = b.rows;
    let mut dilation = ComplexMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            let v = b.get(i, j);
            dilation.set(i, d + j, v);
            dilation.set(d + j, i, v.conj());
        }
    }
    let eig = herm_eig(&dilation)?;
    let sv_sum: f64 = eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>() / 2.0;
    Ok(sv_sum.min(1.0))
}

/// Number of eigenvalues strictly above `threshold`.
pub fn count_positive_eigs(h: &ComplexMatrix, threshold: f64) -> Result<usize> {
    let eig = herm_eig(h)?;
    Ok(eig.eigenvalues.iter().filter(|&&l| l > threshold).count())
}

/// Optimum of the local-projector functional: max over unitaries of
/// tr |0><0|_A tr_B (U h U^dag) equals the sum of the d_B largest
/// eigenvalues.
///
/// Also runs the constructive witness: conjugating by the eigenvector matrix
/// (which moves the top eigenvectors onto the |0>_A block) must achieve the
/// closed form to 1e-10.
pub fn prop1_optimum(h: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<f64> {
    if !h.is_square() || h.rows != dim_a * dim_b {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, expected {} = {dim_a} x {dim_b}",
            h.rows,
            h.cols,
            dim_a * dim_b
        )));
    }
    let closed_form = top_k_eig_sum(h, dim_b)?;

    // witness: U = V^dag diagonalizes, leaving the top d_B eigenvalues on the
    // diagonal block where the A index is 0
    let eig = herm_eig(h)?;
    let v = &eig.eigenvectors;
    let conjugated = v.adjoint().matmul(h).matmul(v);
    let achieved: f64 = (0..dim_b).map(|j| conjugated.get(j, j).re).sum();
    if (achieved - closed_form).abs() > 1e-10 {
        return Err(Error::NumericalCheck(format!(
            "partial-spectrum witness achieved {achieved}, closed form {closed_form}"
        )));
    }
    Ok(closed_form)
}
