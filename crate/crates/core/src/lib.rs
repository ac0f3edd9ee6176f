//! Variational estimation of trace distance, trace norm and fidelity by
//! exact dense simulation, with brute-force oracles certifying every
//! estimate.
//!
//! The crate is organized around the estimation pipeline:
//!
//! - [`linalg`]: dense complex matrices, Jacobi eigensolver, trace-norm and
//!   partial-spectrum functionals
//! - [`states`]: density matrices, noise channels, random states, exact
//!   purification
//! - [`circuits`]: the two ansatz families and gate application
//! - [`losses`]: projector expectations, swap-test overlaps and the loss
//!   functions driving each estimator
//! - [`optim`]: parameter-shift / finite-difference gradients, Adam and
//!   gradient descent with restarts
//! - [`algorithms`]: the end-to-end estimators (trace distance, trace norm,
//!   state learning, fidelity, and the naive baseline)
//! - [`oracles`]: exact reference values that certify the estimates

pub mod algorithms;
pub mod circuits;
pub mod error;
pub mod linalg;
pub mod losses;
pub mod optim;
pub mod oracles;
pub mod report;
pub mod rng;
pub mod states;

#[cfg(test)]
pub(crate) mod testutil;

pub use algorithms::{
    nvtde, nvtde_fixed_k, trace_norm_estimate, trace_norm_two_sided, vfe, vqsl,
    vqsl_fidelity_ceiling, vtde, EstimateResult, NvtdeResult, PurificationMode, TwoSidedResult,
    VfeConfig, VfeResult, VqslResult,
};
pub use error::{Error, Result};
pub use linalg::{herm_eig, kron, mat_sqrt_psd, partial_trace, top_k_eig_sum, trace_norm, ComplexMatrix, HermitianEig};
pub use losses::{
    expect_proj0_ancilla, overlap_hs, overlap_hs_sampled, overlap_pure, HermitianDecomposition,
    NvtdeLoss, VfeLoss, VqslLoss, VtdeLoss,
};
pub use optim::{
    grad_finite_diff, grad_overlap_shift, grad_shift_all, grad_shift_expectation, run_optimizer,
    Direction, GradientKind, Method, OptimConfig, OptimTrace,
};
pub use oracles::{count_positive_eigs, exact_fidelity, exact_trace_distance, prop1_optimum};
pub use rng::{SeededRng, RNG_ALGORITHM};
pub use states::{
    apply_channel, density_from_vector, ghz, marginal_of_vector, plus_state, purify_exact,
    random_mixed, random_pure, random_unitary, ChannelKind, ChannelSpec, DensityMatrix,
    DensityMatrixFile, StateVector,
};
