//! Quantum state construction: density matrices, named states, the two noise
//! channels, random state generation and exact purification.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, ComplexMatrix};
use crate::rng::SeededRng;

/// Trace / norm tolerance on state invariants.
pub const STATE_TOL: f64 = 1e-10;
/// Eigenvalues below this count as zero when ranking a state.
pub const RANK_TOL: f64 = 1e-12;

/// Trace-one PSD Hermitian matrix on n qubits.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity before wrapping.
    pub fn new(n_qubits: usize, mat: ComplexMatrix) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if !mat.is_square() || mat.rows != dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {dim}x{dim} matrix for {n_qubits} qubits, got {}x{}",
                mat.rows, mat.cols
            )));
        }
        if !mat.all_finite() {
            return Err(Error::InvalidArgument(
                "density matrix has non-finite entries".into(),
            ));
        }
        mat.ensure_hermitian(STATE_TOL)?;
        let trace = mat.trace();
        if (trace.re - 1.0).abs() > STATE_TOL || trace.im.abs() > STATE_TOL {
            return Err(Error::TraceViolation {
                trace: trace.re,
                tolerance: STATE_TOL,
            });
        }
        let eig = herm_eig(&mat)?;
        if let Some(&lambda) = eig.eigenvalues.iter().find(|&&l| l < -STATE_TOL) {
            return Err(Error::NotPositive { eigenvalue: lambda });
        }
        Ok(Self { n_qubits, mat })
    }

    /// Skips validation; for internal constructions that preserve the
    /// invariants by the math that built them.
    pub(crate) fn from_matrix_unchecked(n_qubits: usize, mat: ComplexMatrix) -> Self {
        Self { n_qubits, mat }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// tr(rho^2).
    pub fn purity(&self) -> f64 {
        self.mat.trace_product(&self.mat).re
    }

    /// Count of eigenvalues above [`RANK_TOL`].
    pub fn rank(&self) -> usize {
        let eig = herm_eig(&self.mat).expect("density matrix is Hermitian");
        eig.eigenvalues.iter().filter(|&&l| l > RANK_TOL).count()
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self::from_matrix_unchecked(
            n_qubits,
            ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64),
        )
    }
}

/// Normalized pure state on n qubits.
#[derive(Debug, Clone)]
pub struct StateVector {
    n_qubits: usize,
    amp: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n_qubits: usize, amp: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if amp.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {dim} amplitudes for {n_qubits} qubits, got {}",
                amp.len()
            )));
        }
        let norm = amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NormViolation {
                norm,
                tolerance: STATE_TOL,
            });
        }
        Ok(Self { n_qubits, amp })
    }

    pub(crate) fn from_amp_unchecked(n_qubits: usize, amp: Vec<Complex64>) -> Self {
        Self { n_qubits, amp }
    }

    /// Computational basis state |index>.
    pub fn basis_state(n_qubits: usize, index: usize) -> Self {
        let dim = 1usize << n_qubits;
        assert!(index < dim, "basis index out of range");
        let mut amp = vec![Complex64::new(0.0, 0.0); dim];
        amp[index] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amp }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn amp(&self) -> &[Complex64] {
        &self.amp
    }

    pub fn norm(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// The two noise channels used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Depolarizing,
    Dephasing,
}

/// Noise channel with mixing probability p in [0, 1].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub p: f64,
}

impl ChannelSpec {
    pub fn new(kind: ChannelKind, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "channel probability {p} outside [0, 1]"
            )));
        }
        Ok(Self { kind, p })
    }

    pub fn depolarizing(p: f64) -> Result<Self> {
        Self::new(ChannelKind::Depolarizing, p)
    }

    pub fn dephasing(p: f64) -> Result<Self> {
        Self::new(ChannelKind::Dephasing, p)
    }
}

/// Rank-1 projector |v><v|.
pub fn density_from_vector(v: &StateVector) -> DensityMatrix {
    let dim = v.dim();
    let mut mat = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            mat.set(i, j, v.amp[i] * v.amp[j].conj());
        }
    }
    DensityMatrix::from_matrix_unchecked(v.n_qubits, mat)
}

/// GHZ state (|0...0> + |1...1>)/sqrt(2).
pub fn ghz(n_qubits: usize) -> StateVector {
    assert!(n_qubits >= 1, "GHZ state needs at least one qubit");
    let dim = 1usize << n_qubits;
    let mut amp = vec![Complex64::new(0.0, 0.0); dim];
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amp[0] = h;
    amp[dim - 1] = h;
    StateVector::from_amp_unchecked(n_qubits, amp)
}

/// |+> state on one qubit.
pub fn plus_state() -> StateVector {
    ghz(1)
}

/// Applies a noise channel.
///
/// Depolarizing mixes globally toward I/2^n. Dephasing applies the global
/// Z^(tensor n) convention, which for one qubit is exactly p Z rho Z + (1-p) rho.
pub fn apply_channel(rho: &DensityMatrix, ch: &ChannelSpec) -> DensityMatrix {
    let dim = rho.dim();
    let p = ch.p;
    let mat = match ch.kind {
        ChannelKind::Depolarizing => {
            let mixed = ComplexMatrix::identity(dim).scale_re(p / dim as f64);
            mixed.add(&rho.mat.scale_re(1.0 - p))
        }
        ChannelKind::Dephasing => {
            // (Z..Z) rho (Z..Z) flips the sign of entries whose row/col parity differs
            let mut out = rho.mat.clone();
            for i in 0..dim {
                for j in 0..dim {
                    let parity = ((i ^ j).count_ones() & 1) == 1;
                    if parity {
                        let v = out.get(i, j);
                        out.set(i, j, v * (1.0 - 2.0 * p));
                    }
                }
            }
            out
        }
    };
    DensityMatrix::from_matrix_unchecked(rho.n_qubits, mat)
}

/// Haar-random pure state.
pub fn random_pure(n_qubits: usize, rng: &mut SeededRng) -> StateVector {
    let dim = 1usize << n_qubits;
    let mut amp: Vec<Complex64> = (0..dim).map(|_| rng.complex_gaussian()).collect();
    let norm = amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amp {
        *a /= norm;
    }
    StateVector::from_amp_unchecked(n_qubits, amp)
}

/// Convenience wrapper seeding a fresh generator.
pub fn random_pure_seeded(n_qubits: usize, seed: u64) -> StateVector {
    random_pure(n_qubits, &mut SeededRng::new(seed))
}

/// Random Hermitian matrix (G + G^dag)/2 with standard complex Gaussian G.
pub fn random_hermitian(dim: usize, rng: &mut SeededRng) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            g.set(i, j, rng.complex_gaussian());
        }
    }
    g.symmetrized()
}

/// Haar-random unitary: Gram-Schmidt of an iid complex Gaussian matrix.
pub fn random_unitary(dim: usize, rng: &mut SeededRng) -> ComplexMatrix {
    random_isometry(dim, dim, rng)
}

/// First k columns of a Haar unitary, as a dim x k matrix.
pub fn random_isometry(dim: usize, k: usize, rng: &mut SeededRng) -> ComplexMatrix {
    assert!(k <= dim);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    while cols.len() < k {
        let mut v: Vec<Complex64> = (0..dim).map(|_| rng.complex_gaussian()).collect();
        // two rounds of Gram-Schmidt to keep orthogonality at round-off level
        for _ in 0..2 {
            for u in &cols {
                let overlap: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= overlap * ui;
                }
            }
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue; // numerically dependent draw; retry
        }
        for a in &mut v {
            *a /= norm;
        }
        cols.push(v);
    }
    let mut out = ComplexMatrix::zeros(dim, k);
    for (j, col) in cols.iter().enumerate() {
        for (i, &a) in col.iter().enumerate() {
            out.set(i, j, a);
        }
    }
    out
}

/// Random density matrix of exact rank k: a random k-column isometry weighted
/// by a random point of the k-simplex (normalized exponentials).
pub fn random_mixed(n_qubits: usize, rank: usize, rng: &mut SeededRng) -> Result<DensityMatrix> {
    let dim = 1usize << n_qubits;
    if rank == 0 || rank > dim {
        return Err(Error::IndexOutOfRange(format!(
            "rank {rank} outside 1..={dim}"
        )));
    }
    let weights: Vec<f64> = loop {
        let raw: Vec<f64> = (0..rank).map(|_| rng.exponential()).collect();
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|e| e / total).collect();
        // resample the rare draw that would not count toward the rank
        if w.iter().all(|&wi| wi > 1e-10) {
            break w;
        }
    };
    let iso = random_isometry(dim, rank, rng);
    let mut mat = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k_idx, &w) in weights.iter().enumerate() {
                acc += iso.get(i, k_idx) * w * iso.get(j, k_idx).conj();
            }
            mat.set(i, j, acc);
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(n_qubits, mat))
}

pub fn random_mixed_seeded(n_qubits: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_mixed(n_qubits, rank, &mut SeededRng::new(seed))
}

/// Exact purification |psi>_{AR} with tr_R |psi><psi| = rho, built from the
/// spectral decomposition as sum_j sqrt(lambda_j) |psi_j>_A |j>_R.
///
/// The ancilla register R is appended after the system qubits.
pub fn purify_exact(rho: &DensityMatrix, n_ancilla: usize) -> Result<StateVector> {
    let eig = herm_eig(rho.mat())?;
    let rank = eig.eigenvalues.iter().filter(|&&l| l > RANK_TOL).count();
    let levels = 1usize << n_ancilla;
    if levels < rank {
        return Err(Error::AncillaTooSmall { rank, levels });
    }
    let dim_a = rho.dim();
    let mut amp = vec![Complex64::new(0.0, 0.0); dim_a * levels];
    for j in 0..rank {
        let root = eig.eigenvalues[j].max(0.0).sqrt();
        for a in 0..dim_a {
            amp[a * levels + j] = eig.eigenvectors.get(a, j) * root;
        }
    }
    let norm = amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amp {
        *a /= norm;
    }
    Ok(StateVector::from_amp_unchecked(
        rho.n_qubits + n_ancilla,
        amp,
    ))
}

/// Reduced state on the first n_keep qubits.
pub fn marginal_of_vector(psi: &StateVector, n_keep: usize) -> Result<DensityMatrix> {
    if n_keep > psi.n_qubits {
        return Err(Error::IndexOutOfRange(format!(
            "cannot keep {n_keep} of {} qubits",
            psi.n_qubits
        )));
    }
    let dim_a = 1usize << n_keep;
    let dim_r = 1usize << (psi.n_qubits - n_keep);
    // rho_A = M M^dag with M the d_A x d_R reshaping of the amplitudes
    let mut mat = ComplexMatrix::zeros(dim_a, dim_a);
    for i in 0..dim_a {
        for j in 0..dim_a {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..dim_r {
                acc += psi.amp[i * dim_r + r] * psi.amp[j * dim_r + r].conj();
            }
            mat.set(i, j, acc);
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(n_keep, mat))
}

/// Serialized form of a density matrix (also used to ship plain Hermitian
/// fixtures): row-major [re, im] pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityMatrixFile {
    pub n_qubits: usize,
    pub entries: Vec<[f64; 2]>,
}

impl DensityMatrixFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self {
            n_qubits: rho.n_qubits(),
            entries: rho.mat().data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    /// Raw matrix with no state validation (e.g. Hermitian fixtures).
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let dim = 1usize << self.n_qubits;
        if self.entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for {} qubits, got {}",
                dim * dim,
                self.n_qubits,
                self.entries.len()
            )));
        }
        let data: Vec<Complex64> = self
            .entries
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        let m = ComplexMatrix::new(dim, dim, data);
        if !m.all_finite() {
            return Err(Error::InvalidArgument("non-finite entries".into()));
        }
        Ok(m)
    }

    /// Validated density matrix.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.n_qubits, self.to_matrix()?)
    }
}
