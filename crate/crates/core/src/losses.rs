//! Measurable quantities and loss functions: local-projector expectations,
//! swap-test overlaps, and the losses driving each estimator.
//!
//! Expectations are exact by default; shot noise is opt-in through the
//! `eval_sampled` variants, which draw swap-test / projector statistics from
//! an explicit generator.

use num_complex::Complex64;

use crate::circuits::{
    self, apply_ansatz_vec, conj_density_gate, conj_observable_gate, lowered_gates, AnsatzSpec,
    LoweredGate,
};
use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix};
use crate::rng::SeededRng;
use crate::states::{DensityMatrix, StateVector};

/// tr[(|0><0| on the ancilla qubit, identity elsewhere) rho].
pub fn expect_proj0_ancilla(rho: &DensityMatrix, ancilla_index: usize) -> Result<f64> {
    let n = rho.n_qubits();
    if ancilla_index >= n {
        return Err(Error::IndexOutOfRange(format!(
            "ancilla index {ancilla_index} outside register of {n}"
        )));
    }
    let mask = 1usize << (n - 1 - ancilla_index);
    let mut acc = 0.0;
    for i in 0..rho.dim() {
        if i & mask == 0 {
            acc += rho.mat().get(i, i).re;
        }
    }
    Ok(acc.clamp(0.0, 1.0))
}

/// Hilbert-Schmidt overlap tr(a b), evaluated exactly.
pub fn overlap_hs(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "states act on {} and {} qubits",
            a.n_qubits(),
            b.n_qubits()
        )));
    }
    Ok(a.mat().trace_product(b.mat()).re)
}

/// Swap-test estimate of tr(a b): `shots` Bernoulli draws with success
/// probability (1 + tr ab)/2, mapped to 2 fhat - 1.
pub fn overlap_hs_sampled(
    a: &DensityMatrix,
    b: &DensityMatrix,
    shots: u64,
    rng: &mut SeededRng,
) -> Result<f64> {
    let exact = overlap_hs(a, b)?;
    Ok(sample_overlap(exact, shots, rng))
}

fn sample_overlap(exact: f64, shots: u64, rng: &mut SeededRng) -> f64 {
    let p = ((1.0 + exact) / 2.0).clamp(0.0, 1.0);
    2.0 * rng.binomial_fraction(shots, p) - 1.0
}

fn sample_probability(p: f64, shots: u64, rng: &mut SeededRng) -> f64 {
    rng.binomial_fraction(shots, p.clamp(0.0, 1.0))
}

/// Complex amplitude <psi|phi>; its magnitude is the measurable quantity.
pub fn overlap_pure(psi: &StateVector, phi: &StateVector) -> Result<Complex64> {
    if psi.n_qubits() != phi.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "states act on {} and {} qubits",
            psi.n_qubits(),
            phi.n_qubits()
        )));
    }
    Ok(psi
        .amp()
        .iter()
        .zip(phi.amp())
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// Hermitian operator written as a real combination of density matrices,
/// H = sum_j c_j rho_j.
#[derive(Debug, Clone)]
pub struct HermitianDecomposition {
    terms: Vec<(f64, DensityMatrix)>,
}

impl HermitianDecomposition {
    pub fn new(terms: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument(
                "decomposition needs at least one term".into(),
            ));
        }
        let n = terms[0].1.n_qubits();
        if terms.iter().any(|(_, rho)| rho.n_qubits() != n) {
            return Err(Error::DimensionMismatch(
                "decomposition mixes qubit counts".into(),
            ));
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[(f64, DensityMatrix)] {
        &self.terms
    }

    pub fn n_qubits(&self) -> usize {
        self.terms[0].1.n_qubits()
    }

    /// Trace of the reconstruction, which equals the coefficient sum.
    pub fn sum_coeffs(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c).sum()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let dim = self.terms[0].1.dim();
        let mut out = ComplexMatrix::zeros(dim, dim);
        for (c, rho) in &self.terms {
            out = out.add(&rho.mat().scale_re(*c));
        }
        out
    }
}

/// Objective of the form sum_t c_t tr[P U(theta) M_t U(theta)^dag] + constant
/// with P a diagonal 0/1 projector. Backs the VTDE, trace-norm and nVTDE
/// losses; gradients use the parameter-shift rule with cached sweeps.
#[derive(Debug, Clone)]
pub(crate) struct ExpectationObjective {
    gates: Vec<LoweredGate>,
    n_params: usize,
    n_total: usize,
    projector: Vec<f64>,
    terms: Vec<(f64, ComplexMatrix)>,
    constant: f64,
}

impl ExpectationObjective {
    pub(crate) fn new(
        ansatz: &AnsatzSpec,
        projector: Vec<f64>,
        terms: Vec<(f64, ComplexMatrix)>,
        constant: f64,
    ) -> Self {
        let dim = 1usize << ansatz.n_qubits;
        debug_assert_eq!(projector.len(), dim);
        debug_assert!(terms.iter().all(|(_, m)| m.rows == dim && m.cols == dim));
        Self {
            gates: lowered_gates(ansatz),
            n_params: circuits::param_count(ansatz),
            n_total: ansatz.n_qubits,
            projector,
            terms,
            constant,
        }
    }

    pub(crate) fn n_params(&self) -> usize {
        self.n_params
    }

    fn projector_matrix(&self) -> ComplexMatrix {
        let diag: Vec<Complex64> = self
            .projector
            .iter()
            .map(|&d| Complex64::new(d, 0.0))
            .collect();
        ComplexMatrix::diagonal(&diag)
    }

    /// Observable conjugated backwards through the whole circuit:
    /// K = U(theta)^dag P U(theta).
    fn conjugated_observable(&self, theta: &[f64]) -> ComplexMatrix {
        let mut k = self.projector_matrix();
        for gate in self.gates.iter().rev() {
            conj_observable_gate(&mut k, self.n_total, 0, gate, theta);
        }
        k
    }

    /// Per-term expectations tr[P U M_t U^dag].
    pub(crate) fn term_expectations(&self, theta: &[f64]) -> Vec<f64> {
        let k = self.conjugated_observable(theta);
        self.terms
            .iter()
            .map(|(_, m)| k.trace_product(m).re)
            .collect()
    }

    pub(crate) fn eval(&self, theta: &[f64]) -> f64 {
        debug_assert_eq!(theta.len(), self.n_params);
        let values = self.term_expectations(theta);
        self.terms
            .iter()
            .zip(values)
            .map(|((c, _), v)| c * v)
            .sum::<f64>()
            + self.constant
    }

    /// Shot-noise evaluation: each term expectation is a measurement
    /// probability sampled from `shots` Bernoulli draws.
    pub(crate) fn eval_sampled(&self, theta: &[f64], shots: u64, rng: &mut SeededRng) -> f64 {
        let values = self.term_expectations(theta);
        self.terms
            .iter()
            .zip(values)
            .map(|((c, _), v)| c * sample_probability(v, shots, rng))
            .sum::<f64>()
            + self.constant
    }

    /// Exact parameter-shift gradient.
    ///
    /// Equivalent to evaluating the loss at theta_j +- pi/2 for every j, but
    /// computed from one backward observable sweep and one forward state
    /// sweep per term.
    pub(crate) fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let m = self.gates.len();
        // after[i] = observable conjugated through gates i..m
        let mut after: Vec<ComplexMatrix> = Vec::with_capacity(m + 1);
        after.push(self.projector_matrix());
        for (idx, gate) in self.gates.iter().enumerate().rev() {
            let mut k = after[m - 1 - idx].clone();
            conj_observable_gate(&mut k, self.n_total, 0, gate, theta);
            after.push(k);
        }
        after.reverse(); // after[i] now pairs with gate index i

        let mut grad = vec![0.0; self.n_params];
        const SHIFT: f64 = std::f64::consts::FRAC_PI_2;
        for (coeff, m_in) in &self.terms {
            let mut forward = m_in.clone();
            for (i, gate) in self.gates.iter().enumerate() {
                if let Some(param) = gate.param() {
                    let mut plus = forward.clone();
                    conj_density_gate(&mut plus, self.n_total, 0, gate, theta, SHIFT);
                    let mut minus = forward.clone();
                    conj_density_gate(&mut minus, self.n_total, 0, gate, theta, -SHIFT);
                    let f_plus = after[i + 1].trace_product(&plus).re;
                    let f_minus = after[i + 1].trace_product(&minus).re;
                    grad[param] += coeff * 0.5 * (f_plus - f_minus);
                }
                conj_density_gate(&mut forward, self.n_total, 0, gate, theta, 0.0);
            }
        }
        grad
    }
}

fn proj0_last_qubit_diag(n_total: usize) -> Vec<f64> {
    (0..1usize << n_total)
        .map(|i| if i & 1 == 0 { 1.0 } else { 0.0 })
        .collect()
}

fn proj0_matrix() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0])
}

/// L1(theta) = O_rho - O_sigma with O_x = tr[|0><0|_R U (x tensor |0><0|_R) U^dag].
#[derive(Debug, Clone)]
pub struct VtdeLoss {
    obj: ExpectationObjective,
}

impl VtdeLoss {
    pub fn new(ansatz: AnsatzSpec, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Self> {
        if rho.n_qubits() != sigma.n_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "states act on {} and {} qubits",
                rho.n_qubits(),
                sigma.n_qubits()
            )));
        }
        if ansatz.n_qubits != rho.n_qubits() + 1 {
            return Err(Error::DimensionMismatch(format!(
                "VTDE ansatz must cover {} qubits (system + single ancilla), got {}",
                rho.n_qubits() + 1,
                ansatz.n_qubits
            )));
        }
        let p0 = proj0_matrix();
        let terms = vec![
            (1.0, kron(rho.mat(), &p0)),
            (-1.0, kron(sigma.mat(), &p0)),
        ];
        Ok(Self {
            obj: ExpectationObjective::new(&ansatz, proj0_last_qubit_diag(ansatz.n_qubits), terms, 0.0),
        })
    }

    pub fn n_params(&self) -> usize {
        self.obj.n_params()
    }

    pub fn eval(&self, theta: &[f64]) -> f64 {
        self.obj.eval(theta)
    }

    pub fn eval_sampled(&self, theta: &[f64], shots: u64, rng: &mut SeededRng) -> f64 {
        self.obj.eval_sampled(theta, shots, rng)
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.obj.gradient(theta)
    }
}

/// Corollary-3 objective: 2 sum_j c_j tr[|0><0|_R U (rho_j tensor |0><0|) U^dag] - sum_j c_j,
/// whose supremum over theta is the trace norm of the reconstruction.
#[derive(Debug, Clone)]
pub struct TraceNormLoss {
    obj: ExpectationObjective,
}

impl TraceNormLoss {
    pub fn new(ansatz: AnsatzSpec, decomp: &HermitianDecomposition) -> Result<Self> {
        if ansatz.n_qubits != decomp.n_qubits() + 1 {
            return Err(Error::DimensionMismatch(format!(
                "trace-norm ansatz must cover {} qubits, got {}",
                decomp.n_qubits() + 1,
                ansatz.n_qubits
            )));
        }
        let p0 = proj0_matrix();
        let terms: Vec<(f64, ComplexMatrix)> = decomp
            .terms()
            .iter()
            .map(|(c, rho)| (2.0 * c, kron(rho.mat(), &p0)))
            .collect();
        Ok(Self {
            obj: ExpectationObjective::new(
                &ansatz,
                proj0_last_qubit_diag(ansatz.n_qubits),
                terms,
                -decomp.sum_coeffs(),
            ),
        })
    }

    pub fn n_params(&self) -> usize {
        self.obj.n_params()
    }

    pub fn eval(&self, theta: &[f64]) -> f64 {
        self.obj.eval(theta)
    }

    pub fn eval_sampled(&self, theta: &[f64], shots: u64, rng: &mut SeededRng) -> f64 {
        self.obj.eval_sampled(theta, shots, rng)
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.obj.gradient(theta)
    }
}

/// One branch of the Theorem-2 estimator: tr[|0><0|_R U (±H tensor |0><0|) U^dag].
/// Exact simulation only; ±H is not a state, so there is no sampling story.
#[derive(Debug, Clone)]
pub(crate) struct TwoSidedBranchLoss {
    obj: ExpectationObjective,
}

impl TwoSidedBranchLoss {
    pub(crate) fn new(ansatz: AnsatzSpec, h: &ComplexMatrix, sign: f64) -> Result<Self> {
        h.ensure_hermitian(crate::linalg::HERMITICITY_TOL)?;
        if 1usize << (ansatz.n_qubits - 1) != h.rows {
            return Err(Error::DimensionMismatch(format!(
                "operator dimension {} does not fit ansatz on {} qubits",
                h.rows, ansatz.n_qubits
            )));
        }
        let term = kron(&h.scale_re(sign), &proj0_matrix());
        Ok(Self {
            obj: ExpectationObjective::new(
                &ansatz,
                proj0_last_qubit_diag(ansatz.n_qubits),
                vec![(1.0, term)],
                0.0,
            ),
        })
    }

    pub(crate) fn n_params(&self) -> usize {
        self.obj.n_params()
    }

    pub(crate) fn eval(&self, theta: &[f64]) -> f64 {
        self.obj.eval(theta)
    }

    pub(crate) fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.obj.gradient(theta)
    }
}

/// L4^k(theta) = sum_{j<k} ( tr[U rho U^dag |j><j|] - tr[U sigma U^dag |j><j|] ),
/// the ancilla-free naive loss.
#[derive(Debug, Clone)]
pub struct NvtdeLoss {
    obj: ExpectationObjective,
    k: usize,
}

impl NvtdeLoss {
    pub fn new(
        ansatz: AnsatzSpec,
        rho: &DensityMatrix,
        sigma: &DensityMatrix,
        k: usize,
    ) -> Result<Self> {
        if rho.n_qubits() != sigma.n_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "states act on {} and {} qubits",
                rho.n_qubits(),
                sigma.n_qubits()
            )));
        }
        if ansatz.n_qubits != rho.n_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "nVTDE ansatz acts on the system itself ({} qubits), got {}",
                rho.n_qubits(),
                ansatz.n_qubits
            )));
        }
        let dim = rho.dim();
        if k == 0 || k > dim - 1 {
            return Err(Error::IndexOutOfRange(format!(
                "k = {k} outside 1..={}",
                dim - 1
            )));
        }
        let projector: Vec<f64> = (0..dim).map(|i| if i < k { 1.0 } else { 0.0 }).collect();
        let terms = vec![(1.0, rho.mat().clone()), (-1.0, sigma.mat().clone())];
        Ok(Self {
            obj: ExpectationObjective::new(&ansatz, projector, terms, 0.0),
            k,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_params(&self) -> usize {
        self.obj.n_params()
    }

    pub fn eval(&self, theta: &[f64]) -> f64 {
        self.obj.eval(theta)
    }

    pub fn eval_sampled(&self, theta: &[f64], shots: u64, rng: &mut SeededRng) -> f64 {
        self.obj.eval_sampled(theta, shots, rng)
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.obj.gradient(theta)
    }
}

/// L2(theta) = |<psi| (I_A tensor U_R(theta)) |phi>| for fixed purifications.
#[derive(Debug, Clone)]
pub struct VfeLoss {
    gates: Vec<LoweredGate>,
    n_params: usize,
    n_total: usize,
    offset: usize,
    psi: StateVector,
    phi: StateVector,
}

/// Below this magnitude the |L| gradient falls back to the |L|^2 direction.
pub const VFE_MAGNITUDE_FLOOR: f64 = 1e-8;

impl VfeLoss {
    /// `ansatz` acts on the trailing ancilla register R of both purifications.
    pub fn new(ansatz: AnsatzSpec, psi: StateVector, phi: StateVector) -> Result<Self> {
        if psi.n_qubits() != phi.n_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "purifications act on {} and {} qubits",
                psi.n_qubits(),
                phi.n_qubits()
            )));
        }
        if ansatz.n_qubits > psi.n_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "ancilla ansatz on {} qubits exceeds register of {}",
                ansatz.n_qubits,
                psi.n_qubits()
            )));
        }
        let offset = psi.n_qubits() - ansatz.n_qubits;
        Ok(Self {
            gates: lowered_gates(&ansatz),
            n_params: circuits::param_count(&ansatz),
            n_total: psi.n_qubits(),
            offset,
            psi,
            phi,
        })
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// <psi| (I_A tensor U_R(theta)) |phi>, optionally with one angle shifted.
    fn amplitude_shifted(&self, theta: &[f64], shifted: Option<(usize, f64)>) -> Complex64 {
        let mut amp = self.phi.amp().to_vec();
        for gate in &self.gates {
            let shift = match (gate.param(), shifted) {
                (Some(p), Some((j, s))) if p == j => s,
                _ => 0.0,
            };
            circuits::apply_gate_vec(&mut amp, self.n_total, self.offset, gate, theta, shift);
        }
        self.psi
            .amp()
            .iter()
            .zip(&amp)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn amplitude(&self, theta: &[f64]) -> Complex64 {
        self.amplitude_shifted(theta, None)
    }

    /// The reported loss: the overlap magnitude.
    pub fn eval(&self, theta: &[f64]) -> f64 {
        self.amplitude(theta).norm()
    }

    pub fn eval_sq(&self, theta: &[f64]) -> f64 {
        self.amplitude(theta).norm_sqr()
    }

    /// Swap-test sampled magnitude.
    pub fn eval_sampled(&self, theta: &[f64], shots: u64, rng: &mut SeededRng) -> f64 {
        let est_sq = sample_overlap(self.eval_sq(theta), shots, rng);
        est_sq.max(0.0).sqrt()
    }

    /// d|L|^2/dtheta_j = 2 Re[ conj(L(theta)) * (1/2) L(theta_j + pi) ].
    pub fn gradient_sq_component(&self, theta: &[f64], j: usize) -> f64 {
        let base = self.amplitude(theta);
        let shifted = self.amplitude_shifted(theta, Some((j, std::f64::consts::PI)));
        (base.conj() * shifted).re
    }

    pub fn gradient_sq(&self, theta: &[f64]) -> Vec<f64> {
        let base = self.amplitude(theta);
        (0..self.n_params)
            .map(|j| {
                let shifted = self.amplitude_shifted(theta, Some((j, std::f64::consts::PI)));
                (base.conj() * shifted).re
            })
            .collect()
    }

    /// Gradient of |L|: the |L|^2 gradient divided by 2|L|, falling back to
    /// the |L|^2 direction below [`VFE_MAGNITUDE_FLOOR`].
    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let magnitude = self.eval(theta);
        let grad_sq = self.gradient_sq(theta);
        if magnitude > VFE_MAGNITUDE_FLOOR {
            grad_sq.iter().map(|g| g / (2.0 * magnitude)).collect()
        } else {
            grad_sq
        }
    }
}

/// L3(theta) = tr chi^2 - 2 tr(rho chi) with chi the system marginal of
/// U(theta)|0...0>.
#[derive(Debug, Clone)]
pub struct VqslLoss {
    gates: Vec<LoweredGate>,
    n_params: usize,
    n_total: usize,
    n_system: usize,
    target: DensityMatrix,
}

impl VqslLoss {
    pub fn new(ansatz: AnsatzSpec, target: DensityMatrix) -> Result<Self> {
        if ansatz.n_qubits <= target.n_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "purification ansatz needs at least one ancilla beyond the {} system qubits",
                target.n_qubits()
            )));
        }
        Ok(Self {
            gates: lowered_gates(&ansatz),
            n_params: circuits::param_count(&ansatz),
            n_total: ansatz.n_qubits,
            n_system: target.n_qubits(),
            target,
        })
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Full register state U(theta)|0...0>.
    pub fn register_state(&self, theta: &[f64]) -> StateVector {
        let dim = 1usize << self.n_total;
        let mut amp = vec![Complex64::new(0.0, 0.0); dim];
        amp[0] = Complex64::new(1.0, 0.0);
        apply_ansatz_vec(&self.gates, theta, &mut amp, self.n_total, 0);
        StateVector::from_amp_unchecked(self.n_total, amp)
    }

    fn chi_shifted(&self, theta: &[f64], shifted: Option<(usize, f64)>) -> ComplexMatrix {
        let dim = 1usize << self.n_total;
        let mut amp = vec![Complex64::new(0.0, 0.0); dim];
        amp[0] = Complex64::new(1.0, 0.0);
        for gate in &self.gates {
            let shift = match (gate.param(), shifted) {
                (Some(p), Some((j, s))) if p == j => s,
                _ => 0.0,
            };
            circuits::apply_gate_vec(&mut amp, self.n_total, 0, gate, theta, shift);
        }
        let dim_a = 1usize << self.n_system;
        let dim_r = dim / dim_a;
        let mut chi = ComplexMatrix::zeros(dim_a, dim_a);
        for i in 0..dim_a {
            for j in 0..dim_a {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..dim_r {
                    acc += amp[i * dim_r + r] * amp[j * dim_r + r].conj();
                }
                chi.set(i, j, acc);
            }
        }
        chi
    }

    /// Learned state chi_A = tr_R U(theta)|0..0><0..0|U(theta)^dag.
    pub fn chi(&self, theta: &[f64]) -> ComplexMatrix {
        self.chi_shifted(theta, None)
    }

    pub fn eval(&self, theta: &[f64]) -> f64 {
        let chi = self.chi(theta);
        let purity = chi.trace_product(&chi).re;
        let overlap = self.target.mat().trace_product(&chi).re;
        purity - 2.0 * overlap
    }

    /// Shot-noise evaluation: two independent swap tests, one per overlap.
    pub fn eval_sampled(&self, theta: &[f64], shots: u64, rng: &mut SeededRng) -> f64 {
        let chi = self.chi(theta);
        let o1 = sample_overlap(chi.trace_product(&chi).re, shots, rng);
        let o2 = sample_overlap(self.target.mat().trace_product(&chi).re, shots, rng);
        o1 - 2.0 * o2
    }

    /// Parameter-shift gradient. The quadratic tr chi^2 term shifts one copy:
    /// d/dtheta_j tr chi^2 = tr[chi_+ chi] - tr[chi_- chi].
    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        const SHIFT: f64 = std::f64::consts::FRAC_PI_2;
        let chi = self.chi(theta);
        (0..self.n_params)
            .map(|j| {
                let plus = self.chi_shifted(theta, Some((j, SHIFT)));
                let minus = self.chi_shifted(theta, Some((j, -SHIFT)));
                let quad = plus.trace_product(&chi).re - minus.trace_product(&chi).re;
                let lin = self.target.mat().trace_product(&plus).re
                    - self.target.mat().trace_product(&minus).re;
                quad - lin
            })
            .collect()
    }
}
