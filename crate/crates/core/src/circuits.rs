//! Parameterized circuits: the hardware-efficient and purification ansatz
//! families, unitary synthesis, and gate application to states.
//!
//! Qubit 0 is the most significant bit of the computational-basis index; the
//! ancilla register R always sits on the trailing qubits. Rotations follow
//! the e^{-i theta H / 2} convention, so Ry(pi) = [[0, -1], [1, 0]].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::states::{DensityMatrix, StateVector};

/// Unitarity tolerance for matrices fed to the apply operations.
pub const UNITARITY_TOL: f64 = 1e-8;

/// The two circuit families used by the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzFamily {
    /// Per layer: Ry then Rz on every qubit, then a CNOT chain on adjacent
    /// pairs (0,1), (1,2), ... with no wrap-around.
    HardwareEfficient,
    /// Per layer: a U3 rotation on every qubit, then a circular CNOT layer
    /// (0,1), (1,2), ..., (n-1,0).
    PurificationU3,
}

/// Circuit topology: family, qubit count and layer depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub family: AnsatzFamily,
    pub n_qubits: usize,
    pub depth: usize,
}

impl AnsatzSpec {
    pub fn new(family: AnsatzFamily, n_qubits: usize, depth: usize) -> Self {
        assert!(n_qubits >= 1, "ansatz needs at least one qubit");
        Self {
            family,
            n_qubits,
            depth,
        }
    }

    pub fn hardware_efficient(n_qubits: usize, depth: usize) -> Self {
        Self::new(AnsatzFamily::HardwareEfficient, n_qubits, depth)
    }

    pub fn purification_u3(n_qubits: usize, depth: usize) -> Self {
        Self::new(AnsatzFamily::PurificationU3, n_qubits, depth)
    }
}

/// Number of rotation angles the ansatz consumes: 2nL for the
/// hardware-efficient family, 3nL for the purification family.
pub fn param_count(spec: &AnsatzSpec) -> usize {
    match spec.family {
        AnsatzFamily::HardwareEfficient => 2 * spec.n_qubits * spec.depth,
        AnsatzFamily::PurificationU3 => 3 * spec.n_qubits * spec.depth,
    }
}

/// A concrete gate with bound angles.
#[derive(Debug, Clone, PartialEq)]
pub enum GateSpec {
    Ry { qubit: usize, theta: f64 },
    Rz { qubit: usize, theta: f64 },
    /// U3(theta, phi, varphi) = Rz(phi) Ry(theta) Rz(varphi).
    U3 { qubit: usize, theta: f64, phi: f64, varphi: f64 },
    Cnot { control: usize, target: usize },
    Cz { a: usize, b: usize },
}

impl GateSpec {
    /// 2x2 matrix of a single-qubit gate; None for entangling gates.
    pub fn matrix_1q(&self) -> Option<[Complex64; 4]> {
        match *self {
            GateSpec::Ry { theta, .. } => Some(ry_matrix(theta)),
            GateSpec::Rz { theta, .. } => Some(rz_matrix(theta)),
            GateSpec::U3 {
                theta, phi, varphi, ..
            } => Some(mul_2x2(
                &mul_2x2(&rz_matrix(phi), &ry_matrix(theta)),
                &rz_matrix(varphi),
            )),
            _ => None,
        }
    }
}

/// Standard gate matrices.
pub mod gates {
    use super::*;

    pub fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn pauli_y() -> ComplexMatrix {
        ComplexMatrix::new(
            2,
            2,
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
            ],
        )
    }

    pub fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    pub fn hadamard() -> ComplexMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real(2, 2, &[h, h, h, -h])
    }

    pub fn ry(theta: f64) -> ComplexMatrix {
        ComplexMatrix::new(2, 2, ry_matrix(theta).to_vec())
    }

    pub fn rz(theta: f64) -> ComplexMatrix {
        ComplexMatrix::new(2, 2, rz_matrix(theta).to_vec())
    }

    pub fn u3(theta: f64, phi: f64, varphi: f64) -> ComplexMatrix {
        ComplexMatrix::new(
            2,
            2,
            GateSpec::U3 {
                qubit: 0,
                theta,
                phi,
                varphi,
            }
            .matrix_1q()
            .unwrap()
            .to_vec(),
        )
    }

    pub fn cnot() -> ComplexMatrix {
        ComplexMatrix::from_real(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, 0.0,
            ],
        )
    }
}

fn ry_matrix(theta: f64) -> [Complex64; 4] {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    [
        Complex64::new(c, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(c, 0.0),
    ]
}

fn rz_matrix(theta: f64) -> [Complex64; 4] {
    [
        Complex64::from_polar(1.0, -theta / 2.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(1.0, theta / 2.0),
    ]
}

fn mul_2x2(a: &[Complex64; 4], b: &[Complex64; 4]) -> [Complex64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

fn dagger_2x2(g: &[Complex64; 4]) -> [Complex64; 4] {
    [g[0].conj(), g[2].conj(), g[1].conj(), g[3].conj()]
}

/// Rotation axis of a parameterized gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Axis {
    Y,
    Z,
}

/// Ansatz gate with its angle referenced by parameter index.
#[derive(Debug, Clone, Copy)]
pub(crate) enum LoweredGate {
    Rot { axis: Axis, qubit: usize, param: usize },
    Cnot { control: usize, target: usize },
}

impl LoweredGate {
    pub(crate) fn param(&self) -> Option<usize> {
        match *self {
            LoweredGate::Rot { param, .. } => Some(param),
            LoweredGate::Cnot { .. } => None,
        }
    }
}

pub(crate) fn rot_matrix(axis: Axis, angle: f64) -> [Complex64; 4] {
    match axis {
        Axis::Y => ry_matrix(angle),
        Axis::Z => rz_matrix(angle),
    }
}

/// Gate sequence of an ansatz, with angles left symbolic (parameter indices).
pub(crate) fn lowered_gates(spec: &AnsatzSpec) -> Vec<LoweredGate> {
    let n = spec.n_qubits;
    let mut gates = Vec::new();
    for layer in 0..spec.depth {
        match spec.family {
            AnsatzFamily::HardwareEfficient => {
                for q in 0..n {
                    let base = 2 * (layer * n + q);
                    gates.push(LoweredGate::Rot {
                        axis: Axis::Y,
                        qubit: q,
                        param: base,
                    });
                    gates.push(LoweredGate::Rot {
                        axis: Axis::Z,
                        qubit: q,
                        param: base + 1,
                    });
                }
                for q in 0..n.saturating_sub(1) {
                    gates.push(LoweredGate::Cnot {
                        control: q,
                        target: q + 1,
                    });
                }
            }
            AnsatzFamily::PurificationU3 => {
                for q in 0..n {
                    let base = 3 * (layer * n + q);
                    // U3(t0, t1, t2) = Rz(t1) Ry(t0) Rz(t2): rightmost first
                    gates.push(LoweredGate::Rot {
                        axis: Axis::Z,
                        qubit: q,
                        param: base + 2,
                    });
                    gates.push(LoweredGate::Rot {
                        axis: Axis::Y,
                        qubit: q,
                        param: base,
                    });
                    gates.push(LoweredGate::Rot {
                        axis: Axis::Z,
                        qubit: q,
                        param: base + 1,
                    });
                }
                if n > 1 {
                    for q in 0..n {
                        gates.push(LoweredGate::Cnot {
                            control: q,
                            target: (q + 1) % n,
                        });
                    }
                }
            }
        }
    }
    gates
}

/// Concrete gate list for a parameter vector.
pub fn ansatz_gates(spec: &AnsatzSpec, theta: &[f64]) -> Result<Vec<GateSpec>> {
    check_param_len(spec, theta)?;
    Ok(lowered_gates(spec)
        .iter()
        .map(|g| match *g {
            LoweredGate::Rot {
                axis: Axis::Y,
                qubit,
                param,
            } => GateSpec::Ry {
                qubit,
                theta: theta[param],
            },
            LoweredGate::Rot {
                axis: Axis::Z,
                qubit,
                param,
            } => GateSpec::Rz {
                qubit,
                theta: theta[param],
            },
            LoweredGate::Cnot { control, target } => GateSpec::Cnot { control, target },
        })
        .collect())
}

fn check_param_len(spec: &AnsatzSpec, theta: &[f64]) -> Result<()> {
    let expected = param_count(spec);
    if theta.len() != expected {
        return Err(Error::DimensionMismatch(format!(
            "ansatz expects {expected} parameters, got {}",
            theta.len()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// dense gate kernels
//
// `offset` shifts the ansatz onto the trailing qubits of a larger register
// (qubit q of the ansatz acts on register qubit offset + q).

#[inline]
fn bit_mask(n_qubits: usize, qubit: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

pub(crate) fn apply_1q_vec(amp: &mut [Complex64], n_qubits: usize, qubit: usize, g: &[Complex64; 4]) {
    let dim = amp.len();
    debug_assert_eq!(dim, 1 << n_qubits);
    let mask = bit_mask(n_qubits, qubit);
    for i in 0..dim {
        if i & mask == 0 {
            let j = i | mask;
            let a = amp[i];
            let b = amp[j];
            amp[i] = g[0] * a + g[1] * b;
            amp[j] = g[2] * a + g[3] * b;
        }
    }
}

pub(crate) fn apply_cnot_vec(amp: &mut [Complex64], n_qubits: usize, control: usize, target: usize) {
    let cmask = bit_mask(n_qubits, control);
    let tmask = bit_mask(n_qubits, target);
    for i in 0..amp.len() {
        if i & cmask != 0 && i & tmask == 0 {
            amp.swap(i, i | tmask);
        }
    }
}

/// m <- G m (G embedded on `qubit`): mixes row pairs.
pub(crate) fn lmul_1q(m: &mut ComplexMatrix, n_qubits: usize, qubit: usize, g: &[Complex64; 4]) {
    let dim = m.rows;
    let mask = bit_mask(n_qubits, qubit);
    for r in 0..dim {
        if r & mask == 0 {
            let r2 = r | mask;
            for col in 0..dim {
                let a = m.data[r * dim + col];
                let b = m.data[r2 * dim + col];
                m.data[r * dim + col] = g[0] * a + g[1] * b;
                m.data[r2 * dim + col] = g[2] * a + g[3] * b;
            }
        }
    }
}

/// m <- m G (G embedded on `qubit`): mixes column pairs.
pub(crate) fn rmul_1q(m: &mut ComplexMatrix, n_qubits: usize, qubit: usize, g: &[Complex64; 4]) {
    let dim = m.rows;
    let mask = bit_mask(n_qubits, qubit);
    for r in 0..dim {
        let row = r * dim;
        for c in 0..dim {
            if c & mask == 0 {
                let c2 = c | mask;
                let a = m.data[row + c];
                let b = m.data[row + c2];
                m.data[row + c] = a * g[0] + b * g[2];
                m.data[row + c2] = a * g[1] + b * g[3];
            }
        }
    }
}

pub(crate) fn lmul_cnot(m: &mut ComplexMatrix, n_qubits: usize, control: usize, target: usize) {
    let dim = m.rows;
    let cmask = bit_mask(n_qubits, control);
    let tmask = bit_mask(n_qubits, target);
    for r in 0..dim {
        if r & cmask != 0 && r & tmask == 0 {
            let r2 = r | tmask;
            for col in 0..dim {
                m.data.swap(r * dim + col, r2 * dim + col);
            }
        }
    }
}

pub(crate) fn rmul_cnot(m: &mut ComplexMatrix, n_qubits: usize, control: usize, target: usize) {
    let dim = m.rows;
    let cmask = bit_mask(n_qubits, control);
    let tmask = bit_mask(n_qubits, target);
    for r in 0..dim {
        let row = r * dim;
        for c in 0..dim {
            if c & cmask != 0 && c & tmask == 0 {
                m.data.swap(row + c, row + (c | tmask));
            }
        }
    }
}

/// m <- G m G^dag for a single-qubit gate.
pub(crate) fn conj_density_1q(m: &mut ComplexMatrix, n_qubits: usize, qubit: usize, g: &[Complex64; 4]) {
    lmul_1q(m, n_qubits, qubit, g);
    rmul_1q(m, n_qubits, qubit, &dagger_2x2(g));
}

/// m <- G^dag m G for a single-qubit gate (observable picture).
pub(crate) fn conj_observable_1q(m: &mut ComplexMatrix, n_qubits: usize, qubit: usize, g: &[Complex64; 4]) {
    let gd = dagger_2x2(g);
    lmul_1q(m, n_qubits, qubit, &gd);
    rmul_1q(m, n_qubits, qubit, g);
}

pub(crate) fn conj_density_cnot(m: &mut ComplexMatrix, n_qubits: usize, control: usize, target: usize) {
    lmul_cnot(m, n_qubits, control, target);
    rmul_cnot(m, n_qubits, control, target);
}

/// Applies one lowered gate in the chosen picture.
pub(crate) fn conj_density_gate(
    m: &mut ComplexMatrix,
    n_qubits: usize,
    offset: usize,
    gate: &LoweredGate,
    theta: &[f64],
    shift: f64,
) {
    match *gate {
        LoweredGate::Rot { axis, qubit, param } => {
            let g = rot_matrix(axis, theta[param] + shift);
            conj_density_1q(m, n_qubits, offset + qubit, &g);
        }
        LoweredGate::Cnot { control, target } => {
            conj_density_cnot(m, n_qubits, offset + control, offset + target);
        }
    }
}

pub(crate) fn conj_observable_gate(
    m: &mut ComplexMatrix,
    n_qubits: usize,
    offset: usize,
    gate: &LoweredGate,
    theta: &[f64],
) {
    match *gate {
        LoweredGate::Rot { axis, qubit, param } => {
            let g = rot_matrix(axis, theta[param]);
            conj_observable_1q(m, n_qubits, offset + qubit, &g);
        }
        LoweredGate::Cnot { control, target } => {
            // CNOT is self-inverse, so both pictures coincide
            conj_density_cnot(m, n_qubits, offset + control, offset + target);
        }
    }
}

pub(crate) fn apply_gate_vec(
    amp: &mut [Complex64],
    n_qubits: usize,
    offset: usize,
    gate: &LoweredGate,
    theta: &[f64],
    shift: f64,
) {
    match *gate {
        LoweredGate::Rot { axis, qubit, param } => {
            let g = rot_matrix(axis, theta[param] + shift);
            apply_1q_vec(amp, n_qubits, offset + qubit, &g);
        }
        LoweredGate::Cnot { control, target } => {
            apply_cnot_vec(amp, n_qubits, offset + control, offset + target);
        }
    }
}

/// Evolves amplitudes through the whole ansatz.
pub(crate) fn apply_ansatz_vec(
    gates: &[LoweredGate],
    theta: &[f64],
    amp: &mut [Complex64],
    n_qubits: usize,
    offset: usize,
) {
    for gate in gates {
        apply_gate_vec(amp, n_qubits, offset, gate, theta, 0.0);
    }
}

// ---------------------------------------------------------------------------
// public operations

/// Full unitary matrix of the ansatz at the given angles.
pub fn circuit_unitary(spec: &AnsatzSpec, theta: &[f64]) -> Result<ComplexMatrix> {
    check_param_len(spec, theta)?;
    let n = spec.n_qubits;
    let mut u = ComplexMatrix::identity(1 << n);
    for gate in lowered_gates(spec) {
        match gate {
            LoweredGate::Rot { axis, qubit, param } => {
                lmul_1q(&mut u, n, qubit, &rot_matrix(axis, theta[param]));
            }
            LoweredGate::Cnot { control, target } => lmul_cnot(&mut u, n, control, target),
        }
    }
    Ok(u)
}

/// U rho U^dag.
pub fn apply_to_density(u: &ComplexMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if u.rows != rho.dim() || !u.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "unitary is {}x{}, state dimension is {}",
            u.rows,
            u.cols,
            rho.dim()
        )));
    }
    u.ensure_unitary(UNITARITY_TOL)?;
    let out = u.matmul(rho.mat()).matmul(&u.adjoint());
    Ok(DensityMatrix::from_matrix_unchecked(rho.n_qubits(), out))
}

/// U |psi>, renormalized to absorb round-off drift.
pub fn apply_to_vector(u: &ComplexMatrix, psi: &StateVector) -> Result<StateVector> {
    if u.rows != psi.dim() || !u.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "unitary is {}x{}, state dimension is {}",
            u.rows,
            u.cols,
            psi.dim()
        )));
    }
    u.ensure_unitary(UNITARITY_TOL)?;
    let mut amp = u.matvec(psi.amp());
    let norm = amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amp {
        *a /= norm;
    }
    Ok(StateVector::from_amp_unchecked(psi.n_qubits(), amp))
}

/// Embeds a unitary on the listed target qubits, identity elsewhere.
/// Qubit i of `u` maps onto `target_qubits[i]`.
pub fn embed_on_subsystem(
    u: &ComplexMatrix,
    total_qubits: usize,
    target_qubits: &[usize],
) -> Result<ComplexMatrix> {
    let k = target_qubits.len();
    if !u.is_square() || u.rows != (1 << k) {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, expected {} for {k} target qubits",
            u.rows,
            u.cols,
            1 << k
        )));
    }
    for (i, &q) in target_qubits.iter().enumerate() {
        if q >= total_qubits {
            return Err(Error::IndexOutOfRange(format!(
                "target qubit {q} outside register of {total_qubits}"
            )));
        }
        if target_qubits[..i].contains(&q) {
            return Err(Error::InvalidArgument(format!(
                "target qubit {q} listed twice"
            )));
        }
    }
    let dim = 1usize << total_qubits;
    let mut nontarget_mask = dim - 1;
    for &q in target_qubits {
        nontarget_mask &= !bit_mask(total_qubits, q);
    }
    let extract = |index: usize| -> usize {
        let mut sub = 0usize;
        for (i, &q) in target_qubits.iter().enumerate() {
            let bit = (index & bit_mask(total_qubits, q) != 0) as usize;
            sub |= bit << (k - 1 - i);
        }
        sub
    };
    let mut out = ComplexMatrix::zeros(dim, dim);
    for row in 0..dim {
        let ur = extract(row);
        for col in 0..dim {
            if row & nontarget_mask == col & nontarget_mask {
                out.set(row, col, u.get(ur, extract(col)));
            }
        }
    }
    Ok(out)
}
