//! Dense complex linear algebra for exact simulation and oracles: Kronecker
//! products, partial trace, Hermitian eigendecomposition (cyclic Jacobi),
//! PSD square root, trace norm and partial-spectrum sums.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Max-entry tolerance under which an operator counts as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Off-diagonal Frobenius mass at which the Jacobi iteration stops.
pub const JACOBI_OFFDIAG_TOL: f64 = 1e-12;
/// Eigenvalues closer than this are treated as degenerate; order among ties
/// is unspecified.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must be rows * cols");
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real(rows: usize, cols: usize, reals: &[f64]) -> Self {
        assert_eq!(reals.len(), rows * cols, "entry count must be rows * cols");
        Self {
            rows,
            cols,
            data: reals.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
        }
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace requires a square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let row_out = i * other.cols;
                let row_b = k * other.cols;
                for j in 0..other.cols {
                    out.data[row_out + j] += a * other.data[row_b + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "inner dimensions must agree");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// tr(self * other), computed without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += self.get(i, j) * other.get(j, i);
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest |self - other| entry.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest |H - H^dag| entry; 0 for exactly Hermitian input.
    pub fn hermiticity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..=i {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn ensure_hermitian(&self, tolerance: f64) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > tolerance {
            return Err(Error::NotHermitian {
                deviation,
                tolerance,
            });
        }
        Ok(())
    }

    /// Largest |U U^dag - I| entry.
    pub fn unitarity_deviation(&self) -> f64 {
        assert!(self.is_square());
        self.matmul(&self.adjoint())
            .max_abs_diff(&Self::identity(self.rows))
    }

    pub fn ensure_unitary(&self, tolerance: f64) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation > tolerance {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// (H + H^dag) / 2, absorbing round-off from channel and circuit composition.
    pub fn symmetrized(&self) -> Self {
        assert!(self.is_square());
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, (self.get(i, j) + self.get(j, i).conj()).scale(0.5));
            }
        }
        out
    }
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a.get(i, j);
            if aij.norm_sqr() == 0.0 {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out.set(i * b.rows + k, j * b.cols + l, aij * b.get(k, l));
                }
            }
        }
    }
    out
}

/// Partial trace of a square operator on a tensor product of subsystems.
///
/// `dims` lists the subsystem dimensions in tensor order; `keep` lists the
/// (strictly increasing) subsystem indices retained in the output.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "partial trace needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let total: usize = dims.iter().product();
    if total != m.rows {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dims {:?} multiply to {}, matrix dimension is {}",
            dims, total, m.rows
        )));
    }
    for w in keep.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidArgument(
                "keep indices must be strictly increasing".into(),
            ));
        }
    }
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::IndexOutOfRange(format!(
            "keep index out of range for {} subsystems",
            dims.len()
        )));
    }

    // Strides of each subsystem inside the flat index.
    let n_sub = dims.len();
    let mut strides = vec![1usize; n_sub];
    for i in (0..n_sub.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let traced: Vec<usize> = (0..n_sub).filter(|i| !keep.contains(i)).collect();
    let dim_keep: usize = keep.iter().map(|&i| dims[i]).product();
    let dim_traced: usize = traced.iter().map(|&i| dims[i]).product();

    // Flat index offset for a multi-index over the given subsystem subset.
    let offset = |subset: &[usize], mut idx: usize| -> usize {
        let mut off = 0;
        for &s in subset.iter().rev() {
            off += (idx % dims[s]) * strides[s];
            idx /= dims[s];
        }
        off
    };

    let mut out = ComplexMatrix::zeros(dim_keep, dim_keep);
    for i in 0..dim_keep {
        let row_base = offset(keep, i);
        for j in 0..dim_keep {
            let col_base = offset(keep, j);
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..dim_traced {
                let t_off = offset(&traced, t);
                acc += m.get(row_base + t_off, col_base + t_off);
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix: `eigenvalues` sorted
/// non-increasing, `eigenvectors` unitary with columns in matching order.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    /// V diag(eigenvalues) V^dag.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, &lambda) in self.eigenvalues.iter().enumerate() {
                    acc += v.get(i, k) * lambda * v.get(j, k).conj();
                }
                out.set(i, j, acc);
            }
        }
        out
    }
}

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
///
/// The input must be Hermitian within [`HERMITICITY_TOL`] in max-entry norm;
/// it is symmetrized before iterating. Sweeps stop once the off-diagonal
/// Frobenius mass drops below [`JACOBI_OFFDIAG_TOL`].
pub fn herm_eig(h: &ComplexMatrix) -> Result<HermitianEig> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            h.rows, h.cols
        )));
    }
    h.ensure_hermitian(HERMITICITY_TOL)?;
    let n = h.rows;
    let mut a = h.symmetrized().data;
    let mut v = ComplexMatrix::identity(n).data;

    let off_mass = |a: &[Complex64]| -> f64 {
        let mut acc = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    acc += a[p * n + q].norm_sqr();
                }
            }
        }
        acc.sqrt()
    };

    const MAX_SWEEPS: usize = 100;
    let mut converged = n <= 1 || off_mass(&a) < JACOBI_OFFDIAG_TOL;
    for _sweep in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let m = apq.norm();
                if m == 0.0 {
                    continue;
                }
                let phase = apq / m;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * m);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // 2x2 rotation R = diag(phase, 1) * [[c, s], [-s, c]];
                // apply A <- R^dag A R and V <- V R on coordinates (p, q).
                let rpp = phase * c;
                let rpq = phase * s;
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = aip * rpp - aiq * s;
                    a[i * n + q] = aip * rpq + aiq * c;
                }
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = rpp.conj() * apj - s * aqj;
                    a[q * n + j] = rpq.conj() * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = vip * rpp - viq * s;
                    v[i * n + q] = vip * rpq + viq * c;
                }
            }
        }
        converged = off_mass(&a) < JACOBI_OFFDIAG_TOL;
    }
    if !converged {
        return Err(Error::NumericalCheck(format!(
            "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps (dim {n})"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[j * n + j]
            .re
            .partial_cmp(&a[i * n + i].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors.set(row, col, v[row * n + src]);
        }
    }
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// Hermitian PSD square root: S with S*S = m.
///
/// Eigenvalues must be at least -1e-10; values below 1e-13 of the largest
/// eigenvalue are treated as exact zeros, which keeps null directions free of
/// sqrt-amplified round-off.
pub fn mat_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    const PSD_TOL: f64 = 1e-10;
    const REL_ZERO: f64 = 1e-13;
    let eig = herm_eig(m)?;
    if let Some(&lambda) = eig
        .eigenvalues
        .iter()
        .find(|&&lambda| lambda < -PSD_TOL)
    {
        return Err(Error::NotPositive { eigenvalue: lambda });
    }
    let floor = eig.eigenvalues.first().copied().unwrap_or(0.0).max(0.0) * REL_ZERO;
    let roots: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&lambda| if lambda > floor { lambda.sqrt() } else { 0.0 })
        .collect();
    let n = m.rows;
    let v = &eig.eigenvectors;
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &r) in roots.iter().enumerate() {
                acc += v.get(i, k) * r * v.get(j, k).conj();
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// Trace norm of a Hermitian matrix: sum of absolute eigenvalues.
pub fn trace_norm(h: &ComplexMatrix) -> Result<f64> {
    let eig = herm_eig(h)?;
    Ok(eig.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// Sum of the k largest eigenvalues of a Hermitian matrix.
pub fn top_k_eig_sum(h: &ComplexMatrix, k: usize) -> Result<f64> {
    let eig = herm_eig(h)?;
    if k == 0 || k > eig.eigenvalues.len() {
        return Err(Error::IndexOutOfRange(format!(
            "k = {k} outside 1..={}",
            eig.eigenvalues.len()
        )));
    }
    Ok(eig.eigenvalues[..k].iter().sum())
}
