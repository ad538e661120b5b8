//! Dense complex linear algebra: matrices, state vectors, density matrices,
//! Kronecker products and the embedding of local gates into an n-qubit
//! register.
//!
//! Basis convention used throughout the crate: qubit 0 is the most
//! significant bit of the computational-basis index. For an n-qubit register
//! the bit of qubit `q` in index `i` is `(i >> (n - 1 - q)) & 1`.

use std::ops::Index;

use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest register handled by the dense kernels.
pub const MAX_QUBITS: usize = 12;
pub const MAX_DIM: usize = 1 << MAX_QUBITS;

/// Tolerance for normalisation, trace and Hermiticity checks.
pub const STATE_TOL: f64 = 1e-9;
/// Tolerance for accepting caller-supplied unitaries.
pub const UNITARY_TOL: f64 = 1e-6;
/// Smallest eigenvalue tolerated in a density matrix.
pub const PSD_TOL: f64 = 1e-8;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Bit mask of qubit `q` inside an `n`-qubit basis index.
#[inline]
pub fn qubit_mask(q: usize, n: usize) -> usize {
    1 << (n - 1 - q)
}

/// Returns the qubit count of a power-of-two dimension.
pub fn qubits_for_dim(dim: usize) -> Option<usize> {
    (dim.is_power_of_two()).then(|| dim.trailing_zeros() as usize)
}

pub(crate) fn check_qubit_count(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::size(format!(
            "{n} qubits exceeds the dense cap of {MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::shape("matrix dimensions must be at least 1"));
        }
        if data.len() != rows * cols {
            return Err(Error::shape(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation("matrix contains non-finite entries"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a square matrix from its columns.
    pub(crate) fn from_columns(columns: &[Vec<C64>]) -> Self {
        let cols = columns.len();
        let rows = columns[0].len();
        let mut data = vec![ZERO; rows * cols];
        for (j, column) in columns.iter().enumerate() {
            for (i, &z) in column.iter().enumerate() {
                data[i * cols + j] = z;
            }
        }
        Self { rows, cols, data }
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let dim = entries.len();
        let mut m = Self::zeros(dim, dim);
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * dim + i] = z;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols + j])
            .collect()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, z: C64) {
        self.data[i * self.cols + j] = z;
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let (n, m) = (self.cols, rhs.cols);
        let mut data = vec![ZERO; self.rows * m];
        data.par_chunks_mut(m).enumerate().for_each(|(i, out)| {
            let lhs_row = &self.data[i * n..(i + 1) * n];
            for (k, &a) in lhs_row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * m..(k + 1) * m];
                for (o, &b) in out.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        });
        Ok(Self {
            rows: self.rows,
            cols: m,
            data,
        })
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::shape(format!(
                "vector of length {} does not match {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (i..self.cols).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol)
            })
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::shape(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows.checked_mul(b.rows);
    let cols = a.cols.checked_mul(b.cols);
    let (rows, cols) = match (rows, cols) {
        (Some(r), Some(c)) if r <= MAX_DIM && c <= MAX_DIM => (r, c),
        _ => {
            return Err(Error::size(format!(
                "kron of {}x{} and {}x{} exceeds dimension cap {MAX_DIM}",
                a.rows, a.cols, b.rows, b.cols
            )))
        }
    };
    let mut data = vec![ZERO; rows * cols];
    for i in 0..a.rows {
        for j in 0..a.cols {
            let s = a.get(i, j);
            if s == ZERO {
                continue;
            }
            for k in 0..b.rows {
                let out_row = (i * b.rows + k) * cols + j * b.cols;
                for (l, &z) in b.row(k).iter().enumerate() {
                    data[out_row + l] = s * z;
                }
            }
        }
    }
    Ok(ComplexMatrix { rows, cols, data })
}

/// True iff every entry of `U†U − 1` has modulus at most `tol`.
pub fn check_unitary(u: &ComplexMatrix, tol: f64) -> bool {
    if !u.is_square() {
        return false;
    }
    let n = u.rows;
    // Column inner products, computed on the transposed layout so each is contiguous.
    let ut = u.transpose();
    (0..n).into_par_iter().all(|j| {
        let cj = ut.row(j);
        (j..n).all(|k| {
            let ck = ut.row(k);
            let dot: C64 = cj.iter().zip(ck).map(|(a, b)| a.conj() * b).sum();
            let expected = if j == k { ONE } else { ZERO };
            (dot - expected).norm() <= tol
        })
    })
}

/// Local index formed by reading the bits of `targets` out of `index`;
/// `targets[0]` becomes the most significant local bit.
#[inline]
pub(crate) fn gather_bits(index: usize, masks: &[usize]) -> usize {
    masks
        .iter()
        .fold(0, |acc, &m| (acc << 1) | usize::from(index & m != 0))
}

/// Writes the bits of `local` into the target positions of `index`.
#[inline]
pub(crate) fn scatter_bits(index: usize, local: usize, masks: &[usize]) -> usize {
    let k = masks.len();
    masks.iter().enumerate().fold(index, |acc, (b, &m)| {
        if (local >> (k - 1 - b)) & 1 == 1 {
            acc | m
        } else {
            acc & !m
        }
    })
}

pub(crate) fn validate_targets(targets: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut seen = 0usize;
    let mut masks = Vec::with_capacity(targets.len());
    for &t in targets {
        if t >= n {
            return Err(Error::argument(format!(
                "qubit {t} out of range for {n} qubits"
            )));
        }
        let m = qubit_mask(t, n);
        if seen & m != 0 {
            return Err(Error::argument(format!("duplicate target qubit {t}")));
        }
        seen |= m;
        masks.push(m);
    }
    Ok(masks)
}

/// Embeds a `2^k × 2^k` gate acting on `targets` into an `n`-qubit operator.
pub fn embed_local(gate: &ComplexMatrix, targets: &[usize], n: usize) -> Result<ComplexMatrix> {
    check_qubit_count(n)?;
    if !gate.is_square() || !gate.rows.is_power_of_two() {
        return Err(Error::shape(format!(
            "gate must be square with power-of-two size, got {}x{}",
            gate.rows, gate.cols
        )));
    }
    if gate.rows != 1 << targets.len() {
        return Err(Error::shape(format!(
            "{}x{} gate cannot act on {} qubits",
            gate.rows,
            gate.cols,
            targets.len()
        )));
    }
    let masks = validate_targets(targets, n)?;
    let dim = 1usize << n;
    let local_dim = gate.rows;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for row in 0..dim {
        let r_local = gather_bits(row, &masks);
        for c_local in 0..local_dim {
            let z = gate.get(r_local, c_local);
            if z != ZERO {
                out.set(row, scatter_bits(row, c_local, &masks), z);
            }
        }
    }
    Ok(out)
}

/// Normalised pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::shape("state vector must not be empty"));
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::validation(format!(
                "state norm² is {norm}, expected 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a non-zero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::validation("cannot normalise a zero vector"));
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Ok(Self { amplitudes })
    }

    pub(crate) fn from_raw(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::argument(format!(
                "basis index {index} out of range {dim}"
            )));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Mixed state: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self { matrix };
        rho.validate()?;
        Ok(rho)
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        Self {
            matrix: ComplexMatrix::from_fn(a.len(), a.len(), |i, j| a[i] * a[j].conj()),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.matrix.get(i, j)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Diagonal in the computational basis.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix.get(i, i).re).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.dim();
        let m = DMatrix::from_fn(n, n, |i, j| self.matrix.get(i, j));
        // Symmetrise so round-off cannot break the Hermitian eigen-solver.
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.matrix.is_square() {
            return Err(Error::shape("density matrix must be square"));
        }
        if !self.matrix.is_hermitian(STATE_TOL) {
            return Err(Error::validation("density matrix is not Hermitian"));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::validation(format!("density matrix trace is {tr}")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -PSD_TOL {
            return Err(Error::validation(format!(
                "density matrix has negative eigenvalue {min_eig}"
            )));
        }
        Ok(())
    }
}

/// `ρ' = U ρ U†`.
pub fn evolve_density(rho: &DensityMatrix, u: &ComplexMatrix) -> Result<DensityMatrix> {
    if u.rows != rho.dim() || !u.is_square() {
        return Err(Error::shape(format!(
            "{}x{} operator does not match density matrix of dimension {}",
            u.rows,
            u.cols,
            rho.dim()
        )));
    }
    if !check_unitary(u, UNITARY_TOL) {
        return Err(Error::validation("evolution operator is not unitary"));
    }
    let out = u.matmul(&rho.matrix)?.matmul(&u.adjoint())?;
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn hadamard() -> ComplexMatrix {
        ComplexMatrix::from_real(
            2,
            2,
            &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
        )
        .unwrap()
    }

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2).unwrap(), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_hadamard_squared_has_half_entries() {
        let hh = kron(&hadamard(), &hadamard()).unwrap();
        let expected = [
            [1.0, 1.0, 1.0, 1.0],
            [1.0, -1.0, 1.0, -1.0],
            [1.0, 1.0, -1.0, -1.0],
            [1.0, -1.0, -1.0, 1.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((hh[(i, j)] - C64::new(0.5 * expected[i][j], 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn kron_x_z_layout() {
        let m = kron(&sigma_x(), &sigma_z()).unwrap();
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected.set(0, 2, ONE);
        expected.set(1, 3, -ONE);
        expected.set(2, 0, ONE);
        expected.set(3, 1, -ONE);
        assert_eq!(m, expected);
    }

    #[test]
    fn kron_rejects_oversized_result() {
        let big = ComplexMatrix::identity(1 << 7);
        assert!(matches!(kron(&big, &big), Err(Error::Size(_))));
    }

    #[test]
    fn embed_on_single_qubit_is_passthrough() {
        assert_eq!(embed_local(&sigma_x(), &[0], 1).unwrap(), sigma_x());
    }

    #[test]
    fn embed_x_on_most_significant_qubit() {
        let m = embed_local(&sigma_x(), &[0], 2).unwrap();
        for (from, to) in [(0, 2), (1, 3), (2, 0), (3, 1)] {
            assert_eq!(m[(to, from)], ONE);
        }
        assert_eq!(m.as_slice().iter().filter(|z| **z != ZERO).count(), 4);
    }

    #[test]
    fn embed_matches_explicit_kron() {
        let m = embed_local(&hadamard(), &[1], 2).unwrap();
        let k = kron(&ComplexMatrix::identity(2), &hadamard()).unwrap();
        assert!(m.max_abs_diff(&k) < 1e-15);
    }

    #[test]
    fn embed_two_qubit_gate_with_swapped_targets() {
        // CNOT with control on qubit 1, target qubit 0, checked against a permutation.
        let cnot = ComplexMatrix::from_real(
            4,
            4,
            &[
                1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.,
            ],
        )
        .unwrap();
        let m = embed_local(&cnot, &[1, 0], 2).unwrap();
        // |q0 q1>: 01 -> 11, 11 -> 01
        assert_eq!(m[(3, 1)], ONE);
        assert_eq!(m[(1, 3)], ONE);
        assert_eq!(m[(0, 0)], ONE);
        assert_eq!(m[(2, 2)], ONE);
    }

    #[test]
    fn embed_errors() {
        let non_pow2 = ComplexMatrix::identity(3);
        assert!(matches!(
            embed_local(&non_pow2, &[0], 2),
            Err(Error::Shape(_))
        ));
        let cz = ComplexMatrix::identity(4);
        assert!(matches!(
            embed_local(&cz, &[1, 1], 2),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            embed_local(&sigma_x(), &[2], 2),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn unitary_checks() {
        assert!(check_unitary(&hadamard(), 1e-12));
        assert!(!check_unitary(
            &ComplexMatrix::identity(2).scale(C64::new(2.0, 0.0)),
            1e-9
        ));
        assert!(!check_unitary(&ComplexMatrix::zeros(2, 3), 1e-9));
    }

    #[test]
    fn evolve_examples() {
        let zero = DensityMatrix::pure(&StateVector::basis(2, 0).unwrap());
        let same = evolve_density(&zero, &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(same, zero);

        let plus = evolve_density(&zero, &hadamard()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((plus.get(i, j) - C64::new(0.5, 0.0)).norm() < 1e-15);
            }
        }

        let diag = DensityMatrix::from_matrix(ComplexMatrix::diagonal(&[
            C64::new(0.3, 0.0),
            C64::new(0.7, 0.0),
        ]))
        .unwrap();
        let flipped = evolve_density(&diag, &sigma_x()).unwrap();
        assert!((flipped.get(0, 0).re - 0.7).abs() < 1e-15);
        assert!((flipped.get(1, 1).re - 0.3).abs() < 1e-15);
    }

    #[test]
    fn evolve_rejects_non_unitary() {
        let rho = DensityMatrix::maximally_mixed(2);
        let bad = ComplexMatrix::identity(2).scale(C64::new(1.1, 0.0));
        assert!(matches!(
            evolve_density(&rho, &bad),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn density_validation() {
        let not_psd = ComplexMatrix::diagonal(&[C64::new(1.5, 0.0), C64::new(-0.5, 0.0)]);
        assert!(DensityMatrix::from_matrix(not_psd).is_err());
        let bad_trace = ComplexMatrix::identity(2);
        assert!(DensityMatrix::from_matrix(bad_trace).is_err());
        assert!(DensityMatrix::maximally_mixed(4).validate().is_ok());
    }

    #[test]
    fn state_vector_checks_norm() {
        assert!(StateVector::new(vec![ONE, ONE]).is_err());
        let psi = StateVector::normalized(vec![ONE, ONE]).unwrap();
        assert!((psi.probabilities()[0] - 0.5).abs() < 1e-15);
        assert!(StateVector::basis(4, 4).is_err());
    }
}
