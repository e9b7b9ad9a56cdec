//! Small dense complex-matrix kernel.
//!
//! Everything here targets the few-path regime (n up to ~16), so storage is a
//! flat row-major `Vec<Complex64>` and all algorithms are plain O(n³) loops.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest tolerated `|m[i][j] - conj(m[j][i])|` before a matrix counts as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Eigenvalues in `[-PSD_TOL, 0)` are treated as rounding noise and clamped to zero.
pub const PSD_TOL: f64 = 1e-9;

const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// Summary of how far a matrix is from being a valid density operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermitianCheckReport {
    pub max_hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub trace_defect: f64,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix must have at least one row and column");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::BadDimension(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix entries",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows; all rows must share a length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for (idx, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::invalid(
                    "matrix",
                    format!("row has {} entries, expected {c}", row.len()),
                    idx,
                ));
            }
            data.extend_from_slice(row);
        }
        Self::from_vec(r, c, data)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        let mut m = Self::zeros(u.len(), v.len());
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                m[(i, j)] = ui * vj.conj();
            }
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

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        self.data.chunks(self.cols).map(<[_]>::to_vec).collect()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].re).collect()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context: "entrywise operation",
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matrix product",
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|m[i][j] - conj(m[j][i])|`, with its location.
    pub fn hermiticity_defect(&self) -> (f64, usize, usize) {
        let mut worst = (0.0, 0, 0);
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                if d > worst.0 {
                    worst = (d, i, j);
                }
            }
        }
        worst
    }

    /// `(m + m†) / 2`.
    pub fn symmetrized(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        out
    }

    /// `Tr(m²)` of a Hermitian matrix, i.e. `Σ |m_ij|²`.
    pub fn hs_norm_sqr(&self) -> f64 {
        self.data.iter().map(Complex64::norm_sqr).sum()
    }

    /// Extracts the principal submatrix on `indices`.
    pub fn principal_submatrix(&self, indices: &[usize]) -> Self {
        let k = indices.len();
        let mut out = Self::zeros(k, k);
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                out[(a, b)] = self[(i, j)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product dimensions")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for row in self.data.chunks(self.cols) {
            let cells: Vec<String> = row.iter().map(|z| format!("{:.6}{:+.6}i", z.re, z.im)).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Conjugate transpose `m†`.
pub fn conjugate_transpose(m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.cols, m.rows);
    for i in 0..m.rows {
        for j in 0..m.cols {
            out[(j, i)] = m[(i, j)].conj();
        }
    }
    out
}

fn require_hermitian(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let (defect, row, col) = m.hermiticity_defect();
    if !(defect <= HERMITIAN_TOL) {
        return Err(Error::NotHermitian { defect, row, col });
    }
    Ok(m.symmetrized())
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// Inputs within [`HERMITIAN_TOL`] of Hermitian are symmetrized first. Uses
/// cyclic complex Jacobi rotations, which are accurate to a few ulps of the
/// matrix norm for the small sizes this crate works with.
pub fn eigenvalues_hermitian(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let mut a = require_hermitian(m)?;
    let n = a.rows;
    let scale = a.hs_norm_sqr().sqrt();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, p, q);
            }
        }
    }
    let mut eig = a.diagonal_real();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Annihilates `a[p][q]` with a unitary rotation in the (p, q) plane.
fn jacobi_rotate(a: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // U = diag(1, conj(phase)) · [[c, s], [-s, c]] restricted to (p, q).
    let u_pp = Complex64::new(c, 0.0);
    let u_pq = Complex64::new(s, 0.0);
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;
    let n = a.rows;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
}

/// Hermiticity, spectrum and trace diagnostics against a unit-trace target.
pub fn hermitian_check(m: &ComplexMatrix) -> Result<HermitianCheckReport> {
    let (defect, _, _) = m.hermiticity_defect();
    let eig = eigenvalues_hermitian(m)?;
    Ok(HermitianCheckReport {
        max_hermiticity_defect: defect,
        min_eigenvalue: eig[0],
        trace_defect: (m.trace() - Complex64::new(1.0, 0.0)).norm(),
    })
}

/// Lower-triangular factor `L` with `L·L† = m` for a positive semidefinite `m`.
///
/// Pivots that vanish (rank-deficient input) zero their column, so the
/// factorization still reproduces `m` when it is singular.
pub fn cholesky_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let a = require_hermitian(m)?;
    let eig = eigenvalues_hermitian(&a)?;
    if eig[0] < -PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: eig[0],
        });
    }
    let n = a.rows;
    let max_diag = a.diagonal_real().into_iter().fold(0.0, f64::max);
    let pivot_floor = 64.0 * f64::EPSILON * max_diag.max(f64::MIN_POSITIVE);
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= pivot_floor {
            continue;
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Traces out the second tensor factor of a `(dim_a·dim_b)`-square matrix.
pub fn partial_trace_second(joint: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix> {
    let dim = dim_a * dim_b;
    if dim_a == 0 || dim_b == 0 || joint.rows != dim || joint.cols != dim {
        return Err(Error::DimensionMismatch {
            context: "partial trace",
            expected: dim,
            found: joint.rows.max(joint.cols),
        });
    }
    let mut out = ComplexMatrix::zeros(dim_a, dim_a);
    for i in 0..dim_a {
        for j in 0..dim_a {
            out[(i, j)] = (0..dim_b).map(|k| joint[(i * dim_b + k, j * dim_b + k)]).sum();
        }
    }
    Ok(out)
}

/// Traces out the first tensor factor; the counterpart of [`partial_trace_second`].
pub fn partial_trace_first(joint: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix> {
    let dim = dim_a * dim_b;
    if dim_a == 0 || dim_b == 0 || joint.rows != dim || joint.cols != dim {
        return Err(Error::DimensionMismatch {
            context: "partial trace",
            expected: dim,
            found: joint.rows.max(joint.cols),
        });
    }
    let mut out = ComplexMatrix::zeros(dim_b, dim_b);
    for k in 0..dim_b {
        for l in 0..dim_b {
            out[(k, l)] = (0..dim_a).map(|i| joint[(i * dim_b + k, i * dim_b + l)]).sum();
        }
    }
    Ok(out)
}

/// `⟨u|v⟩`, antilinear in the first argument.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(u: &[Complex64]) -> f64 {
    u.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn conjugate_transpose_examples() {
        let m = ComplexMatrix::from_rows(&[vec![c(2.0, 3.0)]]).unwrap();
        assert_eq!(conjugate_transpose(&m)[(0, 0)], c(2.0, -3.0));

        let id = ComplexMatrix::identity(3);
        assert_eq!(conjugate_transpose(&id), id);

        let nil = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(conjugate_transpose(&nil), expected);
    }

    #[test]
    fn eigenvalues_of_simple_matrices() {
        let d = ComplexMatrix::from_diagonal(&[0.8, 0.2]);
        let e = eigenvalues_hermitian(&d).unwrap();
        assert!((e[0] - 0.2).abs() < 1e-15 && (e[1] - 0.8).abs() < 1e-15);

        let p = ComplexMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let e = eigenvalues_hermitian(&p).unwrap();
        assert!(e[0].abs() < 1e-15 && (e[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvalues_reject_bad_input() {
        let r = ComplexMatrix::zeros(2, 3);
        assert!(matches!(eigenvalues_hermitian(&r), Err(Error::NotSquare { .. })));
        let nh = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(eigenvalues_hermitian(&nh), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigenvalues_of_complex_hermitian() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = ComplexMatrix::from_rows(&[vec![c(2.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(2.0, 0.0)]]).unwrap();
        let e = eigenvalues_hermitian(&m).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn cholesky_examples() {
        let id = ComplexMatrix::identity(2);
        assert_eq!(cholesky_psd(&id).unwrap(), id);

        let ones = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let l = cholesky_psd(&ones).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(l.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = ComplexMatrix::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        match cholesky_psd(&m) {
            Err(Error::NotPsd { min_eigenvalue }) => assert!((min_eigenvalue + 1.0).abs() < 1e-12),
            other => panic!("expected NotPsd, got {other:?}"),
        }
    }

    #[test]
    fn partial_trace_of_product_and_bell() {
        let ra = ComplexMatrix::from_rows(&[vec![c(0.7, 0.0), c(0.1, 0.2)], vec![c(0.1, -0.2), c(0.3, 0.0)]]).unwrap();
        let rb = ComplexMatrix::from_diagonal(&[0.25, 0.25, 0.5]).scale(c(2.0, 0.0));
        let joint = ra.kron(&rb);
        let red = partial_trace_second(&joint, 2, 3).unwrap();
        assert!(red.max_abs_diff(&ra.scale(rb.trace())) < 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
        let proj = ComplexMatrix::outer(&bell, &bell);
        let red = partial_trace_second(&proj, 2, 2).unwrap();
        assert!(red.max_abs_diff(&ComplexMatrix::identity(2).scale(c(0.5, 0.0))) < 1e-15);
    }

    #[test]
    fn partial_trace_dimension_checked() {
        let m = ComplexMatrix::identity(5);
        assert!(matches!(partial_trace_second(&m, 2, 3), Err(Error::DimensionMismatch { .. })));
    }
}
