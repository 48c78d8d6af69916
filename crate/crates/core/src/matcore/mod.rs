//! Dense complex matrices and the numerical primitives the rest of the crate
//! is built on.
//!
//! [`ComplexMatrix`] wraps a column-major `nalgebra` matrix but serializes
//! row-major as `{"rows": n, "cols": n, "data": [[re, im], ...]}`.

mod decomp;
mod tolerance;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{OpsError, Result};

pub use decomp::{
    eigenvalues, hermitian_eigen, null_space, numerical_rank, ordered_schur, psd_sqrt,
    pseudo_inverse, singular_values, spectral_split, SpectralSplit,
};
pub use tolerance::ToleranceConfig;

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Clone, PartialEq)]
#[derive(Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix(DMatrix<Complex64>);

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = OpsError;

    fn try_from(value: MatrixJson) -> Result<Self> {
        if value.rows == 0 || value.cols == 0 {
            return Err(OpsError::InvalidMatrix(format!(
                "rows and cols must be positive, got {}x{}",
                value.rows, value.cols
            )));
        }
        let entries = value.data.iter().map(|&[re, im]| c(re, im)).collect();
        ComplexMatrix::new(value.rows, value.cols, entries)
    }
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            data: m.row_major().into_iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting length mismatches and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(OpsError::InvalidMatrix(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(OpsError::InvalidMatrix(format!(
                "non-finite entry at row {}, col {}",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(ComplexMatrix(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(OpsError::InvalidMatrix("ragged rows".into()));
        }
        Self::new(n, m, rows.concat())
    }

    /// Convenience constructor for real matrices.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| c(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(OpsError::InvalidMatrix("non-finite entry".into()));
        }
        Ok(ComplexMatrix(m))
    }

    pub(crate) fn wrap(m: DMatrix<Complex64>) -> Self {
        ComplexMatrix(m)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        ComplexMatrix(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix(DMatrix::identity(n, n))
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { Complex64::ZERO })
    }

    pub fn real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| c(x, 0.0)).collect();
        Self::diagonal(&d)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Returns the dimension of a square matrix.
    pub fn dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(OpsError::NotSquare { rows: self.rows(), cols: self.cols() })
        }
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn from_columns(rows: usize, columns: &[Vec<Complex64>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        ComplexMatrix(self.0.transpose())
    }

    /// Entrywise complex conjugate.
    pub fn conjugate(&self) -> Self {
        ComplexMatrix(self.0.map(|z| z.conj()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexMatrix(self.0.map(|z| z * s))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        ComplexMatrix(self.0.map(|z| z * s))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.diagonal().iter().sum()
    }

    /// Dimension-checked product.
    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols() != rhs.rows() {
            return Err(OpsError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(self * rhs)
    }

    /// Integer power by repeated squaring. `pow(0)` is the identity.
    pub fn pow(&self, k: u32) -> ComplexMatrix {
        debug_assert!(self.is_square());
        let mut result = ComplexMatrix::identity(self.rows());
        let mut base = self.clone();
        let mut e = k;
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                result = if first { base.clone() } else { &result * &base };
                first = false;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        singular_values(self).first().copied().unwrap_or(0.0)
    }

    /// Smallest singular value of a square matrix.
    pub fn min_singular_value(&self) -> f64 {
        singular_values(self).last().copied().unwrap_or(0.0)
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(eigenvalues(self)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub fn inverse(&self) -> Result<ComplexMatrix> {
        self.dim()?;
        self.0.clone().try_inverse().map(ComplexMatrix).ok_or(OpsError::Singular)
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> ComplexMatrix {
        ComplexMatrix(self.0.view((r0, c0), (nr, nc)).into_owned())
    }

    pub fn hstack(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.rows() != rhs.rows() {
            return Err(OpsError::DimensionMismatch(format!(
                "hstack of {} rows with {} rows",
                self.rows(),
                rhs.rows()
            )));
        }
        let k = self.cols();
        Ok(Self::from_fn(self.rows(), k + rhs.cols(), |i, j| {
            if j < k { self[(i, j)] } else { rhs[(i, j - k)] }
        }))
    }

    pub fn vstack(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols() != rhs.cols() {
            return Err(OpsError::DimensionMismatch(format!(
                "vstack of {} cols with {} cols",
                self.cols(),
                rhs.cols()
            )));
        }
        let k = self.rows();
        Ok(Self::from_fn(k + rhs.rows(), self.cols(), |i, j| {
            if i < k { self[(i, j)] } else { rhs[(i - k, j)] }
        }))
    }

    /// Block-diagonal direct sum `self ⊕ rhs`.
    pub fn direct_sum(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let (r, cc) = (self.rows(), self.cols());
        Self::from_fn(r + rhs.rows(), cc + rhs.cols(), |i, j| {
            if i < r && j < cc {
                self[(i, j)]
            } else if i >= r && j >= cc {
                rhs[(i - r, j - cc)]
            } else {
                Complex64::ZERO
            }
        })
    }

    /// Hermitian defect `‖M − M*‖_F`.
    pub fn hermitian_residual(&self) -> f64 {
        (self - &self.adjoint()).frobenius_norm()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Returns an error unless both matrices are square with equal size.
pub(crate) fn ensure_same_square(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<usize> {
    let n = a.dim()?;
    let m = b.dim()?;
    if n != m {
        return Err(OpsError::DimensionMismatch(format!("{n}x{n} vs {m}x{m}")));
    }
    Ok(n)
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut Complex64 {
        &mut self.0[idx]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix({}x{}) [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "\n  ")?;
            for j in 0..self.cols() {
                let z = self[(i, j)];
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
        }
        write!(f, "\n]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jordan2() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn adjoint_examples() {
        let m = ComplexMatrix::new(1, 1, vec![c(0.0, 1.0)]).unwrap();
        assert_eq!(m.adjoint()[(0, 0)], c(0.0, -1.0));
        assert_eq!(ComplexMatrix::identity(3).adjoint(), ComplexMatrix::identity(3));
        let expected = ComplexMatrix::from_real_rows(&[[1.0, 0.0], [1.0, 1.0]]).unwrap();
        assert_eq!(jordan2().adjoint(), expected);
        assert_eq!(jordan2().adjoint().adjoint(), jordan2());
    }

    #[test]
    fn operator_norm_examples() {
        assert!((ComplexMatrix::identity(3).operator_norm() - 1.0).abs() < 1e-14);
        assert!((ComplexMatrix::real_diagonal(&[3.0, 1.0]).operator_norm() - 3.0).abs() < 1e-14);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((jordan2().operator_norm() - golden).abs() < 1e-14);
    }

    #[test]
    fn spectral_radius_examples() {
        assert!((jordan2().spectral_radius().unwrap() - 1.0).abs() < 1e-14);
        let d = ComplexMatrix::diagonal(&[c(0.5, 0.0), c(0.0, 2.0)]);
        assert!((d.spectral_radius().unwrap() - 2.0).abs() < 1e-14);
        let nil = ComplexMatrix::from_real_rows(&[[0.0, 3.0, 1.0], [0.0, 0.0, 2.0], [0.0, 0.0, 0.0]])
            .unwrap();
        assert!(nil.spectral_radius().unwrap() < 1e-12);
        assert!(matches!(
            ComplexMatrix::zeros(2, 3).spectral_radius(),
            Err(OpsError::NotSquare { .. })
        ));
    }

    #[test]
    fn pow_matches_repeated_product() {
        let j = jordan2();
        let p = j.pow(5);
        assert_eq!(p[(0, 1)], c(5.0, 0.0));
        assert_eq!(j.pow(0), ComplexMatrix::identity(2));
        assert_eq!(j.pow(1), j);
    }

    #[test]
    fn json_rejects_bad_input() {
        assert!(ComplexMatrix::from_json(r#"{"rows":2,"cols":2,"data":[[1,0],[0,0],[0,0]]}"#).is_err());
        assert!(ComplexMatrix::from_json(r#"{"rows":0,"cols":0,"data":[]}"#).is_err());
        assert!(ComplexMatrix::from_json(r#"{"rows":1,"cols":1,"data":[[1e999,0]]}"#).is_err());
        assert!(ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
        let m = ComplexMatrix::from_json(r#"{"rows":1,"cols":2,"data":[[1,2],[3,-4]]}"#).unwrap();
        assert_eq!(m[(0, 1)], c(3.0, -4.0));
    }

    #[test]
    fn json_is_row_major() {
        let m = ComplexMatrix::from_real_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(m.to_json(), r#"{"rows":2,"cols":2,"data":[[1.0,0.0],[2.0,0.0],[3.0,0.0],[4.0,0.0]]}"#);
    }
}
