//! Dense column-major matrix storage and sorted spectrum containers.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense real matrix, 64-bit IEEE-754, column-major.
///
/// Constructors reject non-finite entries. The row count is always positive;
/// a zero column count is allowed and represents an empty basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    inner: DMatrix<f64>,
}

impl Matrix {
    /// Builds a matrix from column-major data, validating length and finiteness.
    pub fn from_column_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 {
            return Err(Error::InvalidArgument("matrix row count must be positive".into()));
        }
        let expected = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::InvalidArgument("matrix dimensions overflow".into()))?;
        if data.len() != expected {
            return Err(Error::DataLength {
                rows,
                cols,
                len: data.len(),
                expected,
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            inner: DMatrix::from_column_slice(rows, cols, &data),
        })
    }

    /// All-zero matrix. Panics if `rows` is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0, "matrix row count must be positive");
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "matrix row count must be positive");
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    /// Builds a matrix entry by entry. Panics on zero rows or a non-finite entry.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0, "matrix row count must be positive");
        let inner = DMatrix::from_fn(rows, cols, |i, j| {
            let v = f(i, j);
            assert!(v.is_finite(), "non-finite entry at ({i}, {j})");
            v
        });
        Self { inner }
    }

    pub(crate) fn from_dmatrix(inner: DMatrix<f64>) -> Self {
        debug_assert!(inner.nrows() > 0);
        debug_assert!(inner.iter().all(|v| v.is_finite()));
        Self { inner }
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner[(row, col)]
    }

    /// Column-major view of the data.
    pub fn as_slice(&self) -> &[f64] {
        self.inner.as_slice()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    /// Sum of squared entries.
    pub fn frobenius_sq(&self) -> f64 {
        self.inner.iter().map(|v| v * v).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_sq().sqrt()
    }

    /// Horizontal concatenation; all parts must share the row count.
    pub fn hcat(parts: &[&Matrix]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or(Error::EmptyInput("hcat needs at least one matrix"))?;
        let rows = first.rows();
        let total_cols: usize = parts.iter().map(|p| p.cols()).sum();
        let mut data = Vec::with_capacity(rows * total_cols);
        for part in parts {
            if part.rows() != rows {
                return Err(Error::DimensionMismatch {
                    context: "hcat",
                    expected: rows,
                    found: part.rows(),
                });
            }
            data.extend_from_slice(part.as_slice());
        }
        Ok(Self {
            inner: DMatrix::from_column_slice(rows, total_cols, &data),
        })
    }

    /// Contiguous row block `[start, start + len)` as an owned matrix.
    pub fn row_block(&self, start: usize, len: usize) -> Matrix {
        assert!(start + len <= self.rows(), "row block out of range");
        Self::from_dmatrix(self.inner.rows(start, len).into_owned())
    }

    pub fn transpose(&self) -> Matrix {
        Self::from_dmatrix(self.inner.transpose())
    }
}

/// Non-increasing list of non-negative reals: singular values or
/// square roots of eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumView {
    values: Vec<f64>,
}

impl SpectrumView {
    /// Validates ordering and non-negativity.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for pair in values.windows(2) {
            if pair[1] > pair[0] {
                return Err(Error::InvalidArgument(
                    "spectrum values must be non-increasing".into(),
                ));
            }
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "spectrum values must be finite and non-negative".into(),
            ));
        }
        Ok(Self { values })
    }

    pub(crate) fn from_sorted_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(values.windows(2).all(|p| p[0] >= p[1]));
        debug_assert!(values.iter().all(|v| *v >= 0.0));
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at position `j` (0-based), zero beyond the stored length.
    pub fn get(&self, j: usize) -> f64 {
        self.values.get(j).copied().unwrap_or(0.0)
    }

    /// Sum of the squares of the leading `r` values.
    pub fn head_energy_sq(&self, r: usize) -> f64 {
        self.values.iter().take(r).map(|v| v * v).sum()
    }

    /// Sum of the squares of all values.
    pub fn total_energy_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_column_major_validates_length() {
        let err = Matrix::from_column_major(2, 2, vec![1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::DataLength { expected: 4, len: 3, .. }));
    }

    #[test]
    fn from_column_major_rejects_non_finite() {
        let err = Matrix::from_column_major(2, 1, vec![1.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index: 1 }));
        let err = Matrix::from_column_major(2, 1, vec![f64::INFINITY, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index: 0 }));
    }

    #[test]
    fn column_major_layout() {
        let m = Matrix::from_column_major(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 1), 4.0);
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(Matrix::identity(3).frobenius_sq(), 3.0);
        assert_eq!(Matrix::zeros(4, 2).frobenius_sq(), 0.0);
        let m = Matrix::from_column_major(2, 2, vec![1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!(m.frobenius_sq(), 30.0);
    }

    #[test]
    fn hcat_appends_columns() {
        let a = Matrix::from_column_major(2, 1, vec![1.0, 2.0]).unwrap();
        let b = Matrix::from_column_major(2, 2, vec![3.0, 4.0, 5.0, 6.0]).unwrap();
        let c = Matrix::hcat(&[&a, &b]).unwrap();
        assert_eq!(c.cols(), 3);
        assert_eq!(c.as_slice(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn hcat_rejects_row_mismatch() {
        let a = Matrix::zeros(2, 1);
        let b = Matrix::zeros(3, 1);
        assert!(Matrix::hcat(&[&a, &b]).is_err());
    }

    #[test]
    fn spectrum_validation() {
        assert!(SpectrumView::new(vec![3.0, 2.0, 2.0, 0.0]).is_ok());
        assert!(SpectrumView::new(vec![1.0, 2.0]).is_err());
        assert!(SpectrumView::new(vec![1.0, -0.5]).is_err());
    }

    #[test]
    fn spectrum_padding_and_sums() {
        let s = SpectrumView::new(vec![3.0, 1.0]).unwrap();
        assert_eq!(s.get(0), 3.0);
        assert_eq!(s.get(5), 0.0);
        assert_eq!(s.head_energy_sq(1), 9.0);
        assert_eq!(s.head_energy_sq(10), 10.0);
    }
}
