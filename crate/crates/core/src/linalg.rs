//! Small dense matrix type with a cached nonzero pattern.
//!
//! The spectrum regressors are very sparse (each rectangular basis column has
//! only a couple of nonzero rows), and the Monte-Carlo loop multiplies by the
//! same matrix millions of times. The pattern is scanned once at construction
//! so matrix-vector products only touch nonzero entries.

use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("ragged rows: row {row} has {found} entries, expected {expected}")]
    RaggedRows {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("dimension mismatch: {context} expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
    /// Flattened per-row nonzero column indices.
    nz_cols: Vec<u32>,
    /// Row r's nonzero columns live in nz_cols[nz_ptr[r]..nz_ptr[r + 1]].
    nz_ptr: Vec<u32>,
}

impl<S: Scalar> Mat<S> {
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self, LinalgError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(LinalgError::RaggedRows {
                    row: i,
                    found: row.len(),
                    expected: n_cols,
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self::from_data(n_rows, n_cols, data))
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self::from_data(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_data(rows, cols, vec![S::zero(); rows * cols])
    }

    fn from_data(rows: usize, cols: usize, data: Vec<S>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        let mut nz_cols = Vec::new();
        let mut nz_ptr = Vec::with_capacity(rows + 1);
        nz_ptr.push(0);
        for r in 0..rows {
            for c in 0..cols {
                if data[r * cols + c] != S::zero() {
                    nz_cols.push(c as u32);
                }
            }
            nz_ptr.push(nz_cols.len() as u32);
        }
        Self {
            rows,
            cols,
            data,
            nz_cols,
            nz_ptr,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> S {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn nz_row(&self, r: usize) -> &[u32] {
        &self.nz_cols[self.nz_ptr[r] as usize..self.nz_ptr[r + 1] as usize]
    }

    fn check_len(&self, len: usize, dim: usize, context: &'static str) -> Result<(), LinalgError> {
        if len != dim {
            return Err(LinalgError::DimensionMismatch {
                context,
                expected: dim,
                found: len,
            });
        }
        Ok(())
    }

    /// y = A x.
    pub fn mul_vec(&self, x: &[S]) -> Result<Vec<S>, LinalgError> {
        let mut y = vec![S::zero(); self.rows];
        self.mul_vec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn mul_vec_into(&self, x: &[S], y: &mut [S]) -> Result<(), LinalgError> {
        self.check_len(x.len(), self.cols, "mul_vec input")?;
        self.check_len(y.len(), self.rows, "mul_vec output")?;
        for r in 0..self.rows {
            let base = r * self.cols;
            let mut acc = S::zero();
            for &c in self.nz_row(r) {
                let c = c as usize;
                acc += self.data[base + c] * x[c];
            }
            y[r] = acc;
        }
        Ok(())
    }

    /// y = A^T v.
    pub fn trans_mul_vec(&self, v: &[S]) -> Result<Vec<S>, LinalgError> {
        let mut y = vec![S::zero(); self.cols];
        self.trans_mul_vec_into(v, &mut y)?;
        Ok(y)
    }

    pub fn trans_mul_vec_into(&self, v: &[S], y: &mut [S]) -> Result<(), LinalgError> {
        self.check_len(v.len(), self.rows, "trans_mul_vec input")?;
        self.check_len(y.len(), self.cols, "trans_mul_vec output")?;
        y.fill(S::zero());
        for r in 0..self.rows {
            let base = r * self.cols;
            let vr = v[r];
            for &c in self.nz_row(r) {
                let c = c as usize;
                y[c] += self.data[base + c] * vr;
            }
        }
        Ok(())
    }

    /// y = A^H v (conjugate transpose).
    pub fn herm_mul_vec(&self, v: &[S]) -> Result<Vec<S>, LinalgError> {
        let mut y = vec![S::zero(); self.cols];
        self.herm_mul_vec_into(v, &mut y)?;
        Ok(y)
    }

    pub fn herm_mul_vec_into(&self, v: &[S], y: &mut [S]) -> Result<(), LinalgError> {
        self.check_len(v.len(), self.rows, "herm_mul_vec input")?;
        self.check_len(y.len(), self.cols, "herm_mul_vec output")?;
        y.fill(S::zero());
        for r in 0..self.rows {
            let base = r * self.cols;
            let vr = v[r];
            for &c in self.nz_row(r) {
                let c = c as usize;
                y[c] += self.data[base + c].conj() * vr;
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn mul_vec_matches_dense_definition() {
        let a = Mat::from_rows(vec![vec![1.0, 0.0, 2.0], vec![0.0, 3.0, 0.0]]).unwrap();
        assert_eq!(a.mul_vec(&[1.0, 1.0, 1.0]).unwrap(), vec![3.0, 3.0]);
        assert_eq!(a.trans_mul_vec(&[1.0, 2.0]).unwrap(), vec![1.0, 6.0, 2.0]);
    }

    #[test]
    fn herm_mul_conjugates_entries() {
        let a = Mat::from_rows(vec![vec![Complex64::new(0.0, 1.0), Complex64::new(2.0, 0.0)]])
            .unwrap();
        let y = a.herm_mul_vec(&[Complex64::new(1.0, 0.0)]).unwrap();
        assert_eq!(y[0], Complex64::new(0.0, -1.0));
        assert_eq!(y[1], Complex64::new(2.0, 0.0));
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = Mat::from_rows(vec![vec![1.0, 2.0], vec![3.0]]).unwrap_err();
        assert!(matches!(err, LinalgError::RaggedRows { row: 1, .. }));
    }

    #[test]
    fn dimension_mismatch_reported() {
        let a = Mat::<f64>::zeros(2, 3);
        assert!(a.mul_vec(&[1.0, 2.0]).is_err());
        assert!(a.trans_mul_vec(&[1.0]).is_err());
    }

    #[test]
    fn sparse_path_agrees_with_full_scan() {
        let a = Mat::from_fn(7, 5, |r, c| if (r + c) % 3 == 0 { (r * 5 + c) as f64 } else { 0.0 });
        let x: Vec<f64> = (0..5).map(|i| 0.5 + i as f64).collect();
        let y = a.mul_vec(&x).unwrap();
        for r in 0..7 {
            let dense: f64 = (0..5).map(|c| a.get(r, c) * x[c]).sum();
            assert_eq!(y[r], dense);
        }
    }
}
