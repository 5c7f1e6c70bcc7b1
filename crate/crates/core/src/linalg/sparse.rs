use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compressed sparse column matrix.
///
/// Row indices are strictly increasing inside each column and no explicit
/// zeros are stored; every constructor enforces both.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrixCSC {
    n_rows: usize,
    n_cols: usize,
    col_starts: Vec<usize>,
    row_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrixCSC {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        SparseMatrixCSC {
            n_rows,
            n_cols,
            col_starts: vec![0; n_cols + 1],
            row_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrixCSC {
            n_rows: n,
            n_cols: n,
            col_starts: (0..=n).collect(),
            row_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds from raw CSC arrays, validating every structural invariant.
    pub fn from_csc(
        n_rows: usize,
        n_cols: usize,
        col_starts: Vec<usize>,
        row_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if col_starts.len() != n_cols + 1 {
            return Err(Error::DimensionMismatch {
                expected: n_cols + 1,
                got: col_starts.len(),
            });
        }
        if row_indices.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: values.len(),
                got: row_indices.len(),
            });
        }
        if col_starts[0] != 0 || col_starts[n_cols] != values.len() {
            return Err(Error::ContractViolation(
                "col_starts must begin at 0 and end at nnz".into(),
            ));
        }
        for j in 0..n_cols {
            let (lo, hi) = (col_starts[j], col_starts[j + 1]);
            if lo > hi {
                return Err(Error::ContractViolation(
                    "col_starts must be nondecreasing".into(),
                ));
            }
            for p in lo..hi {
                if row_indices[p] >= n_rows {
                    return Err(Error::ContractViolation(format!(
                        "row index {} out of range in column {}",
                        row_indices[p], j
                    )));
                }
                if p > lo && row_indices[p] <= row_indices[p - 1] {
                    return Err(Error::ContractViolation(format!(
                        "row indices not strictly increasing in column {}",
                        j
                    )));
                }
                if values[p] == 0.0 {
                    return Err(Error::ContractViolation("explicit zero stored".into()));
                }
            }
        }
        Ok(SparseMatrixCSC {
            n_rows,
            n_cols,
            col_starts,
            row_indices,
            values,
        })
    }

    /// Builds from (row, col, value) triplets. Duplicates are summed and zeros dropped.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= n_rows || j >= n_cols {
                return Err(Error::ContractViolation(format!(
                    "triplet ({}, {}) outside {}x{}",
                    i, j, n_rows, n_cols
                )));
            }
            sorted.push((j, i, v));
        }
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut col_starts = vec![0usize; n_cols + 1];
        let mut row_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        let mut col_of: Vec<usize> = Vec::with_capacity(sorted.len());
        for (j, i, v) in sorted {
            if last == Some((j, i)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_indices.push(i);
                values.push(v);
                col_of.push(j);
                last = Some((j, i));
            }
        }
        let mut keep_rows = Vec::with_capacity(values.len());
        let mut keep_vals = Vec::with_capacity(values.len());
        for ((i, v), j) in row_indices.into_iter().zip(values).zip(col_of) {
            if v != 0.0 {
                keep_rows.push(i);
                keep_vals.push(v);
                col_starts[j + 1] += 1;
            }
        }
        for j in 0..n_cols {
            col_starts[j + 1] += col_starts[j];
        }
        Ok(SparseMatrixCSC {
            n_rows,
            n_cols,
            col_starts,
            row_indices: keep_rows,
            values: keep_vals,
        })
    }

    /// Row-major dense input.
    pub fn from_dense_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut trip = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    got: r.len(),
                });
            }
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n_rows, n_cols, &trip)
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        let mut trip = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, j)];
                if v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), &trip).expect("in-range triplets")
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        for j in 0..self.n_cols {
            for p in self.col_starts[j]..self.col_starts[j + 1] {
                m[(self.row_indices[p], j)] = self.values[p];
            }
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_starts(&self) -> &[usize] {
        &self.col_starts
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.row_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates `(row, value)` over column `j`.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.col_starts[j], self.col_starts[j + 1]);
        self.row_indices[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    /// COO triplets in column-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for j in 0..self.n_cols {
            for (i, v) in self.column(j) {
                out.push((i, j, v));
            }
        }
        out
    }

    /// `A x`, accumulated column by column.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                got: x.len(),
            });
        }
        let mut out = vec![0.0; self.n_rows];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    /// Unchecked `out = A x`; lengths are the caller's responsibility.
    pub(crate) fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for p in self.col_starts[j]..self.col_starts[j + 1] {
                out[self.row_indices[p]] += self.values[p] * xj;
            }
        }
    }

    /// `Aᵀ y`.
    pub fn matvec_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.n_rows {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows,
                got: y.len(),
            });
        }
        let mut out = vec![0.0; self.n_cols];
        self.matvec_transpose_into(y, &mut out);
        Ok(out)
    }

    pub(crate) fn matvec_transpose_into(&self, y: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for p in self.col_starts[j]..self.col_starts[j + 1] {
                acc += self.values[p] * y[self.row_indices[p]];
            }
            *o = acc;
        }
    }

    pub fn transpose(&self) -> SparseMatrixCSC {
        let trip: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.n_cols, self.n_rows, &trip).expect("in-range triplets")
    }

    /// Multiplies every stored value by `s`.
    pub fn scaled(&self, s: f64) -> SparseMatrixCSC {
        if s == 0.0 {
            return Self::zeros(self.n_rows, self.n_cols);
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `diag(d) * A`.
    pub fn scale_rows(&self, d: &[f64]) -> Result<SparseMatrixCSC> {
        if d.len() != self.n_rows {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows,
                got: d.len(),
            });
        }
        let trip: Vec<_> = self
            .triplets()
            .into_iter()
            .map(|(i, j, v)| (i, j, v * d[i]))
            .collect();
        Self::from_triplets(self.n_rows, self.n_cols, &trip)
    }

    /// Euclidean norm of every row.
    pub fn row_norms(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_rows];
        for (&i, &v) in self.row_indices.iter().zip(&self.values) {
            acc[i] += v * v;
        }
        acc.into_iter().map(f64::sqrt).collect()
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row_lp_gamma() -> SparseMatrixCSC {
        SparseMatrixCSC::from_dense_rows(&[vec![0.7071, 0.7071]]).unwrap()
    }

    #[test]
    fn matvec_row() {
        let a = row_lp_gamma();
        let out = a.matvec(&[0.0, 1.4142]).unwrap();
        assert!((out[0] - 0.7071 * 1.4142).abs() < 1e-12);
        assert!((out[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn matvec_zero_and_identity() {
        let z = SparseMatrixCSC::zeros(3, 4);
        assert_eq!(z.matvec(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![0.0; 3]);
        assert_eq!(z.matvec_transpose(&[1.0, 2.0, 3.0]).unwrap(), vec![0.0; 4]);
        let i = SparseMatrixCSC::identity(3);
        assert_eq!(i.matvec(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(i.matvec_transpose(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn matvec_transpose_row() {
        let a = row_lp_gamma();
        assert_eq!(a.matvec_transpose(&[2.0]).unwrap(), vec![1.4142, 1.4142]);
    }

    #[test]
    fn dimension_mismatch() {
        let a = row_lp_gamma();
        assert!(matches!(
            a.matvec(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(a.matvec_transpose(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let a = SparseMatrixCSC::from_triplets(
            2,
            2,
            &[(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0), (1, 1, -1.0), (1, 0, 0.0)],
        )
        .unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.values(), &[3.0]);
        assert_eq!(a.col_starts(), &[0, 1, 1]);
    }

    #[test]
    fn from_csc_rejects_bad_structure() {
        assert!(SparseMatrixCSC::from_csc(2, 1, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrixCSC::from_csc(2, 1, vec![0, 1], vec![0], vec![0.0]).is_err());
        assert!(SparseMatrixCSC::from_csc(2, 1, vec![0, 1], vec![2], vec![1.0]).is_err());
        assert!(SparseMatrixCSC::from_csc(2, 1, vec![0, 1], vec![1], vec![1.0]).is_ok());
    }

    #[test]
    fn transpose_round_trip() {
        let a = SparseMatrixCSC::from_dense_rows(&[vec![1.0, 0.0, 2.0], vec![0.0, 3.0, 4.0]])
            .unwrap();
        assert_eq!(a.transpose().transpose(), a);
        assert_eq!(a.transpose().to_dmatrix(), a.to_dmatrix().transpose());
    }
}
