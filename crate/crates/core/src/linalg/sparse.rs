//! Compressed sparse row storage for problem matrices.

use super::{DenseMatrix, Scalar, Vector, ZERO};
use crate::error::{Error, Result};

/// CSR matrix with strictly increasing column indices per row and no
/// explicitly stored zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Scalar>,
}

impl SparseMatrix {
    /// Assemble from coordinate triplets. Duplicates are summed; exact zeros
    /// are dropped after assembly.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, Scalar)],
    ) -> Result<Self> {
        for &(i, j, _) in triplets {
            if i >= rows {
                return Err(Error::IndexOutOfRange {
                    what: "row index",
                    got: i,
                    limit: rows,
                });
            }
            if j >= cols {
                return Err(Error::IndexOutOfRange {
                    what: "column index",
                    got: j,
                    limit: cols,
                });
            }
        }
        let mut per_row: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); rows];
        for &(i, j, v) in triplets {
            per_row[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for entries in per_row.iter_mut() {
            entries.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, Scalar)> = Vec::with_capacity(entries.len());
            for &(j, v) in entries.iter() {
                match merged.last_mut() {
                    Some((last_j, last_v)) if *last_j == j => *last_v += v,
                    _ => merged.push((j, v)),
                }
            }
            for (j, v) in merged {
                if v != ZERO {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut trips = Vec::new();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if m[(i, j)] != ZERO {
                    trips.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.rows(), m.cols(), &trips).expect("indices in range by construction")
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
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

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Scalar)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .zip(&self.values[span])
            .map(|(&j, &v)| (j, v))
    }

    /// All stored entries as (row, col, value).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Scalar)> + '_ {
        (0..self.rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn mul_vec(&self, v: &Vector) -> Result<Vector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "sparse mul_vec",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: v.len(),
                right_cols: 1,
            });
        }
        let mut out = Vector::zeros(self.rows);
        for i in 0..self.rows {
            let mut acc = ZERO;
            for (j, a) in self.row(i) {
                acc += a * v[j];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    pub fn is_symmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let dense = self.to_dense();
        for i in 0..self.rows {
            for j in 0..i {
                if dense[(i, j)] != dense[(j, i)] {
                    return false;
                }
            }
        }
        true
    }
}
