//! LU factorization with partial pivoting.

use super::{DenseMatrix, Scalar, Vector, ZERO};
use crate::error::{Error, Result};

/// Relative pivot threshold below which a matrix is reported singular.
const PIVOT_RTOL: f64 = 1e-14;

/// Packed LU factors of a square matrix, `P A = L U`.
pub struct LuFactors {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn compute(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                op: "lu",
                left_rows: a.rows(),
                left_cols: a.cols(),
                right_rows: a.rows(),
                right_cols: a.rows(),
            });
        }
        let n = a.rows();
        let scale = a.max_abs();
        let threshold = PIVOT_RTOL * if scale > 0.0 { scale } else { 1.0 };
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut best = k;
            let mut best_abs = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best_abs {
                    best = i;
                    best_abs = v;
                }
            }
            if best_abs <= threshold {
                return Err(Error::Singular { pivot_index: k });
            }
            if best != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(best, j)];
                    lu[(best, j)] = tmp;
                }
                perm.swap(k, best);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let sub = factor * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
            }
        }
        Ok(LuFactors { lu, perm })
    }

    pub fn solve(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.lu.rows();
        if rhs.rows() != n {
            return Err(Error::DimensionMismatch {
                op: "lu_solve",
                left_rows: n,
                left_cols: n,
                right_rows: rhs.rows(),
                right_cols: rhs.cols(),
            });
        }
        let mut x = DenseMatrix::zeros(n, rhs.cols());
        let mut col = Vector::zeros(n);
        for j in 0..rhs.cols() {
            for i in 0..n {
                col[i] = rhs[(self.perm[i], j)];
            }
            self.solve_in_place(&mut col);
            for i in 0..n {
                x[(i, j)] = col[i];
            }
        }
        if !x.is_finite() {
            return Err(Error::NonFinite { op: "lu_solve" });
        }
        Ok(x)
    }

    pub fn solve_vec(&self, rhs: &Vector) -> Result<Vector> {
        let n = self.lu.rows();
        if rhs.len() != n {
            return Err(Error::DimensionMismatch {
                op: "lu_solve",
                left_rows: n,
                left_cols: n,
                right_rows: rhs.len(),
                right_cols: 1,
            });
        }
        let mut col = Vector::from_fn(n, |i| rhs[self.perm[i]]);
        self.solve_in_place(&mut col);
        if !col.is_finite() {
            return Err(Error::NonFinite { op: "lu_solve" });
        }
        Ok(col)
    }

    /// Forward then backward substitution on an already permuted vector.
    fn solve_in_place(&self, y: &mut Vector) {
        let n = self.lu.rows();
        for i in 1..n {
            let mut acc = y[i];
            for k in 0..i {
                acc -= self.lu[(i, k)] * y[k];
            }
            y[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for k in i + 1..n {
                acc -= self.lu[(i, k)] * y[k];
            }
            y[i] = acc / self.lu[(i, i)];
        }
    }

    /// Product of U's diagonal with the permutation sign; used by tests.
    pub fn determinant(&self) -> Scalar {
        let n = self.lu.rows();
        let mut visited = vec![false; n];
        let mut sign = 1.0;
        for start in 0..n {
            if visited[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !visited[i] {
                visited[i] = true;
                i = self.perm[i];
                len += 1;
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        let mut det = Scalar::new(sign, 0.0);
        for i in 0..n {
            det *= self.lu[(i, i)];
        }
        det
    }
}
