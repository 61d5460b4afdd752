//! Dense and sparse matrix/vector kernels.
//!
//! Scalars are complex double precision throughout; real inputs are promoted
//! on construction. The dense path is authoritative at desk scale (n <= 64);
//! sparse storage exists to express operator locality and for file I/O.

mod eig;
mod lu;
mod sparse;

pub use eig::{eig, eigenvalues, spectral_norm, spectral_radius, Eigen};
pub use lu::LuFactors;
pub use sparse::SparseMatrix;

use crate::error::{Error, Result};
use num_complex::Complex64;

pub type Scalar = Complex64;

pub(crate) const ZERO: Scalar = Scalar::new(0.0, 0.0);
pub(crate) const ONE: Scalar = Scalar::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl std::fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let v = self[(i, j)];
                if v.im == 0.0 {
                    write!(f, "{:>11.4e} ", v.re)?;
                } else {
                    write!(f, "{:.3e}{:+.3e}i ", v.re, v.im)?;
                }
            }
            writeln!(f, "{}", if self.cols > 8 { "..." } else { "" })?;
        }
        if self.rows > 8 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from real row slices, promoting to complex.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(r, c, |i, j| Scalar::new(rows[i][j], 0.0))
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

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    fn dim_err(&self, other: &Self, op: &'static str) -> Error {
        Error::DimensionMismatch {
            op,
            left_rows: self.rows,
            left_cols: self.cols,
            right_rows: other.rows,
            right_cols: other.cols,
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(self.dim_err(other, "matmul"));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &Vector) -> Result<Vector> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                op: "mul_vec",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: v.len(),
                right_cols: 1,
            });
        }
        let mut out = Vector::zeros(self.rows);
        for i in 0..self.rows {
            let mut acc = ZERO;
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(self.dim_err(other, "add"));
        }
        let mut out = self.clone();
        for (o, v) in out.data.iter_mut().zip(&other.data) {
            *o += v;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(self.dim_err(other, "sub"));
        }
        let mut out = self.clone();
        for (o, v) in out.data.iter_mut().zip(&other.data) {
            *o -= v;
        }
        Ok(out)
    }

    pub fn scale(&self, s: Scalar) -> Self {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v *= s;
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(Scalar::new(-1.0, 0.0))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Square matrix power by repeated multiplication (keeps identity checks
    /// in the same arithmetic as the operator builders).
    pub fn pow(&self, k: usize) -> Result<Self> {
        if !self.is_square() {
            return Err(self.dim_err(self, "pow"));
        }
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = out.matmul(self)?;
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector {
            data: (0..self.rows).map(|i| self[(i, j)]).collect(),
        }
    }

    pub fn set_column(&mut self, j: usize, v: &Vector) {
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self[(i, cols[j])])
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self::from_fn(rows.len(), self.cols, |i, j| self[(rows[i], j)])
    }

    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(self.dim_err(other, "hstack"));
        }
        Ok(Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                other[(i, j - self.cols)]
            }
        }))
    }

    /// Solve `self * X = B` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        LuFactors::compute(self)?.solve(rhs)
    }

    pub fn solve_vec(&self, rhs: &Vector) -> Result<Vector> {
        LuFactors::compute(self)?.solve_vec(rhs)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.rows))
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = Scalar;
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        &mut self.data[i * self.cols + j]
    }
}

/// Dense complex column vector.
#[derive(Clone, PartialEq)]
pub struct Vector {
    data: Vec<Scalar>,
}

impl std::fmt::Debug for Vector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Vector[")?;
        for (i, v) in self.data.iter().take(10).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if v.im == 0.0 {
                write!(f, "{:.4e}", v.re)?;
            } else {
                write!(f, "{:.4e}{:+.4e}i", v.re, v.im)?;
            }
        }
        if self.data.len() > 10 {
            write!(f, ", ...")?;
        }
        write!(f, "]")
    }
}

impl Vector {
    pub fn zeros(n: usize) -> Self {
        Vector {
            data: vec![ZERO; n],
        }
    }

    pub fn from_scalars(data: Vec<Scalar>) -> Self {
        Vector { data }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Vector {
            data: values.iter().map(|&v| Scalar::new(v, 0.0)).collect(),
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> Scalar) -> Self {
        Vector {
            data: (0..n).map(|i| f(i)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, "sub", |a, b| a - b)
    }

    fn zip(&self, other: &Self, op: &'static str, f: impl Fn(Scalar, Scalar) -> Scalar) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                op,
                left_rows: self.len(),
                left_cols: 1,
                right_rows: other.len(),
                right_cols: 1,
            });
        }
        Ok(Vector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, s: Scalar) -> Self {
        Vector {
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Vector {
            data: indices.iter().map(|&i| self.data[i]).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Scalar> {
        self.data.iter()
    }

    /// Interpret as an n x 1 matrix.
    pub fn as_column(&self) -> DenseMatrix {
        DenseMatrix {
            rows: self.len(),
            cols: 1,
            data: self.data.clone(),
        }
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = Scalar;
    fn index(&self, i: usize) -> &Scalar {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut Scalar {
        &mut self.data[i]
    }
}

pub fn real(x: f64) -> Scalar {
    Scalar::new(x, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat2(a: f64, b: f64, c: f64, d: f64) -> DenseMatrix {
        DenseMatrix::from_real_rows(&[&[a, b], &[c, d]])
    }

    #[test]
    fn matmul_identity_passes_through() {
        let x = mat2(3.0, -1.5, 0.25, 7.0);
        let i = DenseMatrix::identity(2);
        assert_eq!(i.matmul(&x).unwrap(), x);
        assert_eq!(x.matmul(&i).unwrap(), x);
    }

    #[test]
    fn matmul_zero_annihilates() {
        let x = mat2(3.0, -1.5, 0.25, 7.0);
        let z = DenseMatrix::zeros(2, 2);
        assert_eq!(z.matmul(&x).unwrap(), z);
    }

    #[test]
    fn matmul_hand_case() {
        let a = mat2(2.0, -1.0, -1.0, 2.0);
        let b = mat2(0.5, 0.0, 0.0, 0.5);
        let expect = mat2(1.0, -0.5, -0.5, 1.0);
        assert_eq!(a.matmul(&b).unwrap(), expect);
    }

    #[test]
    fn matmul_dimension_mismatch_reports_shapes() {
        let a = DenseMatrix::zeros(2, 3);
        let b = DenseMatrix::zeros(2, 3);
        match a.matmul(&b) {
            Err(Error::DimensionMismatch {
                left_cols, right_rows, ..
            }) => {
                assert_eq!(left_cols, 3);
                assert_eq!(right_rows, 2);
            }
            other => panic!("expected dimension mismatch, got {other:?}"),
        }
    }

    #[test]
    fn solve_identity_and_scalar_cases() {
        let b = mat2(1.0, 2.0, 3.0, 4.0);
        let i = DenseMatrix::identity(2);
        let x = i.solve(&b).unwrap();
        assert!(x.sub(&b).unwrap().max_abs() < 1e-15);

        let two_i = i.scale(real(2.0));
        let x = two_i.solve(&i).unwrap();
        assert!(x.sub(&i.scale(real(0.5))).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn solve_hand_case_substitutes_back() {
        let a = mat2(2.0, -1.0, -1.0, 2.0);
        let b = Vector::from_real(&[1.0, 1.0]);
        let x = a.solve_vec(&b).unwrap();
        assert!(x.sub(&Vector::from_real(&[1.0, 1.0])).unwrap().norm() < 1e-14);
        let back = a.mul_vec(&x).unwrap();
        assert!(back.sub(&b).unwrap().norm() < 1e-14);
    }

    #[test]
    fn solve_singular_names_pivot() {
        let a = mat2(1.0, 2.0, 2.0, 4.0);
        match a.solve(&DenseMatrix::identity(2)) {
            Err(Error::Singular { pivot_index }) => assert_eq!(pivot_index, 1),
            other => panic!("expected singularity, got {other:?}"),
        }
    }

    #[test]
    fn inverse_round_trip_various_sizes() {
        for &n in &[3usize, 8, 17, 64] {
            // deterministic full-rank test matrix: diagonally dominant
            let a = DenseMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    real(4.0 + (i as f64) * 0.1)
                } else {
                    real(((i * 31 + j * 17) % 7) as f64 / 7.0 - 0.5)
                }
            });
            let inv = a.inverse().unwrap();
            let eye = a.matmul(&inv).unwrap();
            let resid = eye.sub(&DenseMatrix::identity(n)).unwrap().frobenius_norm();
            assert!(resid < 1e-9, "n={n} resid={resid:.3e}");
        }
    }

    #[test]
    fn hstack_and_select() {
        let a = mat2(1.0, 2.0, 3.0, 4.0);
        let b = mat2(5.0, 6.0, 7.0, 8.0);
        let h = a.hstack(&b).unwrap();
        assert_eq!(h.cols(), 4);
        assert_eq!(h[(1, 2)], real(7.0));
        let sel = h.select_columns(&[0, 3]);
        assert_eq!(sel[(0, 1)], real(6.0));
    }
}
