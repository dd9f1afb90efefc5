//! Small dense matrices over a `Scalar` field.

use num_complex::Complex64;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::scalar::{Field, Quaternion, Scalar};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Panics unless `data.len() == rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must equal rows·cols");
        Matrix { rows, cols, data }
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

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.scale(s)).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                let orow = other.row(k);
                let start = i * other.cols;
                for (o, &b) in out.data[start..start + other.cols].iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Top-left `rows × cols` block.
    pub fn block(&self, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(i, j)])
    }

    /// max |a_ij − b_ij|.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (*a - *b).abs()).fold(0.0, f64::max)
    }

    /// ‖A*A − I‖_max.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint().matmul(self).max_abs_diff(&Self::identity(self.cols))
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Fields with commuting multiplication, where the determinant is defined.
pub trait Commutative: Scalar {}
impl Commutative for f64 {}
impl Commutative for Complex64 {}

/// Determinant by LU with partial pivoting.
pub fn determinant<T: Commutative>(m: &Matrix<T>) -> T {
    assert!(m.is_square());
    let n = m.rows;
    let mut a = m.clone();
    let mut det = T::one();
    for c in 0..n {
        let pivot = (c..n).max_by(|&x, &y| a[(x, c)].abs().total_cmp(&a[(y, c)].abs())).unwrap();
        if a[(pivot, c)].abs() == 0.0 {
            return T::zero();
        }
        if pivot != c {
            for j in 0..n {
                a.data.swap(pivot * n + j, c * n + j);
            }
            det = -det;
        }
        let p = a[(c, c)];
        det = det * p;
        let pinv = p.inv();
        for r in c + 1..n {
            let f = a[(r, c)] * pinv;
            for j in c..n {
                let v = a[(c, j)];
                a[(r, j)] -= f * v;
            }
        }
    }
    det
}

/// A matrix tagged with its field.
#[derive(Debug, Clone, PartialEq)]
pub enum DenseMatrix {
    Real(Matrix<f64>),
    Complex(Matrix<Complex64>),
    Quaternion(Matrix<Quaternion>),
}

impl DenseMatrix {
    pub fn field(&self) -> Field {
        match self {
            DenseMatrix::Real(_) => Field::Real,
            DenseMatrix::Complex(_) => Field::Complex,
            DenseMatrix::Quaternion(_) => Field::Quaternion,
        }
    }

    pub fn n_rows(&self) -> usize {
        match self {
            DenseMatrix::Real(m) => m.rows(),
            DenseMatrix::Complex(m) => m.rows(),
            DenseMatrix::Quaternion(m) => m.rows(),
        }
    }

    pub fn n_cols(&self) -> usize {
        match self {
            DenseMatrix::Real(m) => m.cols(),
            DenseMatrix::Complex(m) => m.cols(),
            DenseMatrix::Quaternion(m) => m.cols(),
        }
    }

    /// Real coordinate `part` of entry `(i, j)`.
    pub fn part(&self, i: usize, j: usize, part: usize) -> f64 {
        match self {
            DenseMatrix::Real(m) => m[(i, j)].part(part),
            DenseMatrix::Complex(m) => m[(i, j)].part(part),
            DenseMatrix::Quaternion(m) => m[(i, j)].part(part),
        }
    }

    pub fn as_real(&self) -> Option<&Matrix<f64>> {
        match self {
            DenseMatrix::Real(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_complex(&self) -> Option<&Matrix<Complex64>> {
        match self {
            DenseMatrix::Complex(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_quaternion(&self) -> Option<&Matrix<Quaternion>> {
        match self {
            DenseMatrix::Quaternion(m) => Some(m),
            _ => None,
        }
    }

    pub fn unitarity_defect(&self) -> f64 {
        match self {
            DenseMatrix::Real(m) => m.unitarity_defect(),
            DenseMatrix::Complex(m) => m.unitarity_defect(),
            DenseMatrix::Quaternion(m) => m.unitarity_defect(),
        }
    }

    pub fn scaled(&self, s: f64) -> DenseMatrix {
        match self {
            DenseMatrix::Real(m) => m.scaled(s).into(),
            DenseMatrix::Complex(m) => m.scaled(s).into(),
            DenseMatrix::Quaternion(m) => m.scaled(s).into(),
        }
    }
}

impl From<Matrix<f64>> for DenseMatrix {
    fn from(m: Matrix<f64>) -> Self {
        DenseMatrix::Real(m)
    }
}

impl From<Matrix<Complex64>> for DenseMatrix {
    fn from(m: Matrix<Complex64>) -> Self {
        DenseMatrix::Complex(m)
    }
}

impl From<Matrix<Quaternion>> for DenseMatrix {
    fn from(m: Matrix<Quaternion>) -> Self {
        DenseMatrix::Quaternion(m)
    }
}

/// Row-major nested arrays; non-real entries become arrays of their parts.
impl Serialize for DenseMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (rows, cols, parts) = (self.n_rows(), self.n_cols(), self.field().parts());
        let mut seq = s.serialize_seq(Some(rows))?;
        for i in 0..rows {
            if parts == 1 {
                let row: Vec<f64> = (0..cols).map(|j| self.part(i, j, 0)).collect();
                seq.serialize_element(&row)?;
            } else {
                let row: Vec<Vec<f64>> =
                    (0..cols).map(|j| (0..parts).map(|p| self.part(i, j, p)).collect()).collect();
                seq.serialize_element(&row)?;
            }
        }
        seq.end()
    }
}

/// Upper-triangular matrix; storage is dense but entries below the diagonal stay zero.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperTriangular<T> {
    inner: Matrix<T>,
}

impl<T: Scalar> UpperTriangular<T> {
    /// Zeroes everything strictly below the diagonal.
    pub fn from_matrix(mut m: Matrix<T>) -> Self {
        assert!(m.is_square());
        for i in 0..m.rows() {
            for j in 0..i {
                m[(i, j)] = T::zero();
            }
        }
        UpperTriangular { inner: m }
    }

    pub fn n(&self) -> usize {
        self.inner.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.inner[(i, j)]
    }

    pub fn as_matrix(&self) -> &Matrix<T> {
        &self.inner
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.inner
    }
}

/// Φ(A + jB) = [[A, −B̄], [B, Ā]].
pub fn phi_embedding(q: &Matrix<Quaternion>) -> Matrix<Complex64> {
    let (r, c) = (q.rows(), q.cols());
    let mut out = Matrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let (a, b) = q[(i, j)].to_complex_pair();
            out[(i, j)] = a;
            out[(i, j + c)] = -b.conj();
            out[(i + r, j)] = b;
            out[(i + r, j + c)] = a.conj();
        }
    }
    out
}
