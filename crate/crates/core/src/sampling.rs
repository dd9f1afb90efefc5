//! Gaussian, Haar, Gaussian-maker and over-Gaussian samplers.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::group::{Family, GroupSpec};
use crate::matrix::{determinant, DenseMatrix, Matrix, UpperTriangular};
use crate::scalar::{Field, Quaternion, Scalar};

/// Residual norms below this mark the input as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-12;

const HAAR_ATTEMPTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Rows,
    Columns,
}

/// Per-field determinant correction and last GMD diagonal entry.
pub trait GroupField: Scalar {
    /// Rescale the last column of `q` (and the last row of `r`) so that `q` lands in the special group.
    fn fix_determinant(q: &mut Matrix<Self>, r: &mut Matrix<Self>);

    /// Law of g_nn in GMD(n).
    fn gmd_last_diagonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self;
}

impl GroupField for f64 {
    fn fix_determinant(q: &mut Matrix<f64>, r: &mut Matrix<f64>) {
        if determinant(q) < 0.0 {
            let n = q.cols();
            for i in 0..q.rows() {
                q[(i, n - 1)] = -q[(i, n - 1)];
            }
            for j in 0..r.cols() {
                r[(n - 1, j)] = -r[(n - 1, j)];
            }
        }
    }

    fn gmd_last_diagonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> f64 {
        f64::gaussian(rng, 1.0 / n as f64)
    }
}

impl GroupField for Complex64 {
    fn fix_determinant(q: &mut Matrix<Complex64>, r: &mut Matrix<Complex64>) {
        let det = determinant(q);
        let phase = det / det.norm();
        let n = q.cols();
        for i in 0..q.rows() {
            q[(i, n - 1)] *= phase.conj();
        }
        for j in 0..r.cols() {
            r[(n - 1, j)] *= phase;
        }
    }

    fn gmd_last_diagonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Complex64 {
        Complex64::gaussian(rng, 1.0 / n as f64)
    }
}

impl GroupField for Quaternion {
    fn fix_determinant(_q: &mut Matrix<Quaternion>, _r: &mut Matrix<Quaternion>) {}

    fn gmd_last_diagonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Quaternion {
        Quaternion::from_real(chi_length::<Quaternion, R>(1, rng) / (n as f64).sqrt())
    }
}

/// Matrix of independent entries with E|x|² = 1.
pub fn gaussian_matrix<T: Scalar, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix<T> {
    Matrix::from_fn(rows, cols, |_, _| T::gaussian(rng, 1.0))
}

pub fn sample_gaussian_matrix<R: Rng + ?Sized>(n: usize, field: Field, rng: &mut R) -> DenseMatrix {
    match field {
        Field::Real => gaussian_matrix::<f64, R>(n, n, rng).into(),
        Field::Complex => gaussian_matrix::<Complex64, R>(n, n, rng).into(),
        Field::Quaternion => gaussian_matrix::<Quaternion, R>(n, n, rng).into(),
    }
}

fn inner<T: Scalar>(x: &[T], y: &[T]) -> T {
    let mut s = T::zero();
    for (a, b) in x.iter().zip(y) {
        s += a.conj() * *b;
    }
    s
}

/// Gram–Schmidt on columns: `y = q·r`, `q` with orthonormal columns, `r` upper triangular with positive diagonal.
/// Works for tall inputs; coefficients multiply basis vectors on the right.
pub fn gram_schmidt_columns<T: Scalar>(y: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    let (n, c) = (y.rows(), y.cols());
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(c);
    let mut r = Matrix::zeros(c, c);
    for k in 0..c {
        let mut v = y.column(k);
        // second pass keeps orthogonality at machine precision
        for _ in 0..2 {
            for (l, b) in basis.iter().enumerate() {
                let coef = inner(b, &v);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= *bi * coef;
                }
                r[(l, k)] += coef;
            }
        }
        let norm = inner(&v, &v).part(0).sqrt();
        if !(norm >= RANK_TOLERANCE) {
            return Err(Error::RankDeficient(norm));
        }
        r[(k, k)] = T::from_real(norm);
        let s = 1.0 / norm;
        basis.push(v.into_iter().map(|x| x.scale(s)).collect());
    }
    let q = Matrix::from_fn(n, c, |i, j| basis[j][i]);
    Ok((q, r))
}

/// Square Gram–Schmidt followed by the determinant correction; returns `(X, R)` with `Y = X·R`.
pub fn special_qr<T: GroupField>(y: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    if !y.is_square() {
        return Err(Error::InvalidShape(format!("{}×{} is not square", y.rows(), y.cols())));
    }
    let (mut q, mut r) = gram_schmidt_columns(y)?;
    T::fix_determinant(&mut q, &mut r);
    Ok((q, r))
}

pub fn special_gram_schmidt_typed<T: GroupField>(x: &Matrix<T>, axis: Axis) -> Result<Matrix<T>> {
    match axis {
        Axis::Columns => special_qr(x).map(|(q, _)| q),
        Axis::Rows => special_qr(&x.adjoint()).map(|(q, _)| q.adjoint()),
    }
}

/// Undilated output; see [`Axis`] for the processed direction.
pub fn special_gram_schmidt(x: &DenseMatrix, axis: Axis) -> Result<DenseMatrix> {
    Ok(match x {
        DenseMatrix::Real(m) => special_gram_schmidt_typed(m, axis)?.into(),
        DenseMatrix::Complex(m) => special_gram_schmidt_typed(m, axis)?.into(),
        DenseMatrix::Quaternion(m) => special_gram_schmidt_typed(m, axis)?.into(),
    })
}

/// Haar element of the special group over `T` (SO, SU or Sp).
pub fn haar<T: GroupField, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Matrix<T>> {
    let mut last = Error::RankDeficient(0.0);
    for _ in 0..HAAR_ATTEMPTS {
        match special_qr(&gaussian_matrix::<T, R>(n, n, rng)) {
            Ok((q, _)) => return Ok(q),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// First `c` columns of a Haar element; exact in law since the correction only touches column n.
pub fn haar_columns<T: GroupField, R: Rng + ?Sized>(n: usize, c: usize, rng: &mut R) -> Result<Matrix<T>> {
    if c >= n {
        return haar(n, rng);
    }
    let mut last = Error::RankDeficient(0.0);
    for _ in 0..HAAR_ATTEMPTS {
        match gram_schmidt_columns(&gaussian_matrix::<T, R>(n, c, rng)) {
            Ok((q, _)) => return Ok(q),
            Err(e) => last = e,
        }
    }
    Err(last)
}

pub fn sample_haar<R: Rng + ?Sized>(g: &GroupSpec, rng: &mut R) -> Result<DenseMatrix> {
    Ok(match g.family {
        Family::SO => haar::<f64, R>(g.n, rng)?.into(),
        Family::SU => haar::<Complex64, R>(g.n, rng)?.into(),
        Family::Sp => haar::<Quaternion, R>(g.n, rng)?.into(),
        Family::Spin => return Err(Error::Unsupported("Spin(n) has no sampler; use its SO(n) quotient".into())),
    })
}

/// Length of an m-dimensional standard Gaussian vector over `T`.
fn chi_length<T: Scalar, R: Rng + ?Sized>(m: usize, rng: &mut R) -> f64 {
    let p = T::FIELD.parts();
    let chi2 = ChiSquared::new((p * m) as f64).expect("positive degrees of freedom");
    (chi2.sample(rng) / p as f64).sqrt()
}

/// Top-left `c × c` block of GMD(n); the entries are independent, so this is exact in law.
pub fn gmd_block<T: GroupField, R: Rng + ?Sized>(n: usize, c: usize, rng: &mut R) -> Matrix<T> {
    assert!(c <= n);
    let sd = 1.0 / (n as f64).sqrt();
    let mut g = Matrix::zeros(c, c);
    for i in 0..c {
        g[(i, i)] = if i + 1 == n {
            T::gmd_last_diagonal(n, rng)
        } else {
            T::from_real(sd * chi_length::<T, R>(n - i, rng))
        };
        for j in i + 1..c {
            g[(i, j)] = T::gaussian(rng, 1.0 / n as f64);
        }
    }
    g
}

pub fn sample_gmd<T: GroupField, R: Rng + ?Sized>(n: usize, rng: &mut R) -> UpperTriangular<T> {
    UpperTriangular::from_matrix(gmd_block(n, n, rng))
}

/// Field-tagged GMD sample (SU/SO/Sp fields).
pub fn sample_gmd_dense<R: Rng + ?Sized>(n: usize, field: Field, rng: &mut R) -> DenseMatrix {
    match field {
        Field::Real => sample_gmd::<f64, R>(n, rng).into_matrix().into(),
        Field::Complex => sample_gmd::<Complex64, R>(n, rng).into_matrix().into(),
        Field::Quaternion => sample_gmd::<Quaternion, R>(n, rng).into_matrix().into(),
    }
}

/// The coupled pair: `Y = √n·X·G` with `X` undilated.
pub struct Coupling<T> {
    pub x: Matrix<T>,
    pub g: UpperTriangular<T>,
}

/// Splits a Gaussian `y` into its Haar part and induced Gaussian maker.
pub fn couple<T: GroupField>(y: &Matrix<T>) -> Result<Coupling<T>> {
    let (x, r) = special_qr(y)?;
    let s = 1.0 / (y.rows() as f64).sqrt();
    Ok(Coupling { x, g: UpperTriangular::from_matrix(r.scaled(s)) })
}

pub fn sample_over_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix<f64> {
    over_gaussian_block(n, n, n, rng)
}

/// Top-left `rows × cols` block of `Y·G`; it only involves `Y[..rows, ..cols]` and `G[..cols, ..cols]`.
pub fn over_gaussian_block<R: Rng + ?Sized>(n: usize, rows: usize, cols: usize, rng: &mut R) -> Matrix<f64> {
    let y = Matrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal));
    let g = gmd_block::<f64, R>(n, cols, rng);
    y.matmul(&g)
}

/// E‖N(0, I_m)‖ = √2·Γ((m+1)/2)/Γ(m/2).
pub fn expected_chi_norm(m: usize) -> f64 {
    assert!(m >= 1, "expected_chi_norm needs m ≥ 1");
    let m = m as f64;
    std::f64::consts::SQRT_2 * (ln_gamma((m + 1.0) / 2.0) - ln_gamma(m / 2.0)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::phi_embedding;
    use crate::rng::RngStream;

    #[test]
    fn chi_norm_reference_values() {
        assert!((expected_chi_norm(1) - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
        assert!((expected_chi_norm(2) - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-12);
        // 3/4·√π·√2
        let m4 = 0.75 * std::f64::consts::PI.sqrt() * std::f64::consts::SQRT_2;
        assert!((expected_chi_norm(4) - m4).abs() < 1e-12);
        assert!((expected_chi_norm(4) - 1.88000).abs() < 5e-5);
    }

    #[test]
    fn chi_norm_bracket_everywhere() {
        for m in 1..=1_000_000usize {
            let v = expected_chi_norm(m);
            let s = (m as f64).sqrt();
            assert!(v <= s && v >= s - 0.5 / s, "m={m} v={v}");
        }
    }

    #[test]
    fn gram_schmidt_flip_example() {
        let x = Matrix::from_row_major(2, 2, vec![0.0, 1.0, 1.0, 0.0]);
        let q = special_gram_schmidt_typed(&x, Axis::Columns).unwrap();
        assert_eq!(q, Matrix::from_row_major(2, 2, vec![0.0, -1.0, 1.0, 0.0]));
        let id = Matrix::<f64>::identity(4);
        assert_eq!(special_gram_schmidt_typed(&id, Axis::Rows).unwrap(), id);
    }

    #[test]
    fn rank_deficient_rejected() {
        let x = Matrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(special_gram_schmidt_typed(&x, Axis::Columns), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn group_membership_all_fields() {
        let mut rng = RngStream::new(1, 0);
        for _ in 0..50 {
            let so = haar::<f64, _>(8, &mut rng).unwrap();
            assert!(so.unitarity_defect() < 1e-10);
            assert!((determinant(&so) - 1.0).abs() < 1e-10);
            let su = haar::<Complex64, _>(4, &mut rng).unwrap();
            assert!(su.unitarity_defect() < 1e-10);
            assert!((determinant(&su) - Complex64::new(1.0, 0.0)).norm() < 1e-10);
            let sp = haar::<Quaternion, _>(3, &mut rng).unwrap();
            assert!(sp.unitarity_defect() < 1e-10);
            // rows are orthonormal for ⟨x,y⟩′ = Σ x_i ȳ_i
            assert!(sp.matmul(&sp.adjoint()).max_abs_diff(&Matrix::identity(3)) < 1e-10);
            assert!(phi_embedding(&sp).unitarity_defect() < 1e-10);
        }
    }

    #[test]
    fn rows_axis_orthonormalizes_rows() {
        let mut rng = RngStream::new(2, 0);
        let y: Matrix<Quaternion> = gaussian_matrix(4, 4, &mut rng);
        let q = special_gram_schmidt_typed(&y, Axis::Rows).unwrap();
        assert!(q.matmul(&q.adjoint()).max_abs_diff(&Matrix::identity(4)) < 1e-10);
        // first row is the normalized first row of y
        let norm: f64 = y.row(0).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for j in 0..4 {
            assert!((q[(0, j)] - y[(0, j)].scale(1.0 / norm)).abs() < 1e-12);
        }
    }

    #[test]
    fn coupling_round_trip() {
        let mut rng = RngStream::new(3, 0);
        for _ in 0..20 {
            let y: Matrix<f64> = gaussian_matrix(16, 16, &mut rng);
            let c = couple(&y).unwrap();
            let back = c.x.scaled(4.0).matmul(c.g.as_matrix());
            assert!(back.max_abs_diff(&y) < 1e-9);
            for i in 0..15 {
                assert!(c.g.get(i, i) > 0.0);
            }
            let yq: Matrix<Quaternion> = gaussian_matrix(3, 3, &mut rng);
            let cq = couple(&yq).unwrap();
            assert!(cq.x.scaled(3f64.sqrt()).matmul(cq.g.as_matrix()).max_abs_diff(&yq) < 1e-9);
            let yc: Matrix<Complex64> = gaussian_matrix(5, 5, &mut rng);
            let cc = couple(&yc).unwrap();
            assert!(cc.x.scaled(5f64.sqrt()).matmul(cc.g.as_matrix()).max_abs_diff(&yc) < 1e-9);
        }
    }

    #[test]
    fn spin_has_no_sampler() {
        let mut rng = RngStream::new(0, 0);
        assert!(matches!(sample_haar(&GroupSpec::spin(5), &mut rng), Err(Error::Unsupported(_))));
    }

    #[test]
    fn haar_columns_match_shape() {
        let mut rng = RngStream::new(4, 0);
        let q: Matrix<f64> = haar_columns(10, 3, &mut rng).unwrap();
        assert_eq!((q.rows(), q.cols()), (10, 3));
        assert!(q.unitarity_defect() < 1e-12);
    }
}
