//! Young symmetrizers, comfortable juntas, polynomial algebra on matrix entries, λ_S.

mod polynomial;
mod symmetrizer;

pub use polynomial::{GroupPolynomial, MonomialIndex, Position, MAX_TRANSLATE_DEGREE};
pub use symmetrizer::{young_symmetrizer, SignedPermSum, MAX_SYMMETRIZER_DEGREE};

use crate::error::{Error, Result};
use crate::partitions::Partition;
use crate::sampling::expected_chi_norm;
use crate::scalar::Field;

/// P_λ(X) = Σ_σ ε_σ ∏_i x_{i,σ(i)} read off c_λ; P_λ(Id) = 1.
pub fn comfortable_junta(lambda: &Partition, n: usize) -> Result<GroupPolynomial> {
    let c = young_symmetrizer(lambda)?;
    if 2 * c.d >= n {
        return Err(Error::InvalidShape(format!("junta of degree {} needs d < n/2, n = {n}", c.d)));
    }
    let mut p = GroupPolynomial::zero(n, Field::Real);
    for (sigma, coef) in &c.terms {
        let m = MonomialIndex::from_pairs(&sigma.iter().enumerate().map(|(i, &s)| (i, s)).collect::<Vec<_>>());
        p.add_term(m, *coef as f64);
    }
    Ok(p)
}

/// λ_S = n^{−d/2}·∏_k E‖N(0, I_{n−j_k+1})‖ over the (1-based) columns j_k of S.
pub fn lambda_s(s: &MonomialIndex, n: usize) -> Result<f64> {
    let half = n / 2;
    if !s.is_column_comfortable(n) || s.positions().iter().any(|p| p.row >= half) {
        return Err(Error::NotComfortable(format!("{s} is not column-comfortable inside [{half}]²")));
    }
    let scale = 1.0 / (n as f64).sqrt();
    Ok(s.positions().iter().map(|p| scale * expected_chi_norm(n - p.col)).product())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{DenseMatrix, Matrix};
    use crate::partitions::partitions_of;

    #[test]
    fn junta_examples() {
        let alt = comfortable_junta(&Partition::from_slice(&[1, 1]), 6).unwrap();
        assert_eq!(alt.to_string(), "x1,1·x2,2 − x1,2·x2,1");
        let sym = comfortable_junta(&Partition::from_slice(&[2]), 6).unwrap();
        assert_eq!(sym.to_string(), "x1,1·x2,2 + x1,2·x2,1");
        assert!(matches!(comfortable_junta(&Partition::from_slice(&[2, 1]), 6), Err(Error::InvalidShape(_))));
    }

    #[test]
    fn juntas_are_one_at_identity() {
        for d in 1..=6 {
            for lam in partitions_of(d, 10) {
                let p = comfortable_junta(&lam, 2 * d as usize + 1).unwrap();
                let id = DenseMatrix::Real(Matrix::identity(p.n()));
                assert_eq!(p.evaluate(&id).unwrap(), 1.0, "{lam}");
            }
        }
    }

    #[test]
    fn junta_at_rotation_block() {
        let p = comfortable_junta(&Partition::from_slice(&[1, 1]), 6).unwrap();
        let mut x = Matrix::<f64>::identity(6);
        x[(0, 0)] = 0.0;
        x[(0, 1)] = -1.0;
        x[(1, 0)] = 1.0;
        x[(1, 1)] = 0.0;
        assert_eq!(p.evaluate(&DenseMatrix::Real(x)).unwrap(), 1.0);
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_s(&MonomialIndex::default(), 4).unwrap(), 1.0);
        let s1 = MonomialIndex::from_pairs(&[(0, 0)]);
        assert!((lambda_s(&s1, 4).unwrap() - 0.9400).abs() < 5e-5);
        let s2 = MonomialIndex::from_pairs(&[(0, 0), (1, 1)]);
        assert!((lambda_s(&s2, 4).unwrap() - 0.7500).abs() < 5e-5);
        let bad = MonomialIndex::from_pairs(&[(0, 0), (1, 0)]);
        assert!(matches!(lambda_s(&bad, 8), Err(Error::NotComfortable(_))));
    }

    #[test]
    fn lambda_decreases_with_column() {
        for n in [8, 16, 40] {
            for j in 0..n / 2 - 1 {
                let a = lambda_s(&MonomialIndex::from_pairs(&[(0, j)]), n).unwrap();
                let b = lambda_s(&MonomialIndex::from_pairs(&[(0, j + 1)]), n).unwrap();
                assert!(b < a);
            }
        }
    }
}
