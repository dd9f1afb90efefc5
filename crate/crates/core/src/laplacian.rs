//! Fundamental weights and Laplace–Beltrami eigenvalues λ_v = −2⟨v,σ⟩ − ‖v‖².

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Family, GroupSpec};
use crate::partitions::{level, step_vector, Partition};

/// Gram matrix of fundamental weights; σ is the all-ones combination.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSystem {
    pub family: Family,
    pub n: usize,
    pub gram: Vec<Vec<BigRational>>,
}

impl WeightSystem {
    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    /// ⟨Σ a_i w_i, Σ b_j w_j⟩.
    pub fn pairing(&self, a: &[u64], b: &[u64]) -> BigRational {
        let mut s = BigRational::zero();
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                if bj != 0 {
                    s += &self.gram[i][j] * BigRational::from_integer(BigInt::from(ai * bj));
                }
            }
        }
        s
    }
}

fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Gram of weights given as coefficient rows over orthogonal u_j with ‖u_j‖² = 2.
fn gram_over_u(coeffs: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let two = q(2, 1);
    coeffs
        .iter()
        .map(|a| coeffs.iter().map(|b| a.iter().zip(b).map(|(x, y)| x * y * &two).sum()).collect())
        .collect()
}

pub fn weight_system(family: Family, n: usize) -> Result<WeightSystem> {
    let gram = match family {
        Family::SO | Family::Spin => {
            if n < 3 {
                return Err(Error::Unsupported(format!("{family}({n}) has no weight system here; n ≥ 3")));
            }
            let k = n / 2;
            let prefix = |i: usize| (0..k).map(|j| if j <= i { q(1, 1) } else { q(0, 1) }).collect::<Vec<_>>();
            let half_all = (0..k).map(|_| q(1, 2)).collect::<Vec<_>>();
            let mut coeffs: Vec<Vec<BigRational>> = Vec::with_capacity(k);
            if n % 2 == 1 {
                for i in 0..k - 1 {
                    coeffs.push(prefix(i));
                }
                coeffs.push(half_all);
            } else {
                for i in 0..k - 2 {
                    coeffs.push(prefix(i));
                }
                let mut last = half_all.clone();
                last[k - 1] = q(-1, 2);
                coeffs.push(half_all);
                coeffs.push(last);
            }
            gram_over_u(&coeffs)
        }
        Family::Sp => gram_over_u(&(0..n).map(|i| (0..n).map(|j| q((j <= i) as i64, 1)).collect()).collect::<Vec<_>>()),
        Family::SU => {
            if n < 2 {
                return Err(Error::Unsupported("SU(1) is trivial".into()));
            }
            let m = n as i64;
            (1..n as i64)
                .map(|k| (1..m).map(|l| if k <= l { q(k * (m - l), m) } else { q(l * (m - k), m) }).collect())
                .collect()
        }
    };
    Ok(WeightSystem { family, n, gram })
}

/// Coefficients r_i of the dominant weight v = Σ r_i w_i.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightCoefficients {
    pub r: Vec<u64>,
    /// SO(2k) with λ_k > 0: the other k-row branch is available via [`WeightCoefficients::mirrored`].
    pub has_mirror: bool,
}

impl WeightCoefficients {
    /// Swaps r_{k−1} and r_k (the two SO(2k) branches).
    pub fn mirrored(&self) -> WeightCoefficients {
        let mut r = self.r.clone();
        let k = r.len();
        if self.has_mirror && k >= 2 {
            r.swap(k - 2, k - 1);
        }
        WeightCoefficients { r, has_mirror: self.has_mirror }
    }
}

pub fn partition_to_weights(family: Family, lambda: &Partition, n: usize) -> Result<WeightCoefficients> {
    let g = GroupSpec::new(family, n)?;
    lambda.validate(&g)?;
    if lambda.is_half_integer() {
        return Err(Error::Unsupported(format!("spin weight {lambda} has no Laplacian entry here")));
    }
    let l = |i: usize| lambda.get(i) as u64;
    let diffs = |m: usize| (0..m).map(|i| l(i) - l(i + 1)).collect::<Vec<u64>>();
    Ok(match family {
        Family::SU => WeightCoefficients {
            r: step_vector(lambda, n)?.steps.into_iter().map(u64::from).collect(),
            has_mirror: false,
        },
        Family::Sp => WeightCoefficients { r: diffs(n), has_mirror: false },
        Family::SO | Family::Spin => {
            if n < 3 {
                return Err(Error::Unsupported(format!("{family}({n}) needs n ≥ 3")));
            }
            let k = n / 2;
            if n % 2 == 1 {
                let mut r = diffs(k - 1);
                r.push(2 * l(k - 1));
                WeightCoefficients { r, has_mirror: false }
            } else {
                let mut r = diffs(k - 2);
                r.push(l(k - 2) - l(k - 1));
                r.push(l(k - 2) + l(k - 1));
                WeightCoefficients { r, has_mirror: l(k - 1) > 0 }
            }
        }
    })
}

/// Exact λ_v.
pub fn laplacian_eigenvalue_exact(family: Family, lambda: &Partition, n: usize) -> Result<BigRational> {
    let w = partition_to_weights(family, lambda, n)?;
    eigenvalue_of(&weight_system(family, n)?, &w.r)
}

fn eigenvalue_of(ws: &WeightSystem, r: &[u64]) -> Result<BigRational> {
    let sigma = vec![1u64; ws.rank()];
    let two = q(2, 1);
    Ok(-(two * ws.pairing(r, &sigma)) - ws.pairing(r, r))
}

/// λ_v for the mirrored SO(2k) branch (equal to the main branch).
pub fn laplacian_eigenvalue_mirrored(family: Family, lambda: &Partition, n: usize) -> Result<BigRational> {
    let w = partition_to_weights(family, lambda, n)?.mirrored();
    eigenvalue_of(&weight_system(family, n)?, &w.r)
}

pub fn laplacian_eigenvalue(family: Family, lambda: &Partition, n: usize) -> Result<f64> {
    laplacian_eigenvalue_exact(family, lambda, n).map(|x| x.to_f64().unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenvalueCheck {
    pub eigenvalue: f64,
    pub level: u32,
    pub bound: f64,
    pub pass: bool,
}

/// pass ⇔ 0 ≥ λ_v ≥ −2D² − 2nD with D the level.
pub fn check_eigenvalue_bound(family: Family, lambda: &Partition, n: usize) -> Result<EigenvalueCheck> {
    let g = GroupSpec::new(family, n)?;
    let d = level(&g, lambda)?;
    let ev = laplacian_eigenvalue_exact(family, lambda, n)?;
    let bound = -2 * (d as i64) * (d as i64) - 2 * (n as i64) * (d as i64);
    let pass = !ev.is_positive() && ev >= BigRational::from_integer(BigInt::from(bound));
    Ok(EigenvalueCheck { eigenvalue: ev.to_f64().unwrap_or(f64::NAN), level: d, bound: bound as f64, pass })
}

/// Exact value as a string `p/q` or `p`.
pub fn format_rational(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: &[u32]) -> Partition {
        Partition::from_slice(x)
    }

    #[test]
    fn gram_examples() {
        assert_eq!(weight_system(Family::SU, 2).unwrap().gram, vec![vec![q(1, 2)]]);
        assert_eq!(weight_system(Family::SO, 3).unwrap().gram, vec![vec![q(1, 2)]]);
        let sp2 = weight_system(Family::Sp, 2).unwrap().gram;
        assert_eq!(sp2, vec![vec![q(2, 1), q(2, 1)], vec![q(2, 1), q(4, 1)]]);
        assert!(weight_system(Family::SO, 2).is_err());
    }

    #[test]
    fn weight_examples() {
        assert_eq!(partition_to_weights(Family::SO, &p(&[3]), 3).unwrap().r, vec![6]);
        assert_eq!(partition_to_weights(Family::SU, &p(&[2, 1]), 4).unwrap().r, vec![1, 1, 0]);
        assert_eq!(partition_to_weights(Family::Sp, &p(&[1, 1]), 2).unwrap().r, vec![0, 1]);
        let so6 = partition_to_weights(Family::SO, &p(&[2, 1, 1]), 6).unwrap();
        assert_eq!(so6.r, vec![1, 0, 2]);
        assert!(so6.has_mirror);
        assert_eq!(so6.mirrored().r, vec![1, 2, 0]);
    }

    #[test]
    fn eigenvalue_examples() {
        for fam in [Family::SO, Family::SU, Family::Sp, Family::Spin] {
            assert_eq!(laplacian_eigenvalue(fam, &Partition::empty(), 5).unwrap(), 0.0);
        }
        assert_eq!(laplacian_eigenvalue(Family::SO, &p(&[1]), 3).unwrap(), -4.0);
        assert_eq!(laplacian_eigenvalue(Family::SU, &p(&[1]), 2).unwrap(), -1.5);
        assert_eq!(laplacian_eigenvalue(Family::SU, &p(&[3]), 2).unwrap(), -7.5);
        for l in 0..=20u32 {
            let want = -2.0 * l as f64 - 2.0 * (l * l) as f64;
            assert_eq!(laplacian_eigenvalue(Family::SO, &p(&[l]), 3).unwrap(), want);
        }
    }

    #[test]
    fn vector_representation_casimir() {
        // in this normalization the vector representation has λ = −2(n−1) for every n
        for n in 3..=16 {
            let ev = laplacian_eigenvalue_exact(Family::SO, &p(&[1]), n).unwrap();
            assert_eq!(ev, q(-2 * (n as i64 - 1), 1), "SO({n})");
        }
    }

    #[test]
    fn su_standard_and_dual_agree() {
        for n in 2..=10 {
            let a = laplacian_eigenvalue_exact(Family::SU, &p(&[1]), n).unwrap();
            let b = laplacian_eigenvalue_exact(Family::SU, &Partition::from_slice(&vec![1; n - 1]), n).unwrap();
            assert_eq!(a, b);
            assert_eq!(a, q(-((n * n - 1) as i64), n as i64));
        }
    }

    #[test]
    fn mirrored_branch_same_eigenvalue() {
        for k in 2..=6 {
            let n = 2 * k;
            let lam = Partition::from_slice(&vec![1; k]);
            let a = laplacian_eigenvalue_exact(Family::SO, &lam, n).unwrap();
            let b = laplacian_eigenvalue_mirrored(Family::SO, &lam, n).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn bound_examples() {
        let c = check_eigenvalue_bound(Family::SO, &p(&[1]), 3).unwrap();
        assert_eq!((c.eigenvalue, c.level, c.bound, c.pass), (-4.0, 1, -8.0, true));
        let c = check_eigenvalue_bound(Family::SU, &p(&[3]), 2).unwrap();
        assert_eq!((c.eigenvalue, c.bound, c.pass), (-7.5, -30.0, true));
        let c = check_eigenvalue_bound(Family::Sp, &Partition::empty(), 4).unwrap();
        assert_eq!((c.eigenvalue, c.pass), (0.0, true));
    }
}
