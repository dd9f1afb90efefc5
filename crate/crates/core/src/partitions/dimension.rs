use num::bigint::BigInt;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::Partition;
use crate::error::{Error, Result};
use crate::group::{Family, GroupSpec};

/// Exact Weyl dimension; products run over doubled parts so spin weights stay integral.
pub fn weyl_dimension(g: &GroupSpec, lambda: &Partition) -> Result<BigInt> {
    lambda.validate(g)?;
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    let mut factor = |a: i64, b: i64| {
        num *= a;
        den *= b;
    };
    // doubled λ_i, 1-based
    let l = |i: usize| lambda.doubled(i - 1) as i64;
    match g.family {
        Family::SU => {
            let n = g.n;
            for i in 1..=n {
                for j in i + 1..=n {
                    let d = (j - i) as i64;
                    factor(l(i) - l(j) + 2 * d, 2 * d);
                }
            }
        }
        Family::Sp => {
            let n = g.n;
            for i in 1..=n {
                for j in i..=n {
                    if i < j {
                        let d = (j - i) as i64;
                        factor(l(i) - l(j) + 2 * d, 2 * d);
                    }
                    let c = (2 * n + 2 - i - j) as i64;
                    factor(l(i) + l(j) + 2 * c, 2 * c);
                }
            }
        }
        Family::SO | Family::Spin => {
            let k = g.n / 2;
            let odd = g.n % 2 == 1;
            for i in 1..=k {
                for j in i..=k {
                    if i < j {
                        let d = (j - i) as i64;
                        factor(l(i) - l(j) + 2 * d, 2 * d);
                    }
                    if odd {
                        let c = (2 * k + 1 - i - j) as i64;
                        factor(l(i) + l(j) + 2 * c, 2 * c);
                    } else if i < j {
                        let c = (2 * k - i - j) as i64;
                        factor(l(i) + l(j) + 2 * c, 2 * c);
                    }
                }
            }
        }
    }
    let (q, r) = num.div_rem(&den);
    if !r.is_zero() || !q.is_positive() {
        return Err(Error::NonIntegerResult(format!("{num}/{den} for {g} {lambda}")));
    }
    Ok(q)
}

/// SO(2k) partitions with exactly k rows: the O(2k) irreducible of this shape splits in two.
pub fn is_self_associated(g: &GroupSpec, lambda: &Partition) -> bool {
    matches!(g.family, Family::SO | Family::Spin) && g.n % 2 == 0 && !lambda.is_half_integer() && lambda.len() == g.n / 2
}

/// Smallest dimension of a non-trivial irreducible, minimized over fundamental weights.
pub fn min_nontrivial_dimension(g: &GroupSpec) -> Result<BigInt> {
    let rows = match g.family {
        Family::SO | Family::Spin => g.n / 2,
        Family::SU => g.n - 1,
        Family::Sp => g.n,
    };
    let mut candidates: Vec<Partition> = (1..=rows).map(|k| Partition::from_slice(&vec![1; k])).collect();
    if g.family == Family::Spin {
        candidates.push(Partition::half_integer(vec![0; rows])?);
    }
    let mut best: Option<BigInt> = None;
    for c in candidates {
        let d = weyl_dimension(g, &c)?;
        if best.as_ref().map_or(true, |b| d < *b) {
            best = Some(d);
        }
    }
    best.ok_or_else(|| Error::InvalidShape(format!("{g} has rank 0")))
}

/// (min-rank, D) of a product of SU/Spin/Sp factors, using D(SU(m)) = D(Spin(m)) = m, D(Sp(m)) = 2m.
pub fn min_rank_and_d(factors: &[GroupSpec]) -> Result<(usize, usize)> {
    if factors.is_empty() {
        return Err(Error::InvalidShape("empty factor list".into()));
    }
    let mut min_rank = usize::MAX;
    let mut d = usize::MAX;
    for f in factors {
        let df = match f.family {
            Family::SU | Family::Spin => f.n,
            Family::Sp => 2 * f.n,
            Family::SO => return Err(Error::InvalidShape(format!("{f} is not simply connected; use Spin"))),
        };
        min_rank = min_rank.min(f.n);
        d = d.min(df);
    }
    Ok((min_rank, d))
}

/// Q_d = (cn/d)^d below cn/(1+c), Q = (1+c)^{cn/(1+c)} from there on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasirandomProfile {
    pub n: usize,
    pub c: f64,
}

impl QuasirandomProfile {
    pub fn threshold(&self) -> f64 {
        self.c * self.n as f64 / (1.0 + self.c)
    }

    pub fn tail(&self) -> f64 {
        (1.0 + self.c).powf(self.threshold())
    }

    pub fn q(&self, d: u32) -> f64 {
        if d == 0 {
            return 1.0;
        }
        if (d as f64) < self.threshold() {
            (self.c * self.n as f64 / d as f64).powi(d as i32)
        } else {
            self.tail()
        }
    }
}

pub fn quasirandom_profile(n: usize, c: f64) -> Result<QuasirandomProfile> {
    if n < 2 || !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidShape(format!("profile needs n ≥ 2 and 0 < c ≤ 1, got n={n}, c={c}")));
    }
    Ok(QuasirandomProfile { n, c })
}

/// Lossy conversion for bound comparisons.
pub(crate) fn to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: &[u32]) -> Partition {
        Partition::from_slice(x)
    }

    fn dim(g: GroupSpec, lam: &Partition) -> u64 {
        weyl_dimension(&g, lam).unwrap().to_u64().unwrap()
    }

    #[test]
    fn classical_oracles() {
        for l in 0..=20u32 {
            assert_eq!(dim(GroupSpec::so(3), &p(&[l])), 2 * l as u64 + 1);
            assert_eq!(dim(GroupSpec::su(2), &p(&[l])), l as u64 + 1);
            assert_eq!(dim(GroupSpec::sp(1), &p(&[l])), l as u64 + 1);
        }
        assert_eq!(dim(GroupSpec::so(5), &p(&[1])), 5);
        for n in 3..=30 {
            assert_eq!(dim(GroupSpec::so(n), &p(&[1])), n as u64);
            assert_eq!(dim(GroupSpec::su(n), &p(&[1])), n as u64);
            assert_eq!(dim(GroupSpec::sp(n), &p(&[1])), 2 * n as u64);
        }
    }

    #[test]
    fn exterior_powers_and_adjoints() {
        // Λ^k of the standard representation
        let binom = |n: u64, k: u64| (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1));
        for n in 3..=12usize {
            for k in 1..n {
                assert_eq!(dim(GroupSpec::su(n), &p(&vec![1; k])), binom(n as u64, k as u64));
            }
            for k in 1..n / 2 {
                assert_eq!(dim(GroupSpec::so(n), &p(&vec![1; k])), binom(n as u64, k as u64));
            }
        }
        // Sp(n) adjoint = Sym² of 2n
        assert_eq!(dim(GroupSpec::sp(3), &p(&[2])), 21);
        // SU(3) adjoint
        assert_eq!(dim(GroupSpec::su(3), &p(&[2, 1])), 8);
        // SO(4): Λ² = 3 ⊕ 3
        assert_eq!(dim(GroupSpec::so(4), &p(&[1, 1])), 3);
        assert!(is_self_associated(&GroupSpec::so(4), &p(&[1, 1])));
    }

    #[test]
    fn spin_representations() {
        for k in 1..=8usize {
            let odd = GroupSpec::spin(2 * k + 1);
            assert_eq!(weyl_dimension(&odd, &Partition::half_integer(vec![0; k]).unwrap()).unwrap(), BigInt::from(1u64 << k));
            if k >= 2 {
                let even = GroupSpec::spin(2 * k);
                let half = Partition::half_integer(vec![0; k]).unwrap();
                assert_eq!(weyl_dimension(&even, &half).unwrap(), BigInt::from(1u64 << (k - 1)));
            }
        }
        assert!(weyl_dimension(&GroupSpec::so(7), &Partition::half_integer(vec![0; 3]).unwrap()).is_err());
    }

    #[test]
    fn min_rank_examples() {
        assert_eq!(min_rank_and_d(&[GroupSpec::su(5)]).unwrap(), (5, 5));
        assert_eq!(min_rank_and_d(&[GroupSpec::sp(3), GroupSpec::su(10)]).unwrap(), (3, 6));
        assert_eq!(min_rank_and_d(&[GroupSpec::spin(4)]).unwrap(), (4, 4));
        assert!(min_rank_and_d(&[]).is_err());
    }

    #[test]
    fn exact_minimal_dimensions() {
        for m in 2..=12 {
            assert_eq!(min_nontrivial_dimension(&GroupSpec::su(m)).unwrap(), BigInt::from(m));
            assert_eq!(min_nontrivial_dimension(&GroupSpec::sp(m)).unwrap(), BigInt::from(2 * m));
        }
        for m in 7..=16 {
            assert_eq!(min_nontrivial_dimension(&GroupSpec::spin(m)).unwrap(), BigInt::from(m));
        }
        assert_eq!(min_nontrivial_dimension(&GroupSpec::spin(4)).unwrap(), BigInt::from(2));
        assert_eq!(min_nontrivial_dimension(&GroupSpec::spin(5)).unwrap(), BigInt::from(4));
    }

    #[test]
    fn profile_examples() {
        let q = quasirandom_profile(100, 0.5).unwrap();
        assert!((q.q(2) - 625.0).abs() < 1e-9);
        assert!((q.q(1) - 50.0).abs() < 1e-12);
        // threshold 100/3
        assert_eq!(q.q(34), q.tail());
        assert!((q.tail() - 1.5f64.powf(100.0 / 3.0)).abs() < 1e-6 * q.tail());
        assert!(quasirandom_profile(100, 0.0).is_err());
    }
}
