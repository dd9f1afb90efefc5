use serde::Serialize;

use crate::error::{Error, Result};
use crate::partitions::Partition;

pub const MAX_SYMMETRIZER_DEGREE: u32 = 8;

/// Σ coeff·e_σ over permutations of {0..d−1}; `perm[i] = σ(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignedPermSum {
    pub d: usize,
    pub terms: Vec<(Vec<usize>, i64)>,
}

impl SignedPermSum {
    pub fn coefficient(&self, perm: &[usize]) -> i64 {
        self.terms.iter().find(|(p, _)| p == perm).map_or(0, |(_, c)| *c)
    }
}

/// c_λ = (Σ_{p∈P} e_p)(Σ_{q∈Q} sign(q) e_q) for the row-major standard tableau; σ = p∘q.
pub fn young_symmetrizer(lambda: &Partition) -> Result<SignedPermSum> {
    if lambda.is_half_integer() {
        return Err(Error::InvalidShape(format!("{lambda} is not an integer partition")));
    }
    let d = lambda.size();
    if d > MAX_SYMMETRIZER_DEGREE {
        return Err(Error::TooLarge(format!("Young symmetrizer of degree {d} > {MAX_SYMMETRIZER_DEGREE}")));
    }
    let d = d as usize;
    let mut rows: Vec<Vec<usize>> = Vec::new();
    let mut next = 0;
    for &len in lambda.parts() {
        rows.push((next..next + len as usize).collect());
        next += len as usize;
    }
    let cols: Vec<Vec<usize>> =
        (0..lambda.get(0) as usize).map(|c| rows.iter().filter(|r| r.len() > c).map(|r| r[c]).collect()).collect();
    let p_group = block_group(d, &rows);
    let q_group = block_group(d, &cols);
    let mut terms = Vec::with_capacity(p_group.len() * q_group.len());
    for p in &p_group {
        for q in &q_group {
            let sigma: Vec<usize> = (0..d).map(|i| p[q[i]]).collect();
            terms.push((sigma, sign(q)));
        }
    }
    // P ∩ Q = {id}, so the products are pairwise distinct
    terms.sort();
    Ok(SignedPermSum { d, terms })
}

/// All permutations of {0..d−1} preserving each block.
fn block_group(d: usize, blocks: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![(0..d).collect::<Vec<usize>>()];
    for block in blocks {
        let perms = permutations(block.len());
        let mut next = Vec::with_capacity(out.len() * perms.len());
        for base in &out {
            for perm in &perms {
                let mut g = base.clone();
                for (k, &src) in block.iter().enumerate() {
                    g[src] = block[perm[k]];
                }
                next.push(g);
            }
        }
        out = next;
    }
    out
}

pub(crate) fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

pub(crate) fn sign(perm: &[usize]) -> i64 {
    let mut seen = vec![false; perm.len()];
    let mut s = 1;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        if len % 2 == 0 {
            s = -s;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_symmetrizers() {
        let one = young_symmetrizer(&Partition::from_slice(&[1])).unwrap();
        assert_eq!(one.terms, vec![(vec![0], 1)]);
        let sym = young_symmetrizer(&Partition::from_slice(&[2])).unwrap();
        assert_eq!(sym.terms, vec![(vec![0, 1], 1), (vec![1, 0], 1)]);
        let alt = young_symmetrizer(&Partition::from_slice(&[1, 1])).unwrap();
        assert_eq!(alt.terms, vec![(vec![0, 1], 1), (vec![1, 0], -1)]);
    }

    #[test]
    fn term_counts_and_identity() {
        // |P|·|Q| for (2,1): 2·2
        let c = young_symmetrizer(&Partition::from_slice(&[2, 1])).unwrap();
        assert_eq!(c.terms.len(), 4);
        assert_eq!(c.coefficient(&[0, 1, 2]), 1);
        let c = young_symmetrizer(&Partition::from_slice(&[3, 2, 1])).unwrap();
        assert_eq!(c.terms.len(), 6 * 2 * 6 * 2);
        assert!(young_symmetrizer(&Partition::from_slice(&[9])).is_err());
    }

    #[test]
    fn c_lambda_is_quasi_idempotent() {
        // c_λ² = (d!/dim S^λ)·c_λ; for (2,1): 6/2 = 3
        let c = young_symmetrizer(&Partition::from_slice(&[2, 1])).unwrap();
        let mut sq: std::collections::BTreeMap<Vec<usize>, i64> = Default::default();
        for (a, ca) in &c.terms {
            for (b, cb) in &c.terms {
                let ab: Vec<usize> = (0..3).map(|i| a[b[i]]).collect();
                *sq.entry(ab).or_default() += ca * cb;
            }
        }
        sq.retain(|_, v| *v != 0);
        for (perm, coef) in &c.terms {
            assert_eq!(sq.get(perm).copied().unwrap_or(0), 3 * coef);
        }
        assert_eq!(sq.len(), c.terms.len());
    }

    #[test]
    fn sign_of_cycles() {
        assert_eq!(sign(&[0, 1, 2]), 1);
        assert_eq!(sign(&[1, 0, 2]), -1);
        assert_eq!(sign(&[1, 2, 0]), 1);
    }
}
