use std::collections::BTreeMap;

use super::Partition;

/// LR expansion of S_α ⊗ S_β: add α_i boxes labelled i to β, no two in a column,
/// keep fillings whose reversed-row reading word is a lattice word.
/// Sorted lexicographically descending.
pub fn littlewood_richardson(alpha: &Partition, beta: &Partition) -> Vec<(Partition, usize)> {
    let mut out: BTreeMap<Partition, usize> = BTreeMap::new();
    let base: Vec<u32> = beta.parts().to_vec();
    let labels: Vec<Vec<u32>> = vec![Vec::new(); base.len() + alpha.len()];
    place(alpha.parts(), 0, base, labels, &mut out);
    let mut v: Vec<(Partition, usize)> = out.into_iter().collect();
    v.reverse();
    v
}

/// SU(n) version: drops shapes with more than n rows and strips full columns.
pub fn littlewood_richardson_su(alpha: &Partition, beta: &Partition, n: usize) -> Vec<(Partition, usize)> {
    let mut out: BTreeMap<Partition, usize> = BTreeMap::new();
    for (lam, m) in littlewood_richardson(alpha, beta) {
        if lam.len() > n {
            continue;
        }
        let full = if lam.len() == n { lam.get(n - 1) } else { 0 };
        let stripped = Partition::new(lam.parts().iter().map(|p| p - full).collect()).expect("still decreasing");
        *out.entry(stripped).or_default() += m;
    }
    let mut v: Vec<(Partition, usize)> = out.into_iter().collect();
    v.reverse();
    v
}

fn place(
    alpha: &[u32],
    label: usize,
    shape: Vec<u32>,
    labels: Vec<Vec<u32>>,
    out: &mut BTreeMap<Partition, usize>,
) {
    if label == alpha.len() {
        if is_lattice(&labels, alpha.len()) {
            *out.entry(Partition::new(shape).expect("shape stays a partition")).or_default() += 1;
        }
        return;
    }
    let k = alpha[label];
    let mut ext = shape.clone();
    ext.push(0);
    let mut adds = vec![0u32; ext.len()];
    horizontal_strips(&ext, 0, k, &mut adds, &mut |adds| {
        let mut new_shape = ext.clone();
        let mut new_labels = labels.clone();
        for (r, &a) in adds.iter().enumerate() {
            new_shape[r] += a;
            for _ in 0..a {
                new_labels[r].push(label as u32);
            }
        }
        while new_shape.last() == Some(&0) {
            new_shape.pop();
        }
        if !partial_lattice(&new_labels, label + 1) {
            return;
        }
        place(alpha, label + 1, new_shape, new_labels, out);
    });
}

/// Enumerate additions `adds` with Σ = k and new row r bounded by old row r−1.
fn horizontal_strips(shape: &[u32], row: usize, k: u32, adds: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
    if row == shape.len() {
        if k == 0 {
            f(adds);
        }
        return;
    }
    let cap = if row == 0 { k } else { (shape[row - 1] - shape[row]).min(k) };
    for a in (0..=cap).rev() {
        adds[row] = a;
        horizontal_strips(shape, row + 1, k - a, adds, f);
    }
    adds[row] = 0;
}

/// Reading rows top to bottom, each right to left, every prefix has #i ≥ #(i+1).
fn is_lattice(labels: &[Vec<u32>], n_labels: usize) -> bool {
    partial_lattice(labels, n_labels)
}

fn partial_lattice(labels: &[Vec<u32>], n_labels: usize) -> bool {
    let mut count = vec![0usize; n_labels.max(1)];
    for row in labels {
        for &l in row.iter().rev() {
            let l = l as usize;
            count[l] += 1;
            if l > 0 && count[l] > count[l - 1] {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: &[u32]) -> Partition {
        Partition::from_slice(x)
    }

    #[test]
    fn small_products() {
        assert_eq!(littlewood_richardson(&Partition::empty(), &p(&[2, 1])), vec![(p(&[2, 1]), 1)]);
        assert_eq!(littlewood_richardson(&p(&[1]), &p(&[1])), vec![(p(&[2]), 1), (p(&[1, 1]), 1)]);
        // s21·s21 = s42 + s411 + s33 + 2 s321 + s3111 + s222 + s2211
        let got = littlewood_richardson(&p(&[2, 1]), &p(&[2, 1]));
        let want = vec![
            (p(&[4, 2]), 1),
            (p(&[4, 1, 1]), 1),
            (p(&[3, 3]), 1),
            (p(&[3, 2, 1]), 2),
            (p(&[3, 1, 1, 1]), 1),
            (p(&[2, 2, 2]), 1),
            (p(&[2, 2, 1, 1]), 1),
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn commutes() {
        let a = p(&[3, 1]);
        let b = p(&[2, 2, 1]);
        assert_eq!(littlewood_richardson(&a, &b), littlewood_richardson(&b, &a));
    }

    #[test]
    fn su_strips_columns() {
        // in SU(2): (1)⊗(1) = (2) ⊕ ()
        assert_eq!(littlewood_richardson_su(&p(&[1]), &p(&[1]), 2), vec![(p(&[2]), 1), (Partition::empty(), 1)]);
    }
}
