use std::collections::BTreeMap;

use serde::Serialize;

use super::estimate::{mc_mean, mc_means, monte_carlo, EstimateWithCI, Mergeable};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::RngStream;
use crate::sampling::{gaussian_matrix, gmd_block, gram_schmidt_columns, haar_columns, over_gaussian_block};
use crate::scalar::Field;
use crate::weyl::{lambda_s, GroupPolynomial, MonomialIndex};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundedEstimate {
    pub estimate: EstimateWithCI,
    pub ell: usize,
    pub bound: f64,
}

impl BoundedEstimate {
    /// estimate ≤ bound + z·se.
    pub fn within(&self, z: f64) -> bool {
        self.estimate.value <= self.bound + z * self.estimate.std_error
    }

    /// |estimate| ≤ bound + z·se.
    pub fn abs_within(&self, z: f64) -> bool {
        self.estimate.value.abs() <= self.bound + z * self.estimate.std_error
    }
}

/// Number of off-diagonal factors, counted with multiplicity.
pub fn off_diagonal_count(indices: &[(usize, usize)]) -> usize {
    indices.iter().filter(|(i, j)| i != j).count()
}

/// E[∏ G_ij] over GMD(n) with 0-based indices; bound n^{−ℓ/2}.
pub fn gmd_moment(indices: &[(usize, usize)], n: usize, n_samples: usize, rng: &RngStream) -> Result<BoundedEstimate> {
    let mut mult: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &(i, j) in indices {
        if i >= n || j >= n {
            return Err(Error::InvalidShape(format!("entry ({}, {}) outside {n}×{n}", i + 1, j + 1)));
        }
        *mult.entry((i, j)).or_default() += 1;
    }
    if let Some((&(i, j), _)) = mult.iter().find(|(_, &m)| m > 2) {
        return Err(Error::MultiplicityTooHigh(i + 1, j + 1));
    }
    let ell = off_diagonal_count(indices);
    let c = indices.iter().map(|&(i, j)| i.max(j) + 1).max().unwrap_or(1);
    let estimate = mc_mean(n_samples, rng, |s| {
        let g = gmd_block::<f64, _>(n, c, s);
        indices.iter().map(|&p| g[p]).product()
    });
    Ok(BoundedEstimate { estimate, ell, bound: (n as f64).powf(-(ell as f64) / 2.0) })
}

/// ε_ℓ = 2^{ℓ+4}·n^{−ℓ/2}·2^{dℓ/√n}.
pub fn epsilon_ell(ell: usize, d: usize, n: usize) -> f64 {
    let (l, d, n) = (ell as f64, d as f64, n as f64);
    2f64.powf(l + 4.0) * n.powf(-l / 2.0) * 2f64.powf(d * l / n.sqrt())
}

/// Columns of a row-form monomial x_I = ∏_k x_{k, I_k}, rows 0..d each used once.
fn row_form(s: &MonomialIndex) -> Result<Vec<usize>> {
    let pos = s.positions();
    if pos.iter().any(|p| p.part != 0) || pos.iter().enumerate().any(|(k, p)| p.row != k) {
        return Err(Error::InvalidShape(format!("{s} is not of the form x_1,i1·…·x_d,id")));
    }
    Ok(pos.iter().map(|p| p.col).collect())
}

/// ⟨x_I, x_J⟩_ν for row forms over the same rows with Hamming distance ℓ ≥ 1; bound ε_ℓ.
pub fn off_diagonal_pairing(s: &MonomialIndex, t: &MonomialIndex, n: usize, n_samples: usize, rng: &RngStream) -> Result<BoundedEstimate> {
    let i = row_form(s)?;
    let j = row_form(t)?;
    if i.len() != j.len() {
        return Err(Error::InvalidShape(format!("{s} and {t} use different rows")));
    }
    let ell = i.iter().zip(&j).filter(|(a, b)| a != b).count();
    if ell == 0 {
        return Err(Error::InvalidShape("ℓ = 0: use the ν-norm of the monomial".into()));
    }
    let d = i.len();
    let c = i.iter().chain(&j).max().map_or(1, |m| m + 1);
    if c > n {
        return Err(Error::InvalidShape(format!("column {c} outside n = {n}")));
    }
    let estimate = mc_mean(n_samples, rng, |r| {
        let z = over_gaussian_block(n, d, c, r);
        let a: f64 = i.iter().enumerate().map(|(k, &col)| z[(k, col)]).product();
        let b: f64 = j.iter().enumerate().map(|(k, &col)| z[(k, col)]).product();
        a * b
    });
    Ok(BoundedEstimate { estimate, ell, bound: epsilon_ell(ell, d, n) })
}

/// ⌊n/2⌋!/(n^d·(⌊n/2⌋−d)!).
pub fn comf_projection_factor(d: usize, n: usize) -> Result<f64> {
    let h = n / 2;
    if d > h {
        return Err(Error::InvalidShape(format!("d = {d} exceeds ⌊n/2⌋ = {h}")));
    }
    Ok((0..d).map(|k| (h - k) as f64 / n as f64).product())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComfProjection {
    pub factor: f64,
    /// E_V Σ_S ⟨R_V f, H_S⟩²_γ over comfortable degree-d monomials S.
    pub lhs: EstimateWithCI,
    /// factor·‖f‖²_μ on the same draws.
    pub rhs: EstimateWithCI,
    /// Paired lhs − rhs; zero in expectation.
    pub diff: EstimateWithCI,
}

/// Terms of a comfortable junta as (coefficient, column of row k).
fn junta_terms(f: &GroupPolynomial) -> Result<(usize, Vec<(f64, Vec<usize>)>)> {
    let n = f.n();
    let d = f.degree();
    let mut out = Vec::new();
    for (m, c) in f.terms() {
        if m.degree() != d || !m.is_comfortable(n) {
            return Err(Error::NotComfortable(format!("{m} is not a comfortable degree-{d} monomial")));
        }
        out.push((c, row_form(m)?));
    }
    Ok((d, out))
}

fn distinct_tuples(h: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|t: Vec<usize>| (0..h).filter(|c| !t.contains(c)).map(|c| [t.as_slice(), &[c]].concat()).collect::<Vec<_>>())
            .collect();
    }
    out
}

/// For V ~ Haar, Σ over comfortable S of the squared H_S-coefficient of X ↦ f(XV), against factor·f(√n·V)².
pub fn comf_projection_mc(f: &GroupPolynomial, n_samples: usize, rng: &RngStream) -> Result<ComfProjection> {
    if f.field() != Field::Real {
        return Err(Error::FieldMismatch("comfortable juntas are real polynomials".into()));
    }
    let n = f.n();
    let (d, terms) = junta_terms(f)?;
    let factor = comf_projection_factor(d, n)?;
    let tuples = distinct_tuples(n / 2, d);
    let c = terms.iter().flat_map(|(_, cols)| cols.iter()).max().map_or(1, |m| m + 1);
    let sqrt_n = (n as f64).sqrt();
    let est = mc_means(3, n_samples, rng, |r, out| {
        let v = haar_columns::<f64, _>(n, c, r).expect("Gaussian block has full rank");
        let mut lhs = 0.0;
        for tup in &tuples {
            let coef: f64 = terms.iter().map(|(a, cols)| a * cols.iter().zip(tup).map(|(&i, &row)| v[(row, i)]).product::<f64>()).sum();
            lhs += coef * coef;
        }
        let fv: f64 = terms.iter().map(|(a, cols)| a * cols.iter().enumerate().map(|(k, &i)| sqrt_n * v[(k, i)]).product::<f64>()).sum();
        out[0] = lhs;
        out[1] = factor * fv * fv;
        out[2] = lhs - factor * fv * fv;
    });
    Ok(ComfProjection { factor, lhs: est[0], rhs: est[1], diff: est[2] })
}

/// Sums for the no-intercept regression b = β·a + r with HC0 errors.
#[derive(Debug, Clone, Copy, Default)]
struct RegressionSums {
    n: usize,
    aa: f64,
    ab: f64,
    aaaa: f64,
    aaab: f64,
    aabb: f64,
}

impl Mergeable for RegressionSums {
    fn merge(&mut self, o: Self) {
        self.n += o.n;
        self.aa += o.aa;
        self.ab += o.ab;
        self.aaaa += o.aaaa;
        self.aaab += o.aaab;
        self.aabb += o.aabb;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaRegression {
    pub slope: EstimateWithCI,
    pub exact: f64,
}

/// Slope of H_S(Y) on H_S(√n·X) for Y Gaussian and X its Gram–Schmidt part; its mean is λ_S.
pub fn lambda_s_regression(s: &MonomialIndex, n: usize, n_samples: usize, rng: &RngStream) -> Result<LambdaRegression> {
    let exact = lambda_s(s, n)?;
    let (r, c) = s.positions().iter().fold((1, 1), |(r, c), p| (r.max(p.row + 1), c.max(p.col + 1)));
    let h = GroupPolynomial::monomial(n, Field::Real, s.clone(), 1.0);
    let sqrt_n = (n as f64).sqrt();
    let sums = monte_carlo(n_samples, rng, RegressionSums::default, |rg, acc| {
        let y: Matrix<f64> = gaussian_matrix(n, c, rg);
        let (q, _) = gram_schmidt_columns(&y).expect("Gaussian block has full rank");
        let yb = Matrix::from_fn(r, c, |i, j| y[(i, j)]);
        let qb = Matrix::from_fn(r, c, |i, j| q[(i, j)]);
        let a = h.evaluate_real_scaled(&qb, sqrt_n);
        let b = h.evaluate_real(&yb);
        acc.n += 1;
        acc.aa += a * a;
        acc.ab += a * b;
        acc.aaaa += a.powi(4);
        acc.aaab += a.powi(3) * b;
        acc.aabb += a * a * b * b;
    });
    let beta = sums.ab / sums.aa;
    let resid = sums.aabb - 2.0 * beta * sums.aaab + beta * beta * sums.aaaa;
    let se = resid.max(0.0).sqrt() / sums.aa;
    Ok(LambdaRegression {
        slope: EstimateWithCI { value: beta, std_error: se, n_samples: sums.n, seed: rng.seed(), stream: rng.stream_id() },
        exact,
    })
}
