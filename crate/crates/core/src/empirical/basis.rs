use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use super::cap::IndicatorSpec;
use super::estimate::{EstimateWithCI, CHUNK};
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::matrix::DenseMatrix;
use crate::rng::RngStream;
use crate::sampling::sample_haar;
use crate::weyl::{GroupPolynomial, MonomialIndex, Position};

/// Gram eigenvalues below this fraction of the largest are dropped.
pub const RELATIVE_CUTOFF: f64 = 1e-6;

/// Fitting needs this many samples per monomial.
pub const SAMPLES_PER_MONOMIAL: usize = 50;

/// Held-out check stream label; fitting chunks use small labels.
const HOLDOUT_LABEL: u64 = 1 << 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureFamily {
    /// Every monomial of degree ≤ d in the real coordinates of the entries.
    Full,
    /// Powers of Re X₁₁ only; spans the bi-invariant part of V_{≤d}.
    Zonal,
}

/// Monomial features built by multiplying a parent monomial by one coordinate.
#[derive(Debug, Clone)]
struct FeatureSet {
    monomials: Vec<MonomialIndex>,
    /// (parent, coordinate index); entry 0 is the constant.
    recipe: Vec<(usize, usize)>,
    coords: Vec<Position>,
}

impl FeatureSet {
    fn new(g: &GroupSpec, d: usize, family: FeatureFamily) -> Result<Self> {
        let parts = g.field().ok_or_else(|| Error::Unsupported(format!("{g} has no matrix coordinates")))?.parts();
        let coords: Vec<Position> = match family {
            FeatureFamily::Full => (0..g.n)
                .flat_map(|r| (0..g.n).flat_map(move |c| (0..parts).map(move |p| Position::with_part(r, c, p as u8))))
                .collect(),
            FeatureFamily::Zonal => vec![Position::new(0, 0)],
        };
        let mut monomials = vec![MonomialIndex::default()];
        let mut recipe = vec![(0, 0)];
        let mut last_coord = vec![0usize];
        let mut frontier: Vec<usize> = vec![0];
        for _ in 0..d {
            let mut next = Vec::new();
            for &parent in &frontier {
                let start = if parent == 0 { 0 } else { last_coord[parent] };
                for k in start..coords.len() {
                    let mut pos = monomials[parent].positions().to_vec();
                    pos.push(coords[k]);
                    monomials.push(MonomialIndex::new(pos));
                    recipe.push((parent, k));
                    last_coord.push(k);
                    next.push(monomials.len() - 1);
                }
            }
            frontier = next;
        }
        Ok(FeatureSet { monomials, recipe, coords })
    }

    fn len(&self) -> usize {
        self.monomials.len()
    }

    /// Features at √n·X.
    fn fill(&self, x: &DenseMatrix, out: &mut [f64]) {
        let s = (x.n_rows() as f64).sqrt();
        let vals: Vec<f64> = self.coords.iter().map(|p| s * x.part(p.row, p.col, p.part as usize)).collect();
        out[0] = 1.0;
        for i in 1..self.recipe.len() {
            let (parent, k) = self.recipe[i];
            out[i] = out[parent] * vals[k];
        }
    }
}

/// Orthonormal (in the empirical L²(μ) sense) functions spanning the numerically retained part of V_{≤d}.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalBasis {
    pub group: GroupSpec,
    pub d: usize,
    pub family: FeatureFamily,
    pub monomials: Vec<MonomialIndex>,
    /// rank × monomial count; basis function i is Σ_j coefficients[i][j]·monomial_j(√n X).
    pub coefficients: Vec<Vec<f64>>,
    pub rank: usize,
    pub threshold: f64,
    pub n_fit: usize,
    pub seed: u64,
    pub stream: u64,
    /// max |Gram − I| of the basis on a held-out sample of size n_fit; about 2√(m/n_fit) for m monomials.
    pub holdout_gram_defect: f64,
    #[serde(skip)]
    features: FeatureSetHandle,
}

#[derive(Debug, Clone, Default)]
struct FeatureSetHandle(Option<FeatureSet>);

impl EmpiricalBasis {
    pub fn monomial_count(&self) -> usize {
        self.monomials.len()
    }

    fn feature_set(&self) -> &FeatureSet {
        self.features.0.as_ref().expect("feature set present")
    }

    /// Cᵀ: monomial values times this matrix give basis values.
    fn transform(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.monomial_count(), self.rank, |j, i| self.coefficients[i][j])
    }

    /// Values of all basis functions at X (undilated).
    pub fn evaluate(&self, x: &DenseMatrix, out: &mut [f64]) {
        let fs = self.feature_set();
        let mut feats = vec![0.0; fs.len()];
        fs.fill(x, &mut feats);
        for (o, row) in out.iter_mut().zip(&self.coefficients) {
            *o = row.iter().zip(&feats).map(|(a, b)| a * b).sum();
        }
    }
}

/// Σ rows and Σ rowᵀrow of the sample matrix Φ·P (P = `post`, identity if absent), computed chunkwise in parallel.
pub(crate) fn chunked_moments<F>(n_samples: usize, rng: &RngStream, k: usize, post: Option<&DMatrix<f64>>, fill: F) -> Result<(DVector<f64>, DMatrix<f64>)>
where
    F: Fn(&mut RngStream, &mut [f64]) -> Result<()> + Sync,
{
    let n_chunks = n_samples.div_ceil(CHUNK);
    let parts: Vec<Result<(DVector<f64>, DMatrix<f64>)>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng.child(c as u64);
            let len = CHUNK.min(n_samples - c * CHUNK);
            let mut phi = DMatrix::<f64>::zeros(len, k);
            let mut row = vec![0.0; k];
            for i in 0..len {
                fill(&mut r, &mut row)?;
                for (j, v) in row.iter().enumerate() {
                    phi[(i, j)] = *v;
                }
            }
            let phi = match post {
                Some(p) => phi * p,
                None => phi,
            };
            let sum = DVector::from_iterator(phi.ncols(), phi.column_iter().map(|c| c.sum()));
            Ok((sum, phi.tr_mul(&phi)))
        })
        .collect();
    let out = post.map_or(k, |p| p.ncols());
    let mut sum = DVector::zeros(out);
    let mut gram = DMatrix::zeros(out, out);
    for p in parts {
        let (s, g) = p?;
        sum += s;
        gram += g;
    }
    Ok((sum, gram))
}

pub fn fit_empirical_basis(g: &GroupSpec, d: usize, n_fit: usize, rng: &RngStream) -> Result<EmpiricalBasis> {
    fit_basis_with(g, d, FeatureFamily::Full, n_fit, rng)
}

pub fn fit_basis_with(g: &GroupSpec, d: usize, family: FeatureFamily, n_fit: usize, rng: &RngStream) -> Result<EmpiricalBasis> {
    if d > 0 && 2 * d >= g.n {
        return Err(Error::InvalidShape(format!("degree {d} needs d < n/2 for {g}")));
    }
    let fs = FeatureSet::new(g, d, family)?;
    let m = fs.len();
    let needed = SAMPLES_PER_MONOMIAL * m;
    if n_fit < needed {
        return Err(Error::InsufficientSamples { needed, got: n_fit });
    }
    let (_, gram) = chunked_moments(n_fit, rng, m, None, |r, row| {
        fs.fill(&sample_haar(g, r)?, row);
        Ok(())
    })?;
    let gram = gram / n_fit as f64;
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let threshold = RELATIVE_CUTOFF * top;
    let mut order: Vec<usize> = (0..m).filter(|&i| eig.eigenvalues[i] > threshold).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let coefficients: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| {
            let s = 1.0 / eig.eigenvalues[i].sqrt();
            eig.eigenvectors.column(i).iter().map(|v| v * s).collect()
        })
        .collect();
    let rank = coefficients.len();
    let mut basis = EmpiricalBasis {
        group: *g,
        d,
        family,
        monomials: fs.monomials.clone(),
        coefficients,
        rank,
        threshold,
        n_fit,
        seed: rng.seed(),
        stream: rng.stream_id(),
        holdout_gram_defect: f64::NAN,
        features: FeatureSetHandle(Some(fs)),
    };
    let holdout = rng.child(HOLDOUT_LABEL);
    let ct = basis.transform();
    let fs = basis.feature_set();
    let (_, hg) = chunked_moments(n_fit, &holdout, m, Some(&ct), |r, row| {
        fs.fill(&sample_haar(g, r)?, row);
        Ok(())
    })?;
    let hg = hg / n_fit as f64;
    basis.holdout_gram_defect =
        (0..rank).flat_map(|i| (0..rank).map(move |j| (i, j))).map(|(i, j)| (hg[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max);
    Ok(basis)
}

/// Function whose low-degree weight is estimated.
#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Indicator(&'a IndicatorSpec),
    /// `dilated` evaluates at √n·X instead of X.
    Polynomial { p: &'a GroupPolynomial, dilated: bool },
}

impl Target<'_> {
    fn value(&self, x: &DenseMatrix) -> Result<f64> {
        match self {
            Target::Indicator(a) => {
                let x = x.as_real().ok_or_else(|| Error::Unsupported("indicators live on SO(n)".into()))?;
                Ok(if a.contains(x) { 1.0 } else { 0.0 })
            }
            Target::Polynomial { p, dilated: false } => p.evaluate(x),
            Target::Polynomial { p, dilated: true } => p.evaluate(&x.scaled((x.n_rows() as f64).sqrt())),
        }
    }
}

/// Unbiased estimate of Σ_b ⟨f,b⟩² on a sample independent of the fit.
pub fn project_low_degree_norm(f: Target<'_>, basis: &EmpiricalBasis, n_eval: usize, rng: &RngStream) -> Result<EstimateWithCI> {
    if rng.seed() == basis.seed && rng.stream_id() == basis.stream {
        return Err(Error::StreamReuse(rng.seed(), rng.stream_id()));
    }
    if let Target::Polynomial { p, .. } = f {
        if !p.terms().all(|(m, _)| m.positions().iter().all(|q| q.row < basis.group.n && q.col < basis.group.n)) {
            return Err(Error::InvalidShape(format!("polynomial outside {}", basis.group)));
        }
    }
    if n_eval < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n_eval });
    }
    let g = basis.group;
    let fs = basis.feature_set();
    let ct = basis.transform();
    let (sum, second) = chunked_moments(n_eval, rng, fs.len(), Some(&ct), |r, row| {
        let x = sample_haar(&g, r)?;
        let fx = f.value(&x)?;
        if fx == 0.0 {
            row.iter_mut().for_each(|v| *v = 0.0);
        } else {
            fs.fill(&x, row);
            row.iter_mut().for_each(|v| *v *= fx);
        }
        Ok(())
    })?;
    let nn = n_eval as f64;
    let mean = sum / nn;
    let cov = (second - &mean * mean.transpose() * nn) / (nn - 1.0);
    let value = mean.norm_squared() - cov.trace() / nn;
    let var = 4.0 * (mean.transpose() * &cov * &mean)[(0, 0)] / nn + 2.0 * (&cov * &cov).trace() / (nn * nn);
    Ok(EstimateWithCI { value, std_error: var.max(0.0).sqrt(), n_samples: n_eval, seed: rng.seed(), stream: rng.stream_id() })
}
