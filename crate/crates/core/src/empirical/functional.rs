use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cap::{require_so, IndicatorSpec};
use super::estimate::{mc_means, monte_carlo, EstimateWithCI, Moments};
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::matrix::{DenseMatrix, Matrix};
use crate::rng::RngStream;
use crate::sampling::{gaussian_matrix, gmd_block, haar, haar_columns, special_gram_schmidt_typed, Axis, GroupField};
use crate::scalar::{Field, Quaternion};
use crate::weyl::GroupPolynomial;

/// Measure floor for conditional sampling in convolution forms.
pub const CONVOLUTION_FLOOR: f64 = 1e-4;
/// Measure floor for the nested ‖f*f‖² estimator.
pub const CONV_SQ_FLOOR: f64 = 1e-3;

pub const MAX_NORM_DEGREE: usize = 6;
pub const MAX_NOISE_DEGREE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    /// Haar measure, read at √n·X.
    Mu,
    Gamma,
    /// Y·G with Y Gaussian and G Gaussian maker, independent.
    Nu,
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distribution::Mu => "mu",
            Distribution::Gamma => "gamma",
            Distribution::Nu => "nu",
        })
    }
}

impl FromStr for Distribution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mu" | "μ" | "haar" => Ok(Distribution::Mu),
            "gamma" | "γ" | "gaussian" => Ok(Distribution::Gamma),
            "nu" | "ν" | "over-gaussian" => Ok(Distribution::Nu),
            _ => Err(Error::Config(format!("unknown distribution {s:?}"))),
        }
    }
}

/// `rows × cols` top-left block of a draw from the distribution.
fn draw_block<T: GroupField>(dist: Distribution, n: usize, rows: usize, cols: usize, rng: &mut RngStream) -> Result<Matrix<T>> {
    Ok(match dist {
        Distribution::Mu => {
            let x = haar_columns::<T, _>(n, cols, rng)?;
            Matrix::from_fn(rows, cols, |i, j| x[(i, j)]).scaled((n as f64).sqrt())
        }
        Distribution::Gamma => gaussian_matrix::<T, _>(rows, cols, rng),
        Distribution::Nu => gaussian_matrix::<T, _>(rows, cols, rng).matmul(&gmd_block::<T, _>(n, cols, rng)),
    })
}

/// Monte-Carlo ‖p‖² under μ (dilated), γ or ν.
pub fn norm_under(dist: Distribution, p: &GroupPolynomial, n_samples: usize, rng: &RngStream) -> Result<EstimateWithCI> {
    if p.degree() > MAX_NORM_DEGREE {
        return Err(Error::TooLarge(format!("degree {} > {MAX_NORM_DEGREE}", p.degree())));
    }
    let n = p.n();
    let (r, c) = p.support();
    let (r, c) = (r.max(1), c.max(1));
    fn run<T: GroupField>(dist: Distribution, p: &GroupPolynomial, n: usize, r: usize, c: usize, n_samples: usize, rng: &RngStream) -> Result<EstimateWithCI>
    where
        DenseMatrix: From<Matrix<T>>,
    {
        let acc = monte_carlo(
            n_samples,
            rng,
            || (Moments::default(), ErrSlot::default()),
            |s, (m, err)| match draw_block::<T>(dist, n, r, c, s).and_then(|b| p.evaluate(&DenseMatrix::from(b))) {
                Ok(v) => m.push(v * v),
                Err(e) => err.0 = Some(e),
            },
        );
        if let Some(e) = acc.1 .0 {
            return Err(e);
        }
        Ok(acc.0.estimate(rng))
    }
    match p.field() {
        Field::Real => run::<f64>(dist, p, n, r, c, n_samples, rng),
        Field::Complex => run::<Complex64>(dist, p, n, r, c, n_samples, rng),
        Field::Quaternion => run::<Quaternion>(dist, p, n, r, c, n_samples, rng),
    }
}

/// First error seen inside a Monte-Carlo chunk.
#[derive(Debug, Default)]
pub(crate) struct ErrSlot(pub Option<Error>);

impl super::estimate::Mergeable for ErrSlot {
    fn merge(&mut self, o: Self) {
        if self.0.is_none() {
            self.0 = o.0;
        }
    }
}

/// ⟨f_A*f_B, f_C⟩ = Pr_{a∼A, b∼B}[ab ∈ C]/μ(C) with normalized indicators.
pub fn convolution_form(a: &IndicatorSpec, b: &IndicatorSpec, c: &IndicatorSpec, g: &GroupSpec, n_samples: usize, rng: &RngStream) -> Result<EstimateWithCI> {
    let n = require_so(g)?;
    a.check_measure(n, CONVOLUTION_FLOOR)?;
    b.check_measure(n, CONVOLUTION_FLOOR)?;
    let mc = c.measure(n);
    if mc <= 0.0 {
        return Err(Error::MeasureTooSmall(mc));
    }
    let hits = hit_rate(n_samples, rng, |s| {
        let x = a.sample(n, s)?;
        let y = b.sample(n, s)?;
        Ok(c.contains_product(&x, &y))
    })?;
    Ok(hits.scaled(1.0 / mc))
}

/// Pr[ab ∈ C] for a∼A, b∼B, without normalization.
pub fn product_hit_rate(a: &IndicatorSpec, b: &IndicatorSpec, c: &IndicatorSpec, g: &GroupSpec, n_samples: usize, rng: &RngStream) -> Result<EstimateWithCI> {
    let n = require_so(g)?;
    a.check_measure(n, CONVOLUTION_FLOOR)?;
    b.check_measure(n, CONVOLUTION_FLOOR)?;
    hit_rate(n_samples, rng, |s| {
        let x = a.sample(n, s)?;
        let y = b.sample(n, s)?;
        Ok(c.contains_product(&x, &y))
    })
}

fn hit_rate<F>(n_samples: usize, rng: &RngStream, trial: F) -> Result<EstimateWithCI>
where
    F: Fn(&mut RngStream) -> Result<bool> + Sync,
{
    let acc = monte_carlo(
        n_samples,
        rng,
        || (Moments::default(), ErrSlot::default()),
        |s, (m, err)| match trial(s) {
            Ok(h) => m.push(if h { 1.0 } else { 0.0 }),
            Err(e) => err.0 = Some(e),
        },
    );
    if let Some(e) = acc.1 .0 {
        return Err(e);
    }
    Ok(acc.0.estimate(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvSquareNorm {
    /// Estimate of ‖f_A*f_A‖²₂.
    pub norm_sq: EstimateWithCI,
    /// 1/norm_sq: lower bound on μ(A²).
    pub implied_lower_bound: f64,
    /// Fraction of outer draws x with a witness y ∈ A, xy⁻¹ ∈ A among the inner draws.
    pub witnessed_measure: EstimateWithCI,
}

/// Nested U-statistic: for x ~ Haar and m inner draws y ~ A with k hits xy⁻¹ ∈ A, k(k−1)/(m(m−1)α²) is unbiased for (f*f)(x)².
pub fn conv_sq_norm(a: &IndicatorSpec, g: &GroupSpec, n_outer: usize, n_inner: usize, rng: &RngStream) -> Result<ConvSquareNorm> {
    let n = require_so(g)?;
    let alpha = a.check_measure(n, CONV_SQ_FLOOR)?;
    if n_inner < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n_inner });
    }
    let m = n_inner as f64;
    let acc = monte_carlo(
        n_outer,
        rng,
        || (Moments::default(), (Moments::default(), ErrSlot::default())),
        |s, (norm, (wit, err))| {
            let res = (|| -> Result<usize> {
                let x = haar::<f64, _>(n, s)?;
                let mut k = 0;
                for _ in 0..n_inner {
                    let y = a.sample(n, s)?;
                    if a.contains_quotient(&x, &y) {
                        k += 1;
                    }
                }
                Ok(k)
            })();
            match res {
                Ok(k) => {
                    let k = k as f64;
                    norm.push(k * (k - 1.0) / (m * (m - 1.0)) / (alpha * alpha));
                    wit.push(if k > 0.0 { 1.0 } else { 0.0 });
                }
                Err(e) => err.0 = Some(e),
            }
        },
    );
    let (norm, (wit, err)) = acc;
    if let Some(e) = err.0 {
        return Err(e);
    }
    let norm_sq = norm.estimate(rng);
    Ok(ConvSquareNorm { norm_sq, implied_lower_bound: 1.0 / norm_sq.value, witnessed_measure: wit.estimate(rng) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoisePairing {
    /// ⟨T_ρ f, f⟩_μ.
    pub pairing: EstimateWithCI,
    /// ‖f‖²_μ on the same draws.
    pub norm_sq: EstimateWithCI,
    /// Mean of the paired difference pairing − floor·norm_sq.
    pub floor_gap: EstimateWithCI,
    pub floor: f64,
}

/// ⟨T_ρ f, f⟩_μ for a real polynomial on SO(n) (√n-dilated).
pub fn noise_pairing(f: &GroupPolynomial, rho: f64, g: &GroupSpec, n_samples: usize, rng: &RngStream) -> Result<EstimateWithCI> {
    noise_pairing_with_floor(f, rho, g, 0.0, n_samples, rng).map(|r| r.pairing)
}

/// Same draws also give ‖f‖²_μ and the paired gap against `floor`·‖f‖²_μ.
pub fn noise_pairing_with_floor(f: &GroupPolynomial, rho: f64, g: &GroupSpec, floor: f64, n_samples: usize, rng: &RngStream) -> Result<NoisePairing> {
    let n = require_so(g)?;
    if f.field() != Field::Real || f.n() != n {
        return Err(Error::FieldMismatch(format!("noise pairing needs a real polynomial on {g}")));
    }
    if f.degree() > MAX_NOISE_DEGREE {
        return Err(Error::TooLarge(format!("degree {} > {MAX_NOISE_DEGREE}", f.degree())));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Config(format!("ρ = {rho} outside [0, 1]")));
    }
    let (r, c) = f.support();
    let (r, c) = (r.max(1), c.max(1));
    let sqrt_n = (n as f64).sqrt();
    let comp = (1.0 - rho * rho).sqrt();
    let failed = std::sync::atomic::AtomicBool::new(false);
    let est = mc_means(3, n_samples, rng, |s, out| {
        let res = (|| -> Result<(f64, f64)> {
            let v = haar_columns::<f64, _>(n, c, s)?;
            let z = gaussian_matrix::<f64, _>(n, n, s);
            let w = gaussian_matrix::<f64, _>(n, n, s);
            let zp = Matrix::from_fn(n, n, |i, j| rho * z[(i, j)] + comp * w[(i, j)]);
            let x = special_gram_schmidt_typed(&z, Axis::Columns)?;
            let xp = special_gram_schmidt_typed(&zp, Axis::Columns)?;
            let top = |m: &Matrix<f64>| Matrix::from_fn(r, n, |i, j| m[(i, j)]).matmul(&v);
            Ok((f.evaluate_real_scaled(&top(&x), sqrt_n), f.evaluate_real_scaled(&top(&xp), sqrt_n)))
        })();
        match res {
            Ok((a, b)) => {
                out[0] = a * b;
                out[1] = a * a;
                out[2] = a * b - floor * a * a;
            }
            Err(_) => {
                failed.store(true, std::sync::atomic::Ordering::Relaxed);
                out.iter_mut().for_each(|o| *o = 0.0);
            }
        }
    });
    if failed.into_inner() {
        return Err(Error::RankDeficient(0.0));
    }
    Ok(NoisePairing { pairing: est[0], norm_sq: est[1], floor_gap: est[2], floor })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::cap::Sense;
    use crate::partitions::Partition;
    use crate::weyl::{comfortable_junta, MonomialIndex};

    fn x11(n: usize) -> GroupPolynomial {
        GroupPolynomial::monomial(n, Field::Real, MonomialIndex::from_pairs(&[(0, 0)]), 1.0)
    }

    #[test]
    fn constant_has_unit_norm_everywhere() {
        let one = GroupPolynomial::constant(8, Field::Real, 1.0);
        for d in [Distribution::Mu, Distribution::Gamma, Distribution::Nu] {
            let e = norm_under(d, &one, 1000, &RngStream::new(1, 0)).unwrap();
            assert_eq!(e.value, 1.0);
        }
    }

    #[test]
    fn norm_examples() {
        let p = comfortable_junta(&Partition::from_slice(&[1, 1]), 16).unwrap();
        let e = norm_under(Distribution::Gamma, &p, 200_000, &RngStream::new(2, 0)).unwrap();
        assert!(e.agrees_with(2.0, 3.0), "{e:?}");
        let e = norm_under(Distribution::Nu, &x11(16), 200_000, &RngStream::new(2, 1)).unwrap();
        assert!(e.agrees_with(1.0, 3.0), "{e:?}");
        let e = norm_under(Distribution::Mu, &x11(16), 200_000, &RngStream::new(2, 2)).unwrap();
        assert!(e.agrees_with(1.0, 3.0), "{e:?}");
    }

    #[test]
    fn complex_entries_have_unit_norm() {
        let p = GroupPolynomial::normalized_monomial(4, Field::Complex, MonomialIndex::new(vec![crate::weyl::Position::with_part(0, 1, 1)]));
        for d in [Distribution::Mu, Distribution::Gamma, Distribution::Nu] {
            let e = norm_under(d, &p, 100_000, &RngStream::new(3, 0)).unwrap();
            assert!(e.agrees_with(1.0, 3.0), "{d}: {e:?}");
        }
    }

    #[test]
    fn whole_group_convolution_is_one() {
        let w = IndicatorSpec::Whole;
        let e = convolution_form(&w, &w, &w, &GroupSpec::so(5), 1000, &RngStream::new(4, 0)).unwrap();
        assert_eq!((e.value, e.std_error), (1.0, 0.0));
        let c = conv_sq_norm(&w, &GroupSpec::so(5), 200, 4, &RngStream::new(4, 1)).unwrap();
        assert_eq!(c.norm_sq.value, 1.0);
        assert_eq!(c.implied_lower_bound, 1.0);
    }

    #[test]
    fn deep_negative_cap_is_product_free() {
        let a = IndicatorSpec::cap_lt(-0.6);
        let e = convolution_form(&a, &a, &a, &GroupSpec::so(8), 20_000, &RngStream::new(5, 0)).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn measure_floor() {
        let tiny = IndicatorSpec::cap_gt(0.999);
        let w = IndicatorSpec::Whole;
        assert!(matches!(convolution_form(&tiny, &w, &w, &GroupSpec::so(8), 10, &RngStream::new(6, 0)), Err(Error::MeasureTooSmall(_))));
        assert!(matches!(conv_sq_norm(&tiny, &GroupSpec::so(8), 10, 4, &RngStream::new(6, 0)), Err(Error::MeasureTooSmall(_))));
        assert!(matches!(convolution_form(&w, &w, &w, &GroupSpec::su(3), 10, &RngStream::new(6, 0)), Err(Error::Unsupported(_))));
    }

    /// ‖f*f‖² for the SO(3) cap {X₁₁ > t}: x enters only through s = X₁₁ (uniform on [−1,1]), and
    /// P(s) = Pr_{u uniform on the cap}[⟨a,u⟩ > t] with a₁ = s; u₁ is uniform on [t,1].
    fn so3_cap_oracle(t: f64) -> f64 {
        let alpha = (1.0 - t) / 2.0;
        let steps = 2000;
        let p_of = |s: f64| {
            let mut acc = 0.0;
            for k in 0..steps {
                let c = t + (1.0 - t) * (k as f64 + 0.5) / steps as f64;
                let den = (1.0 - s * s).sqrt() * (1.0 - c * c).sqrt();
                let ratio = if den == 0.0 { if s * c > t { -1.0 } else { 1.0 } } else { ((t - s * c) / den).clamp(-1.0, 1.0) };
                acc += ratio.acos() / std::f64::consts::PI;
            }
            acc / steps as f64
        };
        let mut total = 0.0;
        for k in 0..steps {
            let s = -1.0 + 2.0 * (k as f64 + 0.5) / steps as f64;
            total += p_of(s).powi(2);
        }
        (total / steps as f64) / (alpha * alpha)
    }

    #[test]
    fn so3_cap_matches_quadrature() {
        let t = 0.9;
        let oracle = so3_cap_oracle(t);
        let a = IndicatorSpec::cap_gt(t);
        let c = conv_sq_norm(&a, &GroupSpec::so(3), 40_000, 32, &RngStream::new(7, 0)).unwrap();
        assert!(c.norm_sq.agrees_with(oracle, 3.0), "oracle {oracle}, {:?}", c.norm_sq);
        assert!(c.implied_lower_bound <= c.witnessed_measure.upper(3.0));
    }

    #[test]
    fn hemisphere_norm_at_least_one() {
        let a = IndicatorSpec::Cap { sense: Sense::Gt, t: 0.0, coord: (0, 0) };
        let c = conv_sq_norm(&a, &GroupSpec::so(3), 5000, 16, &RngStream::new(8, 0)).unwrap();
        assert!(c.norm_sq.upper(3.0) >= 1.0);
        assert!(c.norm_sq.value >= 1.0 - 3.0 * c.norm_sq.std_error);
    }

    #[test]
    fn noise_endpoints() {
        let g = GroupSpec::so(8);
        let f = x11(8);
        let one = noise_pairing_with_floor(&f, 1.0, &g, 0.0, 50_000, &RngStream::new(9, 0)).unwrap();
        assert_eq!(one.pairing.value, one.norm_sq.value);
        assert!(one.norm_sq.agrees_with(1.0, 3.0));
        let zero = noise_pairing(&f, 0.0, &g, 50_000, &RngStream::new(9, 1)).unwrap();
        assert!(zero.agrees_with(0.0, 3.0), "{zero:?}");
    }
}
