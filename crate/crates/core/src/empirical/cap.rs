use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::group::{Family, GroupSpec};
use crate::matrix::Matrix;
use crate::sampling::{gram_schmidt_columns, haar, GroupField};

/// Rejection loops give up after this many draws per accepted sample.
const REJECTION_LIMIT: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Gt,
    Lt,
}

impl Sense {
    pub fn holds(self, x: f64, t: f64) -> bool {
        match self {
            Sense::Gt => x > t,
            Sense::Lt => x < t,
        }
    }
}

pub type Predicate = Arc<dyn Fn(&Matrix<f64>) -> bool + Send + Sync>;

/// Subset of SO(n) given by its indicator; coordinates are 0-based.
#[derive(Clone)]
pub enum IndicatorSpec {
    Whole,
    Cap { sense: Sense, t: f64, coord: (usize, usize) },
    /// Caller supplies the exact Haar measure used for normalization.
    Custom { name: String, predicate: Predicate, measure: f64 },
}

impl IndicatorSpec {
    pub fn cap_gt(t: f64) -> Self {
        IndicatorSpec::Cap { sense: Sense::Gt, t, coord: (0, 0) }
    }

    pub fn cap_lt(t: f64) -> Self {
        IndicatorSpec::Cap { sense: Sense::Lt, t, coord: (0, 0) }
    }

    /// Cap {X₁₁ ≷ t} with Haar measure exactly `alpha` on SO(n).
    pub fn cap_with_measure(n: usize, alpha: f64, sense: Sense) -> Self {
        IndicatorSpec::Cap { sense, t: cap_threshold(n, alpha, sense), coord: (0, 0) }
    }

    pub fn measure(&self, n: usize) -> f64 {
        match self {
            IndicatorSpec::Whole => 1.0,
            IndicatorSpec::Cap { sense, t, .. } => cap_measure(n, *t, *sense),
            IndicatorSpec::Custom { measure, .. } => *measure,
        }
    }

    pub fn contains(&self, x: &Matrix<f64>) -> bool {
        match self {
            IndicatorSpec::Whole => true,
            IndicatorSpec::Cap { sense, t, coord } => sense.holds(x[*coord], *t),
            IndicatorSpec::Custom { predicate, .. } => predicate(x),
        }
    }

    /// a·b ∈ A; caps only read one entry of the product.
    pub fn contains_product(&self, a: &Matrix<f64>, b: &Matrix<f64>) -> bool {
        match self {
            IndicatorSpec::Whole => true,
            IndicatorSpec::Cap { sense, t, coord: (r, c) } => {
                let v: f64 = (0..a.cols()).map(|k| a[(*r, k)] * b[(k, *c)]).sum();
                sense.holds(v, *t)
            }
            IndicatorSpec::Custom { predicate, .. } => predicate(&a.matmul(b)),
        }
    }

    /// a·bᵀ ∈ A.
    pub fn contains_quotient(&self, a: &Matrix<f64>, b: &Matrix<f64>) -> bool {
        match self {
            IndicatorSpec::Whole => true,
            IndicatorSpec::Cap { sense, t, coord: (r, c) } => {
                let v: f64 = a.row(*r).iter().zip(b.row(*c)).map(|(x, y)| x * y).sum();
                sense.holds(v, *t)
            }
            IndicatorSpec::Custom { predicate, .. } => predicate(&a.matmul(&b.transpose())),
        }
    }

    /// Haar element of SO(n) conditioned on membership.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Matrix<f64>> {
        match self {
            IndicatorSpec::Whole => haar::<f64, R>(n, rng),
            IndicatorSpec::Cap { sense, t, coord } => {
                let x = sample_first_column_cap(n, *sense, *t, rng)?;
                Ok(move_entry(x, *coord))
            }
            IndicatorSpec::Custom { predicate, .. } => {
                for _ in 0..REJECTION_LIMIT {
                    let x = haar::<f64, R>(n, rng)?;
                    if predicate(&x) {
                        return Ok(x);
                    }
                }
                Err(Error::MeasureTooSmall(1.0 / REJECTION_LIMIT as f64))
            }
        }
    }

    pub fn check_measure(&self, n: usize, floor: f64) -> Result<f64> {
        let m = self.measure(n);
        if m < floor {
            Err(Error::MeasureTooSmall(m))
        } else {
            Ok(m)
        }
    }
}

impl fmt::Debug for IndicatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for IndicatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndicatorSpec::Whole => write!(f, "G"),
            IndicatorSpec::Cap { sense, t, coord: (r, c) } => {
                let op = if *sense == Sense::Gt { ">" } else { "<" };
                write!(f, "{{X{},{} {op} {t}}}", r + 1, c + 1)
            }
            IndicatorSpec::Custom { name, .. } => write!(f, "{name}"),
        }
    }
}

impl Serialize for IndicatorSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            IndicatorSpec::Whole => {
                let mut st = s.serialize_struct("IndicatorSpec", 1)?;
                st.serialize_field("kind", "whole")?;
                st.end()
            }
            IndicatorSpec::Cap { sense, t, coord } => {
                let mut st = s.serialize_struct("IndicatorSpec", 3)?;
                st.serialize_field("kind", if *sense == Sense::Gt { "cap_gt" } else { "cap_lt" })?;
                st.serialize_field("threshold", t)?;
                st.serialize_field("coordinate", &[coord.0 + 1, coord.1 + 1])?;
                st.end()
            }
            IndicatorSpec::Custom { name, measure, .. } => {
                let mut st = s.serialize_struct("IndicatorSpec", 3)?;
                st.serialize_field("kind", "custom")?;
                st.serialize_field("name", name)?;
                st.serialize_field("measure", measure)?;
                st.end()
            }
        }
    }
}

/// Haar measure of {X₁₁ ≷ t} on SO(n); X₁₁ has density ∝ (1−x²)^{(n−3)/2}.
pub fn cap_measure(n: usize, t: f64, sense: Sense) -> f64 {
    assert!(n >= 2, "cap_measure needs n ≥ 2");
    let t = t.clamp(-1.0, 1.0);
    // P(X₁₁ > |t|) = ½·(1 − I_{t²}(½, (n−1)/2))
    let upper = 0.5 * (1.0 - beta_reg(0.5, (n as f64 - 1.0) / 2.0, t * t));
    let gt = if t >= 0.0 { upper } else { 1.0 - upper };
    match sense {
        Sense::Gt => gt,
        Sense::Lt => 1.0 - gt,
    }
}

/// Threshold t with cap_measure(n, t, sense) = alpha, by bisection.
pub fn cap_threshold(n: usize, alpha: f64, sense: Sense) -> f64 {
    assert!((0.0..=1.0).contains(&alpha), "measure {alpha} outside [0, 1]");
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let m = cap_measure(n, mid, sense);
        // Gt measure decreases in t, Lt increases
        let go_right = match sense {
            Sense::Gt => m > alpha,
            Sense::Lt => m < alpha,
        };
        if go_right {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Rejection on the first Gaussian column only; the other columns are drawn after acceptance.
fn sample_first_column_cap<R: Rng + ?Sized>(n: usize, sense: Sense, t: f64, rng: &mut R) -> Result<Matrix<f64>> {
    let mut z = vec![0.0; n];
    for _ in 0..REJECTION_LIMIT {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !sense.holds(z[0] / norm, t) {
            continue;
        }
        let y = Matrix::from_fn(n, n, |i, j| if j == 0 { z[i] } else { rng.sample(StandardNormal) });
        let (mut q, mut r) = gram_schmidt_columns(&y)?;
        <f64 as GroupField>::fix_determinant(&mut q, &mut r);
        return Ok(q);
    }
    Err(Error::MeasureTooSmall(1.0 / REJECTION_LIMIT as f64))
}

/// Moves entry (0,0) to `coord` by quarter turns on both sides; preserves Haar measure.
fn move_entry(x: Matrix<f64>, (r, c): (usize, usize)) -> Matrix<f64> {
    let n = x.rows();
    let row_of = |i: usize| -> (usize, f64) {
        // new row r = old row 0, new row 0 = −old row r
        if r == 0 {
            (i, 1.0)
        } else if i == r {
            (0, 1.0)
        } else if i == 0 {
            (r, -1.0)
        } else {
            (i, 1.0)
        }
    };
    let col_of = |j: usize| -> (usize, f64) {
        if c == 0 {
            (j, 1.0)
        } else if j == c {
            (0, 1.0)
        } else if j == 0 {
            (c, -1.0)
        } else {
            (j, 1.0)
        }
    };
    Matrix::from_fn(n, n, |i, j| {
        let (si, a) = row_of(i);
        let (sj, b) = col_of(j);
        a * b * x[(si, sj)]
    })
}

/// SO(n) check shared by the indicator estimators.
pub(crate) fn require_so(g: &GroupSpec) -> Result<usize> {
    if g.family != Family::SO {
        return Err(Error::Unsupported(format!("indicator estimators run on SO(n), got {g}")));
    }
    Ok(g.n)
}
