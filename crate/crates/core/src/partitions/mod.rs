//! Partitions, levels, step vectors and truncations.

mod dimension;
mod lr;

pub use dimension::{
    is_self_associated, min_nontrivial_dimension, min_rank_and_d, quasirandom_profile, weyl_dimension,
    QuasirandomProfile,
};
pub(crate) use dimension::to_f64;
pub use lr::{littlewood_richardson, littlewood_richardson_su};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group::{Family, GroupSpec};

/// Weakly decreasing sequence. With `half` set every part is `parts[i] + 1/2`
/// and the length is significant; otherwise trailing zeros are dropped.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition {
    parts: Vec<u32>,
    half: bool,
}

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidShape(format!("{parts:?} is not weakly decreasing")));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Partition { parts, half: false })
    }

    /// Panics on non-decreasing input; for literals in code and tests.
    pub fn from_slice(parts: &[u32]) -> Self {
        Self::new(parts.to_vec()).expect("weakly decreasing parts")
    }

    pub fn empty() -> Self {
        Partition::default()
    }

    /// Half-integer weight `(floors[0] + 1/2, ..., floors[k−1] + 1/2)`.
    pub fn half_integer(floors: Vec<u32>) -> Result<Self> {
        if floors.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidShape(format!("{floors:?} is not weakly decreasing")));
        }
        if floors.is_empty() {
            return Err(Error::InvalidShape("half-integer weight needs at least one part".into()));
        }
        Ok(Partition { parts: floors, half: true })
    }

    pub fn is_half_integer(&self) -> bool {
        self.half
    }

    /// Number of stored rows.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Integer parts (floors in half-integer mode).
    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// λ_i (0-based, 0 past the end). Integer mode only.
    pub fn get(&self, i: usize) -> u32 {
        debug_assert!(!self.half);
        self.parts.get(i).copied().unwrap_or(0)
    }

    /// 2·λ_i, exact in both modes; 0 past the end.
    pub fn doubled(&self, i: usize) -> u64 {
        match self.parts.get(i) {
            Some(&p) => 2 * p as u64 + self.half as u64,
            None => 0,
        }
    }

    /// Σλ_i for integer partitions.
    pub fn size(&self) -> u32 {
        debug_assert!(!self.half);
        self.parts.iter().sum()
    }

    /// Transposed diagram.
    pub fn conjugate(&self) -> Partition {
        debug_assert!(!self.half);
        let first = self.get(0) as usize;
        let parts = (0..first).map(|c| self.parts.iter().filter(|&&p| p as usize > c).count() as u32).collect();
        Partition { parts, half: false }
    }

    /// Checks the row constraints of the family.
    pub fn validate(&self, g: &GroupSpec) -> Result<()> {
        let max_rows = match g.family {
            Family::SO | Family::Spin => g.n / 2,
            Family::SU => g.n - 1,
            Family::Sp => g.n,
        };
        if self.half {
            if g.family != Family::Spin {
                return Err(Error::InvalidShape(format!("half-integer weights only exist for Spin, not {g}")));
            }
            if self.len() != max_rows {
                return Err(Error::InvalidShape(format!("{g} half-integer weight needs {max_rows} parts")));
            }
        } else if self.len() > max_rows {
            return Err(Error::InvalidShape(format!("{self} has more than {max_rows} rows, invalid for {g}")));
        }
        Ok(())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            if self.half {
                write!(f, "{}/2", 2 * p + 1)?;
            } else {
                write!(f, "{p}")?;
            }
        }
        f.write_str(")")
    }
}

impl FromStr for Partition {
    type Err = Error;
    /// Accepts `(2,1)`, `2,1`, `()`, `3/2,1/2`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        if t.trim().is_empty() {
            return Ok(Partition::empty());
        }
        let items: Vec<&str> = t.split(',').map(str::trim).collect();
        let bad = || Error::Config(format!("bad partition {s:?}"));
        if items.iter().all(|x| x.ends_with("/2")) {
            let floors = items
                .iter()
                .map(|x| {
                    let num: u32 = x.trim_end_matches("/2").parse().map_err(|_| bad())?;
                    if num % 2 == 1 {
                        Ok(num / 2)
                    } else {
                        Err(bad())
                    }
                })
                .collect::<Result<Vec<u32>>>()?;
            return Partition::half_integer(floors);
        }
        let parts = items.iter().map(|x| x.parse::<u32>().map_err(|_| bad())).collect::<Result<Vec<u32>>>()?;
        Partition::new(parts)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All partitions of `d` with at most `max_rows` rows, lexicographically descending.
pub fn partitions_of(d: u32, max_rows: usize) -> Vec<Partition> {
    fn rec(rest: u32, cap: u32, rows_left: usize, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition { parts: cur.clone(), half: false });
            return;
        }
        if rows_left == 0 {
            return;
        }
        for p in (1..=cap.min(rest)).rev() {
            cur.push(p);
            rec(rest - p, p, rows_left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, d, max_rows, &mut Vec::new(), &mut out);
    out
}

/// All valid highest weights of `g` with level `d` (integer weights only).
/// SU levels weight step a_i by min(i, n−i), so long columns enter at low level.
pub fn partitions_of_level(g: &GroupSpec, d: u32) -> Vec<Partition> {
    match g.family {
        Family::SU => {
            let n = g.n;
            let weights: Vec<u32> = (1..n).map(|i| i.min(n - i) as u32).collect();
            fn rec(i: usize, rest: u32, w: &[u32], cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
                if i == w.len() {
                    if rest == 0 {
                        out.push(StepVector { steps: cur.clone() }.to_partition());
                    }
                    return;
                }
                for a in 0..=rest / w[i] {
                    cur.push(a);
                    rec(i + 1, rest - a * w[i], w, cur, out);
                    cur.pop();
                }
            }
            let mut out = Vec::new();
            rec(0, d, &weights, &mut Vec::new(), &mut out);
            out.sort();
            out.reverse();
            out
        }
        _ => partitions_of(d, g.rank()),
    }
}

/// Steps a₁..a_{n−1} with a_i = λ_i − λ_{i+1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StepVector {
    pub steps: Vec<u32>,
}

impl StepVector {
    pub fn n(&self) -> usize {
        self.steps.len() + 1
    }

    /// λ_i = Σ_{j ≥ i} a_j.
    pub fn to_partition(&self) -> Partition {
        let mut parts = vec![0u32; self.steps.len()];
        let mut acc = 0;
        for i in (0..self.steps.len()).rev() {
            acc += self.steps[i];
            parts[i] = acc;
        }
        Partition::new(parts).expect("suffix sums decrease")
    }
}

pub fn step_vector(lambda: &Partition, n: usize) -> Result<StepVector> {
    if lambda.is_half_integer() || n < 2 || lambda.len() >= n {
        return Err(Error::InvalidShape(format!("{lambda} needs fewer than {n} rows for a step vector")));
    }
    Ok(StepVector { steps: (0..n - 1).map(|i| lambda.get(i) - lambda.get(i + 1)).collect() })
}

/// SO/Sp/Spin: Σλ_i. SU: Σ a_i·min(i, n−i).
pub fn level(g: &GroupSpec, lambda: &Partition) -> Result<u32> {
    lambda.validate(g)?;
    if lambda.is_half_integer() {
        return Err(Error::InvalidShape(format!("{lambda} is a spin weight and has no integer level")));
    }
    Ok(match g.family {
        Family::SU => {
            let a = step_vector(lambda, g.n)?;
            a.steps.iter().enumerate().map(|(i, &s)| s * (i + 1).min(g.n - i - 1) as u32).sum()
        }
        _ => lambda.size(),
    })
}

/// Number of steps in the first half, a₁..a_{⌈n/2⌉−1}.
fn first_half(n: usize) -> usize {
    n.div_ceil(2) - 1
}

pub fn efficient_truncation(lambda: &Partition, n: usize) -> Result<Partition> {
    let mut a = step_vector(lambda, n)?;
    let h = first_half(n);
    a.steps[h..].iter_mut().for_each(|s| *s = 0);
    Ok(a.to_partition())
}

pub fn dually_efficient_truncation(lambda: &Partition, n: usize) -> Result<Partition> {
    let mut a = step_vector(lambda, n)?;
    let h = first_half(n);
    a.steps[..h].iter_mut().for_each(|s| *s = 0);
    Ok(a.to_partition())
}
