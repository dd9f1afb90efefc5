//! Scalar fields: real, complex and quaternion entries behind one trait.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
    Quaternion,
}

impl Field {
    /// Number of real coordinates per entry.
    pub fn parts(self) -> usize {
        match self {
            Field::Real => 1,
            Field::Complex => 2,
            Field::Quaternion => 4,
        }
    }
}

pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Send
    + Sync
    + 'static
{
    const FIELD: Field;

    fn zero() -> Self;
    fn one() -> Self;
    fn conj(self) -> Self;
    fn norm_sqr(self) -> f64;
    fn scale(self, s: f64) -> Self;
    /// Real coordinate `p` (0 = real part, then i, j, k).
    fn part(self, p: usize) -> f64;
    fn from_parts(parts: &[f64]) -> Self;
    fn from_real(x: f64) -> Self;

    fn abs(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Multiplicative inverse; caller guarantees non-zero.
    fn inv(self) -> Self {
        self.conj().scale(1.0 / self.norm_sqr())
    }

    /// Gaussian entry with E|x|² = `total_var`, split evenly over the parts.
    fn gaussian<R: Rng + ?Sized>(rng: &mut R, total_var: f64) -> Self {
        let p = Self::FIELD.parts();
        let sd = (total_var / p as f64).sqrt();
        let mut buf = [0.0; 4];
        for b in buf.iter_mut().take(p) {
            let z: f64 = rng.sample(StandardNormal);
            *b = sd * z;
        }
        Self::from_parts(&buf[..p])
    }
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn conj(self) -> Self {
        self
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn part(self, p: usize) -> f64 {
        debug_assert_eq!(p, 0);
        self
    }
    fn from_parts(parts: &[f64]) -> Self {
        parts[0]
    }
    fn from_real(x: f64) -> Self {
        x
    }
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::Complex;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn part(self, p: usize) -> f64 {
        match p {
            0 => self.re,
            1 => self.im,
            _ => panic!("complex part index {p}"),
        }
    }
    fn from_parts(parts: &[f64]) -> Self {
        Complex64::new(parts[0], parts[1])
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

/// Hamilton quaternion `re + i_part·i + j_part·j + k_part·k`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quaternion {
    pub re: f64,
    pub i_part: f64,
    pub j_part: f64,
    pub k_part: f64,
}

impl Quaternion {
    pub const fn new(re: f64, i_part: f64, j_part: f64, k_part: f64) -> Self {
        Quaternion { re, i_part, j_part, k_part }
    }

    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    /// Split `q = A + jB` with `A, B` complex: `A = re + i·i_part`, `B = j_part − i·k_part`.
    pub fn to_complex_pair(self) -> (Complex64, Complex64) {
        (Complex64::new(self.re, self.i_part), Complex64::new(self.j_part, -self.k_part))
    }

    pub fn from_complex_pair(a: Complex64, b: Complex64) -> Self {
        Quaternion::new(a.re, a.im, b.re, -b.im)
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Quaternion::new(self.re + o.re, self.i_part + o.i_part, self.j_part + o.j_part, self.k_part + o.k_part)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Quaternion::new(self.re - o.re, self.i_part - o.i_part, self.j_part - o.j_part, self.k_part - o.k_part)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Quaternion::new(-self.re, -self.i_part, -self.j_part, -self.k_part)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a1, b1, c1, d1) = (self.re, self.i_part, self.j_part, self.k_part);
        let (a2, b2, c2, d2) = (o.re, o.i_part, o.j_part, o.k_part);
        Quaternion::new(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl Scalar for Quaternion {
    const FIELD: Field = Field::Quaternion;

    fn zero() -> Self {
        Quaternion::default()
    }
    fn one() -> Self {
        Quaternion::new(1.0, 0.0, 0.0, 0.0)
    }
    fn conj(self) -> Self {
        Quaternion::new(self.re, -self.i_part, -self.j_part, -self.k_part)
    }
    fn norm_sqr(self) -> f64 {
        self.re * self.re + self.i_part * self.i_part + self.j_part * self.j_part + self.k_part * self.k_part
    }
    fn scale(self, s: f64) -> Self {
        Quaternion::new(self.re * s, self.i_part * s, self.j_part * s, self.k_part * s)
    }
    fn part(self, p: usize) -> f64 {
        match p {
            0 => self.re,
            1 => self.i_part,
            2 => self.j_part,
            3 => self.k_part,
            _ => panic!("quaternion part index {p}"),
        }
    }
    fn from_parts(parts: &[f64]) -> Self {
        Quaternion::new(parts[0], parts[1], parts[2], parts[3])
    }
    fn from_real(x: f64) -> Self {
        Quaternion::new(x, 0.0, 0.0, 0.0)
    }
}

/// Matrix `M` with `part_q(x·v) = Σ_r M[q][r]·part_r(x)` for all `x`.
pub fn right_mul_parts<T: Scalar>(v: T) -> Vec<Vec<f64>> {
    part_map(|basis: T| basis * v)
}

/// Matrix `M` with `part_q(v·x) = Σ_r M[q][r]·part_r(x)` for all `x`.
pub fn left_mul_parts<T: Scalar>(v: T) -> Vec<Vec<f64>> {
    part_map(|basis: T| v * basis)
}

fn part_map<T: Scalar>(f: impl Fn(T) -> T) -> Vec<Vec<f64>> {
    let p = T::FIELD.parts();
    let mut m = vec![vec![0.0; p]; p];
    for r in 0..p {
        let mut unit = [0.0; 4];
        unit[r] = 1.0;
        let image = f(T::from_parts(&unit[..p]));
        for (q, row) in m.iter_mut().enumerate() {
            row[r] = image.part(q);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Quaternion, b: Quaternion) -> bool {
        (a - b).norm_sqr() < 1e-24
    }

    #[test]
    fn multiplication_table() {
        let one = Quaternion::one();
        let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
        assert!(close(i * j, k));
        assert!(close(j * i, -k));
        assert!(close(j * k, i));
        assert!(close(k * j, -i));
        assert!(close(k * i, j));
        assert!(close(i * k, -j));
        assert!(close(i * i, -one));
        assert!(close(j * j, -one));
        assert!(close(k * k, -one));
        assert!(close(i * j * k, -one));
    }

    #[test]
    fn conjugate_product_is_norm() {
        let q = Quaternion::new(1.5, -2.0, 0.25, 3.0);
        let p = q.conj() * q;
        assert!((p.re - q.norm_sqr()).abs() < 1e-12);
        assert!(p.i_part.abs() + p.j_part.abs() + p.k_part.abs() < 1e-12);
    }

    #[test]
    fn complex_pair_round_trip() {
        let q = Quaternion::new(0.3, -1.1, 2.2, 0.7);
        let (a, b) = q.to_complex_pair();
        assert_eq!(Quaternion::from_complex_pair(a, b), q);
        // j·(c − i d) = c j + d k
        let jb = Quaternion::J * Quaternion::from_parts(&[b.re, b.im, 0.0, 0.0]);
        assert!(close(Quaternion::from_parts(&[a.re, a.im, 0.0, 0.0]) + jb, q));
    }

    #[test]
    fn part_maps_reproduce_products() {
        let v = Quaternion::new(0.2, 1.0, -0.5, 2.0);
        let x = Quaternion::new(-1.0, 0.4, 0.9, 0.1);
        let rm = right_mul_parts(v);
        let lm = left_mul_parts(v);
        for q in 0..4 {
            let r: f64 = (0..4).map(|r| rm[q][r] * x.part(r)).sum();
            let l: f64 = (0..4).map(|r| lm[q][r] * x.part(r)).sum();
            assert!((r - (x * v).part(q)).abs() < 1e-12);
            assert!((l - (v * x).part(q)).abs() < 1e-12);
        }
    }
}
