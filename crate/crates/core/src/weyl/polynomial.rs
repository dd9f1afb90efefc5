use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{SerializeSeq, SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Matrix};
use crate::scalar::{left_mul_parts, right_mul_parts, Field, Scalar};

pub const MAX_TRANSLATE_DEGREE: usize = 6;

/// A real coordinate of a matrix entry; 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub row: usize,
    pub col: usize,
    pub part: u8,
}

impl Position {
    pub fn new(row: usize, col: usize) -> Self {
        Position { row, col, part: 0 }
    }

    pub fn with_part(row: usize, col: usize, part: u8) -> Self {
        Position { row, col, part }
    }
}

/// Sorted multiset of positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MonomialIndex {
    positions: Vec<Position>,
}

impl MonomialIndex {
    pub fn new(mut positions: Vec<Position>) -> Self {
        positions.sort();
        MonomialIndex { positions }
    }

    /// Real-field monomial from 0-based (row, col) pairs.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Self {
        Self::new(pairs.iter().map(|&(r, c)| Position::new(r, c)).collect())
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn degree(&self) -> usize {
        self.positions.len()
    }

    fn distinct_within<F: Fn(&Position) -> usize>(&self, key: F, bound: usize) -> bool {
        let mut seen: Vec<usize> = self.positions.iter().map(&key).collect();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1]) && seen.iter().all(|&x| x < bound)
    }

    /// Distinct columns, all within the first ⌊n/2⌋.
    pub fn is_column_comfortable(&self, n: usize) -> bool {
        self.distinct_within(|p| p.col, n / 2)
    }

    /// Distinct rows, all within the first ⌊n/2⌋.
    pub fn is_row_comfortable(&self, n: usize) -> bool {
        self.distinct_within(|p| p.row, n / 2)
    }

    pub fn is_comfortable(&self, n: usize) -> bool {
        self.is_column_comfortable(n) && self.is_row_comfortable(n)
    }

    fn mul(&self, other: &MonomialIndex) -> MonomialIndex {
        let mut v = self.positions.clone();
        v.extend_from_slice(&other.positions);
        MonomialIndex::new(v)
    }
}

impl Serialize for MonomialIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl fmt::Display for MonomialIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positions.is_empty() {
            return f.write_str("1");
        }
        for (i, p) in self.positions.iter().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            write!(f, "x{},{}", p.row + 1, p.col + 1)?;
            if p.part > 0 {
                write!(f, "[{}]", ["re", "i", "j", "k"][p.part as usize])?;
            }
        }
        Ok(())
    }
}

/// Real-coefficient polynomial in the real coordinates of an n×n matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPolynomial {
    n: usize,
    field: Field,
    terms: BTreeMap<MonomialIndex, f64>,
}

impl GroupPolynomial {
    pub fn zero(n: usize, field: Field) -> Self {
        GroupPolynomial { n, field, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, field: Field, c: f64) -> Self {
        let mut p = Self::zero(n, field);
        p.add_term(MonomialIndex::default(), c);
        p
    }

    pub fn monomial(n: usize, field: Field, m: MonomialIndex, coeff: f64) -> Self {
        let mut p = Self::zero(n, field);
        p.add_term(m, coeff);
        p
    }

    /// Monomial with unit Gaussian norm: coefficient √(parts)^d, i.e. 2^d for quaternion entries.
    pub fn normalized_monomial(n: usize, field: Field, m: MonomialIndex) -> Self {
        let c = (field.parts() as f64).sqrt().powi(m.degree() as i32);
        Self::monomial(n, field, m, c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MonomialIndex, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &MonomialIndex) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(MonomialIndex::degree).max().unwrap_or(0)
    }

    /// Adds `c·m`; zero results are dropped.
    pub fn add_term(&mut self, m: MonomialIndex, c: f64) {
        let e = self.terms.entry(m.clone()).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.remove(&m);
        }
    }

    /// Rows and columns touched, as exclusive upper bounds.
    pub fn support(&self) -> (usize, usize) {
        let mut r = 0;
        let mut c = 0;
        for m in self.terms.keys() {
            for p in m.positions() {
                r = r.max(p.row + 1);
                c = c.max(p.col + 1);
            }
        }
        (r, c)
    }

    pub fn evaluate(&self, x: &DenseMatrix) -> Result<f64> {
        if x.field() != self.field {
            return Err(Error::FieldMismatch(format!("polynomial over {:?}, matrix over {:?}", self.field, x.field())));
        }
        let (r, c) = self.support();
        if x.n_rows() < r || x.n_cols() < c {
            return Err(Error::InvalidShape(format!("{}×{} matrix, polynomial needs {r}×{c}", x.n_rows(), x.n_cols())));
        }
        Ok(self.eval_with(|p| x.part(p.row, p.col, p.part as usize)))
    }

    /// Real-field evaluation on a (possibly partial) block; no checks beyond indexing.
    pub fn evaluate_real(&self, x: &Matrix<f64>) -> f64 {
        debug_assert_eq!(self.field, Field::Real);
        self.eval_with(|p| x[(p.row, p.col)])
    }

    /// Real-field evaluation at `scale·x`.
    pub fn evaluate_real_scaled(&self, x: &Matrix<f64>, scale: f64) -> f64 {
        debug_assert_eq!(self.field, Field::Real);
        self.eval_with(|p| scale * x[(p.row, p.col)])
    }

    fn eval_with(&self, entry: impl Fn(&Position) -> f64) -> f64 {
        let mut total = 0.0;
        for (m, &c) in &self.terms {
            let mut prod = c;
            for p in m.positions() {
                prod *= entry(p);
            }
            total += prod;
        }
        total
    }

    fn mul_linear(&self, form: &[(Position, f64)]) -> GroupPolynomial {
        let mut out = GroupPolynomial::zero(self.n, self.field);
        for (m, &c) in &self.terms {
            for &(p, a) in form {
                out.add_term(m.mul(&MonomialIndex::new(vec![p])), c * a);
            }
        }
        out
    }

    /// Substitutes every coordinate by a linear form and expands.
    fn substitute(&self, form: impl Fn(&Position) -> Vec<(Position, f64)>) -> Result<GroupPolynomial> {
        if self.degree() > MAX_TRANSLATE_DEGREE {
            return Err(Error::TooLarge(format!("translation of degree {} > {MAX_TRANSLATE_DEGREE}", self.degree())));
        }
        let mut out = GroupPolynomial::zero(self.n, self.field);
        for (m, &c) in &self.terms {
            let mut acc = GroupPolynomial::constant(self.n, self.field, c);
            for p in m.positions() {
                acc = acc.mul_linear(&form(p));
            }
            for (mm, cc) in acc.terms {
                out.add_term(mm, cc);
            }
        }
        Ok(out)
    }

    /// Polynomial of `X ↦ p(X·V)`.
    pub fn right_translate(&self, v: &DenseMatrix) -> Result<GroupPolynomial> {
        self.check_translator(v)?;
        match v {
            DenseMatrix::Real(v) => self.right_typed(v),
            DenseMatrix::Complex(v) => self.right_typed(v),
            DenseMatrix::Quaternion(v) => self.right_typed(v),
        }
    }

    /// Polynomial of `X ↦ p(U·X)`.
    pub fn left_translate(&self, u: &DenseMatrix) -> Result<GroupPolynomial> {
        self.check_translator(u)?;
        match u {
            DenseMatrix::Real(u) => self.left_typed(u),
            DenseMatrix::Complex(u) => self.left_typed(u),
            DenseMatrix::Quaternion(u) => self.left_typed(u),
        }
    }

    fn check_translator(&self, v: &DenseMatrix) -> Result<()> {
        if v.field() != self.field {
            return Err(Error::FieldMismatch(format!("polynomial over {:?}, matrix over {:?}", self.field, v.field())));
        }
        if v.n_rows() != self.n || v.n_cols() != self.n {
            return Err(Error::InvalidShape(format!("translator must be {0}×{0}", self.n)));
        }
        Ok(())
    }

    fn right_typed<T: Scalar>(&self, v: &Matrix<T>) -> Result<GroupPolynomial> {
        let n = self.n;
        let maps: Vec<Vec<Vec<f64>>> = v.as_slice().iter().map(|&x| right_mul_parts(x)).collect();
        let parts = self.field.parts();
        // part_q((XV)_ij) = Σ_k Σ_r M(V_kj)[q][r]·part_r(X_ik)
        self.substitute(|p| {
            let mut form = Vec::new();
            for k in 0..n {
                let m = &maps[k * n + p.col];
                for r in 0..parts {
                    let a = m[p.part as usize][r];
                    if a != 0.0 {
                        form.push((Position::with_part(p.row, k, r as u8), a));
                    }
                }
            }
            form
        })
    }

    fn left_typed<T: Scalar>(&self, u: &Matrix<T>) -> Result<GroupPolynomial> {
        let n = self.n;
        let maps: Vec<Vec<Vec<f64>>> = u.as_slice().iter().map(|&x| left_mul_parts(x)).collect();
        let parts = self.field.parts();
        // part_q((UX)_ij) = Σ_k Σ_r L(U_ik)[q][r]·part_r(X_kj)
        self.substitute(|p| {
            let mut form = Vec::new();
            for k in 0..n {
                let m = &maps[p.row * n + k];
                for r in 0..parts {
                    let a = m[p.part as usize][r];
                    if a != 0.0 {
                        form.push((Position::with_part(k, p.col, r as u8), a));
                    }
                }
            }
            form
        })
    }
}

impl fmt::Display for GroupPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(if *c < 0.0 { " − " } else { " + " })?;
            } else if *c < 0.0 {
                f.write_str("−")?;
            }
            if c.abs() != 1.0 || m.degree() == 0 {
                write!(f, "{}", c.abs())?;
            }
            if m.degree() > 0 {
                write!(f, "{m}")?;
            }
        }
        Ok(())
    }
}

fn part_name(field: Field, part: u8) -> &'static str {
    match (field, part) {
        (_, 0) => "re",
        (Field::Complex, 1) => "im",
        (_, 1) => "i",
        (_, 2) => "j",
        _ => "k",
    }
}

/// `[{positions: [[row, col], ...], parts: [...], coeff}]`, 1-based positions.
impl Serialize for GroupPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Term<'a>(&'a MonomialIndex, f64, Field);
        impl Serialize for Term<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let positions: Vec<[usize; 2]> = self.0.positions().iter().map(|p| [p.row + 1, p.col + 1]).collect();
                let parts: Vec<&str> = self.0.positions().iter().map(|p| part_name(self.2, p.part)).collect();
                let mut st = s.serialize_struct("Term", 3)?;
                st.serialize_field("positions", &positions)?;
                st.serialize_field("parts", &parts)?;
                st.serialize_field("coeff", &self.1)?;
                st.end()
            }
        }
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (m, &c) in &self.terms {
            seq.serialize_element(&Term(m, c, self.field))?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::sampling::gaussian_matrix;
    use crate::scalar::Quaternion;
    use num_complex::Complex64;

    fn x(r: usize, c: usize) -> MonomialIndex {
        MonomialIndex::from_pairs(&[(r, c)])
    }

    #[test]
    fn constant_and_entry_evaluation() {
        let one = GroupPolynomial::constant(3, Field::Real, 1.0);
        let id = DenseMatrix::Real(Matrix::identity(3));
        assert_eq!(one.evaluate(&id).unwrap(), 1.0);
        let x11 = GroupPolynomial::monomial(3, Field::Real, x(0, 0), 1.0);
        assert_eq!(x11.evaluate(&id).unwrap(), 1.0);
        let q = DenseMatrix::Quaternion(Matrix::identity(3));
        assert!(matches!(x11.evaluate(&q), Err(Error::FieldMismatch(_))));
    }

    #[test]
    fn right_translate_single_entry() {
        let mut rng = RngStream::new(5, 0);
        let v: Matrix<f64> = gaussian_matrix(4, 4, &mut rng);
        let p = GroupPolynomial::monomial(4, Field::Real, x(0, 0), 1.0);
        let t = p.right_translate(&DenseMatrix::Real(v.clone())).unwrap();
        assert_eq!(t.n_terms(), 4);
        for j in 0..4 {
            assert!((t.coefficient(&x(0, j)) - v[(j, 0)]).abs() < 1e-15);
        }
        let id = p.right_translate(&DenseMatrix::Real(Matrix::identity(4))).unwrap();
        assert_eq!(id, p);
    }

    fn check_translations<T: Scalar>(field: Field, seed: u64)
    where
        DenseMatrix: From<Matrix<T>>,
    {
        let mut rng = RngStream::new(seed, 0);
        let n = 3;
        let parts = field.parts() as u8;
        let mut p = GroupPolynomial::zero(n, field);
        p.add_term(MonomialIndex::new(vec![Position::with_part(0, 1, 0), Position::with_part(2, 2, parts - 1)]), 1.5);
        p.add_term(MonomialIndex::new(vec![Position::with_part(1, 0, parts / 2)]), -0.5);
        p.add_term(MonomialIndex::default(), 0.25);
        for _ in 0..5 {
            let v: Matrix<T> = gaussian_matrix(n, n, &mut rng);
            let xm: Matrix<T> = gaussian_matrix(n, n, &mut rng);
            let vd = DenseMatrix::from(v.clone());
            let r = p.right_translate(&vd).unwrap();
            let l = p.left_translate(&vd).unwrap();
            let lhs_r = r.evaluate(&DenseMatrix::from(xm.clone())).unwrap();
            let rhs_r = p.evaluate(&DenseMatrix::from(xm.matmul(&v))).unwrap();
            assert!((lhs_r - rhs_r).abs() < 1e-10, "{lhs_r} vs {rhs_r}");
            let lhs_l = l.evaluate(&DenseMatrix::from(xm.clone())).unwrap();
            let rhs_l = p.evaluate(&DenseMatrix::from(v.matmul(&xm))).unwrap();
            assert!((lhs_l - rhs_l).abs() < 1e-10, "{lhs_l} vs {rhs_l}");
        }
    }

    #[test]
    fn translation_identities_all_fields() {
        check_translations::<f64>(Field::Real, 1);
        check_translations::<Complex64>(Field::Complex, 2);
        check_translations::<Quaternion>(Field::Quaternion, 3);
    }

    #[test]
    fn comfortability_predicates() {
        let m = MonomialIndex::from_pairs(&[(0, 0), (1, 1)]);
        assert!(m.is_comfortable(6));
        assert!(!m.is_comfortable(3));
        let same_col = MonomialIndex::from_pairs(&[(0, 0), (1, 0)]);
        assert!(!same_col.is_column_comfortable(8));
        assert!(same_col.is_row_comfortable(8));
    }

    #[test]
    fn json_form() {
        let p = GroupPolynomial::monomial(4, Field::Real, MonomialIndex::from_pairs(&[(0, 0), (1, 1)]), -1.0);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"[{"positions":[[1,1],[2,2]],"parts":["re","re"],"coeff":-1.0}]"#);
    }
}
