//! Exact linear-algebra atoms: integer vectors, inequalities, polytopes,
//! and Farkas certificate checking.
//!
//! Every inequality is stored in `coeffs · x >= rhs` orientation; `<=` only
//! exists at I/O boundaries. This keeps a single code path for all
//! certificate sums.

pub mod fm;
pub mod linalg;
pub mod lp;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, Zero};

use crate::num::{bit_len, Int, Rational};

/// Orientation of an inequality as written in a file or by a caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Ge,
    Le,
}

/// A fixed-dimension vector of arbitrary-precision integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntVec(pub Vec<Int>);

impl IntVec {
    pub fn zero(dim: usize) -> Self {
        IntVec(vec![Int::zero(); dim])
    }

    pub fn from_i64(v: &[i64]) -> Self {
        IntVec(v.iter().map(|&x| Int::from(x)).collect())
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zero(dim);
        v.0[i] = Int::from(1);
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn dot_int(&self, other: &IntVec) -> Int {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a * b)
            .fold(Int::zero(), |s, t| s + t)
    }

    pub fn dot_rat(&self, point: &[Rational]) -> Rational {
        debug_assert_eq!(self.dim(), point.len());
        let mut acc = Rational::zero();
        for (a, x) in self.0.iter().zip(point) {
            if !a.is_zero() {
                acc += Rational::from_integer(a.clone()) * x;
            }
        }
        acc
    }

    /// gcd of the absolute values of all entries; 0 for the zero vector.
    pub fn content(&self) -> Int {
        use num_integer::Integer;
        let mut g = Int::zero();
        for x in &self.0 {
            g = g.gcd(x);
        }
        g
    }

    pub fn max_abs(&self) -> Int {
        self.0
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(Int::zero)
    }

    pub fn scaled(&self, k: &Int) -> IntVec {
        IntVec(self.0.iter().map(|x| x * k).collect())
    }

    /// Entry-wise exact division; panics if some entry is not divisible.
    pub fn divided(&self, d: &Int) -> IntVec {
        IntVec(
            self.0
                .iter()
                .map(|x| {
                    debug_assert!((x % d).is_zero());
                    x / d
                })
                .collect(),
        )
    }
}

impl Add for &IntVec {
    type Output = IntVec;
    fn add(self, rhs: &IntVec) -> IntVec {
        IntVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &IntVec {
    type Output = IntVec;
    fn sub(self, rhs: &IntVec) -> IntVec {
        IntVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &IntVec {
    type Output = IntVec;
    fn neg(self) -> IntVec {
        IntVec(self.0.iter().map(|a| -a).collect())
    }
}

impl Mul<&Int> for &IntVec {
    type Output = IntVec;
    fn mul(self, k: &Int) -> IntVec {
        self.scaled(k)
    }
}

impl fmt::Display for IntVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// A linear inequality `coeffs · x >= rhs` with integer coefficients and a
/// rational threshold.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinIneq {
    pub coeffs: IntVec,
    pub rhs: Rational,
}

impl LinIneq {
    pub fn ge(coeffs: IntVec, rhs: Rational) -> Self {
        LinIneq { coeffs, rhs }
    }

    /// Normalizes a `<=` inequality by negating both sides.
    pub fn le(coeffs: IntVec, rhs: Rational) -> Self {
        LinIneq {
            coeffs: -&coeffs,
            rhs: -rhs,
        }
    }

    pub fn new(coeffs: IntVec, rhs: Rational, sense: Sense) -> Self {
        match sense {
            Sense::Ge => Self::ge(coeffs, rhs),
            Sense::Le => Self::le(coeffs, rhs),
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.dim()
    }

    /// The sentinel contradiction `0 >= 1`.
    pub fn zero_ge_one(dim: usize) -> Self {
        LinIneq::ge(IntVec::zero(dim), crate::num::i_rat(1))
    }

    pub fn is_zero_ge_one(&self) -> bool {
        self.coeffs.is_zero() && self.rhs == crate::num::i_rat(1)
    }

    pub fn satisfied_by(&self, point: &[Rational]) -> bool {
        self.coeffs.dot_rat(point) >= self.rhs
    }

    /// Evaluates at a 0/1 point given as a bitmask over the first
    /// `dim` variables (bit i set means `x_i = 1`).
    pub fn satisfied_by_mask(&self, mask: u64) -> bool {
        let mut acc = Int::zero();
        for (i, c) in self.coeffs.0.iter().enumerate() {
            if mask >> i & 1 == 1 {
                acc += c;
            }
        }
        Rational::from_integer(acc) >= self.rhs
    }
}

impl fmt::Display for LinIneq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} >= {}", self.coeffs, self.rhs)
    }
}

/// A polytope `{x : a_i x >= b_i for all i}` in a fixed ambient dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polytope {
    pub ineqs: Vec<LinIneq>,
    pub dim: usize,
}

impl Polytope {
    pub fn new(dim: usize, ineqs: Vec<LinIneq>) -> Self {
        assert!(ineqs.iter().all(|q| q.dim() == dim), "dimension mismatch");
        Polytope { ineqs, dim }
    }

    pub fn empty_description(dim: usize) -> Self {
        Polytope {
            ineqs: Vec::new(),
            dim,
        }
    }

    pub fn push(&mut self, q: LinIneq) {
        assert_eq!(q.dim(), self.dim, "dimension mismatch");
        self.ineqs.push(q);
    }

    pub fn with(&self, q: LinIneq) -> Polytope {
        let mut p = self.clone();
        p.push(q);
        p
    }

    pub fn contains(&self, point: &[Rational]) -> bool {
        self.ineqs.iter().all(|q| q.satisfied_by(point))
    }

    pub fn contains_mask(&self, mask: u64) -> bool {
        self.ineqs.iter().all(|q| q.satisfied_by_mask(mask))
    }

    pub fn max_coeff_bits(&self) -> u64 {
        self.ineqs
            .iter()
            .map(|q| bit_len(&q.coeffs.max_abs()))
            .max()
            .unwrap_or(0)
    }
}

/// Checks a Farkas certificate: with all inequalities oriented `>=`, the
/// multiplier-weighted sum must have exactly `target`'s coefficient vector
/// and a right-hand side at least `target.rhs`.
///
/// Multipliers must be nonnegative; `ineqs` and `multipliers` must have
/// equal length (a violated precondition returns `false`).
pub fn farkas_check(ineqs: &[LinIneq], multipliers: &[Rational], target: &LinIneq) -> bool {
    if ineqs.len() != multipliers.len() {
        return false;
    }
    if multipliers.iter().any(|m| m.is_negative()) {
        return false;
    }
    let dim = target.dim();
    let mut sum = vec![Rational::zero(); dim];
    let mut rhs = Rational::zero();
    for (q, m) in ineqs.iter().zip(multipliers) {
        if q.dim() != dim {
            return false;
        }
        if m.is_zero() {
            continue;
        }
        for (acc, c) in sum.iter_mut().zip(&q.coeffs.0) {
            if !c.is_zero() {
                *acc += Rational::from_integer(c.clone()) * m;
            }
        }
        rhs += &q.rhs * m;
    }
    let coeffs_match = sum
        .iter()
        .zip(&target.coeffs.0)
        .all(|(s, t)| *s == Rational::from_integer(t.clone()));
    coeffs_match && rhs >= target.rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{i_rat, rat};

    fn ge(c: &[i64], r: i64) -> LinIneq {
        LinIneq::ge(IntVec::from_i64(c), i_rat(r))
    }

    #[test]
    fn sense_normalization() {
        let q = LinIneq::le(IntVec::from_i64(&[2, -1]), rat(3, 2));
        assert_eq!(q.coeffs, IntVec::from_i64(&[-2, 1]));
        assert_eq!(q.rhs, rat(-3, 2));
    }

    #[test]
    fn farkas_clause_vs_falsifying_bounds() {
        // {x1+x2 >= 1, -x1 >= 0, -x2 >= 0} with weights (1,1,1) yields 0 >= 1.
        let ineqs = [ge(&[1, 1], 1), ge(&[-1, 0], 0), ge(&[0, -1], 0)];
        let w = [i_rat(1), i_rat(1), i_rat(1)];
        assert!(farkas_check(&ineqs, &w, &LinIneq::zero_ge_one(2)));
    }

    #[test]
    fn farkas_rejects_insufficient_combination() {
        let ineqs = [ge(&[1], 0)];
        let w = [i_rat(1)];
        assert!(!farkas_check(&ineqs, &w, &LinIneq::zero_ge_one(1)));
    }

    #[test]
    fn farkas_rejects_negative_multiplier() {
        let ineqs = [ge(&[1], 0), ge(&[-1], 1)];
        let w = [i_rat(-1), i_rat(1)];
        assert!(!farkas_check(&ineqs, &w, &LinIneq::zero_ge_one(1)));
    }

    #[test]
    fn farkas_allows_rational_multipliers() {
        // (1/2)(2x >= 1) + (1)(-x >= 0) = 0 >= 1/2, enough for target 0 >= 1/2.
        let ineqs = [ge(&[2], 1), ge(&[-1], 0)];
        let w = [rat(1, 2), i_rat(1)];
        let target = LinIneq::ge(IntVec::zero(1), rat(1, 2));
        assert!(farkas_check(&ineqs, &w, &target));
    }
}
