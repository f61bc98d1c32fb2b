//! Arbitrary-precision integer and rational scalars shared by every module.
//!
//! All proof objects are stored and checked with exact arithmetic; no
//! floating point appears anywhere in a verification path.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};

pub type Int = BigInt;
pub type Rational = BigRational;

/// `ceil(r)` for a rational `r`, as an integer.
pub fn ceil(r: &Rational) -> Int {
    r.numer().div_ceil(r.denom())
}

/// `floor(r)` for a rational `r`, as an integer.
pub fn floor(r: &Rational) -> Int {
    r.numer().div_floor(r.denom())
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(Int::from(n), Int::from(d))
}

pub fn int_rat(n: &Int) -> Rational {
    Rational::from_integer(n.clone())
}

pub fn i_rat(n: i64) -> Rational {
    Rational::from_integer(Int::from(n))
}

/// Least common multiple of the denominators of `rs`. Always positive.
pub fn denom_lcm<'a>(rs: impl IntoIterator<Item = &'a Rational>) -> Int {
    let mut l = Int::one();
    for r in rs {
        l = l.lcm(r.denom());
    }
    l
}

/// Bit length of `|n|`; zero has bit length 0.
pub fn bit_len(n: &Int) -> u64 {
    n.abs().bits()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn ceil_floor() {
        assert_eq!(ceil(&rat(1, 2)), Int::from(1));
        assert_eq!(ceil(&rat(-1, 2)), Int::from(0));
        assert_eq!(ceil(&rat(3, 1)), Int::from(3));
        assert_eq!(floor(&rat(1, 2)), Int::from(0));
        assert_eq!(floor(&rat(-1, 2)), Int::from(-1));
    }

    #[test]
    fn lcm_of_denominators() {
        let rs = [rat(1, 2), rat(5, 6), rat(-3, 4)];
        assert_eq!(denom_lcm(rs.iter()), Int::from(12));
    }

    #[test]
    fn bit_lengths() {
        assert_eq!(bit_len(&Int::zero()), 0);
        assert_eq!(bit_len(&Int::from(-5)), 3);
        assert_eq!(bit_len(&Int::from(8)), 4);
    }
}
