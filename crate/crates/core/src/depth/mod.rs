//! Executable geometry for semantic-CP depth lower bounds: good halfspaces,
//! parity-consistent restrictions, 2-face orthogonal vectors, the crux
//! selection procedure, the Prover–Adversary game, and the two walks.

pub mod crux;
pub mod resdepth;
pub mod twoface;
pub mod walk;

use num_traits::{Signed, Zero};

use crate::exact::LinIneq;
use crate::instances::Restriction;
use crate::num::{int_rat, Rational};

/// A halfspace `{x : w.x >= c}` (or `> c` when strict). The strict form
/// represents falsified-point sets of proof lines exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub w: Vec<Rational>,
    pub c: Rational,
    pub strict: bool,
}

impl Halfspace {
    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// The set of points falsifying `ineq`: `{x : -coeffs.x > -rhs}`.
    pub fn falsified_set(ineq: &LinIneq) -> Self {
        Halfspace {
            w: ineq.coeffs.0.iter().map(|c| -int_rat(c)).collect(),
            c: -ineq.rhs.clone(),
            strict: true,
        }
    }

    pub fn universal(n: usize) -> Self {
        Halfspace {
            w: vec![Rational::zero(); n],
            c: crate::num::i_rat(-1),
            strict: false,
        }
    }

    pub fn is_universal(&self) -> bool {
        self.w.iter().all(|x| x.is_zero())
            && if self.strict {
                self.c.is_negative()
            } else {
                !self.c.is_positive()
            }
    }

    pub fn value(&self, x: &[Rational]) -> Rational {
        debug_assert_eq!(x.len(), self.dim());
        let mut acc = Rational::zero();
        for (w, v) in self.w.iter().zip(x) {
            if !w.is_zero() {
                acc += w * v;
            }
        }
        acc
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        let v = self.value(x);
        if self.strict {
            v > self.c
        } else {
            v >= self.c
        }
    }

    pub fn contains_mask(&self, mask: u64) -> bool {
        let mut acc = Rational::zero();
        for (i, w) in self.w.iter().enumerate() {
            if mask >> i & 1 == 1 {
                acc += w;
            }
        }
        if self.strict {
            acc > self.c
        } else {
            acc >= self.c
        }
    }

    /// Does the halfspace contain the all-1/2 vector?
    pub fn is_good(&self) -> bool {
        let half: Rational = self.w.iter().fold(Rational::zero(), |s, w| s + w)
            / crate::num::i_rat(2);
        if self.strict {
            half > self.c
        } else {
            half >= self.c
        }
    }

    /// Projection onto the free coordinates of `rho` (fixed coordinates
    /// substituted into the linear form).
    pub fn restrict(&self, rho: &Restriction) -> Halfspace {
        assert_eq!(self.dim(), rho.n());
        let mut w = Vec::new();
        let mut c = self.c.clone();
        for (i, wi) in self.w.iter().enumerate() {
            match rho.vals[i] {
                None => w.push(wi.clone()),
                Some(true) => c -= wi,
                Some(false) => {}
            }
        }
        Halfspace {
            w,
            c,
            strict: self.strict,
        }
    }

    /// A boolean point of any good halfspace: set the positive-weight
    /// coordinates; its value dominates the all-1/2 value.
    pub fn greedy_boolean_point(&self) -> Vec<bool> {
        self.w.iter().map(|w| !w.is_negative()).collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RestrictionError {
    #[error("the index set must have at least 2 elements, got {0}")]
    TooSmall(usize),
    #[error("index {0} out of range")]
    OutOfRange(usize),
}

/// Restricts a good halfspace to a good halfspace while fixing exactly the
/// coordinates `idx` with prescribed parity `b`: the largest weights are
/// set greedily and the last coordinate absorbs the parity.
///
/// `idx` indexes coordinates of `h` itself (its ambient space); the result
/// is a restriction over that space.
pub fn consistent_restriction(
    h: &Halfspace,
    idx: &[usize],
    b: bool,
) -> Result<Restriction, RestrictionError> {
    if idx.len() < 2 {
        return Err(RestrictionError::TooSmall(idx.len()));
    }
    for &i in idx {
        if i >= h.dim() {
            return Err(RestrictionError::OutOfRange(i));
        }
    }
    let mut order: Vec<usize> = idx.to_vec();
    // by |w| descending, ties by index
    order.sort_by(|&i, &j| {
        let (ai, aj) = (h.w[i].abs(), h.w[j].abs());
        aj.cmp(&ai).then(i.cmp(&j))
    });
    let mut rho = Restriction::all_free(h.dim());
    let mut parity = false;
    for &i in &order[..order.len() - 1] {
        let v = !h.w[i].is_negative();
        rho.set(i, v);
        parity ^= v;
    }
    let last = order[order.len() - 1];
    rho.set(last, parity ^ b);
    debug_assert!(h.restrict(&rho).is_good(), "restriction preserves goodness");
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{i_rat, rat};

    fn hs(w: &[i64], c: Rational) -> Halfspace {
        Halfspace {
            w: w.iter().map(|&x| i_rat(x)).collect(),
            c,
            strict: false,
        }
    }

    #[test]
    fn restriction_example() {
        // h: x1+x2+x3 >= 3/2 with I = {1,2}, parity 1 gives rho = (1,0,*)
        let h = hs(&[1, 1, 1], rat(3, 2));
        assert!(h.is_good());
        let rho = consistent_restriction(&h, &[0, 1], true).unwrap();
        assert_eq!(rho.vals, vec![Some(true), Some(false), None]);
        let hr = h.restrict(&rho);
        // restricted halfspace is x3 >= 1/2, which contains 1/2
        assert_eq!(hr.c, rat(1, 2));
        assert!(hr.is_good());
    }

    #[test]
    fn restriction_trivial_halfspace() {
        // 1 >= 0 analog: zero weights, c <= 0; any parity-correct rho keeps
        // goodness automatically
        let h = hs(&[0, 0, 0], i_rat(0));
        for b in [false, true] {
            let rho = consistent_restriction(&h, &[0, 2], b).unwrap();
            let par = rho.vals[0].unwrap() ^ rho.vals[2].unwrap();
            assert_eq!(par, b);
            assert!(h.restrict(&rho).is_good());
        }
    }

    #[test]
    fn restriction_mixed_weights() {
        // w = (4, -3, 1, 0), I = {1,2,3}, parity 0: greedy sets x1=1, x2=0,
        // x3 forced to 1
        let h = hs(&[4, -3, 1, 0], i_rat(1));
        assert!(h.is_good());
        let rho = consistent_restriction(&h, &[0, 1, 2], false).unwrap();
        assert_eq!(rho.vals[0], Some(true));
        assert_eq!(rho.vals[1], Some(false));
        assert_eq!(rho.vals[2], Some(true));
        assert!(h.restrict(&rho).is_good());
    }

    #[test]
    fn rejects_small_index_set() {
        let h = hs(&[1, 1], i_rat(0));
        assert!(consistent_restriction(&h, &[0], false).is_err());
    }

    #[test]
    fn fuzz_parity_and_goodness() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..300 {
            let n = rng.gen_range(2..=10usize);
            let w: Vec<Rational> = (0..n).map(|_| i_rat(rng.gen_range(-6..=6))).collect();
            let total: Rational = w.iter().fold(Rational::zero(), |s, x| s + x);
            // choose c at most the half-sum so the halfspace is good
            let c = &total / i_rat(2) - i_rat(rng.gen_range(0..=4));
            let strict = rng.gen_bool(0.5);
            let h = Halfspace {
                w,
                c: if strict { c - rat(1, 3) } else { c },
                strict,
            };
            assert!(h.is_good());
            let k = rng.gen_range(2..=n);
            let mut idx: Vec<usize> = (0..n).collect();
            for i in 0..k {
                let j = rng.gen_range(i..n);
                idx.swap(i, j);
            }
            let idx = &idx[..k];
            let b = rng.gen_bool(0.5);
            let rho = consistent_restriction(&h, idx, b).unwrap();
            let parity = idx
                .iter()
                .fold(false, |p, &i| p ^ rho.vals[i].unwrap());
            assert_eq!(parity, b);
            assert_eq!(rho.num_fixed(), k);
            assert!(h.restrict(&rho).is_good());
        }
    }

    #[test]
    fn falsified_set_semantics() {
        use crate::exact::IntVec;
        // falsified set of x1 + x2 >= 1 over the square: only (0,0)
        let q = LinIneq::ge(IntVec::from_i64(&[1, 1]), i_rat(1));
        let h = Halfspace::falsified_set(&q);
        assert!(h.contains_mask(0b00));
        assert!(!h.contains_mask(0b01));
        assert!(!h.contains_mask(0b11));
    }
}
