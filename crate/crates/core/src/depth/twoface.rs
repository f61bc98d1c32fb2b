//! Orthogonal vectors on 2-faces of the [-1,1] cube, built by iterative
//! booleanization along nullspace directions.

use num_traits::{Signed, Zero};

use crate::exact::linalg::nullspace_vector_dim;
use crate::exact::IntVec;
use crate::num::{denom_lcm, i_rat, int_rat, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct TwoFacePoint {
    pub v: Vec<Rational>,
    /// The two designated free coordinates of the containing 2-face; all
    /// other coordinates of `v` are exactly +-1.
    pub free: (usize, usize),
}

#[derive(Debug, thiserror::Error)]
pub enum TwoFaceError {
    #[error("dimension {0} < 3")]
    DimensionTooSmall(usize),
}

fn scale_to_int(w: &[Rational]) -> IntVec {
    let l = denom_lcm(w.iter());
    IntVec(
        w.iter()
            .map(|x| {
                let s = x * int_rat(&l);
                debug_assert!(s.is_integer());
                s.to_integer()
            })
            .collect(),
    )
}

/// A vector orthogonal to `w1` and `w2` lying on a 2-face of the cube:
/// exactly n-2 coordinates in {-1,1} (beyond the two designated free ones,
/// which stay in [-1,1]). Zero input vectors are treated as imposing no
/// constraint.
pub fn orthogonal_2face_vector(
    w1: &[Rational],
    w2: &[Rational],
) -> Result<TwoFacePoint, TwoFaceError> {
    let n = w1.len();
    assert_eq!(w2.len(), n);
    if n < 3 {
        return Err(TwoFaceError::DimensionTooSmall(n));
    }
    let base: Vec<IntVec> = [w1, w2]
        .iter()
        .filter(|w| w.iter().any(|x| !x.is_zero()))
        .map(|w| scale_to_int(w))
        .collect();
    let mut v: Vec<Rational> = vec![Rational::zero(); n];
    let mut boolean: Vec<bool> = vec![false; n];
    loop {
        let fixed = boolean.iter().filter(|&&b| b).count();
        if fixed >= n - 2 {
            break;
        }
        let mut rows = base.clone();
        for (j, &b) in boolean.iter().enumerate() {
            if b {
                rows.push(IntVec::unit(n, j));
            }
        }
        let u = nullspace_vector_dim(&rows, n)
            .expect("fewer than n independent rows always leave a direction");
        // smallest positive step that pins a new coordinate to +-1
        let mut alpha: Option<Rational> = None;
        for j in 0..n {
            if boolean[j] || u[j].is_zero() {
                continue;
            }
            let target = if u[j].is_positive() { i_rat(1) } else { i_rat(-1) };
            let step = (target - &v[j]) / &u[j];
            debug_assert!(step.is_positive());
            alpha = Some(match alpha {
                None => step,
                Some(a) => {
                    if step < a {
                        step
                    } else {
                        a
                    }
                }
            });
        }
        let alpha = alpha.expect("nullspace direction moves some free coordinate");
        for j in 0..n {
            if !boolean[j] {
                v[j] += &alpha * &u[j];
                if v[j] == i_rat(1) || v[j] == i_rat(-1) {
                    boolean[j] = true;
                }
            }
        }
    }
    let mut free: Vec<usize> = (0..n).filter(|&j| !boolean[j]).collect();
    // overshoot: designate the lowest boolean coordinates as the face's
    // free pair (they are +-1, still within [-1,1])
    let mut j = 0;
    while free.len() < 2 {
        if !free.contains(&j) {
            free.push(j);
        }
        j += 1;
    }
    free.sort_unstable();
    debug_assert!(v.iter().all(|x| *x >= i_rat(-1) && *x <= i_rat(1)));
    debug_assert!((0..n)
        .filter(|j| !free.contains(j))
        .all(|j| v[j] == i_rat(1) || v[j] == i_rat(-1)));
    for w in [w1, w2] {
        debug_assert!(w
            .iter()
            .zip(&v)
            .map(|(a, b)| a * b)
            .fold(Rational::zero(), |s, t| s + t)
            .is_zero());
    }
    Ok(TwoFacePoint {
        v,
        free: (free[0], free[1]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| i_rat(x)).collect()
    }

    fn dot(a: &[Rational], b: &[Rational]) -> Rational {
        a.iter()
            .zip(b)
            .map(|(x, y)| x * y)
            .fold(Rational::zero(), |s, t| s + t)
    }

    #[test]
    fn unit_normals_in_r3() {
        // w1 = e1, w2 = e2: the only orthogonal 2-face points are (0,0,+-1)
        let p = orthogonal_2face_vector(&r(&[1, 0, 0]), &r(&[0, 1, 0])).unwrap();
        assert!(p.v[0].is_zero() && p.v[1].is_zero());
        assert!(p.v[2] == i_rat(1) || p.v[2] == i_rat(-1));
    }

    #[test]
    fn block_normals_in_r4() {
        let w1 = r(&[1, 1, 0, 0]);
        let w2 = r(&[0, 0, 1, 1]);
        let p = orthogonal_2face_vector(&w1, &w2).unwrap();
        assert!(dot(&w1, &p.v).is_zero());
        assert!(dot(&w2, &p.v).is_zero());
        let bools = p
            .v
            .iter()
            .enumerate()
            .filter(|(j, x)| *j != p.free.0 && *j != p.free.1 && (**x == i_rat(1) || **x == i_rat(-1)))
            .count();
        assert_eq!(bools, 2);
    }

    #[test]
    fn duplicate_normal_ok() {
        let w = r(&[2, -1, 3]);
        let p = orthogonal_2face_vector(&w, &w).unwrap();
        assert!(dot(&w, &p.v).is_zero());
    }

    #[test]
    fn random_exactness() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = rng.gen_range(3..=8usize);
            let w1: Vec<Rational> = (0..n).map(|_| i_rat(rng.gen_range(-5..=5))).collect();
            let w2: Vec<Rational> = (0..n).map(|_| i_rat(rng.gen_range(-5..=5))).collect();
            let p = orthogonal_2face_vector(&w1, &w2).unwrap();
            assert!(dot(&w1, &p.v).is_zero());
            assert!(dot(&w2, &p.v).is_zero());
            for (j, x) in p.v.iter().enumerate() {
                assert!(*x >= i_rat(-1) && *x <= i_rat(1));
                if j != p.free.0 && j != p.free.1 {
                    assert!(*x == i_rat(1) || *x == i_rat(-1));
                }
            }
        }
    }
}
