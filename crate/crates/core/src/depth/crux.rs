//! The crux selection: given a good halfspace whose boolean points are
//! covered by two halfspaces, pick a child and a restriction of at most two
//! coordinates keeping the child good.
//!
//! Works in {-1,1} coordinates through the bijection x -> 1 - 2x: a good
//! halfspace contains the origin there, and the selected point y has at
//! most two coordinates in {-1,1} and zeros elsewhere.

use num_traits::{Signed, Zero};

use super::twoface::orthogonal_2face_vector;
use super::Halfspace;
use crate::instances::Restriction;
use crate::num::{i_rat, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct CruxOutcome {
    /// 0 selects the first child, 1 the second.
    pub child: usize,
    /// Fixes at most two coordinates (of the ambient 0/1 space).
    pub rho: Restriction,
    /// The selected {-1,0,1} point in the +-1 world, for audit.
    pub y: Vec<Rational>,
}

#[derive(Debug, thiserror::Error)]
pub enum CruxError {
    #[error("cover precondition violated: corner {0:?} lies in neither child")]
    CoverViolated(Vec<Rational>),
    #[error("selected point fell outside the chosen child (invalid input)")]
    SelectionFailed,
}

/// Halfspace in the +-1 world: {v : w.v >= c} (or strict).
fn to_pm1(h: &Halfspace) -> Halfspace {
    // x = (1 - v)/2: w.x ? c becomes (-w).v ? 2c - sum(w)
    let total: Rational = h.w.iter().fold(Rational::zero(), |s, x| s + x);
    Halfspace {
        w: h.w.iter().map(|x| -x).collect(),
        c: i_rat(2) * &h.c - total,
        strict: h.strict,
    }
}

fn pm1_to_restriction(y: &[Rational]) -> Restriction {
    let mut rho = Restriction::all_free(y.len());
    for (i, v) in y.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        // v = 1 - 2x: v = 1 -> x = 0, v = -1 -> x = 1
        rho.set(i, v.is_negative());
    }
    rho
}

/// All {-1,0,1} points with at most two nonzero coordinates, fewest
/// nonzeros first, lexicographic within; used for the tiny-dimension
/// fallback.
fn small_candidates(n: usize) -> Vec<Vec<Rational>> {
    let mut out = vec![vec![Rational::zero(); n]];
    for i in 0..n {
        for si in [1i64, -1] {
            let mut v = vec![Rational::zero(); n];
            v[i] = i_rat(si);
            out.push(v);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for si in [1i64, -1] {
                for sj in [1i64, -1] {
                    let mut v = vec![Rational::zero(); n];
                    v[i] = i_rat(si);
                    v[j] = i_rat(sj);
                    out.push(v);
                }
            }
        }
    }
    out
}

/// Selects a child halfspace and a <= 2-coordinate restriction whose
/// application keeps the child good. Preconditions: `h` is good and the
/// boolean points of `h` are covered by `h1` and `h2`; a cover violation is
/// reported when the case analysis fails.
pub fn crux_select(
    h: &Halfspace,
    h1: &Halfspace,
    h2: &Halfspace,
) -> Result<CruxOutcome, CruxError> {
    let n = h.dim();
    debug_assert!(h.is_good());
    // universal-child shortcut: no geometry needed
    for (i, child) in [h1, h2].into_iter().enumerate() {
        if child.is_universal() {
            return Ok(CruxOutcome {
                child: i,
                rho: Restriction::all_free(n),
                y: vec![Rational::zero(); n],
            });
        }
    }
    let hp = to_pm1(h);
    let c1 = to_pm1(h1);
    let c2 = to_pm1(h2);

    if n < 3 {
        // the 2-face machinery needs n >= 3; enumerate the candidate grid
        for y in small_candidates(n) {
            for (i, child) in [&c1, &c2].into_iter().enumerate() {
                if child.contains(&y) {
                    return Ok(CruxOutcome {
                        child: i,
                        rho: pm1_to_restriction(&y),
                        y,
                    });
                }
            }
        }
        return Err(CruxError::CoverViolated(Vec::new()));
    }

    let nz = |w: &[Rational]| -> Vec<Rational> {
        if w.iter().all(|x| x.is_zero()) {
            let mut e = vec![Rational::zero(); n];
            e[0] = i_rat(1);
            e
        } else {
            w.to_vec()
        }
    };
    let face = orthogonal_2face_vector(&nz(&c1.w), &nz(&c2.w)).expect("n >= 3");
    let (fi, fj) = face.free;
    let mut v = face.v;

    // candidate quadrant corners covering v, lexicographic (-1 before 1)
    let sides = |x: &Rational| -> Vec<i64> {
        if x.is_zero() {
            vec![-1, 1]
        } else if x.is_negative() {
            vec![-1]
        } else {
            vec![1]
        }
    };
    let mut corners: Vec<(i64, i64)> = Vec::new();
    for si in sides(&v[fi]) {
        for sj in sides(&v[fj]) {
            corners.push((si, sj));
        }
    }
    let corner_point = |v: &[Rational], (si, sj): (i64, i64)| -> Vec<Rational> {
        let mut a = v.to_vec();
        a[fi] = i_rat(si);
        a[fj] = i_rat(sj);
        a
    };
    // prefer a corner lying in h (then the lexicographically smallest);
    // otherwise exchange a and v for -a and -v
    let mut a = None;
    for &c in &corners {
        let pt = corner_point(&v, c);
        if hp.contains(&pt) {
            a = Some(pt);
            break;
        }
    }
    let a = match a {
        Some(a) => a,
        None => {
            let pt = corner_point(&v, corners[0]);
            for x in v.iter_mut() {
                *x = -&*x;
            }
            pt.iter().map(|x| -x).collect()
        }
    };
    debug_assert!(hp.contains(&a), "origin membership makes -a a member");

    // the corner is a boolean point of h, so the cover places it in a child
    let (child_idx, child) = if c1.contains(&a) {
        (0, &c1)
    } else if c2.contains(&a) {
        (1, &c2)
    } else {
        return Err(CruxError::CoverViolated(a));
    };

    let wa = child.value(&a);
    let diff: Vec<Rational> = a.iter().zip(&v).map(|(x, y)| x - y).collect();
    let wdiff = child
        .w
        .iter()
        .zip(&diff)
        .map(|(w, d)| w * d)
        .fold(Rational::zero(), |s, t| s + t);
    let y = if !wdiff.is_positive() {
        // case (i): the origin itself lies in the child
        vec![Rational::zero(); n]
    } else {
        // case (ii): walk from the origin along a - v until a coordinate
        // pins to +-1, then round the other one towards the child normal
        let mut alpha: Option<Rational> = None;
        for k in [fi, fj] {
            if diff[k].is_zero() {
                continue;
            }
            let step = i_rat(1) / diff[k].abs();
            alpha = Some(match alpha {
                None => step,
                Some(b) => {
                    if step < b {
                        step
                    } else {
                        b
                    }
                }
            });
        }
        let alpha = alpha.expect("w.(a - v) > 0 needs a nonzero difference");
        debug_assert!(alpha >= i_rat(1), "a and v share a 1x1 quadrant");
        let mut p: Vec<Rational> = vec![Rational::zero(); n];
        for k in [fi, fj] {
            p[k] = &alpha * &diff[k];
        }
        // round the possibly-fractional coordinate towards the normal
        for k in [fi, fj] {
            if p[k] != i_rat(1) && p[k] != i_rat(-1) && !p[k].is_zero() {
                let s = if child.w[k].is_negative() {
                    i_rat(-1)
                } else {
                    i_rat(1)
                };
                p[k] = s;
            }
        }
        p
    };
    if !child.contains(&y) {
        return Err(CruxError::SelectionFailed);
    }
    debug_assert!(y.iter().filter(|x| !x.is_zero()).count() <= 2);
    Ok(CruxOutcome {
        child: child_idx,
        rho: pm1_to_restriction(&y),
        y,
    })
}
