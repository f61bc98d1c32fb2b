//! Fourier–Motzkin elimination, used as an independent low-dimension oracle
//! for the simplex solver. Intended for dimension <= 6.

use std::collections::HashSet;

use num_traits::{Signed, Zero};

use super::{IntVec, Polytope};
use crate::num::{int_rat, Rational};

#[derive(Debug, Clone, PartialEq)]
pub enum FmOptimum {
    Infeasible,
    Unbounded,
    Value(Rational),
}

/// One row `coeffs . x >= rhs` over rationals (working representation).
#[derive(Clone, PartialEq, Eq, Hash)]
struct Row {
    coeffs: Vec<Rational>,
    rhs: Rational,
}

impl Row {
    fn normalized(mut self) -> Row {
        // scale so the first nonzero coefficient is +-1 (canonical for dedup)
        if let Some(c) = self.coeffs.iter().find(|c| !c.is_zero()).cloned() {
            let s = if c.is_negative() { -c } else { c };
            for x in self.coeffs.iter_mut() {
                *x /= &s;
            }
            self.rhs /= &s;
        }
        self
    }
}

fn eliminate(rows: Vec<Row>, var: usize) -> Option<Vec<Row>> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut none = Vec::new();
    for r in rows {
        if r.coeffs[var].is_positive() {
            pos.push(r);
        } else if r.coeffs[var].is_negative() {
            neg.push(r);
        } else {
            none.push(r);
        }
    }
    let mut out: HashSet<Row> = HashSet::new();
    for r in none {
        if r.coeffs.iter().all(|c| c.is_zero()) {
            if r.rhs.is_positive() {
                return None; // 0 >= positive
            }
            continue;
        }
        out.insert(r.normalized());
    }
    for p in &pos {
        for n in &neg {
            // p: a x_v + ... >= b (a > 0); n: -c x_v + ... >= d (c > 0)
            // combine c*p + a*n to cancel x_v
            let a = p.coeffs[var].clone();
            let c = -n.coeffs[var].clone();
            let mut coeffs = Vec::with_capacity(p.coeffs.len());
            for j in 0..p.coeffs.len() {
                coeffs.push(&p.coeffs[j] * &c + &n.coeffs[j] * &a);
            }
            let rhs = &p.rhs * &c + &n.rhs * &a;
            if coeffs.iter().all(|x| x.is_zero()) {
                if rhs.is_positive() {
                    return None;
                }
                continue;
            }
            out.insert(Row { coeffs, rhs }.normalized());
        }
    }
    Some(out.into_iter().collect())
}

/// Exact min (or max via negation by the caller) of `c . x` over `p`,
/// computed by introducing `t = c . x` and eliminating every x variable.
pub fn fm_minimum(p: &Polytope, c: &IntVec) -> FmOptimum {
    let n = p.dim;
    // variables: x_0..x_{n-1}, then t at index n
    let mut rows: Vec<Row> = Vec::new();
    for q in &p.ineqs {
        let mut coeffs: Vec<Rational> = q.coeffs.0.iter().map(int_rat).collect();
        coeffs.push(Rational::zero());
        rows.push(Row {
            coeffs,
            rhs: q.rhs.clone(),
        });
    }
    // t - c.x >= 0 and c.x - t >= 0
    let mut up: Vec<Rational> = c.0.iter().map(|x| -int_rat(x)).collect();
    up.push(crate::num::i_rat(1));
    rows.push(Row {
        coeffs: up.clone(),
        rhs: Rational::zero(),
    });
    let down: Vec<Rational> = up.iter().map(|x| -x.clone()).collect();
    rows.push(Row {
        coeffs: down,
        rhs: Rational::zero(),
    });

    for v in 0..n {
        match eliminate(rows, v) {
            Some(r) => rows = r,
            None => return FmOptimum::Infeasible,
        }
    }
    // remaining rows constrain t alone: a*t >= b
    let mut lower: Option<Rational> = None; // t >= lower
    let mut upper: Option<Rational> = None;
    for r in rows {
        let a = &r.coeffs[n];
        if a.is_zero() {
            if r.rhs.is_positive() {
                return FmOptimum::Infeasible;
            }
            continue;
        }
        let bound = &r.rhs / a;
        if a.is_positive() {
            lower = Some(match lower {
                None => bound,
                Some(l) => {
                    if bound > l {
                        bound
                    } else {
                        l
                    }
                }
            });
        } else {
            upper = Some(match upper {
                None => bound,
                Some(u) => {
                    if bound < u {
                        bound
                    } else {
                        u
                    }
                }
            });
        }
    }
    if let (Some(l), Some(u)) = (&lower, &upper) {
        if l > u {
            return FmOptimum::Infeasible;
        }
    }
    match lower {
        Some(l) => FmOptimum::Value(l),
        None => FmOptimum::Unbounded,
    }
}
