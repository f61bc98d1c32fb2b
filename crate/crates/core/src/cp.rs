//! Syntactic Cutting Planes proofs: representation, verification, and the
//! Chvátal–Gomory cut derivation.

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::exact::lp::{lp_optimum, Direction, LpResult};
use crate::exact::{IntVec, LinIneq, Polytope};
use crate::num::{bit_len, ceil, denom_lcm, int_rat, Int, Rational};

/// How a proof line is obtained. Cited indices always refer to earlier
/// lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    /// Copy of axiom row `k` of the underlying polytope.
    Axiom(usize),
    /// Nonnegative integer combination of earlier lines.
    LinComb(Vec<(usize, Int)>),
    /// Division of an earlier line by a positive integer dividing all its
    /// coefficients, rounding the threshold up.
    Div(usize, Int),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpLine {
    pub ineq: LinIneq,
    pub just: Justification,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CpProof {
    pub axioms: Polytope,
    pub lines: Vec<CpLine>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CpVerdict {
    Valid,
    Invalid { line: usize, reason: String },
}

impl CpVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, CpVerdict::Valid)
    }
}

fn check_line(p: &CpProof, i: usize) -> Result<(), String> {
    let line = &p.lines[i];
    if line.ineq.dim() != p.axioms.dim {
        return Err("dimension mismatch".into());
    }
    match &line.just {
        Justification::Axiom(k) => {
            let Some(ax) = p.axioms.ineqs.get(*k) else {
                return Err(format!("axiom index {k} out of range"));
            };
            if *ax != line.ineq {
                return Err(format!("line does not match axiom {k}"));
            }
        }
        Justification::LinComb(pairs) => {
            if pairs.is_empty() {
                return Err("empty linear combination".into());
            }
            let mut coeffs = IntVec::zero(p.axioms.dim);
            let mut rhs = Rational::zero();
            for (j, lambda) in pairs {
                if *j >= i {
                    return Err(format!("cites line {j} not strictly earlier"));
                }
                if lambda.is_negative() {
                    return Err("negative multiplier".into());
                }
                if lambda.is_zero() {
                    continue;
                }
                let cited = &p.lines[*j];
                coeffs = &coeffs + &cited.ineq.coeffs.scaled(lambda);
                rhs += &cited.ineq.rhs * int_rat(lambda);
            }
            if coeffs != line.ineq.coeffs || rhs != line.ineq.rhs {
                return Err("combination does not equal the stated line".into());
            }
        }
        Justification::Div(j, d) => {
            if *j >= i {
                return Err(format!("cites line {j} not strictly earlier"));
            }
            if !d.is_positive() {
                return Err("divisor must be positive".into());
            }
            let cited = &p.lines[*j];
            if cited.ineq.coeffs.0.iter().any(|c| !(c % d).is_zero()) {
                return Err("divisor does not divide every coefficient".into());
            }
            let want_coeffs = cited.ineq.coeffs.divided(d);
            let want_rhs = int_rat(&ceil(&(&cited.ineq.rhs / int_rat(d))));
            if want_coeffs != line.ineq.coeffs || want_rhs != line.ineq.rhs {
                return Err("division result does not match the stated line".into());
            }
        }
    }
    Ok(())
}

/// Recomputes every justification exactly. The report is deterministic:
/// the lowest failing line index wins.
pub fn verify_cp(p: &CpProof) -> CpVerdict {
    let first_bad = (0..p.lines.len())
        .into_par_iter()
        .filter_map(|i| check_line(p, i).err().map(|reason| (i, reason)))
        .min_by_key(|(i, _)| *i);
    match first_bad {
        None => CpVerdict::Valid,
        Some((line, reason)) => CpVerdict::Invalid { line, reason },
    }
}

/// A verified refutation additionally ends with exactly `0 >= 1`.
pub fn is_refutation(p: &CpProof) -> bool {
    p.lines
        .last()
        .is_some_and(|l| l.ineq.is_zero_ge_one())
}

#[derive(Debug, thiserror::Error)]
pub enum CgCutError {
    #[error("coefficients of the cut direction must have gcd 1")]
    NotPrimitive,
    #[error("objective unbounded below over the polytope")]
    Unbounded,
    #[error("polytope is empty")]
    Empty,
    #[error(transparent)]
    Lp(#[from] crate::exact::lp::LpError),
}

/// Derives the CG cut `a.x >= ceil(min_P a.x)` as a checkable CP fragment:
/// the axiom rows used by the LP dual, one combination line, and one
/// division line. Fragment length is O(n + |P|).
pub fn cg_cut_derive(p: &Polytope, a: &IntVec) -> Result<(LinIneq, CpProof), CgCutError> {
    use num_traits::One;
    if a.content() != Int::one() {
        return Err(CgCutError::NotPrimitive);
    }
    match lp_optimum(p, a, Direction::Min)? {
        LpResult::Unbounded => Err(CgCutError::Unbounded),
        LpResult::Infeasible { .. } => Err(CgCutError::Empty),
        LpResult::Optimal { value, dual, .. } => {
            let mut lines = Vec::new();
            let mut cited = Vec::new();
            let scale = denom_lcm(dual.iter());
            for (k, mult) in dual.iter().enumerate() {
                if mult.is_zero() {
                    continue;
                }
                let lambda = mult * int_rat(&scale);
                debug_assert!(lambda.is_integer());
                lines.push(CpLine {
                    ineq: p.ineqs[k].clone(),
                    just: Justification::Axiom(k),
                });
                cited.push((lines.len() - 1, lambda.to_integer()));
            }
            let combo_ineq = LinIneq::ge(a.scaled(&scale), &value * int_rat(&scale));
            // a gcd-1 objective is nonzero, so the dual cannot be all zeros
            assert!(!cited.is_empty());
            lines.push(CpLine {
                ineq: combo_ineq,
                just: Justification::LinComb(cited),
            });
            let cut = LinIneq::ge(a.clone(), int_rat(&ceil(&value)));
            lines.push(CpLine {
                ineq: cut.clone(),
                just: Justification::Div(lines.len() - 1, scale),
            });
            Ok((
                cut,
                CpProof {
                    axioms: p.clone(),
                    lines,
                },
            ))
        }
    }
}

/// (size, depth, max coefficient bit length) for a CP proof. Depth counts
/// nodes along the longest justification chain, so a lone axiom line has
/// depth 1.
pub fn cp_stats(p: &CpProof) -> (usize, usize, u64) {
    let mut depth = vec![0usize; p.lines.len()];
    let mut max_bits = 0u64;
    for (i, line) in p.lines.iter().enumerate() {
        let d = match &line.just {
            Justification::Axiom(_) => 1,
            Justification::LinComb(pairs) => {
                1 + pairs
                    .iter()
                    .filter(|(_, l)| !l.is_zero())
                    .map(|(j, _)| depth[*j])
                    .max()
                    .unwrap_or(0)
            }
            Justification::Div(j, _) => 1 + depth[*j],
        };
        depth[i] = d;
        max_bits = max_bits.max(bit_len(&line.ineq.coeffs.max_abs()));
    }
    (
        p.lines.len(),
        depth.iter().copied().max().unwrap_or(0),
        max_bits,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::i_rat;

    fn ge(c: &[i64], r: i64) -> LinIneq {
        LinIneq::ge(IntVec::from_i64(c), i_rat(r))
    }

    fn axioms(rows: Vec<LinIneq>, dim: usize) -> Polytope {
        Polytope::new(dim, rows)
    }

    #[test]
    fn division_rounds_up() {
        // from 2x >= 1 divide by 2: x >= 1
        let p = CpProof {
            axioms: axioms(vec![ge(&[2], 1)], 1),
            lines: vec![
                CpLine {
                    ineq: ge(&[2], 1),
                    just: Justification::Axiom(0),
                },
                CpLine {
                    ineq: ge(&[1], 1),
                    just: Justification::Div(0, 2.into()),
                },
            ],
        };
        assert!(verify_cp(&p).is_valid());
    }

    #[test]
    fn negative_multiplier_invalid() {
        let p = CpProof {
            axioms: axioms(vec![ge(&[1], 0)], 1),
            lines: vec![
                CpLine {
                    ineq: ge(&[1], 0),
                    just: Justification::Axiom(0),
                },
                CpLine {
                    ineq: ge(&[-1], 0),
                    just: Justification::LinComb(vec![(0, (-1).into())]),
                },
            ],
        };
        match verify_cp(&p) {
            CpVerdict::Invalid { line, .. } => assert_eq!(line, 1),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn division_by_one_rounds_fractional_rhs() {
        let p = CpProof {
            axioms: axioms(vec![LinIneq::ge(IntVec::from_i64(&[2]), crate::num::rat(1, 1))], 1),
            lines: vec![
                CpLine {
                    ineq: LinIneq::ge(IntVec::from_i64(&[2]), i_rat(1)),
                    just: Justification::Axiom(0),
                },
                CpLine {
                    ineq: ge(&[2], 1),
                    just: Justification::Div(0, 1.into()),
                },
            ],
        };
        assert!(verify_cp(&p).is_valid());
    }

    #[test]
    fn cg_cut_simple_rounding() {
        // P = {2x >= 1, x <= 1}: cut along (1) is x >= 1
        let p = axioms(vec![ge(&[2], 1), ge(&[-1], -1)], 1);
        let (cut, frag) = cg_cut_derive(&p, &IntVec::from_i64(&[1])).unwrap();
        assert_eq!(cut, ge(&[1], 1));
        assert!(verify_cp(&frag).is_valid());
    }

    #[test]
    fn cg_cut_already_integral() {
        // unit cube, direction (1,1): cut x1 + x2 >= 0
        let p = axioms(
            vec![ge(&[1, 0], 0), ge(&[-1, 0], -1), ge(&[0, 1], 0), ge(&[0, -1], -1)],
            2,
        );
        let (cut, frag) = cg_cut_derive(&p, &IntVec::from_i64(&[1, 1])).unwrap();
        assert_eq!(cut, ge(&[1, 1], 0));
        assert!(verify_cp(&frag).is_valid());
    }

    #[test]
    fn cg_cut_on_clause_polytope() {
        // (x1 v x2) and (-x1 v x2): LP minimum of x2 is 1/2, cut x2 >= 1
        let f = crate::instances::Cnf::new(2, vec![vec![1, 2], vec![-1, 2]]).unwrap();
        let p = crate::instances::encode::to_polytope(&f);
        let (cut, frag) = cg_cut_derive(&p, &IntVec::from_i64(&[0, 1])).unwrap();
        assert_eq!(cut, ge(&[0, 1], 1));
        assert!(verify_cp(&frag).is_valid());
    }

    #[test]
    fn cg_cut_rejects_unbounded() {
        let p = axioms(vec![ge(&[0, 1], 0)], 2);
        assert!(matches!(
            cg_cut_derive(&p, &IntVec::from_i64(&[1, 0])),
            Err(CgCutError::Unbounded)
        ));
    }

    #[test]
    fn stats_single_axiom() {
        let p = CpProof {
            axioms: axioms(vec![ge(&[5], 1)], 1),
            lines: vec![CpLine {
                ineq: ge(&[5], 1),
                just: Justification::Axiom(0),
            }],
        };
        assert_eq!(cp_stats(&p), (1, 1, 3));
    }

    #[test]
    fn soundness_no_integral_point_cut_off() {
        // over a satisfiable instance, no derived line cuts off any integral
        // point (exhaustive over the cube)
        let f = crate::instances::Cnf::new(3, vec![vec![1, 2], vec![-2, 3]]).unwrap();
        let p = crate::instances::encode::to_polytope(&f);
        let (_, frag) = cg_cut_derive(&p, &IntVec::from_i64(&[1, 1, 1])).unwrap();
        assert!(verify_cp(&frag).is_valid());
        for mask in 0u64..8 {
            if p.contains_mask(mask) {
                for line in &frag.lines {
                    assert!(line.ineq.satisfied_by_mask(mask));
                }
            }
        }
    }
}
