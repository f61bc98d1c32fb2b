//! Resolution refutations: representation, checking, translation into
//! Cutting Planes, and a Gaussian-elimination-style generator for
//! unsatisfiable F_2-linear systems.

use std::collections::{BTreeSet, HashMap};

use crate::cp::{CpLine, CpProof, Justification};
use crate::exact::Polytope;
use crate::instances::encode::{box_hi_row, box_lo_row, clause_ineq, to_polytope};
use crate::instances::{Cnf, LinSystemFq};
use crate::num::Int;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResStep {
    /// Clause `k` of the input formula.
    Input(usize),
    /// Resolvent of two earlier steps on `pivot` (a 1-based variable).
    Resolve {
        left: usize,
        right: usize,
        pivot: usize,
    },
    /// Superset of an earlier step's clause.
    Weaken(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResProof {
    pub steps: Vec<(Vec<i64>, ResStep)>,
}

#[derive(Debug, thiserror::Error)]
pub enum ResError {
    #[error("step {0}: input index out of range")]
    BadInput(usize),
    #[error("step {0}: cites a step not strictly earlier")]
    BadCitation(usize),
    #[error("step {0}: clause does not match the rule")]
    Mismatch(usize),
    #[error("step {0}: pivot missing with the required polarities")]
    BadPivot(usize),
    #[error("step {0}: resolvent is tautological")]
    Tautology(usize),
}

fn as_set(clause: &[i64]) -> BTreeSet<i64> {
    clause.iter().copied().collect()
}

pub fn check_resolution(f: &Cnf, p: &ResProof) -> Result<(), ResError> {
    for (i, (clause, step)) in p.steps.iter().enumerate() {
        let cs = as_set(clause);
        match step {
            ResStep::Input(k) => {
                let Some(c) = f.clauses.get(*k) else {
                    return Err(ResError::BadInput(i));
                };
                if as_set(c) != cs {
                    return Err(ResError::Mismatch(i));
                }
            }
            ResStep::Resolve { left, right, pivot } => {
                if *left >= i || *right >= i {
                    return Err(ResError::BadCitation(i));
                }
                let pv = *pivot as i64;
                let ls = as_set(&p.steps[*left].0);
                let rs = as_set(&p.steps[*right].0);
                if !ls.contains(&pv) || !rs.contains(&-pv) {
                    return Err(ResError::BadPivot(i));
                }
                let mut want: BTreeSet<i64> = ls;
                want.remove(&pv);
                for l in rs {
                    if l != -pv {
                        want.insert(l);
                    }
                }
                if want.iter().any(|l| want.contains(&-l)) {
                    return Err(ResError::Tautology(i));
                }
                if want != cs {
                    return Err(ResError::Mismatch(i));
                }
            }
            ResStep::Weaken(from) => {
                if *from >= i {
                    return Err(ResError::BadCitation(i));
                }
                if !as_set(&p.steps[*from].0).is_subset(&cs) {
                    return Err(ResError::Mismatch(i));
                }
            }
        }
    }
    Ok(())
}

pub fn is_res_refutation(p: &ResProof) -> bool {
    p.steps.last().is_some_and(|(c, _)| c.is_empty())
}

#[derive(Debug, thiserror::Error)]
pub enum ResToCpError {
    #[error(transparent)]
    Res(#[from] ResError),
}

/// Translates a checked resolution refutation into Cutting Planes over the
/// clause polytope. Each resolvent becomes a two-antecedent combination
/// (padded with box rows and divided by 2 when the premises share
/// literals); weakening adds box rows.
pub fn resolution_to_cp(f: &Cnf, rp: &ResProof) -> Result<CpProof, ResToCpError> {
    check_resolution(f, rp)?;
    let axioms = to_polytope(f);
    let n = f.num_vars;
    let m = f.clauses.len();
    let mut lines: Vec<CpLine> = Vec::new();
    let mut axiom_line: HashMap<usize, usize> = HashMap::new();
    let mut line_of_step: Vec<usize> = Vec::with_capacity(rp.steps.len());

    let mut get_axiom = |row: usize, lines: &mut Vec<CpLine>, axioms: &Polytope| -> usize {
        *axiom_line.entry(row).or_insert_with(|| {
            lines.push(CpLine {
                ineq: axioms.ineqs[row].clone(),
                just: Justification::Axiom(row),
            });
            lines.len() - 1
        })
    };

    for (clause, step) in &rp.steps {
        let target = clause_ineq(n, clause);
        let line = match step {
            ResStep::Input(k) => get_axiom(*k, &mut lines, &axioms),
            ResStep::Weaken(from) => {
                let base = line_of_step[*from];
                let base_set = as_set(&rp.steps[*from].0);
                let mut pairs = vec![(base, Int::from(1))];
                for &lit in clause {
                    if base_set.contains(&lit) {
                        continue;
                    }
                    let v = lit.unsigned_abs() as usize - 1;
                    let row = if lit > 0 {
                        box_lo_row(m, v)
                    } else {
                        box_hi_row(m, v)
                    };
                    pairs.push((get_axiom(row, &mut lines, &axioms), Int::from(1)));
                }
                lines.push(CpLine {
                    ineq: target.clone(),
                    just: Justification::LinComb(pairs),
                });
                lines.len() - 1
            }
            ResStep::Resolve { left, right, .. } => {
                let ls = as_set(&rp.steps[*left].0);
                let rs = as_set(&rp.steps[*right].0);
                let shared: Vec<i64> = ls.intersection(&rs).copied().collect();
                let mut pairs = vec![
                    (line_of_step[*left], Int::from(1)),
                    (line_of_step[*right], Int::from(1)),
                ];
                if shared.is_empty() {
                    // the sum is exactly the resolvent inequality
                    lines.push(CpLine {
                        ineq: target.clone(),
                        just: Justification::LinComb(pairs),
                    });
                } else {
                    // pad exclusive literals to coefficient 2, then halve
                    for &lit in clause {
                        if shared.contains(&lit) {
                            continue;
                        }
                        let v = lit.unsigned_abs() as usize - 1;
                        let row = if lit > 0 {
                            box_lo_row(m, v)
                        } else {
                            box_hi_row(m, v)
                        };
                        pairs.push((get_axiom(row, &mut lines, &axioms), Int::from(1)));
                    }
                    let doubled = crate::exact::LinIneq::ge(
                        target.coeffs.scaled(&Int::from(2)),
                        &target.rhs * crate::num::i_rat(2) - crate::num::i_rat(1),
                    );
                    lines.push(CpLine {
                        ineq: doubled,
                        just: Justification::LinComb(pairs),
                    });
                    lines.push(CpLine {
                        ineq: target.clone(),
                        just: Justification::Div(lines.len() - 1, 2.into()),
                    });
                }
                lines.len() - 1
            }
        };
        line_of_step.push(line);
    }
    Ok(CpProof { axioms, lines })
}

#[derive(Debug, thiserror::Error)]
pub enum XorResError {
    #[error("system is satisfiable")]
    Satisfiable,
    #[error("only F_2 systems are supported")]
    NotF2,
    #[error("intermediate parity constraint width {0} too large to expand")]
    TooWide(usize),
}

/// Clause list of the parity constraint `xor(vars) = rhs`: one clause per
/// wrong-parity assignment, keyed by assignment code over `vars` in order.
fn parity_clauses(vars: &[usize], rhs: u64) -> Vec<(u64, Vec<i64>)> {
    let w = vars.len();
    let mut out = Vec::with_capacity(1 << w.saturating_sub(1));
    for code in 0u64..(1u64 << w) {
        if code.count_ones() as u64 % 2 == rhs {
            continue;
        }
        let clause = vars
            .iter()
            .enumerate()
            .map(|(t, &v)| {
                let lit = (v + 1) as i64;
                if code >> t & 1 == 1 {
                    -lit
                } else {
                    lit
                }
            })
            .collect();
        out.push((code, clause));
    }
    out
}

/// Builds a resolution refutation of an unsatisfiable F_2 system by summing
/// the equations of an unsatisfiability certificate one at a time and
/// deriving the clausal encoding of each partial sum.
pub fn refute_linsys_resolution(sys: &LinSystemFq) -> Result<ResProof, XorResError> {
    if sys.q != 2 {
        return Err(XorResError::NotF2);
    }
    let alpha = match sys.solve() {
        crate::exact::linalg::ModSolve::Certificate(a) => a,
        crate::exact::linalg::ModSolve::Solution(_) => return Err(XorResError::Satisfiable),
    };
    let support: Vec<usize> = (0..sys.m()).filter(|&i| alpha[i] % 2 == 1).collect();
    assert!(!support.is_empty());
    let enc = crate::instances::encode::encode_system(sys);

    let mut steps: Vec<(Vec<i64>, ResStep)> = Vec::new();
    let mut input_line: HashMap<usize, usize> = HashMap::new();
    // current partial-sum constraint and its derived clause lines
    let mut cur_vars: Vec<usize> = Vec::new();
    let mut cur_rhs: u64 = 0;
    let mut cur_lines: HashMap<u64, usize> = HashMap::new();

    for (round, &ei) in support.iter().enumerate() {
        let eq = &sys.equations[ei];
        let eq_vars = eq.support.clone();
        let eq_rhs = eq.rhs;
        // input clause step for (eq, code)
        let mut eq_line = |code: u64, steps: &mut Vec<(Vec<i64>, ResStep)>| -> usize {
            let k = enc.eq_clause[ei][&code];
            *input_line.entry(k).or_insert_with(|| {
                steps.push((enc.cnf.clauses[k].clone(), ResStep::Input(k)));
                steps.len() - 1
            })
        };

        if round == 0 {
            cur_vars = eq_vars;
            cur_rhs = eq_rhs;
            cur_lines = parity_clauses(&cur_vars, cur_rhs)
                .into_iter()
                .map(|(code, _)| (code, eq_line(code, &mut steps)))
                .collect();
            continue;
        }

        let shared: Vec<usize> = cur_vars
            .iter()
            .copied()
            .filter(|v| eq_vars.contains(v))
            .collect();
        let mut new_vars: Vec<usize> = cur_vars
            .iter()
            .chain(eq_vars.iter())
            .copied()
            .filter(|v| !shared.contains(v))
            .collect();
        new_vars.sort_unstable();
        new_vars.dedup();
        if new_vars.len() > 24 {
            return Err(XorResError::TooWide(new_vars.len()));
        }
        let new_rhs = (cur_rhs + eq_rhs) % 2;
        let mut new_lines: HashMap<u64, usize> = HashMap::new();

        for (code, target_clause) in parity_clauses(&new_vars, new_rhs) {
            // assignment of the symmetric difference
            let assign = |v: usize| -> u64 {
                let t = new_vars.iter().position(|&x| x == v).unwrap();
                code >> t & 1
            };
            // resolve over shared variables; leaves cite the falsified side
            struct Ctx<'a> {
                shared: &'a [usize],
                cur_vars: &'a [usize],
                eq_vars: &'a [usize],
                cur_rhs: u64,
            }
            let ctx = Ctx {
                shared: &shared,
                cur_vars: &cur_vars,
                eq_vars: &eq_vars,
                cur_rhs,
            };
            fn build(
                ctx: &Ctx,
                sigma: &mut Vec<u64>,
                assign: &dyn Fn(usize) -> u64,
                cur_lines: &HashMap<u64, usize>,
                eq_line: &mut dyn FnMut(u64, &mut Vec<(Vec<i64>, ResStep)>) -> usize,
                steps: &mut Vec<(Vec<i64>, ResStep)>,
            ) -> usize {
                if sigma.len() == ctx.shared.len() {
                    let val = |v: usize| -> u64 {
                        match ctx.shared.iter().position(|&s| s == v) {
                            Some(t) => sigma[t],
                            None => assign(v),
                        }
                    };
                    // parity of the current constraint under this assignment
                    let cur_parity: u64 = ctx
                        .cur_vars
                        .iter()
                        .map(|&v| val(v))
                        .sum::<u64>()
                        % 2;
                    if cur_parity != ctx.cur_rhs {
                        // current partial sum falsified: cite its clause
                        let code: u64 = ctx
                            .cur_vars
                            .iter()
                            .enumerate()
                            .map(|(t, &v)| val(v) << t)
                            .sum();
                        cur_lines[&code]
                    } else {
                        let code: u64 = ctx
                            .eq_vars
                            .iter()
                            .enumerate()
                            .map(|(t, &v)| val(v) << t)
                            .sum();
                        eq_line(code, steps)
                    }
                } else {
                    let pivot_var = ctx.shared[sigma.len()];
                    sigma.push(0);
                    let c0 = build(ctx, sigma, assign, cur_lines, eq_line, steps);
                    sigma.pop();
                    sigma.push(1);
                    let c1 = build(ctx, sigma, assign, cur_lines, eq_line, steps);
                    sigma.pop();
                    // c0 contains +pivot (it forbids pivot=0), c1 contains -pivot
                    let mut resolvent: BTreeSet<i64> = as_set(&steps[c0].0);
                    resolvent.remove(&((pivot_var + 1) as i64));
                    for l in as_set(&steps[c1].0) {
                        if l != -((pivot_var + 1) as i64) {
                            resolvent.insert(l);
                        }
                    }
                    steps.push((
                        resolvent.into_iter().collect(),
                        ResStep::Resolve {
                            left: c0,
                            right: c1,
                            pivot: pivot_var + 1,
                        },
                    ));
                    steps.len() - 1
                }
            }
            let mut sigma = Vec::new();
            let derived = build(
                &ctx,
                &mut sigma,
                &assign,
                &cur_lines,
                &mut eq_line,
                &mut steps,
            );
            // weaken to the exact target clause if the derivation came out
            // stronger
            let got = as_set(&steps[derived].0);
            let want = as_set(&target_clause);
            debug_assert!(got.is_subset(&want));
            let final_line = if got == want {
                derived
            } else {
                steps.push((target_clause.clone(), ResStep::Weaken(derived)));
                steps.len() - 1
            };
            new_lines.insert(code, final_line);
        }
        cur_vars = new_vars;
        cur_rhs = new_rhs;
        cur_lines = new_lines;
    }
    assert!(cur_vars.is_empty(), "certificate sums to the empty constraint");
    Ok(ResProof { steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cp::{cp_stats, is_refutation, verify_cp};

    #[test]
    fn unit_clash_two_lines() {
        // resolving (x) and (-x) derives 0 >= 1 from x >= 1 and 1 - x >= 1
        let f = Cnf::new(1, vec![vec![1], vec![-1]]).unwrap();
        let rp = ResProof {
            steps: vec![
                (vec![1], ResStep::Input(0)),
                (vec![-1], ResStep::Input(1)),
                (
                    vec![],
                    ResStep::Resolve {
                        left: 0,
                        right: 1,
                        pivot: 1,
                    },
                ),
            ],
        };
        check_resolution(&f, &rp).unwrap();
        let cp = resolution_to_cp(&f, &rp).unwrap();
        assert!(verify_cp(&cp).is_valid());
        assert!(is_refutation(&cp));
    }

    #[test]
    fn three_clause_chain_is_five_lines() {
        // {x v y, -y, -x} refuted by two resolutions: 5 CP lines
        let f = Cnf::new(2, vec![vec![1, 2], vec![-2], vec![-1]]).unwrap();
        let rp = ResProof {
            steps: vec![
                (vec![1, 2], ResStep::Input(0)),
                (vec![-2], ResStep::Input(1)),
                (
                    vec![1],
                    ResStep::Resolve {
                        left: 0,
                        right: 1,
                        pivot: 2,
                    },
                ),
                (vec![-1], ResStep::Input(2)),
                (
                    vec![],
                    ResStep::Resolve {
                        left: 2,
                        right: 3,
                        pivot: 1,
                    },
                ),
            ],
        };
        check_resolution(&f, &rp).unwrap();
        let cp = resolution_to_cp(&f, &rp).unwrap();
        assert!(verify_cp(&cp).is_valid());
        assert!(is_refutation(&cp));
        assert_eq!(cp_stats(&cp).0, 5);
    }

    #[test]
    fn shared_literal_resolution_divides() {
        // (x v z) and (-x v z) resolve to (z); premises share z
        let f = Cnf::new(2, vec![vec![1, 2], vec![-1, 2]]).unwrap();
        let rp = ResProof {
            steps: vec![
                (vec![1, 2], ResStep::Input(0)),
                (vec![-1, 2], ResStep::Input(1)),
                (
                    vec![2],
                    ResStep::Resolve {
                        left: 0,
                        right: 1,
                        pivot: 1,
                    },
                ),
            ],
        };
        check_resolution(&f, &rp).unwrap();
        let cp = resolution_to_cp(&f, &rp).unwrap();
        assert!(verify_cp(&cp).is_valid());
        assert!(cp
            .lines
            .iter()
            .any(|l| matches!(l.just, Justification::Div(_, _))));
    }

    #[test]
    fn rejects_bad_pivot() {
        let f = Cnf::new(2, vec![vec![1], vec![2]]).unwrap();
        let rp = ResProof {
            steps: vec![
                (vec![1], ResStep::Input(0)),
                (vec![2], ResStep::Input(1)),
                (
                    vec![],
                    ResStep::Resolve {
                        left: 0,
                        right: 1,
                        pivot: 1,
                    },
                ),
            ],
        };
        assert!(matches!(
            check_resolution(&f, &rp),
            Err(ResError::BadPivot(2))
        ));
    }

    #[test]
    fn xor_resolution_refutes_k3() {
        let sys =
            crate::instances::tseitin::tseitin(&crate::instances::tseitin::complete_graph_all_one(3))
                .unwrap();
        let rp = refute_linsys_resolution(&sys).unwrap();
        let f = crate::instances::encode::to_cnf(&sys);
        check_resolution(&f, &rp).unwrap();
        assert!(is_res_refutation(&rp));
    }

    #[test]
    fn xor_resolution_refutes_k6_and_converts() {
        let sys =
            crate::instances::tseitin::tseitin(&crate::instances::tseitin::complete_graph(6))
                .unwrap();
        let rp = refute_linsys_resolution(&sys).unwrap();
        let f = crate::instances::encode::to_cnf(&sys);
        check_resolution(&f, &rp).unwrap();
        assert!(is_res_refutation(&rp));
        let cp = resolution_to_cp(&f, &rp).unwrap();
        assert!(verify_cp(&cp).is_valid());
        assert!(is_refutation(&cp));
    }

    #[test]
    fn xor_resolution_rejects_satisfiable() {
        let sys = crate::instances::random::random_kxor(4, 2, 2, 9);
        if sys.is_satisfiable() {
            assert!(matches!(
                refute_linsys_resolution(&sys),
                Err(XorResError::Satisfiable)
            ));
        }
    }
}
