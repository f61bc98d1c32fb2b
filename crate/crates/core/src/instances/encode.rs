//! Encodings between linear systems, CNF formulas, and polytopes, plus the
//! XOR_4 variable lift.

use std::collections::HashMap;

use crate::exact::{IntVec, LinIneq, Polytope};
use crate::num::i_rat;

use super::{Cnf, Equation, LinSystemFq};

/// Boolean encoding of F_q values: `bits = ceil(log2 q)` bits per variable,
/// value `z_i = sum_j 2^j x_{i*bits+j}`. For q = 2 the encoding is the
/// identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitLayout {
    pub q: u64,
    pub bits: usize,
}

impl BitLayout {
    pub fn for_modulus(q: u64) -> Self {
        let bits = (64 - (q - 1).leading_zeros()) as usize;
        BitLayout { q, bits: bits.max(1) }
    }

    pub fn bool_var(&self, z: usize, bit: usize) -> usize {
        z * self.bits + bit
    }

    pub fn num_bool_vars(&self, n: usize) -> usize {
        n * self.bits
    }
}

/// CNF encoding of a linear system, together with lookup tables from
/// (equation, falsifying support-bit assignment) and (variable, out-of-range
/// value) to clause indices. Clause order: all equation clauses (per
/// equation, by ascending assignment code), then all range clauses.
#[derive(Debug, Clone)]
pub struct SystemEncoding {
    pub cnf: Cnf,
    pub layout: BitLayout,
    /// Per equation: assignment code (bit t = value of the t-th support bit)
    /// -> global clause index, for every falsifying assignment.
    pub eq_clause: Vec<HashMap<u64, usize>>,
    pub range_clause: HashMap<(usize, u64), usize>,
}

impl SystemEncoding {
    /// The support bits of equation `i` in code order.
    pub fn support_bits(&self, eq: &Equation) -> Vec<usize> {
        let mut bits = Vec::with_capacity(eq.support.len() * self.layout.bits);
        for &z in &eq.support {
            for j in 0..self.layout.bits {
                bits.push(self.layout.bool_var(z, j));
            }
        }
        bits
    }
}

/// Encodes a system as CNF. For q = 2 each width-w equation yields the
/// 2^(w-1) clauses ruling out wrong-parity assignments of its support. For
/// q > 2 every variable gets range clauses forbidding encodings >= q and
/// each equation one clause per support-bit assignment whose decoded values
/// violate the congruence.
pub fn encode_system(sys: &LinSystemFq) -> SystemEncoding {
    let layout = BitLayout::for_modulus(sys.q);
    let num_vars = layout.num_bool_vars(sys.n);
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut eq_clause = Vec::with_capacity(sys.m());
    for eq in &sys.equations {
        let w = eq.width();
        let nbits = w * layout.bits;
        let bits = support_bits_of(eq, &layout);
        let mut table = HashMap::new();
        for code in 0u64..(1u64 << nbits) {
            // decode support values and test the congruence
            let mut lhs: u64 = 0;
            for (k, &c) in eq.coeffs.iter().enumerate() {
                let mut val: u64 = 0;
                for j in 0..layout.bits {
                    if code >> (k * layout.bits + j) & 1 == 1 {
                        val |= 1 << j;
                    }
                }
                lhs = (lhs + c % sys.q * (val % sys.q)) % sys.q;
            }
            if lhs == eq.rhs % sys.q {
                continue;
            }
            let mut clause = Vec::with_capacity(nbits);
            for (t, &bv) in bits.iter().enumerate() {
                let lit = (bv + 1) as i64;
                clause.push(if code >> t & 1 == 1 { -lit } else { lit });
            }
            table.insert(code, clauses.len());
            clauses.push(clause);
        }
        eq_clause.push(table);
    }
    let mut range_clause = HashMap::new();
    if layout.bits > 1 {
        for z in 0..sys.n {
            for val in sys.q..(1u64 << layout.bits) {
                let mut clause = Vec::with_capacity(layout.bits);
                for j in 0..layout.bits {
                    let lit = (layout.bool_var(z, j) + 1) as i64;
                    clause.push(if val >> j & 1 == 1 { -lit } else { lit });
                }
                range_clause.insert((z, val), clauses.len());
                clauses.push(clause);
            }
        }
    }
    SystemEncoding {
        cnf: Cnf { num_vars, clauses },
        layout,
        eq_clause,
        range_clause,
    }
}

fn support_bits_of(eq: &Equation, layout: &BitLayout) -> Vec<usize> {
    let mut bits = Vec::with_capacity(eq.support.len() * layout.bits);
    for &z in &eq.support {
        for j in 0..layout.bits {
            bits.push(layout.bool_var(z, j));
        }
    }
    bits
}

pub fn to_cnf(sys: &LinSystemFq) -> Cnf {
    encode_system(sys).cnf
}

/// The clause polytope: one inequality per clause, then `0 <= x_t <= 1` per
/// variable (row `num_clauses + 2t` is `x_t >= 0`, row `num_clauses + 2t + 1`
/// is `-x_t >= -1`). Integral points are exactly satisfying assignments.
pub fn to_polytope(f: &Cnf) -> Polytope {
    let n = f.num_vars;
    let mut ineqs = Vec::with_capacity(f.clauses.len() + 2 * n);
    for c in &f.clauses {
        ineqs.push(clause_ineq(n, c));
    }
    for t in 0..n {
        ineqs.push(LinIneq::ge(IntVec::unit(n, t), i_rat(0)));
        let mut hi = IntVec::zero(n);
        hi.0[t] = (-1).into();
        ineqs.push(LinIneq::ge(hi, i_rat(-1)));
    }
    Polytope::new(n, ineqs)
}

/// `sum_{i in P} x_i + sum_{i in N} (1 - x_i) >= 1`, normalized to `>=`.
pub fn clause_ineq(n: usize, clause: &[i64]) -> LinIneq {
    let mut coeffs = IntVec::zero(n);
    let mut neg = 0i64;
    for &lit in clause {
        let v = lit.unsigned_abs() as usize - 1;
        if lit > 0 {
            coeffs.0[v] = 1.into();
        } else {
            coeffs.0[v] = (-1).into();
            neg += 1;
        }
    }
    LinIneq::ge(coeffs, i_rat(1 - neg))
}

pub fn box_lo_row(num_clauses: usize, var: usize) -> usize {
    num_clauses + 2 * var
}

pub fn box_hi_row(num_clauses: usize, var: usize) -> usize {
    num_clauses + 2 * var + 1
}

#[derive(Debug, thiserror::Error)]
#[error("clause {clause} has width {width}, expected exactly {k}")]
pub struct WidthMismatch {
    pub clause: usize,
    pub width: usize,
    pub k: usize,
}

/// Maps each width-k clause to the unique k-XOR constraint whose clausal
/// encoding contains it: the parity constraint over the clause's variables
/// ruling out assignments whose positive-literal parity matches the clause's.
pub fn cnf_to_kxor(f: &Cnf) -> Result<LinSystemFq, WidthMismatch> {
    let k = f.clauses.first().map_or(0, Vec::len);
    let mut equations = Vec::with_capacity(f.clauses.len());
    for (ci, c) in f.clauses.iter().enumerate() {
        if c.len() != k {
            return Err(WidthMismatch {
                clause: ci,
                width: c.len(),
                k,
            });
        }
        let mut support: Vec<usize> = c.iter().map(|&l| l.unsigned_abs() as usize - 1).collect();
        support.sort_unstable();
        let pos = c.iter().filter(|&&l| l > 0).count();
        // the forbidden assignment (falsifying c) has k - pos ones, so the
        // constraint's parity must be the complement of (k - pos) mod 2
        let rhs = ((k - pos + 1) % 2) as u64;
        equations.push(Equation {
            support,
            coeffs: vec![1; k],
            rhs,
        });
    }
    Ok(LinSystemFq {
        q: 2,
        width: k,
        n: f.num_vars,
        equations,
    })
}

/// Replaces each variable `z_i` by the XOR of 4 fresh variables. A width-w
/// clause expands into 8^w clauses of width 4w; an assignment satisfies the
/// lift iff its block-wise XOR image satisfies the original formula.
pub fn xor4_lift(f: &Cnf) -> Cnf {
    let mut clauses = Vec::new();
    for c in &f.clauses {
        // per literal: the 8 block assignments falsifying it
        let falsifying: Vec<(usize, Vec<u8>)> = c
            .iter()
            .map(|&lit| {
                let v = lit.unsigned_abs() as usize - 1;
                let want = if lit > 0 { 0u8 } else { 1u8 };
                let blocks: Vec<u8> = (0u8..16)
                    .filter(|b| (b.count_ones() % 2) as u8 == want)
                    .collect();
                (v, blocks)
            })
            .collect();
        let mut idx = vec![0usize; c.len()];
        loop {
            let mut clause = Vec::with_capacity(4 * c.len());
            for (pos, (v, blocks)) in falsifying.iter().enumerate() {
                let b = blocks[idx[pos]];
                for j in 0..4 {
                    let lit = (4 * v + j + 1) as i64;
                    clause.push(if b >> j & 1 == 1 { -lit } else { lit });
                }
            }
            clauses.push(clause);
            // odometer over the 8^w combinations
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    break;
                }
                idx[pos] += 1;
                if idx[pos] < falsifying[pos].1.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == idx.len() {
                break;
            }
        }
    }
    Cnf {
        num_vars: 4 * f.num_vars,
        clauses,
    }
}

/// Lifts an F_2 system through XOR_4: every variable becomes a block of 4,
/// every width-w equation a width-4w equation.
pub fn xor4_lift_system(sys: &LinSystemFq) -> LinSystemFq {
    assert_eq!(sys.q, 2, "XOR_4 lift applies to F_2 systems");
    let equations = sys
        .equations
        .iter()
        .map(|eq| {
            let mut support = Vec::with_capacity(4 * eq.width());
            for &z in &eq.support {
                for j in 0..4 {
                    support.push(4 * z + j);
                }
            }
            Equation {
                support,
                coeffs: vec![1; 4 * eq.width()],
                rhs: eq.rhs,
            }
        })
        .collect();
    LinSystemFq {
        q: 2,
        width: 4 * sys.width,
        n: 4 * sys.n,
        equations,
    }
}

/// Block-wise XOR_4 image of a full assignment over 4n lifted variables.
pub fn xor4_image(assignment: u64, n: usize) -> u64 {
    let mut out = 0u64;
    for i in 0..n {
        let block = assignment >> (4 * i) & 0xf;
        if block.count_ones() % 2 == 1 {
            out |= 1 << i;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::tseitin::{complete_graph, complete_graph_all_one, tseitin};

    fn xor_eq(support: &[usize], rhs: u64) -> Equation {
        Equation {
            support: support.to_vec(),
            coeffs: vec![1; support.len()],
            rhs,
        }
    }

    #[test]
    fn single_xor_equation() {
        // x ^ y = 1 becomes {x v y, -x v -y}
        let sys = LinSystemFq::new(2, 2, 2, vec![xor_eq(&[0, 1], 1)]).unwrap();
        let f = to_cnf(&sys);
        assert_eq!(f.clauses.len(), 2);
        assert!(f.clauses.contains(&vec![1, 2]));
        assert!(f.clauses.contains(&vec![-1, -2]));
    }

    #[test]
    fn tseitin_k4_clause_count() {
        // 4 vertices x 2^(3-1) clauses of width 3
        let f = to_cnf(&tseitin(&complete_graph(4)).unwrap());
        assert_eq!(f.clauses.len(), 16);
        assert!(f.clauses.iter().all(|c| c.len() == 3));
    }

    #[test]
    fn wrong_parity_clauses_exhaustive() {
        // every emitted clause is falsified by exactly the wrong-parity
        // assignments of its support
        for w in 1..=6usize {
            let sys = LinSystemFq::new(2, w, w, vec![xor_eq(&(0..w).collect::<Vec<_>>(), 1)])
                .unwrap();
            let enc = encode_system(&sys);
            assert_eq!(enc.cnf.clauses.len(), 1 << (w - 1));
            for code in 0u64..(1 << w) {
                let parity = code.count_ones() as u64 % 2;
                let falsified = enc.cnf.clauses.iter().enumerate().filter(|(_, c)| {
                    !super::super::clause_sat_mask(c, code)
                });
                let falsified: Vec<usize> = falsified.map(|(i, _)| i).collect();
                if parity == 1 {
                    assert!(falsified.is_empty());
                } else {
                    assert_eq!(falsified.len(), 1);
                    assert_eq!(enc.eq_clause[0][&code], falsified[0]);
                }
            }
        }
    }

    #[test]
    fn f3_single_variable_equation() {
        // x = 2 over F_3, 2-bit encoding: range clause -b1 v -b0 plus
        // clauses forcing (b1, b0) = (1, 0)
        let sys = LinSystemFq::new(
            3,
            1,
            1,
            vec![Equation {
                support: vec![0],
                coeffs: vec![1],
                rhs: 2,
            }],
        )
        .unwrap();
        let enc = encode_system(&sys);
        assert_eq!(enc.layout.bits, 2);
        assert!(enc.cnf.clauses.contains(&vec![-1, -2]));
        // satisfying assignments of the CNF are exactly the encoding of 2
        let sat: Vec<u64> = (0u64..4)
            .filter(|&a| enc.cnf.satisfied_by_mask(a))
            .collect();
        assert_eq!(sat, vec![0b10]);
    }

    #[test]
    fn polytope_layout_and_integral_points() {
        // Tseitin(K3, all-1) polytope: 6 clause rows + 6 box rows, no
        // integral points
        let sys = tseitin(&complete_graph_all_one(3)).unwrap();
        let f = to_cnf(&sys);
        let p = to_polytope(&f);
        assert_eq!(p.ineqs.len(), 6 + 6);
        for mask in 0u64..8 {
            assert!(!p.contains_mask(mask));
        }
    }

    #[test]
    fn clause_translation_example() {
        // (x1 v -x2) becomes x1 - x2 >= 0
        let q = clause_ineq(2, &[1, -2]);
        assert_eq!(q, LinIneq::ge(IntVec::from_i64(&[1, -1]), i_rat(0)));
    }

    #[test]
    fn empty_clause_set_is_unit_cube() {
        let p = to_polytope(&Cnf {
            num_vars: 2,
            clauses: vec![],
        });
        assert_eq!(p.ineqs.len(), 4);
        for mask in 0u64..4 {
            assert!(p.contains_mask(mask));
        }
    }

    #[test]
    fn kxor_of_single_clause() {
        let f = Cnf::new(2, vec![vec![1, 2]]).unwrap();
        let sys = cnf_to_kxor(&f).unwrap();
        assert_eq!(sys.equations, vec![xor_eq(&[0, 1], 1)]);
    }

    #[test]
    fn kxor_encoding_contains_original() {
        // for any f, to_cnf(cnf_to_kxor(f)) contains f as clause sets
        let f = Cnf::new(
            4,
            vec![vec![1, -2, 3], vec![-1, -3, 4], vec![2, 3, -4]],
        )
        .unwrap();
        let sys = cnf_to_kxor(&f).unwrap();
        let g = to_cnf(&sys);
        for c in &f.clauses {
            let mut sorted: Vec<i64> = c.clone();
            sorted.sort_by_key(|l| l.unsigned_abs());
            assert!(
                g.clauses
                    .iter()
                    .any(|d| {
                        let mut ds = d.clone();
                        ds.sort_by_key(|l| l.unsigned_abs());
                        ds == sorted
                    }),
                "missing {c:?}"
            );
        }
    }

    #[test]
    fn kxor_rejects_mixed_width() {
        let f = Cnf::new(3, vec![vec![1, 2], vec![1, 2, 3]]).unwrap();
        assert!(cnf_to_kxor(&f).is_err());
    }

    #[test]
    fn lift_unit_clause() {
        // (z1) lifts to 8 clauses of width 4 forbidding even-parity blocks
        let f = Cnf::new(1, vec![vec![1]]).unwrap();
        let l = xor4_lift(&f);
        assert_eq!(l.num_vars, 4);
        assert_eq!(l.clauses.len(), 8);
        assert!(l.clauses.iter().all(|c| c.len() == 4));
        for a in 0u64..16 {
            assert_eq!(l.satisfied_by_mask(a), a.count_ones() % 2 == 1);
        }
    }

    #[test]
    fn lift_width_two() {
        let f = Cnf::new(2, vec![vec![1, -2]]).unwrap();
        let l = xor4_lift(&f);
        assert_eq!(l.clauses.len(), 64);
        assert!(l.clauses.iter().all(|c| c.len() == 8));
    }

    #[test]
    fn lift_semantics_exhaustive() {
        // x satisfies the lift iff XOR4^n(x) satisfies f (n <= 3 original vars)
        let f = Cnf::new(3, vec![vec![1, 2], vec![-2, 3], vec![-1, -3]]).unwrap();
        let l = xor4_lift(&f);
        for a in 0u64..(1 << 12) {
            assert_eq!(
                l.satisfied_by_mask(a),
                f.satisfied_by_mask(xor4_image(a, 3)),
            );
        }
    }

    #[test]
    fn lift_system_matches_lift_cnf_semantics() {
        let sys = LinSystemFq::new(2, 2, 2, vec![xor_eq(&[0, 1], 1)]).unwrap();
        let lifted = xor4_lift_system(&sys);
        assert_eq!(lifted.n, 8);
        assert_eq!(lifted.equations[0].width(), 8);
        let f = to_cnf(&lifted);
        for a in 0u64..(1 << 8) {
            let img = xor4_image(a, 2);
            let want = (img & 1) ^ (img >> 1 & 1) == 1;
            assert_eq!(f.satisfied_by_mask(a), want);
        }
    }
}
