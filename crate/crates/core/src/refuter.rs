//! Builds Stabbing Planes refutations of unsatisfiable F_q-linear systems.
//!
//! The construction maintains a subset `I` of equations and an integer
//! `k_I`, the value of `sum_{i in I} alpha_i f_i` pinned by the queries so
//! far, with the invariant `k_I - sum_{i in I} alpha_i b_i != 0 (mod q)`.
//! Each round splits `I` into balanced halves, reads off the integer value
//! of the first half's form through an ascending chain of threshold
//! queries, and recurses on a violated half. Terminal cases: a root value
//! not divisible by q is closed by a divide-by-q query; out-of-range chain
//! outcomes are closed by summing the three pinned inequalities; a single
//! equation is closed by querying its support bits and combining with the
//! falsified clause axiom.
//!
//! Every leaf carries explicit Farkas multipliers and every query a
//! validity certificate for its weak side, so downstream translation never
//! re-solves anything.

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::exact::linalg::ModSolve;
use crate::exact::IntVec;
use crate::instances::encode::{box_hi_row, box_lo_row, encode_system, to_polytope, SystemEncoding};
use crate::instances::LinSystemFq;
use crate::num::{int_rat, Int, Rational};
use crate::sp::{LeafRef, SpNode, SpProof};

/// Sparse Farkas-style combination over axioms and path edges.
pub type Cert = Vec<(LeafRef, Rational)>;

#[derive(Debug, Clone)]
pub struct RefutationMeta {
    /// Validity certificate per query (preorder over queries): a nonnegative
    /// combination of axioms and path edges equal to the query vector with
    /// right-hand side at least `b - 1` (the weak side is always the left
    /// one in this construction).
    pub validity: Vec<Cert>,
    /// One line per recursion round, for audit.
    pub transcript: Vec<String>,
    /// Tree depth with every value-query chain accounted as a balanced
    /// binary tree over its outcomes.
    pub balanced_depth: usize,
    /// Concrete per-instance size bound `(q^2 m d)^2 (ceil(log2 m) + 2)
    /// q^(d ceil(log2 q))`.
    pub size_bound: u128,
    /// The minimized unsatisfiability certificate used.
    pub alpha: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct SpRefutation {
    pub proof: SpProof,
    pub meta: RefutationMeta,
}

#[derive(Debug, thiserror::Error)]
pub enum RefuteError {
    #[error("system is satisfiable; witness assignment {0:?}")]
    Satisfiable(Vec<u64>),
}

/// Internal tree carrying certificates where they are produced.
enum RNode {
    Query {
        a: IntVec,
        b: Int,
        validity: Cert,
        left: Box<RNode>,
        right: Box<RNode>,
    },
    Leaf(Cert),
}

struct Pinned {
    k: Int,
    /// proves `form >= k`
    ge: Cert,
    /// proves `-form >= -k`
    le: Cert,
}

struct Builder<'a> {
    sys: &'a LinSystemFq,
    enc: &'a SystemEncoding,
    alpha: &'a [u64],
    num_clauses: usize,
    transcript: Vec<String>,
    queries: usize,
}

/// The integer linear form of `sum_{i in I} alpha_i f_i` over the boolean
/// encoding variables. All coefficients are nonnegative.
fn subset_form(sys: &LinSystemFq, enc: &SystemEncoding, alpha: &[u64], idxs: &[usize]) -> IntVec {
    let mut coeffs = IntVec::zero(enc.layout.num_bool_vars(sys.n));
    for &i in idxs {
        let eq = &sys.equations[i];
        for (&z, &c) in eq.support.iter().zip(&eq.coeffs) {
            for j in 0..enc.layout.bits {
                coeffs.0[enc.layout.bool_var(z, j)] += Int::from(alpha[i] * c) << j;
            }
        }
    }
    coeffs
}

fn coeff_sum(form: &IntVec) -> Int {
    form.0.iter().fold(Int::zero(), |s, c| s + c)
}

impl<'a> Builder<'a> {
    /// `sum_v form_v * (x_v >= 0)`, proving `form . x >= 0`.
    fn box_lo_combo(&self, form: &IntVec) -> Cert {
        form.0
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(v, c)| (LeafRef::Axiom(box_lo_row(self.num_clauses, v)), int_rat(c)))
            .collect()
    }

    /// `sum_v form_v * (-x_v >= -1)`, proving `-form . x >= -sum(form)`.
    fn box_hi_combo(&self, form: &IntVec) -> Cert {
        form.0
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(v, c)| (LeafRef::Axiom(box_hi_row(self.num_clauses, v)), int_rat(c)))
            .collect()
    }

    fn residue(&self, idxs: &[usize], k: &Int) -> u64 {
        let q = self.sys.q;
        let mut target: u64 = 0;
        for &i in idxs {
            target = (target + self.alpha[i] % q * (self.sys.equations[i].rhs % q)) % q;
        }
        let kq = k.mod_floor(&Int::from(q)).to_u64().expect("residue fits");
        (kq + q - target) % q
    }

    /// Builds the ascending chain querying the integer value of `form`
    /// (known to lie in `[0, hi]` given the path) and hands each outcome
    /// to `handle`. `depth` is the path length at the chain top.
    #[allow(clippy::too_many_arguments)]
    fn chain(
        &mut self,
        form: &IntVec,
        hi: &Int,
        le_at_hi: Cert,
        depth: usize,
        mut handle: impl FnMut(&mut Self, Int, Pinned, usize) -> (RNode, usize),
    ) -> (RNode, usize) {
        let hi_u = hi.to_usize().expect("chain bound fits usize");
        let mut outcomes: Vec<(RNode, usize)> = Vec::with_capacity(hi_u + 1);
        for v in 0..=hi_u {
            let vi = Int::from(v as u64);
            let ge: Cert = if v == 0 {
                self.box_lo_combo(form)
            } else {
                vec![(LeafRef::Edge(depth + v - 1), crate::num::i_rat(1))]
            };
            let le: Cert = if v < hi_u {
                vec![(LeafRef::Edge(depth + v), crate::num::i_rat(1))]
            } else {
                le_at_hi.clone()
            };
            let node_depth = if v < hi_u { depth + v + 1 } else { depth + v };
            let pinned = Pinned {
                k: vi.clone(),
                ge,
                le,
            };
            outcomes.push(handle(self, vi, pinned, node_depth));
        }
        // fold the spine bottom-up: query t has left = outcome t-1, right =
        // rest of the chain; the deepest right child is outcome hi.
        // balanced accounting: ceil(log2(#outcomes)) levels per chain.
        let chain_bal = (usize::BITS - hi_u.leading_zeros()) as usize;
        let mut bal = 0usize;
        let mut iter = outcomes.into_iter().rev();
        let (mut spine, b0) = iter.next().expect("at least one outcome");
        bal = bal.max(b0);
        let mut t = hi_u;
        for (outcome, ob) in iter {
            bal = bal.max(ob);
            let validity: Cert = if t == 1 {
                self.box_lo_combo(form)
            } else {
                vec![(LeafRef::Edge(depth + t - 2), crate::num::i_rat(1))]
            };
            self.queries += 1;
            spine = RNode::Query {
                a: form.clone(),
                b: Int::from(t as u64),
                validity,
                left: Box::new(outcome),
                right: Box::new(spine),
            };
            t -= 1;
        }
        (spine, chain_bal + bal)
    }

    fn rec(&mut self, idxs: &[usize], pinned: Pinned, depth: usize) -> (RNode, usize) {
        debug_assert!(self.residue(idxs, &pinned.k) != 0, "round invariant");
        if idxs.len() == 1 {
            return self.gadget(idxs[0], pinned, depth);
        }
        let half = idxs.len().div_ceil(2);
        let (i1, i2) = idxs.split_at(half);
        let form1 = subset_form(self.sys, self.enc, self.alpha, i1);
        let form2 = subset_form(self.sys, self.enc, self.alpha, i2);
        let u1 = coeff_sum(&form1);
        let u2 = coeff_sum(&form2);
        let hi = u1.clone().min(pinned.k.clone());
        self.transcript.push(format!(
            "round: I={idxs:?} k={} split={}|{} u1={u1} u2={u2} chain_hi={hi}",
            pinned.k,
            i1.len(),
            i2.len()
        ));
        let le_at_hi: Cert = if hi == u1 {
            self.box_hi_combo(&form1)
        } else {
            // hi = k: -form1 = -form + form2 >= -k
            let mut c = pinned.le.clone();
            c.extend(self.box_lo_combo(&form2));
            c
        };
        let k = pinned.k.clone();
        let ge_parent = pinned.ge.clone();
        let le_parent = pinned.le.clone();
        self.chain(&form1, &hi, le_at_hi, depth, |me, v, vp, node_depth| {
            if &k - &v > u2 {
                // rationally impossible outcome: form2 cannot reach k - v
                let mut cert = ge_parent.clone();
                cert.extend(vp.le.clone());
                cert.extend(me.box_hi_combo(&form2));
                return (RNode::Leaf(cert), 0);
            }
            let r1 = me.residue(i1, &v);
            if r1 != 0 {
                me.rec(i1, vp, node_depth)
            } else {
                let mut ge = ge_parent.clone();
                ge.extend(vp.le);
                let mut le = le_parent.clone();
                le.extend(vp.ge);
                me.rec(
                    i2,
                    Pinned {
                        k: &k - &v,
                        ge,
                        le,
                    },
                    node_depth,
                )
            }
        })
    }

    /// Closes a single pinned equation by querying its support bits one by
    /// one; rationally impossible prefixes close early, every complete
    /// assignment contradicts a clause of the equation's encoding.
    fn gadget(&mut self, ei: usize, pinned: Pinned, depth: usize) -> (RNode, usize) {
        let eq = &self.sys.equations[ei];
        let bits = self.enc.support_bits(eq);
        let form = subset_form(self.sys, self.enc, self.alpha, &[ei]);
        let coeffs: Vec<Int> = bits.iter().map(|&bv| form.0[bv].clone()).collect();
        self.transcript.push(format!(
            "gadget: eq={ei} k={} bits={}",
            pinned.k,
            bits.len()
        ));
        self.gadget_rec(ei, &bits, &coeffs, &pinned, &mut Vec::new(), depth)
    }

    #[allow(clippy::too_many_arguments)]
    fn gadget_rec(
        &mut self,
        ei: usize,
        bits: &[usize],
        coeffs: &[Int],
        pinned: &Pinned,
        sigma: &mut Vec<(bool, usize)>, // (value, edge depth)
        depth: usize,
    ) -> (RNode, usize) {
        let t = sigma.len();
        let lo: Int = sigma
            .iter()
            .enumerate()
            .filter(|(_, (b, _))| *b)
            .map(|(i, _)| coeffs[i].clone())
            .fold(Int::zero(), |s, c| s + c);
        let rem: Int = coeffs[t..].iter().fold(Int::zero(), |s, c| s + c);
        let n = self.enc.layout.num_bool_vars(self.sys.n);
        if lo > pinned.k {
            // set bits alone already exceed the pinned value
            let mut cert: Cert = Vec::new();
            for (i, (b, d)) in sigma.iter().enumerate() {
                if *b {
                    cert.push((LeafRef::Edge(*d), int_rat(&coeffs[i])));
                }
            }
            // pad every other support bit back in through its lower box row
            for (i, &bv) in bits.iter().enumerate() {
                let set = i < t && sigma[i].0;
                if !set && !coeffs[i].is_zero() {
                    cert.push((
                        LeafRef::Axiom(box_lo_row(self.num_clauses, bv)),
                        int_rat(&coeffs[i]),
                    ));
                }
            }
            cert.extend(pinned.le.clone());
            let _ = n;
            return (RNode::Leaf(cert), 0);
        }
        if &lo + &rem < pinned.k {
            // even setting every remaining bit cannot reach the pinned value
            let mut cert: Cert = pinned.ge.clone();
            for (i, (b, d)) in sigma.iter().enumerate() {
                if !*b {
                    cert.push((LeafRef::Edge(*d), int_rat(&coeffs[i])));
                } else {
                    cert.push((
                        LeafRef::Axiom(box_hi_row(self.num_clauses, bits[i])),
                        int_rat(&coeffs[i]),
                    ));
                }
            }
            for (i, &bv) in bits.iter().enumerate().skip(t) {
                if !coeffs[i].is_zero() {
                    cert.push((
                        LeafRef::Axiom(box_hi_row(self.num_clauses, bv)),
                        int_rat(&coeffs[i]),
                    ));
                }
            }
            return (RNode::Leaf(cert), 0);
        }
        if t == bits.len() {
            debug_assert_eq!(lo, pinned.k, "pruned gadget pins the exact value");
            let code: u64 = sigma
                .iter()
                .enumerate()
                .map(|(i, (b, _))| (*b as u64) << i)
                .sum();
            let row = *self.enc.eq_clause[ei]
                .get(&code)
                .expect("pinned value contradicts the equation, so the clause exists");
            let mut cert: Cert = vec![(LeafRef::Axiom(row), crate::num::i_rat(1))];
            for (_, (b, d)) in sigma.iter().enumerate() {
                let _ = b;
                cert.push((LeafRef::Edge(*d), crate::num::i_rat(1)));
            }
            return (RNode::Leaf(cert), 0);
        }
        // query the next support bit
        let bv = bits[t];
        let mut a = IntVec::zero(self.enc.layout.num_bool_vars(self.sys.n));
        a.0[bv] = Int::from(1);
        self.queries += 1;
        sigma.push((false, depth));
        let (left, bl) = self.gadget_rec(ei, bits, coeffs, pinned, sigma, depth + 1);
        sigma.pop();
        sigma.push((true, depth));
        let (right, br) = self.gadget_rec(ei, bits, coeffs, pinned, sigma, depth + 1);
        sigma.pop();
        let validity = vec![(
            LeafRef::Axiom(box_lo_row(self.num_clauses, bv)),
            crate::num::i_rat(1),
        )];
        (
            RNode::Query {
                a,
                b: Int::from(1),
                validity,
                left: Box::new(left),
                right: Box::new(right),
            },
            1 + bl.max(br),
        )
    }

    /// Root: query the full certificate form (all coefficients divisible by
    /// q) and close or recurse per outcome.
    fn root(&mut self, idxs: &[usize]) -> (RNode, usize) {
        let q = self.sys.q;
        let form = subset_form(self.sys, self.enc, self.alpha, idxs);
        debug_assert!(form
            .0
            .iter()
            .all(|c| (c % Int::from(q)).is_zero()));
        let u0 = coeff_sum(&form);
        self.transcript
            .push(format!("root: I={idxs:?} u0={u0} q={q}"));
        let le_at_hi = self.box_hi_combo(&form);
        let idxs_v = idxs.to_vec();
        self.chain(&form, &u0.clone(), le_at_hi, 0, |me, v, vp, node_depth| {
            if (&v % Int::from(q)).is_zero() {
                me.rec(&idxs_v, vp, node_depth)
            } else {
                me.divide_close(&form, &v, vp, node_depth)
            }
        })
    }

    /// Case (i): the pinned root value is not divisible by q although every
    /// variable's coefficient is; one query on the divided form closes both
    /// sides.
    fn divide_close(&mut self, form: &IntVec, v: &Int, pinned: Pinned, depth: usize) -> (RNode, usize) {
        let q = Int::from(self.sys.q);
        let divided = form.divided(&q);
        let b = crate::num::ceil(&(int_rat(v) / int_rat(&q)));
        let mut left_cert: Cert = vec![(LeafRef::Edge(depth), int_rat(&q))];
        left_cert.extend(pinned.ge.clone());
        let mut right_cert: Cert = vec![(LeafRef::Edge(depth), int_rat(&q))];
        right_cert.extend(pinned.le.clone());
        // validity of divided >= b-1: (1/q) * (form >= v)
        let validity: Cert = pinned
            .ge
            .iter()
            .map(|(r, m)| (*r, m / int_rat(&q)))
            .collect();
        self.queries += 1;
        self.transcript
            .push(format!("divide: v={v} b={b} depth={depth}"));
        (
            RNode::Query {
                a: divided,
                b,
                validity,
                left: Box::new(RNode::Leaf(left_cert)),
                right: Box::new(RNode::Leaf(right_cert)),
            },
            1,
        )
    }
}

/// Shrinks an unsatisfiability certificate to inclusion-minimal support by
/// re-eliminating over sub-supports.
fn minimize_certificate(sys: &LinSystemFq, mut alpha: Vec<u64>) -> Vec<u64> {
    let (a, b) = sys.dense();
    'outer: loop {
        let support: Vec<usize> = (0..sys.m()).filter(|&i| alpha[i] % sys.q != 0).collect();
        for &drop in &support {
            let keep: Vec<usize> = support.iter().copied().filter(|&i| i != drop).collect();
            if keep.is_empty() {
                continue;
            }
            let sub_a: Vec<Vec<u64>> = keep.iter().map(|&i| a[i].clone()).collect();
            let sub_b: Vec<u64> = keep.iter().map(|&i| b[i]).collect();
            if let Ok(ModSolve::Certificate(al)) =
                crate::exact::linalg::solve_mod_p(&sub_a, &sub_b, sys.q)
            {
                let mut full = vec![0u64; sys.m()];
                for (t, &i) in keep.iter().enumerate() {
                    full[i] = al[t];
                }
                alpha = full;
                continue 'outer;
            }
        }
        return alpha;
    }
}

/// Iterative conversion collecting validity certificates in preorder over
/// queries (left subtree before right).
fn to_sp_node(node: RNode, validity: &mut Vec<Cert>) -> SpNode {
    enum Task {
        Visit(RNode),
        Assemble { a: IntVec, b: Int },
    }
    let mut tasks = vec![Task::Visit(node)];
    let mut done: Vec<SpNode> = Vec::new();
    while let Some(t) = tasks.pop() {
        match t {
            Task::Visit(RNode::Leaf(cert)) => done.push(SpNode::leaf(cert)),
            Task::Visit(RNode::Query {
                a,
                b,
                validity: v,
                left,
                right,
            }) => {
                validity.push(v);
                tasks.push(Task::Assemble { a, b });
                tasks.push(Task::Visit(*right));
                tasks.push(Task::Visit(*left));
            }
            Task::Assemble { a, b } => {
                let right = done.pop().expect("right child");
                let left = done.pop().expect("left child");
                done.push(SpNode::Query {
                    a,
                    b,
                    left: Box::new(left),
                    right: Box::new(right),
                });
            }
        }
    }
    done.pop().expect("root")
}

/// Builds a verified-by-construction SP refutation of the clause polytope
/// of `sys`, with all leaf certificates and per-query validity certificates.
pub fn refute_sp(sys: &LinSystemFq) -> Result<SpRefutation, RefuteError> {
    let alpha0 = match sys.solve() {
        ModSolve::Solution(x) => return Err(RefuteError::Satisfiable(x)),
        ModSolve::Certificate(a) => a,
    };
    let alpha = minimize_certificate(sys, alpha0);
    let support: Vec<usize> = (0..sys.m()).filter(|&i| alpha[i] % sys.q != 0).collect();
    let enc = encode_system(sys);
    let num_clauses = enc.cnf.clauses.len();
    let mut b = Builder {
        sys,
        enc: &enc,
        alpha: &alpha,
        num_clauses,
        transcript: Vec::new(),
        queries: 0,
    };
    let (root, balanced_depth) = b.root(&support);
    let transcript = std::mem::take(&mut b.transcript);
    let queries = b.queries;
    let mut validity = Vec::with_capacity(queries);
    let root = to_sp_node(root, &mut validity);
    let proof = SpProof {
        axioms: to_polytope(&enc.cnf),
        root,
    };
    let size_bound = size_bound(sys);
    debug_assert!(queries as u128 <= size_bound);
    Ok(SpRefutation {
        proof,
        meta: RefutationMeta {
            validity,
            transcript,
            balanced_depth,
            size_bound,
            alpha,
        },
    })
}

/// The concrete arithmetic size bound asserted per instance:
/// `(q^2 m d)^2 * (ceil(log2 m) + 2) * q^(d * ceil(log2 q))`.
pub fn size_bound(sys: &LinSystemFq) -> u128 {
    let q = sys.q as u128;
    let m = sys.m().max(1) as u128;
    let d = sys.width.max(1) as u128;
    let per_round = (q * q * m * d).saturating_mul(q * q * m * d);
    let rounds = (u128::BITS - m.leading_zeros()) as u128 + 2;
    let layout_bits = crate::instances::encode::BitLayout::for_modulus(sys.q).bits as u32;
    let gadget = q.saturating_pow(sys.width as u32 * layout_bits);
    per_round
        .saturating_mul(rounds)
        .saturating_mul(gadget)
}

/// (query count, balanced-chain tree depth) of the refutation.
pub fn refute_sp_stats(sys: &LinSystemFq) -> Result<(usize, usize), RefuteError> {
    let r = refute_sp(sys)?;
    let (size, _, _) = crate::sp::sp_stats(&r.proof);
    Ok((size, r.meta.balanced_depth))
}
