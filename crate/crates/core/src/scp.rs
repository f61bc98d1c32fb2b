//! Top-down semantic Cutting Planes DAGs of halfspaces, their exhaustive
//! verifier, and the syntactic-CP-to-DAG conversion.
//!
//! A node stores a proof-line inequality; the node's halfspace is the set
//! of points *falsifying* that inequality. The root is labelled with a
//! line falsified everywhere (`0 >= 1`), every internal node's boolean
//! falsified points must be covered by its children, and every sink cites
//! a clause of the companion CNF that all its boolean points falsify.

use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::cp::{is_refutation, verify_cp, CpProof, Justification};
use crate::exact::{IntVec, LinIneq};
use crate::instances::{clause_sat_mask, encode::to_polytope, Cnf};
use crate::num::{bit_len, int_rat, Int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScpKind {
    One(u32),
    Two(u32, u32),
    Sink(u32),
}

impl ScpKind {
    pub fn children(&self) -> Vec<usize> {
        match self {
            ScpKind::One(a) => vec![*a as usize],
            ScpKind::Two(a, b) => vec![*a as usize, *b as usize],
            ScpKind::Sink(_) => Vec::new(),
        }
    }
}

enum Store {
    /// Flat row-major coefficients with machine-word rationals on the right.
    Small {
        coeffs: Vec<i64>,
        rhs_num: Vec<i64>,
        rhs_den: Vec<i64>,
    },
    Big(Vec<LinIneq>),
}

pub struct ScpDag {
    pub n: usize,
    kinds: Vec<ScpKind>,
    store: Store,
    root: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ScpStructError {
    #[error("node {0} cites a child out of range")]
    ChildOutOfRange(usize),
    #[error("graph contains a cycle through node {0}")]
    Cyclic(usize),
    #[error("root index out of range")]
    BadRoot,
    #[error("inequality dimension mismatch at node {0}")]
    DimMismatch(usize),
}

/// Incremental constructor that keeps coefficients machine-sized while
/// possible and transparently falls back to arbitrary precision.
pub struct ScpDagBuilder {
    n: usize,
    kinds: Vec<ScpKind>,
    store: Store,
}

impl ScpDagBuilder {
    pub fn new(n: usize) -> Self {
        ScpDagBuilder {
            n,
            kinds: Vec::new(),
            store: Store::Small {
                coeffs: Vec::new(),
                rhs_num: Vec::new(),
                rhs_den: Vec::new(),
            },
        }
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn push(&mut self, ineq: &LinIneq, kind: ScpKind) -> usize {
        assert_eq!(ineq.dim(), self.n);
        let idx = self.kinds.len();
        self.kinds.push(kind);
        if let Store::Small {
            coeffs,
            rhs_num,
            rhs_den,
        } = &mut self.store
        {
            let fits = ineq.coeffs.0.iter().all(|c| c.to_i64().is_some())
                && ineq.rhs.numer().to_i64().is_some()
                && ineq.rhs.denom().to_i64().is_some();
            if fits {
                coeffs.extend(ineq.coeffs.0.iter().map(|c| c.to_i64().unwrap()));
                rhs_num.push(ineq.rhs.numer().to_i64().unwrap());
                rhs_den.push(ineq.rhs.denom().to_i64().unwrap());
                return idx;
            }
            // spill everything to the big representation
            let mut big = Vec::with_capacity(idx + 1);
            for i in 0..idx {
                big.push(unpack_small(self.n, coeffs, rhs_num, rhs_den, i));
            }
            self.store = Store::Big(big);
        }
        if let Store::Big(v) = &mut self.store {
            v.push(ineq.clone());
        }
        idx
    }

    pub fn finish(self, root: usize) -> Result<ScpDag, ScpStructError> {
        let dag = ScpDag {
            n: self.n,
            kinds: self.kinds,
            store: self.store,
            root,
        };
        dag.validate_structure()?;
        Ok(dag)
    }
}

fn unpack_small(
    n: usize,
    coeffs: &[i64],
    rhs_num: &[i64],
    rhs_den: &[i64],
    i: usize,
) -> LinIneq {
    LinIneq::ge(
        IntVec(coeffs[i * n..(i + 1) * n].iter().map(|&c| Int::from(c)).collect()),
        Rational::new(rhs_num[i].into(), rhs_den[i].into()),
    )
}

impl ScpDag {
    pub fn from_nodes(
        n: usize,
        nodes: Vec<(LinIneq, ScpKind)>,
        root: usize,
    ) -> Result<Self, ScpStructError> {
        let mut b = ScpDagBuilder::new(n);
        for (ineq, kind) in &nodes {
            if ineq.dim() != n {
                return Err(ScpStructError::DimMismatch(b.len()));
            }
            b.push(ineq, *kind);
        }
        b.finish(root)
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn kind(&self, i: usize) -> ScpKind {
        self.kinds[i]
    }

    pub fn ineq(&self, i: usize) -> LinIneq {
        match &self.store {
            Store::Small {
                coeffs,
                rhs_num,
                rhs_den,
            } => unpack_small(self.n, coeffs, rhs_num, rhs_den, i),
            Store::Big(v) => v[i].clone(),
        }
    }

    fn validate_structure(&self) -> Result<(), ScpStructError> {
        if self.root >= self.len() {
            return Err(ScpStructError::BadRoot);
        }
        for (i, k) in self.kinds.iter().enumerate() {
            for c in k.children() {
                if c >= self.len() {
                    return Err(ScpStructError::ChildOutOfRange(i));
                }
            }
        }
        // Kahn toposort for acyclicity
        let mut indeg = vec![0usize; self.len()];
        for k in &self.kinds {
            for c in k.children() {
                indeg[c] += 1;
            }
        }
        let mut queue: Vec<usize> = (0..self.len()).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(u) = queue.pop() {
            seen += 1;
            for c in self.kinds[u].children() {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push(c);
                }
            }
        }
        if seen != self.len() {
            let cyclic = (0..self.len()).find(|&i| indeg[i] > 0).unwrap();
            return Err(ScpStructError::Cyclic(cyclic));
        }
        Ok(())
    }

    /// (size, depth, max coefficient bit length); depth counts nodes on the
    /// longest root-to-sink path.
    pub fn stats(&self) -> (usize, usize, u64) {
        let mut depth = vec![0usize; self.len()];
        let mut order: Vec<usize> = (0..self.len()).collect();
        // children always have defined depth before parents in reverse
        // topological order; recompute by repeated relaxation over a DFS
        let mut stack = vec![(self.root, false)];
        let mut visited = vec![false; self.len()];
        order.clear();
        while let Some((u, processed)) = stack.pop() {
            if processed {
                order.push(u);
                continue;
            }
            if visited[u] {
                continue;
            }
            visited[u] = true;
            stack.push((u, true));
            for c in self.kinds[u].children() {
                if !visited[c] {
                    stack.push((c, false));
                }
            }
        }
        for &u in &order {
            depth[u] = 1 + self.kinds[u]
                .children()
                .iter()
                .map(|&c| depth[c])
                .max()
                .unwrap_or(0);
        }
        let mut bits = 0u64;
        for i in 0..self.len() {
            let q = self.ineq(i);
            bits = bits.max(bit_len(&q.coeffs.max_abs()));
        }
        (self.len(), depth[self.root], bits)
    }
}

pub const DEFAULT_SCP_BUDGET: usize = 22;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScpVerdict {
    Valid,
    Invalid { node: usize, reason: String },
}

impl ScpVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, ScpVerdict::Valid)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScpVerifyError {
    #[error("{n} variables exceed the exhaustive budget {budget}")]
    BudgetExceeded { n: usize, budget: usize },
    #[error("formula has {cnf} variables but the dag is over {dag}")]
    VarMismatch { cnf: usize, dag: usize },
}

/// Evaluation plan for one inequality: falsified(x) iff dot(x) < rhs.
struct Eval {
    coeffs: Vec<i64>,
    rhs_num: i64,
    rhs_den: i64,
    big: Option<(IntVec, Rational)>,
}

impl Eval {
    fn new(q: &LinIneq) -> Self {
        let small = q.coeffs.0.iter().all(|c| c.to_i64().is_some())
            && q.rhs.numer().to_i64().is_some()
            && q.rhs.denom().to_i64().is_some()
            && q.coeffs
                .0
                .iter()
                .map(|c| c.to_i64().map(i64::unsigned_abs).unwrap_or(u64::MAX) as u128)
                .sum::<u128>()
                < (i64::MAX / 4) as u128;
        if small {
            Eval {
                coeffs: q.coeffs.0.iter().map(|c| c.to_i64().unwrap()).collect(),
                rhs_num: q.rhs.numer().to_i64().unwrap(),
                rhs_den: q.rhs.denom().to_i64().unwrap(),
                big: None,
            }
        } else {
            Eval {
                coeffs: Vec::new(),
                rhs_num: 0,
                rhs_den: 1,
                big: Some((q.coeffs.clone(), q.rhs.clone())),
            }
        }
    }

    fn falsified_mask(&self, mask: u64, n: usize) -> bool {
        match &self.big {
            None => {
                let mut dot: i64 = 0;
                for (i, &c) in self.coeffs.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        dot += c;
                    }
                }
                (dot as i128) * (self.rhs_den as i128) < self.rhs_num as i128
            }
            Some((coeffs, rhs)) => {
                let mut dot = Int::zero();
                for i in 0..n {
                    if mask >> i & 1 == 1 {
                        dot += &coeffs.0[i];
                    }
                }
                int_rat(&dot) < *rhs
            }
        }
    }
}

/// Checks one node's semantic condition over the whole cube. Uses Gray-code
/// incremental dot products in machine words when coefficients allow.
fn check_node(dag: &ScpDag, f: &Cnf, u: usize) -> Result<(), String> {
    let n = dag.n;
    let own = dag.ineq(u);
    let eval_u = Eval::new(&own);
    match dag.kind(u) {
        ScpKind::Sink(k) => {
            let k = k as usize;
            let Some(clause) = f.clauses.get(k) else {
                return Err(format!("sink cites clause {k} out of range"));
            };
            for mask in 0u64..(1u64 << n) {
                if eval_u.falsified_mask(mask, n) && clause_sat_mask(clause, mask) {
                    return Err(format!(
                        "boolean point {mask:#b} in the node halfspace satisfies clause {k}"
                    ));
                }
            }
        }
        ScpKind::One(a) => {
            let ca = dag.ineq(a as usize);
            let eval_a = Eval::new(&ca);
            for mask in 0u64..(1u64 << n) {
                if eval_u.falsified_mask(mask, n) && !eval_a.falsified_mask(mask, n) {
                    return Err(format!("point {mask:#b} not covered by the child"));
                }
            }
        }
        ScpKind::Two(a, b) => {
            let ca = dag.ineq(a as usize);
            let cb = dag.ineq(b as usize);
            let eval_a = Eval::new(&ca);
            let eval_b = Eval::new(&cb);
            for mask in 0u64..(1u64 << n) {
                if eval_u.falsified_mask(mask, n)
                    && !eval_a.falsified_mask(mask, n)
                    && !eval_b.falsified_mask(mask, n)
                {
                    return Err(format!("point {mask:#b} not covered by either child"));
                }
            }
        }
    }
    Ok(())
}

/// Exhaustive validity check over {0,1}^n: unique source labelled with an
/// everywhere-falsified line, internal covering conditions, and sink clause
/// conditions. Deterministic first failure (lowest node index).
pub fn verify_scp(dag: &ScpDag, f: &Cnf, budget: usize) -> Result<ScpVerdict, ScpVerifyError> {
    if dag.n > budget || dag.n >= 63 {
        return Err(ScpVerifyError::BudgetExceeded {
            n: dag.n,
            budget,
        });
    }
    if f.num_vars != dag.n {
        return Err(ScpVerifyError::VarMismatch {
            cnf: f.num_vars,
            dag: dag.n,
        });
    }
    // unique source
    let mut indeg = vec![0usize; dag.len()];
    for i in 0..dag.len() {
        for c in dag.kind(i).children() {
            indeg[c] += 1;
        }
    }
    for i in 0..dag.len() {
        if indeg[i] == 0 && i != dag.root() {
            return Ok(ScpVerdict::Invalid {
                node: i,
                reason: "second source node".into(),
            });
        }
    }
    if indeg[dag.root()] != 0 {
        return Ok(ScpVerdict::Invalid {
            node: dag.root(),
            reason: "root has incoming edges".into(),
        });
    }
    // root must be falsified everywhere (the full space R^n)
    let root_eval = Eval::new(&dag.ineq(dag.root()));
    for mask in 0u64..(1u64 << dag.n) {
        if !root_eval.falsified_mask(mask, dag.n) {
            return Ok(ScpVerdict::Invalid {
                node: dag.root(),
                reason: "root halfspace is not the full space".into(),
            });
        }
    }
    let first_bad = (0..dag.len())
        .into_par_iter()
        .filter_map(|u| check_node(dag, f, u).err().map(|r| (u, r)))
        .min_by_key(|(u, _)| *u);
    Ok(match first_bad {
        None => ScpVerdict::Valid,
        Some((node, reason)) => ScpVerdict::Invalid { node, reason },
    })
}

#[derive(Debug, thiserror::Error)]
pub enum CpToScpError {
    #[error("input proof is invalid at line {line}: {reason}")]
    InvalidProof { line: usize, reason: String },
    #[error("input proof is not a refutation (must end with 0 >= 1)")]
    NotRefutation,
    #[error("proof axioms are not the clause polytope of the formula")]
    AxiomMismatch,
    #[error(transparent)]
    Struct(#[from] ScpStructError),
}

/// Reverses a verified CP refutation of `to_polytope(f)` into a semantic CP
/// DAG: every line becomes the halfspace of points falsifying it, edges run
/// from line to cited antecedents, multi-antecedent combinations are split
/// into fan-out-2 partial sums, and axiom lines become sinks citing their
/// clause (box axioms have no falsified boolean points and cite clause 0
/// vacuously).
pub fn cp_to_scp(p: &CpProof, f: &Cnf) -> Result<ScpDag, CpToScpError> {
    match verify_cp(p) {
        crate::cp::CpVerdict::Valid => {}
        crate::cp::CpVerdict::Invalid { line, reason } => {
            return Err(CpToScpError::InvalidProof { line, reason })
        }
    }
    if !is_refutation(p) {
        return Err(CpToScpError::NotRefutation);
    }
    if p.axioms != to_polytope(f) {
        return Err(CpToScpError::AxiomMismatch);
    }
    // restrict to lines reachable from the final one
    let last = p.lines.len() - 1;
    let mut reach = vec![false; p.lines.len()];
    let mut stack = vec![last];
    reach[last] = true;
    while let Some(i) = stack.pop() {
        let cited: Vec<usize> = match &p.lines[i].just {
            Justification::Axiom(_) => Vec::new(),
            Justification::LinComb(pairs) => pairs
                .iter()
                .filter(|(_, l)| !l.is_zero())
                .map(|(j, _)| *j)
                .collect(),
            Justification::Div(j, _) => vec![*j],
        };
        for j in cited {
            if !reach[j] {
                reach[j] = true;
                stack.push(j);
            }
        }
    }

    let m = f.clauses.len();
    let mut b = ScpDagBuilder::new(f.num_vars);
    let mut node_of = vec![usize::MAX; p.lines.len()];
    for (i, line) in p.lines.iter().enumerate() {
        if !reach[i] {
            continue;
        }
        let idx = match &line.just {
            Justification::Axiom(k) => {
                let clause = if *k < m { *k } else { 0 };
                b.push(&line.ineq, ScpKind::Sink(clause as u32))
            }
            Justification::Div(j, _) => b.push(&line.ineq, ScpKind::One(node_of[*j] as u32)),
            Justification::LinComb(pairs) => {
                let pairs: Vec<&(usize, Int)> =
                    pairs.iter().filter(|(_, l)| !l.is_zero()).collect();
                match pairs.len() {
                    0 => b.push(&line.ineq, ScpKind::Sink(0)),
                    1 => b.push(&line.ineq, ScpKind::One(node_of[pairs[0].0] as u32)),
                    _ => {
                        // fold into fan-out-2 partial sums
                        let (j0, l0) = pairs[0];
                        let (j1, l1) = pairs[1];
                        let mut sum_coeffs = &p.lines[*j0].ineq.coeffs.scaled(l0)
                            + &p.lines[*j1].ineq.coeffs.scaled(l1);
                        let mut sum_rhs =
                            &p.lines[*j0].ineq.rhs * int_rat(l0) + &p.lines[*j1].ineq.rhs * int_rat(l1);
                        let mut cur = b.push(
                            &LinIneq::ge(sum_coeffs.clone(), sum_rhs.clone()),
                            ScpKind::Two(node_of[*j0] as u32, node_of[*j1] as u32),
                        );
                        for (jt, lt) in pairs.iter().skip(2) {
                            sum_coeffs = &sum_coeffs + &p.lines[*jt].ineq.coeffs.scaled(lt);
                            sum_rhs += &p.lines[*jt].ineq.rhs * int_rat(lt);
                            cur = b.push(
                                &LinIneq::ge(sum_coeffs.clone(), sum_rhs.clone()),
                                ScpKind::Two(cur as u32, node_of[*jt] as u32),
                            );
                        }
                        debug_assert_eq!(sum_coeffs, line.ineq.coeffs);
                        debug_assert_eq!(sum_rhs, line.ineq.rhs);
                        cur
                    }
                }
            }
        };
        node_of[i] = idx;
    }
    let root = node_of[last];
    Ok(b.finish(root)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::Cnf;
    use crate::num::i_rat;

    fn ge(c: &[i64], r: i64) -> LinIneq {
        LinIneq::ge(IntVec::from_i64(c), i_rat(r))
    }

    #[test]
    fn single_node_dag_over_satisfiable_cnf_invalid() {
        // a lone node must be both root (falsified everywhere) and sink;
        // over a satisfiable formula the sink condition fails
        let f = Cnf::new(1, vec![vec![1]]).unwrap();
        let dag = ScpDag::from_nodes(1, vec![(LinIneq::zero_ge_one(1), ScpKind::Sink(0))], 0)
            .unwrap();
        match verify_scp(&dag, &f, DEFAULT_SCP_BUDGET).unwrap() {
            ScpVerdict::Invalid { node, .. } => assert_eq!(node, 0),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn sink_covering_satisfied_clause_invalid() {
        // sink whose halfspace contains a point satisfying its cited clause
        let f = Cnf::new(1, vec![vec![1], vec![-1]]).unwrap();
        let nodes = vec![
            (ge(&[1], 1), ScpKind::Sink(1)), // falsified at x=0... and x=1? no: 1>=1 ok
            (LinIneq::zero_ge_one(1), ScpKind::One(0)),
        ];
        // node 0 halfspace = {x : x < 1} contains 0; clause -x is satisfied at 0
        let dag = ScpDag::from_nodes(1, nodes, 1).unwrap();
        match verify_scp(&dag, &f, DEFAULT_SCP_BUDGET).unwrap() {
            ScpVerdict::Invalid { node, .. } => assert_eq!(node, 0),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn reversed_resolution_shape_valid() {
        // {x} and {-x}: falsify(0>=1) = everything, children falsify(x>=1)
        // = {x<1} and falsify(-x>=0) = {x>0}; cube covered
        let f = Cnf::new(1, vec![vec![1], vec![-1]]).unwrap();
        let nodes = vec![
            (ge(&[1], 1), ScpKind::Sink(0)),
            (ge(&[-1], 0), ScpKind::Sink(1)),
            (LinIneq::zero_ge_one(1), ScpKind::Two(0, 1)),
        ];
        let dag = ScpDag::from_nodes(1, nodes, 2).unwrap();
        assert!(verify_scp(&dag, &f, DEFAULT_SCP_BUDGET).unwrap().is_valid());
        assert_eq!(dag.stats().0, 3);
        assert_eq!(dag.stats().1, 2);
    }

    #[test]
    fn cycle_rejected() {
        let nodes = vec![
            (LinIneq::zero_ge_one(1), ScpKind::One(1)),
            (LinIneq::zero_ge_one(1), ScpKind::One(0)),
        ];
        assert!(matches!(
            ScpDag::from_nodes(1, nodes, 0),
            Err(ScpStructError::Cyclic(_))
        ));
    }

    #[test]
    fn budget_enforced() {
        let f = Cnf::new(30, vec![vec![1]]).unwrap();
        let dag =
            ScpDag::from_nodes(30, vec![(LinIneq::zero_ge_one(30), ScpKind::Sink(0))], 0).unwrap();
        assert!(verify_scp(&dag, &f, 22).is_err());
    }
}
