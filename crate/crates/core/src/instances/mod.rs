//! Instance families and their encodings: CNF formulas, width-bounded
//! linear systems over prime fields, labelled graphs, and partial
//! restrictions.

pub mod encode;
pub mod expansion;
pub mod random;
pub mod tseitin;

use std::collections::BTreeSet;

use crate::exact::linalg;

/// A CNF formula. Literals are nonzero signed 1-based variable indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i64>>,
}

#[derive(Debug, thiserror::Error)]
pub enum CnfError {
    #[error("clause {0} contains literal 0")]
    ZeroLiteral(usize),
    #[error("clause {clause} references variable {var} beyond num_vars {num_vars}")]
    VarOutOfRange {
        clause: usize,
        var: usize,
        num_vars: usize,
    },
    #[error("clause {0} contains a variable and its negation")]
    Tautological(usize),
}

impl Cnf {
    /// Validates and normalizes clauses as literal sets (duplicates dropped).
    pub fn new(num_vars: usize, clauses: Vec<Vec<i64>>) -> Result<Self, CnfError> {
        let mut out = Vec::with_capacity(clauses.len());
        for (ci, c) in clauses.into_iter().enumerate() {
            let mut seen = BTreeSet::new();
            let mut clause = Vec::with_capacity(c.len());
            for lit in c {
                if lit == 0 {
                    return Err(CnfError::ZeroLiteral(ci));
                }
                let v = lit.unsigned_abs() as usize;
                if v > num_vars {
                    return Err(CnfError::VarOutOfRange {
                        clause: ci,
                        var: v,
                        num_vars,
                    });
                }
                if seen.contains(&-lit) {
                    return Err(CnfError::Tautological(ci));
                }
                if seen.insert(lit) {
                    clause.push(lit);
                }
            }
            out.push(clause);
        }
        Ok(Cnf {
            num_vars,
            clauses: out,
        })
    }

    /// Does `assignment` (bit i = value of variable i+1) satisfy the formula?
    pub fn satisfied_by_mask(&self, assignment: u64) -> bool {
        self.clauses.iter().all(|c| clause_sat_mask(c, assignment))
    }

    pub fn width(&self) -> usize {
        self.clauses.iter().map(Vec::len).max().unwrap_or(0)
    }
}

pub fn clause_sat_mask(clause: &[i64], assignment: u64) -> bool {
    clause.iter().any(|&lit| {
        let v = lit.unsigned_abs() as usize - 1;
        let bit = assignment >> v & 1 == 1;
        (lit > 0) == bit
    })
}

/// One linear equation over F_q: `sum coeffs[i] * z_support[i] = rhs (mod q)`.
/// Support indices are 0-based, strictly increasing; coefficients lie in
/// `1..q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub support: Vec<usize>,
    pub coeffs: Vec<u64>,
    pub rhs: u64,
}

impl Equation {
    pub fn width(&self) -> usize {
        self.support.len()
    }
}

/// A width-bounded system of linear equations over the prime field F_q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinSystemFq {
    pub q: u64,
    /// Declared width bound d; every equation has support size <= d.
    pub width: usize,
    pub n: usize,
    pub equations: Vec<Equation>,
}

#[derive(Debug, thiserror::Error)]
pub enum SystemError {
    #[error(transparent)]
    NotPrime(#[from] linalg::NotPrime),
    #[error("equation {0} exceeds the declared width bound")]
    WidthExceeded(usize),
    #[error("equation {eq}: {what}")]
    BadEquation { eq: usize, what: String },
}

impl LinSystemFq {
    pub fn new(
        q: u64,
        width: usize,
        n: usize,
        equations: Vec<Equation>,
    ) -> Result<Self, SystemError> {
        if !linalg::is_prime(q) {
            return Err(SystemError::NotPrime(linalg::NotPrime(q)));
        }
        for (i, eq) in equations.iter().enumerate() {
            if eq.support.len() > width {
                return Err(SystemError::WidthExceeded(i));
            }
            if eq.support.len() != eq.coeffs.len() {
                return Err(SystemError::BadEquation {
                    eq: i,
                    what: "support/coefficient length mismatch".into(),
                });
            }
            if !eq.support.windows(2).all(|w| w[0] < w[1]) {
                return Err(SystemError::BadEquation {
                    eq: i,
                    what: "support not strictly increasing".into(),
                });
            }
            if eq.support.iter().any(|&v| v >= n) {
                return Err(SystemError::BadEquation {
                    eq: i,
                    what: "variable out of range".into(),
                });
            }
            if eq.coeffs.iter().any(|&c| c == 0 || c % q == 0 || c >= q) {
                return Err(SystemError::BadEquation {
                    eq: i,
                    what: "coefficient not in 1..q".into(),
                });
            }
            if eq.rhs >= q {
                return Err(SystemError::BadEquation {
                    eq: i,
                    what: "right-hand side not reduced mod q".into(),
                });
            }
        }
        Ok(LinSystemFq {
            q,
            width,
            n,
            equations,
        })
    }

    pub fn m(&self) -> usize {
        self.equations.len()
    }

    /// Dense coefficient matrix and rhs vector for `solve_mod_p`.
    pub fn dense(&self) -> (Vec<Vec<u64>>, Vec<u64>) {
        let mut a = vec![vec![0u64; self.n]; self.m()];
        let mut b = vec![0u64; self.m()];
        for (i, eq) in self.equations.iter().enumerate() {
            for (&v, &c) in eq.support.iter().zip(&eq.coeffs) {
                a[i][v] = c;
            }
            b[i] = eq.rhs;
        }
        (a, b)
    }

    /// Solves or certifies unsatisfiability via Gaussian elimination mod q.
    pub fn solve(&self) -> linalg::ModSolve {
        let (a, b) = self.dense();
        linalg::solve_mod_p(&a, &b, self.q).expect("modulus validated prime")
    }

    pub fn is_satisfiable(&self) -> bool {
        matches!(self.solve(), linalg::ModSolve::Solution(_))
    }
}

/// An undirected simple graph with 0/1 vertex labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphWithLabels {
    pub n: usize,
    /// Normalized edges (u < v), duplicate-free, in construction order.
    pub edges: Vec<(usize, usize)>,
    pub labels: Vec<bool>,
}

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("endpoint {0} out of range")]
    VertexOutOfRange(usize),
    #[error("labels length {0} does not match vertex count {1}")]
    LabelsMismatch(usize, usize),
}

impl GraphWithLabels {
    pub fn new(
        n: usize,
        edges: Vec<(usize, usize)>,
        labels: Vec<bool>,
    ) -> Result<Self, GraphError> {
        if labels.len() != n {
            return Err(GraphError::LabelsMismatch(labels.len(), n));
        }
        let mut seen = BTreeSet::new();
        let mut norm = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange(u.max(v)));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(GraphError::DuplicateEdge(e.0, e.1));
            }
            norm.push(e);
        }
        Ok(GraphWithLabels {
            n,
            edges: norm,
            labels,
        })
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    pub fn label_sum_odd(&self) -> bool {
        self.labels.iter().filter(|&&b| b).count() % 2 == 1
    }
}

/// A partial 0/1/* assignment over a fixed set of variables (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    pub vals: Vec<Option<bool>>,
}

impl Restriction {
    pub fn all_free(n: usize) -> Self {
        Restriction {
            vals: vec![None; n],
        }
    }

    pub fn n(&self) -> usize {
        self.vals.len()
    }

    pub fn fixed(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.vals
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|b| (i, b)))
    }

    pub fn free(&self) -> impl Iterator<Item = usize> + '_ {
        self.vals
            .iter()
            .enumerate()
            .filter_map(|(i, v)| if v.is_none() { Some(i) } else { None })
    }

    pub fn num_fixed(&self) -> usize {
        self.vals.iter().filter(|v| v.is_some()).count()
    }

    pub fn set(&mut self, var: usize, b: bool) {
        assert!(self.vals[var].is_none(), "variable {var} already fixed");
        self.vals[var] = Some(b);
    }

    /// Composition: applies `other` on top of `self` (disjoint fixed sets).
    pub fn compose(&self, other: &Restriction) -> Restriction {
        assert_eq!(self.n(), other.n());
        let mut out = self.clone();
        for (i, b) in other.fixed() {
            out.set(i, b);
        }
        out
    }
}

// --- restriction application -----------------------------------------------

use crate::exact::LinIneq;
use crate::num::{int_rat, Rational};

/// Projects a halfspace onto the free coordinates of `rho`: fixed
/// coordinates are substituted into the linear form. The result is an
/// inequality over `rho.free()` in their natural order.
pub fn restrict_ineq(q: &LinIneq, rho: &Restriction) -> LinIneq {
    assert_eq!(q.dim(), rho.n());
    let mut coeffs = Vec::new();
    let mut rhs: Rational = q.rhs.clone();
    for (i, c) in q.coeffs.0.iter().enumerate() {
        match rho.vals[i] {
            None => coeffs.push(c.clone()),
            Some(true) => rhs -= int_rat(c),
            Some(false) => {}
        }
    }
    LinIneq::ge(crate::exact::IntVec(coeffs), rhs)
}

/// Result of restricting a constraint set: either the simplified object or
/// the index of a constraint falsified outright.
pub type Restricted<T> = Result<T, usize>;

/// Applies `rho` to a linear system over F_2-compatible values. Variable
/// indices are kept ambient (supports shrink, `n` is unchanged); satisfied
/// equations are dropped. Returns the surviving equations together with
/// their original indices, or the index of a falsified equation.
pub fn restrict_system(sys: &LinSystemFq, rho: &Restriction) -> Restricted<(LinSystemFq, Vec<usize>)> {
    assert_eq!(sys.n, rho.n());
    let mut eqs = Vec::new();
    let mut origin = Vec::new();
    for (i, eq) in sys.equations.iter().enumerate() {
        let mut support = Vec::new();
        let mut coeffs = Vec::new();
        let mut rhs = eq.rhs;
        for (&v, &c) in eq.support.iter().zip(&eq.coeffs) {
            match rho.vals[v] {
                None => {
                    support.push(v);
                    coeffs.push(c);
                }
                Some(true) => rhs = (rhs + sys.q - c % sys.q) % sys.q,
                Some(false) => {}
            }
        }
        if support.is_empty() {
            if rhs != 0 {
                return Err(i);
            }
        } else {
            eqs.push(Equation {
                support,
                coeffs,
                rhs,
            });
            origin.push(i);
        }
    }
    Ok((
        LinSystemFq {
            q: sys.q,
            width: sys.width,
            n: sys.n,
            equations: eqs,
        },
        origin,
    ))
}

/// Applies `rho` to a CNF (ambient variable indices kept). Satisfied clauses
/// are dropped; a clause with all literals false is reported falsified.
pub fn restrict_cnf(f: &Cnf, rho: &Restriction) -> Restricted<Cnf> {
    assert_eq!(f.num_vars, rho.n());
    let mut clauses = Vec::new();
    for (ci, c) in f.clauses.iter().enumerate() {
        let mut kept = Vec::new();
        let mut satisfied = false;
        for &lit in c {
            let v = lit.unsigned_abs() as usize - 1;
            match rho.vals[v] {
                None => kept.push(lit),
                Some(b) => {
                    if (lit > 0) == b {
                        satisfied = true;
                        break;
                    }
                }
            }
        }
        if satisfied {
            continue;
        }
        if kept.is_empty() {
            return Err(ci);
        }
        clauses.push(kept);
    }
    Ok(Cnf {
        num_vars: f.num_vars,
        clauses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::IntVec;
    use crate::num::i_rat;

    #[test]
    fn restrict_halfspace_projects() {
        // x1 + x2 >= 1 with x1 = 1 becomes x2 >= 0 over free coordinates
        let q = LinIneq::ge(IntVec::from_i64(&[1, 1]), i_rat(1));
        let mut rho = Restriction::all_free(2);
        rho.set(0, true);
        let r = restrict_ineq(&q, &rho);
        assert_eq!(r, LinIneq::ge(IntVec::from_i64(&[1]), i_rat(0)));
    }

    #[test]
    fn restrict_equation_folds_rhs() {
        // x + y = 1 with x = 0 becomes y = 1
        let sys = LinSystemFq::new(
            2,
            2,
            2,
            vec![Equation {
                support: vec![0, 1],
                coeffs: vec![1, 1],
                rhs: 1,
            }],
        )
        .unwrap();
        let mut rho = Restriction::all_free(2);
        rho.set(0, false);
        let (r, origin) = restrict_system(&sys, &rho).unwrap();
        assert_eq!(origin, vec![0]);
        assert_eq!(r.equations[0].support, vec![1]);
        assert_eq!(r.equations[0].rhs, 1);
    }

    #[test]
    fn restrict_clause_reports_falsified() {
        let f = Cnf::new(2, vec![vec![1, 2]]).unwrap();
        let mut rho = Restriction::all_free(2);
        rho.set(0, false);
        rho.set(1, false);
        assert_eq!(restrict_cnf(&f, &rho), Err(0));
    }

    #[test]
    fn cnf_rejects_tautology() {
        assert!(Cnf::new(1, vec![vec![1, -1]]).is_err());
    }

    #[test]
    fn graph_normalizes_edges() {
        let g = GraphWithLabels::new(3, vec![(2, 0), (1, 2)], vec![true, false, false]).unwrap();
        assert_eq!(g.edges, vec![(0, 2), (1, 2)]);
        assert!(g.is_connected());
        let h = GraphWithLabels::new(3, vec![(2, 0)], vec![true, false, false]).unwrap();
        assert!(!h.is_connected());
    }
}
