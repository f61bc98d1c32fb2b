//! Exact rational linear programming with certificates.
//!
//! `lp_optimum` solves min/max of an integer objective over a polytope
//! `{x : a_i x >= b_i}` and returns, besides the optimum and a witness
//! point, nonnegative dual multipliers that reproduce the bound as a
//! Farkas-style combination of the constraint rows. Infeasibility is
//! certified by multipliers deriving `0 >= 1`.
//!
//! The solver is a dense two-phase simplex with Bland's rule (guaranteed
//! termination). It runs on the dual program, whose tableau has only
//! `dim + 1` rows, and retries with arbitrary precision if the `i128`
//! fast path overflows.

use num_traits::{Signed, ToPrimitive, Zero};

use super::{IntVec, LinIneq, Polytope};
use crate::num::{int_rat, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

/// Outcome of `lp_optimum`.
///
/// For `Min`, `dual` satisfies `sum_i dual[i] * a_i = objective` and
/// `sum_i dual[i] * b_i = value`, certifying `objective . x >= value`.
/// For `Max` the same multipliers certify `-objective . x >= -value`.
/// For `Infeasible`, `farkas` satisfies `sum_i farkas[i] * a_i = 0` and
/// `sum_i farkas[i] * b_i = 1`, i.e. the rows combine to `0 >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Infeasible {
        farkas: Vec<Rational>,
    },
    Unbounded,
    Optimal {
        value: Rational,
        witness: Vec<Rational>,
        dual: Vec<Rational>,
    },
}

impl LpResult {
    pub fn optimal_value(&self) -> Option<&Rational> {
        match self {
            LpResult::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpResult::Infeasible { .. })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("objective dimension {objective} does not match polytope dimension {polytope}")]
    DimensionMismatch { objective: usize, polytope: usize },
}

// ---------------------------------------------------------------------------
// scalar abstraction: i128 rationals with overflow detection, or BigRational
// ---------------------------------------------------------------------------

struct Overflow;

trait Scalar: Clone + PartialEq {
    fn sc_zero() -> Self;
    fn sc_is_zero(&self) -> bool;
    fn sc_is_negative(&self) -> bool;
    fn sc_neg(&self) -> Self;
    fn sc_add(&self, rhs: &Self) -> Result<Self, Overflow>;
    fn sc_sub(&self, rhs: &Self) -> Result<Self, Overflow>;
    fn sc_mul(&self, rhs: &Self) -> Result<Self, Overflow>;
    fn sc_div(&self, rhs: &Self) -> Result<Self, Overflow>;
    fn sc_lt(&self, rhs: &Self) -> bool;
    fn sc_from_rat(r: &Rational) -> Result<Self, Overflow>;
    fn sc_to_rat(&self) -> Rational;
}

/// Reduced fraction over `i128`, positive denominator. Any overflow aborts
/// the fast path.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct SmallRat {
    n: i128,
    d: i128,
}

impl SmallRat {
    fn reduce(n: i128, d: i128) -> Result<Self, Overflow> {
        if d == 0 {
            return Err(Overflow);
        }
        let g = gcd_i128(n.unsigned_abs(), d.unsigned_abs());
        let (mut n, mut d) = (n / g as i128, d / g as i128);
        if d < 0 {
            n = n.checked_neg().ok_or(Overflow)?;
            d = d.checked_neg().ok_or(Overflow)?;
        }
        Ok(SmallRat { n, d })
    }
}

fn gcd_i128(a: u128, b: u128) -> u128 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    if a == 0 {
        1
    } else {
        a
    }
}

impl Scalar for SmallRat {
    fn sc_zero() -> Self {
        SmallRat { n: 0, d: 1 }
    }
    fn sc_is_zero(&self) -> bool {
        self.n == 0
    }
    fn sc_is_negative(&self) -> bool {
        self.n < 0
    }
    fn sc_neg(&self) -> Self {
        SmallRat {
            n: -self.n,
            d: self.d,
        }
    }
    fn sc_add(&self, rhs: &Self) -> Result<Self, Overflow> {
        let lhs = self.n.checked_mul(rhs.d).ok_or(Overflow)?;
        let r = rhs.n.checked_mul(self.d).ok_or(Overflow)?;
        SmallRat::reduce(
            lhs.checked_add(r).ok_or(Overflow)?,
            self.d.checked_mul(rhs.d).ok_or(Overflow)?,
        )
    }
    fn sc_sub(&self, rhs: &Self) -> Result<Self, Overflow> {
        self.sc_add(&rhs.sc_neg())
    }
    fn sc_mul(&self, rhs: &Self) -> Result<Self, Overflow> {
        SmallRat::reduce(
            self.n.checked_mul(rhs.n).ok_or(Overflow)?,
            self.d.checked_mul(rhs.d).ok_or(Overflow)?,
        )
    }
    fn sc_div(&self, rhs: &Self) -> Result<Self, Overflow> {
        if rhs.n == 0 {
            return Err(Overflow);
        }
        SmallRat::reduce(
            self.n.checked_mul(rhs.d).ok_or(Overflow)?,
            self.d.checked_mul(rhs.n).ok_or(Overflow)?,
        )
    }
    fn sc_lt(&self, rhs: &Self) -> bool {
        // denominators positive, products fit: compare via i128 -> may overflow;
        // use checked and fall back to exact widening via u128 split if needed.
        match (
            self.n.checked_mul(rhs.d),
            rhs.n.checked_mul(self.d),
        ) {
            (Some(a), Some(b)) => a < b,
            _ => {
                // rare: compare exactly through BigRational
                self.sc_to_rat() < rhs.sc_to_rat()
            }
        }
    }
    fn sc_from_rat(r: &Rational) -> Result<Self, Overflow> {
        let n = r.numer().to_i128().ok_or(Overflow)?;
        let d = r.denom().to_i128().ok_or(Overflow)?;
        SmallRat::reduce(n, d)
    }
    fn sc_to_rat(&self) -> Rational {
        Rational::new(self.n.into(), self.d.into())
    }
}

impl Scalar for Rational {
    fn sc_zero() -> Self {
        <Rational as Zero>::zero()
    }
    fn sc_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn sc_is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn sc_neg(&self) -> Self {
        -self
    }
    fn sc_add(&self, rhs: &Self) -> Result<Self, Overflow> {
        Ok(self + rhs)
    }
    fn sc_sub(&self, rhs: &Self) -> Result<Self, Overflow> {
        Ok(self - rhs)
    }
    fn sc_mul(&self, rhs: &Self) -> Result<Self, Overflow> {
        Ok(self * rhs)
    }
    fn sc_div(&self, rhs: &Self) -> Result<Self, Overflow> {
        Ok(self / rhs)
    }
    fn sc_lt(&self, rhs: &Self) -> bool {
        self < rhs
    }
    fn sc_from_rat(r: &Rational) -> Result<Self, Overflow> {
        Ok(r.clone())
    }
    fn sc_to_rat(&self) -> Rational {
        self.clone()
    }
}

// ---------------------------------------------------------------------------
// simplex kernel
// ---------------------------------------------------------------------------

/// Dense tableau for `A z = b`, `z >= 0`, with artificial columns at the end.
/// Rows whose artificial cannot be driven out of the basis are deleted as
/// redundant; `live[i]` maps original row index to the current row.
struct Tableau<S> {
    rows: usize,
    cols: usize, // real columns (artificials follow)
    a: Vec<Vec<S>>,
    b: Vec<S>,
    basis: Vec<usize>,
    live: Vec<Option<usize>>,
    flipped: Vec<bool>,
}

enum PhaseOutcome {
    Optimal,
    Unbounded { entering: usize },
}

impl<S: Scalar> Tableau<S> {
    /// `rows_a[i]` is a real-column row; `rhs[i]` its right-hand side.
    /// Rows with negative rhs are flipped so the artificial basis is feasible.
    fn new(mut rows_a: Vec<Vec<S>>, mut rhs: Vec<S>) -> Self {
        let rows = rows_a.len();
        let cols = rows_a.first().map_or(0, |r| r.len());
        let mut flipped = vec![false; rows];
        for i in 0..rows {
            if rhs[i].sc_is_negative() {
                flipped[i] = true;
                rhs[i] = rhs[i].sc_neg();
                for x in rows_a[i].iter_mut() {
                    *x = x.sc_neg();
                }
            }
        }
        // append artificial identity
        for (i, row) in rows_a.iter_mut().enumerate() {
            for j in 0..rows {
                row.push(if i == j {
                    S::sc_from_rat(&crate::num::i_rat(1)).ok().unwrap()
                } else {
                    S::sc_zero()
                });
            }
        }
        let basis = (0..rows).map(|i| cols + i).collect();
        Tableau {
            rows,
            cols,
            a: rows_a,
            b: rhs,
            basis,
            live: (0..rows).map(Some).collect(),
            flipped,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) -> Result<(), Overflow> {
        let piv = self.a[r][c].clone();
        for x in self.a[r].iter_mut() {
            *x = x.sc_div(&piv)?;
        }
        self.b[r] = self.b[r].sc_div(&piv)?;
        for i in 0..self.rows {
            if i == r || self.a[i][c].sc_is_zero() {
                continue;
            }
            let f = self.a[i][c].clone();
            for j in 0..self.a[i].len() {
                let t = self.a[r][j].sc_mul(&f)?;
                self.a[i][j] = self.a[i][j].sc_sub(&t)?;
            }
            let t = self.b[r].sc_mul(&f)?;
            self.b[i] = self.b[i].sc_sub(&t)?;
        }
        self.basis[r] = c;
        Ok(())
    }

    /// Runs simplex with Bland's rule for the given column costs
    /// (length `cols + rows`; artificial columns are priced but a column
    /// `>= forbid_from` never enters).
    fn run(&mut self, costs: &[S], forbid_from: usize) -> Result<PhaseOutcome, Overflow> {
        loop {
            // reduced costs: r_j = c_j - sum_i c_basis(i) * a[i][j]
            let mut entering = None;
            'cols: for j in 0..forbid_from {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut rj = costs[j].clone();
                for i in 0..self.rows {
                    let cb = &costs[self.basis[i]];
                    if cb.sc_is_zero() || self.a[i][j].sc_is_zero() {
                        continue;
                    }
                    let t = self.a[i][j].sc_mul(cb)?;
                    rj = rj.sc_sub(&t)?;
                }
                if rj.sc_is_negative() {
                    entering = Some(j);
                    break 'cols;
                }
            }
            let Some(j) = entering else {
                return Ok(PhaseOutcome::Optimal);
            };
            // ratio test, Bland ties by smallest basis column
            let mut leave: Option<(usize, S)> = None;
            for i in 0..self.rows {
                if self.a[i][j].sc_is_negative() || self.a[i][j].sc_is_zero() {
                    continue;
                }
                let ratio = self.b[i].sc_div(&self.a[i][j])?;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio.sc_lt(&br) || (ratio == br && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match leave {
                Some((i, _)) => self.pivot(i, j)?,
                None => return Ok(PhaseOutcome::Unbounded { entering: j }),
            }
        }
    }

    /// Phase 1: minimize the sum of artificials; returns the attained value.
    fn phase1(&mut self) -> Result<S, Overflow> {
        let one = S::sc_from_rat(&crate::num::i_rat(1)).ok().unwrap();
        let mut costs = vec![S::sc_zero(); self.cols + self.rows];
        for c in costs.iter_mut().skip(self.cols) {
            *c = one.clone();
        }
        match self.run(&costs, self.cols + self.rows)? {
            PhaseOutcome::Optimal => {}
            PhaseOutcome::Unbounded { .. } => unreachable!("phase-1 objective bounded below"),
        }
        let mut v = S::sc_zero();
        for i in 0..self.rows {
            if self.basis[i] >= self.cols {
                v = v.sc_add(&self.b[i])?;
            }
        }
        Ok(v)
    }

    /// Removes artificials from the basis (pivoting them out or deleting
    /// redundant rows). Only valid after a zero phase-1 value.
    fn drive_out_artificials(&mut self) -> Result<(), Overflow> {
        let mut i = 0;
        while i < self.rows {
            if self.basis[i] < self.cols {
                i += 1;
                continue;
            }
            let mut pivot_col = None;
            for j in 0..self.cols {
                if !self.a[i][j].sc_is_zero() {
                    pivot_col = Some(j);
                    break;
                }
            }
            match pivot_col {
                Some(j) => {
                    self.pivot(i, j)?;
                    i += 1;
                }
                None => {
                    // redundant row
                    self.a.remove(i);
                    self.b.remove(i);
                    self.basis.remove(i);
                    self.flipped.remove(i);
                    for slot in self.live.iter_mut() {
                        match slot {
                            Some(k) if *k == i => *slot = None,
                            Some(k) if *k > i => *k -= 1,
                            _ => {}
                        }
                    }
                    self.rows -= 1;
                }
            }
        }
        Ok(())
    }

    fn solution_value(&self, col: usize) -> S {
        for i in 0..self.rows {
            if self.basis[i] == col {
                return self.b[i].clone();
            }
        }
        S::sc_zero()
    }

    /// Row dual for original row `orig`: `cost_basis . (B^-1 e_orig)`, read
    /// off the artificial column, adjusted for the row flip.
    fn row_dual(&self, costs: &[S], orig: usize) -> Result<S, Overflow> {
        let Some(_) = self.live[orig] else {
            return Ok(S::sc_zero());
        };
        let col = self.cols + orig;
        let mut v = S::sc_zero();
        for i in 0..self.rows {
            let cb = &costs[self.basis[i]];
            if cb.sc_is_zero() || self.a[i][col].sc_is_zero() {
                continue;
            }
            let t = self.a[i][col].sc_mul(cb)?;
            v = v.sc_add(&t)?;
        }
        if self.flipped[orig] {
            v = v.sc_neg();
        }
        Ok(v)
    }
}

// ---------------------------------------------------------------------------
// the dual-form driver
// ---------------------------------------------------------------------------

enum SolveOutcome {
    Optimal {
        value: Rational,
        witness: Vec<Rational>,
        dual: Vec<Rational>,
    },
    InfeasibleCert(Vec<Rational>),
    DualInfeasible,
}

/// Solves min c.x over {a_i x >= b_i} through the dual
/// `min -b.y  s.t.  A^T y = c, y >= 0`.
fn solve_min<S: Scalar>(p: &Polytope, c: &IntVec) -> Result<SolveOutcome, Overflow> {
    let n = p.dim;
    let m = p.ineqs.len();
    // dual rows: one per primal variable; dual columns: one y per primal row
    let mut rows_a: Vec<Vec<S>> = Vec::with_capacity(n);
    let mut rhs: Vec<S> = Vec::with_capacity(n);
    for j in 0..n {
        let mut row = Vec::with_capacity(m);
        for q in &p.ineqs {
            row.push(S::sc_from_rat(&int_rat(&q.coeffs.0[j]))?);
        }
        rows_a.push(row);
        rhs.push(S::sc_from_rat(&int_rat(&c.0[j]))?);
    }
    let mut t = Tableau::new(rows_a, rhs);
    let p1 = t.phase1()?;
    if !p1.sc_is_zero() {
        return Ok(SolveOutcome::DualInfeasible);
    }
    t.drive_out_artificials()?;
    let mut costs = vec![S::sc_zero(); t.cols + t.live.len()];
    for (i, q) in p.ineqs.iter().enumerate() {
        costs[i] = S::sc_from_rat(&q.rhs)?.sc_neg();
    }
    match t.run(&costs, t.cols)? {
        PhaseOutcome::Optimal => {
            let dual: Vec<Rational> = (0..m).map(|i| t.solution_value(i).sc_to_rat()).collect();
            // primal witness x_j = -xi_j where xi is the dual of dual-row j
            let mut witness = Vec::with_capacity(n);
            for j in 0..n {
                witness.push(t.row_dual(&costs, j)?.sc_neg().sc_to_rat());
            }
            let value = c.dot_rat(&witness);
            Ok(SolveOutcome::Optimal {
                value,
                witness,
                dual,
            })
        }
        PhaseOutcome::Unbounded { entering } => {
            // unbounded dual ray certifies primal infeasibility:
            // direction d >= 0 with A^T d = 0 and b.d > 0
            let mut d = vec![Rational::zero(); m];
            d[entering] = crate::num::i_rat(1);
            for i in 0..t.rows {
                if t.basis[i] < m {
                    d[t.basis[i]] = t.a[i][entering].sc_neg().sc_to_rat();
                }
            }
            Ok(SolveOutcome::InfeasibleCert(d))
        }
    }
}

/// Phase-1 feasibility of the primal itself (x free via u - v plus slacks),
/// used only when the dual is infeasible. Returns either a witness or a
/// Farkas certificate.
fn primal_feasibility<S: Scalar>(p: &Polytope) -> Result<Result<Vec<Rational>, Vec<Rational>>, Overflow> {
    let n = p.dim;
    let m = p.ineqs.len();
    let cols = 2 * n + m;
    let mut rows_a: Vec<Vec<S>> = Vec::with_capacity(m);
    let mut rhs: Vec<S> = Vec::with_capacity(m);
    for q in &p.ineqs {
        let mut row = vec![S::sc_zero(); cols];
        for j in 0..n {
            let v = S::sc_from_rat(&int_rat(&q.coeffs.0[j]))?;
            row[j] = v.clone();
            row[n + j] = v.sc_neg();
        }
        row[2 * n + rows_a.len()] = S::sc_from_rat(&crate::num::i_rat(-1))?;
        rows_a.push(row);
        rhs.push(S::sc_from_rat(&q.rhs)?);
    }
    let mut t = Tableau::new(rows_a, rhs);
    let one = S::sc_from_rat(&crate::num::i_rat(1)).ok().unwrap();
    let mut costs = vec![S::sc_zero(); cols + m];
    for cst in costs.iter_mut().skip(cols) {
        *cst = one.clone();
    }
    match t.run(&costs, cols + m)? {
        PhaseOutcome::Optimal => {}
        PhaseOutcome::Unbounded { .. } => unreachable!("phase-1 bounded"),
    }
    let mut p1 = S::sc_zero();
    for i in 0..t.rows {
        if t.basis[i] >= cols {
            p1 = p1.sc_add(&t.b[i])?;
        }
    }
    if p1.sc_is_zero() {
        let mut x = Vec::with_capacity(n);
        for j in 0..n {
            let u = t.solution_value(j).sc_to_rat();
            let v = t.solution_value(n + j).sc_to_rat();
            x.push(u - v);
        }
        Ok(Ok(x))
    } else {
        let mut mu = Vec::with_capacity(m);
        for i in 0..m {
            mu.push(t.row_dual(&costs, i)?.sc_to_rat());
        }
        Ok(Err(mu))
    }
}

fn normalize_farkas(p: &Polytope, mut mu: Vec<Rational>) -> Vec<Rational> {
    let total: Rational = p
        .ineqs
        .iter()
        .zip(&mu)
        .map(|(q, m)| &q.rhs * m)
        .fold(Rational::zero(), |s, t| s + t);
    assert!(total.is_positive(), "infeasibility certificate degenerate");
    for m in mu.iter_mut() {
        *m /= &total;
    }
    mu
}

fn verify_optimal(p: &Polytope, c: &IntVec, value: &Rational, witness: &[Rational], dual: &[Rational]) -> bool {
    if !p.contains(witness) || &c.dot_rat(witness) != value {
        return false;
    }
    if dual.iter().any(|m| m.is_negative()) {
        return false;
    }
    let mut sum = vec![Rational::zero(); p.dim];
    let mut rhs = Rational::zero();
    for (q, m) in p.ineqs.iter().zip(dual) {
        if m.is_zero() {
            continue;
        }
        for (acc, cf) in sum.iter_mut().zip(&q.coeffs.0) {
            *acc += int_rat(cf) * m;
        }
        rhs += &q.rhs * m;
    }
    sum.iter().zip(&c.0).all(|(s, t)| *s == int_rat(t)) && &rhs == value
}

fn verify_farkas(p: &Polytope, mu: &[Rational]) -> bool {
    super::farkas_check(&p.ineqs, mu, &LinIneq::zero_ge_one(p.dim))
}

fn lp_min(p: &Polytope, c: &IntVec) -> LpResult {
    // 0-dimensional and unconstrained corner cases
    if p.ineqs.is_empty() {
        return if c.is_zero() {
            LpResult::Optimal {
                value: Rational::zero(),
                witness: vec![Rational::zero(); p.dim],
                dual: Vec::new(),
            }
        } else {
            LpResult::Unbounded
        };
    }
    if p.dim == 0 {
        // rows are "0 >= b"; infeasible iff some b > 0
        for (i, q) in p.ineqs.iter().enumerate() {
            if q.rhs.is_positive() {
                let mut mu = vec![Rational::zero(); p.ineqs.len()];
                mu[i] = crate::num::i_rat(1);
                return LpResult::Infeasible {
                    farkas: normalize_farkas(p, mu),
                };
            }
        }
        return LpResult::Optimal {
            value: Rational::zero(),
            witness: Vec::new(),
            dual: vec![Rational::zero(); p.ineqs.len()],
        };
    }

    let fast = solve_min::<SmallRat>(p, c);
    let outcome = match fast {
        Ok(o) => {
            if let Ok(o2) = check_or_retry(p, c, o) {
                return o2;
            }
            solve_min::<Rational>(p, c).unwrap_or_else(|_| unreachable!())
        }
        Err(Overflow) => solve_min::<Rational>(p, c).unwrap_or_else(|_| unreachable!()),
    };
    finish_min(p, c, outcome)
}

/// Accepts a fast-path outcome only if its certificates verify exactly.
fn check_or_retry(p: &Polytope, c: &IntVec, o: SolveOutcome) -> Result<LpResult, ()> {
    match o {
        SolveOutcome::Optimal {
            value,
            witness,
            dual,
        } => {
            if verify_optimal(p, c, &value, &witness, &dual) {
                Ok(LpResult::Optimal {
                    value,
                    witness,
                    dual,
                })
            } else {
                Err(())
            }
        }
        SolveOutcome::InfeasibleCert(mu) => {
            let mu = normalize_farkas(p, mu);
            if verify_farkas(p, &mu) {
                Ok(LpResult::Infeasible { farkas: mu })
            } else {
                Err(())
            }
        }
        SolveOutcome::DualInfeasible => {
            match primal_feasibility::<Rational>(p).unwrap_or_else(|_| unreachable!()) {
                Ok(_witness) => Ok(LpResult::Unbounded),
                Err(mu) => {
                    let mu = normalize_farkas(p, mu);
                    if verify_farkas(p, &mu) {
                        Ok(LpResult::Infeasible { farkas: mu })
                    } else {
                        Err(())
                    }
                }
            }
        }
    }
}

fn finish_min(p: &Polytope, c: &IntVec, o: SolveOutcome) -> LpResult {
    match check_or_retry(p, c, o) {
        Ok(r) => r,
        Err(()) => panic!("exact simplex produced a certificate that fails verification"),
    }
}

/// min/max of `objective . x` over `p` with exact certificates.
pub fn lp_optimum(p: &Polytope, objective: &IntVec, direction: Direction) -> Result<LpResult, LpError> {
    if objective.dim() != p.dim {
        return Err(LpError::DimensionMismatch {
            objective: objective.dim(),
            polytope: p.dim,
        });
    }
    Ok(match direction {
        Direction::Min => lp_min(p, objective),
        Direction::Max => match lp_min(p, &-objective) {
            LpResult::Optimal {
                value,
                witness,
                dual,
            } => LpResult::Optimal {
                value: -value,
                witness,
                dual,
            },
            other => other,
        },
    })
}

/// Convenience: is the polytope empty? Returns the Farkas certificate when so.
pub fn emptiness_certificate(p: &Polytope) -> Option<Vec<Rational>> {
    match lp_optimum(p, &IntVec::zero(p.dim), Direction::Min).expect("dims agree") {
        LpResult::Infeasible { farkas } => Some(farkas),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{i_rat, rat};

    fn ge(c: &[i64], r: i64) -> LinIneq {
        LinIneq::ge(IntVec::from_i64(c), i_rat(r))
    }

    fn unit_box(n: usize) -> Vec<LinIneq> {
        let mut rows = Vec::new();
        for i in 0..n {
            let mut lo = vec![0i64; n];
            lo[i] = 1;
            rows.push(ge(&lo, 0));
            let mut hi = vec![0i64; n];
            hi[i] = -1;
            rows.push(ge(&hi, -1));
        }
        rows
    }

    #[test]
    fn box_bound() {
        // max x over {0 <= x <= 1} = 1 at x = 1
        let p = Polytope::new(1, unit_box(1));
        let r = lp_optimum(&p, &IntVec::from_i64(&[1]), Direction::Max).unwrap();
        match r {
            LpResult::Optimal { value, witness, .. } => {
                assert_eq!(value, i_rat(1));
                assert_eq!(witness, vec![i_rat(1)]);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_ray() {
        let p = Polytope::new(1, vec![ge(&[1], 0)]);
        let r = lp_optimum(&p, &IntVec::from_i64(&[1]), Direction::Max).unwrap();
        assert_eq!(r, LpResult::Unbounded);
    }

    #[test]
    fn clause_polytope_optimum() {
        // max x1+x2 over {x1+x2 >= 1} ∩ [0,1]^2 = 2, checked against vertex
        // enumeration of the 2-d polytope.
        let mut rows = unit_box(2);
        rows.push(ge(&[1, 1], 1));
        let p = Polytope::new(2, rows);
        let r = lp_optimum(&p, &IntVec::from_i64(&[1, 1]), Direction::Max).unwrap();
        // oracle: enumerate vertices as intersections of constraint pairs
        let mut best: Option<Rational> = None;
        let qs = &p.ineqs;
        for i in 0..qs.len() {
            for j in i + 1..qs.len() {
                let a = &qs[i].coeffs.0;
                let b = &qs[j].coeffs.0;
                let det = int_rat(&(&a[0] * &b[1] - &a[1] * &b[0]));
                if det.is_zero() {
                    continue;
                }
                let x = (&qs[i].rhs * int_rat(&b[1]) - &qs[j].rhs * int_rat(&a[1])) / det.clone();
                let y = (int_rat(&a[0]) * &qs[j].rhs - int_rat(&b[0]) * &qs[i].rhs) / det;
                let pt = [x.clone(), y.clone()];
                if p.contains(&pt) {
                    let v = x + y;
                    best = Some(match best {
                        None => v,
                        Some(b0) => {
                            if v > b0 {
                                v
                            } else {
                                b0
                            }
                        }
                    });
                }
            }
        }
        assert_eq!(r.optimal_value(), best.as_ref());
        assert_eq!(r.optimal_value(), Some(&i_rat(2)));
    }

    #[test]
    fn infeasible_certificate() {
        // 2x >= 1 and x <= 0 is empty
        let p = Polytope::new(1, vec![ge(&[2], 1), ge(&[-1], 0)]);
        match lp_optimum(&p, &IntVec::from_i64(&[1]), Direction::Min).unwrap() {
            LpResult::Infeasible { farkas } => {
                assert!(super::super::farkas_check(
                    &p.ineqs,
                    &farkas,
                    &LinIneq::zero_ge_one(1)
                ));
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn dual_reproduces_bound() {
        // min x1 + 2 x2 over triangle x1+x2 >= 1, x >= 0
        let p = Polytope::new(
            2,
            vec![ge(&[1, 1], 1), ge(&[1, 0], 0), ge(&[0, 1], 0)],
        );
        match lp_optimum(&p, &IntVec::from_i64(&[1, 2]), Direction::Min).unwrap() {
            LpResult::Optimal { value, dual, .. } => {
                assert_eq!(value, i_rat(1));
                let target = LinIneq::ge(IntVec::from_i64(&[1, 2]), value);
                // dual-weighted sum dominates the bound exactly
                let mut sum_rhs = Rational::zero();
                for (q, m) in p.ineqs.iter().zip(&dual) {
                    sum_rhs += &q.rhs * m;
                }
                assert_eq!(sum_rhs, target.rhs);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn min_max_negation_symmetry() {
        let mut rows = unit_box(3);
        rows.push(ge(&[1, 1, -2], 0));
        let p = Polytope::new(3, rows);
        let c = IntVec::from_i64(&[3, -1, 2]);
        let max = lp_optimum(&p, &c, Direction::Max).unwrap();
        let minneg = lp_optimum(&p, &-&c, Direction::Min).unwrap();
        assert_eq!(
            max.optimal_value().unwrap(),
            &-minneg.optimal_value().unwrap().clone()
        );
    }

    #[test]
    fn fractional_optimum() {
        // min x over 2x >= 1 within [0,1]
        let mut rows = unit_box(1);
        rows.push(ge(&[2], 1));
        let p = Polytope::new(1, rows);
        match lp_optimum(&p, &IntVec::from_i64(&[1]), Direction::Min).unwrap() {
            LpResult::Optimal { value, .. } => assert_eq!(value, rat(1, 2)),
            other => panic!("{other:?}"),
        }
    }
}
