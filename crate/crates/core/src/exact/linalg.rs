//! Exact rational nullspace computation and linear solving over prime fields
//! with row-combination certificates.

use num_traits::Zero;

use super::IntVec;
use crate::num::{int_rat, Rational};

/// A nonzero rational vector orthogonal to every row, or `None` if the rows
/// span the whole space.
pub fn nullspace_vector(rows: &[IntVec]) -> Option<Vec<Rational>> {
    let n = rows.first().map(IntVec::dim)?;
    nullspace_vector_dim(rows, n)
}

/// Same as `nullspace_vector` but usable with an empty row list.
pub fn nullspace_vector_dim(rows: &[IntVec], n: usize) -> Option<Vec<Rational>> {
    if n == 0 {
        return None;
    }
    let mut mat: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| {
            assert_eq!(r.dim(), n, "rows share dimension");
            r.0.iter().map(int_rat).collect()
        })
        .collect();
    // forward elimination, recording pivot columns
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank_row = 0;
    for col in 0..n {
        let Some(pr) = (rank_row..mat.len()).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(rank_row, pr);
        let piv = mat[rank_row][col].clone();
        for x in mat[rank_row].iter_mut() {
            *x /= &piv;
        }
        for r in 0..mat.len() {
            if r != rank_row && !mat[r][col].is_zero() {
                let f = mat[r][col].clone();
                for j in 0..n {
                    let t = &mat[rank_row][j] * &f;
                    mat[r][j] -= t;
                }
            }
        }
        pivots.push(col);
        rank_row += 1;
        if rank_row == mat.len() {
            break;
        }
    }
    if pivots.len() == n {
        return None;
    }
    // free column: set it to 1, back out pivot values
    let free = (0..n).find(|c| !pivots.contains(c)).unwrap();
    let mut v = vec![Rational::zero(); n];
    v[free] = crate::num::i_rat(1);
    for (r, &pc) in pivots.iter().enumerate() {
        v[pc] = -mat[r][free].clone();
    }
    debug_assert!(rows.iter().all(|row| row.dot_rat(&v).is_zero()));
    Some(v)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModSolve {
    /// An assignment with `A x = b (mod p)`.
    Solution(Vec<u64>),
    /// Row combination `alpha` with `alpha^T A = 0` and `alpha^T b != 0 (mod p)`.
    Certificate(Vec<u64>),
}

#[derive(Debug, thiserror::Error)]
#[error("{0} is not prime")]
pub struct NotPrime(pub u64);

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // extended Euclid; p prime, a != 0 mod p
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, (a % p) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1);
    t.rem_euclid(p as i128) as u64
}

/// Gaussian elimination over F_p. `a` is row-major, `b` the right-hand side.
pub fn solve_mod_p(a: &[Vec<u64>], b: &[u64], p: u64) -> Result<ModSolve, NotPrime> {
    if !is_prime(p) {
        return Err(NotPrime(p));
    }
    let m = a.len();
    assert_eq!(b.len(), m);
    let n = a.first().map_or(0, Vec::len);
    // rows carry (coeffs, rhs, combination over original rows)
    let mut rows: Vec<(Vec<u64>, u64, Vec<u64>)> = (0..m)
        .map(|i| {
            assert_eq!(a[i].len(), n);
            let coeffs = a[i].iter().map(|x| x % p).collect();
            let mut combo = vec![0u64; m];
            combo[i] = 1;
            (coeffs, b[i] % p, combo)
        })
        .collect();

    let mut pivot_of_col: Vec<Option<usize>> = vec![None; n];
    let mut rank = 0;
    for col in 0..n {
        let Some(pr) = (rank..m).find(|&r| rows[r].0[col] != 0) else {
            continue;
        };
        rows.swap(rank, pr);
        let inv = mod_inv(rows[rank].0[col], p);
        scale_row(&mut rows[rank], inv, p);
        for r in 0..m {
            if r != rank && rows[r].0[col] != 0 {
                let f = rows[r].0[col];
                let (head, tail) = if r < rank {
                    let (h, t) = rows.split_at_mut(rank);
                    (&mut h[r], &t[0])
                } else {
                    let (h, t) = rows.split_at_mut(r);
                    (&mut t[0], &h[rank])
                };
                sub_scaled(head, tail, f, p);
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
        if rank == m {
            break;
        }
    }
    // any zero row with nonzero rhs certifies unsatisfiability
    for (coeffs, rhs, combo) in &rows {
        if *rhs != 0 && coeffs.iter().all(|&c| c == 0) {
            return Ok(ModSolve::Certificate(combo.clone()));
        }
    }
    // back out a solution, free variables at 0
    let mut x = vec![0u64; n];
    for col in 0..n {
        if let Some(r) = pivot_of_col[col] {
            x[col] = rows[r].1;
        }
    }
    debug_assert!((0..m).all(|i| {
        let lhs: u128 = a[i]
            .iter()
            .zip(&x)
            .map(|(&c, &v)| (c as u128 % p as u128) * v as u128 % p as u128)
            .sum::<u128>()
            % p as u128;
        lhs == (b[i] % p) as u128
    }));
    Ok(ModSolve::Solution(x))
}

fn scale_row(row: &mut (Vec<u64>, u64, Vec<u64>), f: u64, p: u64) {
    for x in row.0.iter_mut() {
        *x = mulmod(*x, f, p);
    }
    row.1 = mulmod(row.1, f, p);
    for x in row.2.iter_mut() {
        *x = mulmod(*x, f, p);
    }
}

fn sub_scaled(dst: &mut (Vec<u64>, u64, Vec<u64>), src: &(Vec<u64>, u64, Vec<u64>), f: u64, p: u64) {
    for (d, s) in dst.0.iter_mut().zip(&src.0) {
        *d = submod(*d, mulmod(*s, f, p), p);
    }
    dst.1 = submod(dst.1, mulmod(src.1, f, p), p);
    for (d, s) in dst.2.iter_mut().zip(&src.2) {
        *d = submod(*d, mulmod(*s, f, p), p);
    }
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn submod(a: u64, b: u64, p: u64) -> u64 {
    (a + p - b % p) % p
}

/// Checks that `alpha` is a valid unsatisfiability certificate for `A x = b`.
pub fn certificate_checks(a: &[Vec<u64>], b: &[u64], alpha: &[u64], p: u64) -> bool {
    let n = a.first().map_or(0, Vec::len);
    if alpha.len() != a.len() {
        return false;
    }
    for col in 0..n {
        let s: u128 = a
            .iter()
            .zip(alpha)
            .map(|(row, &al)| (row[col] as u128 % p as u128) * (al as u128 % p as u128) % p as u128)
            .sum();
        if s % p as u128 != 0 {
            return false;
        }
    }
    let s: u128 = b
        .iter()
        .zip(alpha)
        .map(|(&bi, &al)| (bi as u128 % p as u128) * (al as u128 % p as u128) % p as u128)
        .sum();
    s % p as u128 != 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::i_rat;

    #[test]
    fn nullspace_simple() {
        let rows = [IntVec::from_i64(&[1, 0, 0]), IntVec::from_i64(&[0, 1, 0])];
        let v = nullspace_vector(&rows).unwrap();
        assert_eq!(v[0], Rational::zero());
        assert_eq!(v[1], Rational::zero());
        assert!(!v[2].is_zero());
    }

    #[test]
    fn nullspace_full_rank_none() {
        let rows = [IntVec::from_i64(&[1, 1]), IntVec::from_i64(&[1, -1])];
        assert!(nullspace_vector(&rows).is_none());
    }

    #[test]
    fn nullspace_orthogonality_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let rows: Vec<IntVec> = (0..3)
                .map(|_| IntVec(vec![
                    (rng.gen_range(-5i64..=5)).into(),
                    (rng.gen_range(-5i64..=5)).into(),
                    (rng.gen_range(-5i64..=5)).into(),
                    (rng.gen_range(-5i64..=5)).into(),
                    (rng.gen_range(-5i64..=5)).into(),
                    (rng.gen_range(-5i64..=5)).into(),
                ]))
                .collect();
            let v = nullspace_vector(&rows).expect("3 rows in R^6 never span");
            assert!(v.iter().any(|x| !x.is_zero()));
            for r in &rows {
                assert!(r.dot_rat(&v).is_zero());
            }
        }
    }

    #[test]
    fn contradictory_pair_over_f2() {
        // x + y = 1, x + y = 0
        let a = vec![vec![1, 1], vec![1, 1]];
        let b = vec![1, 0];
        match solve_mod_p(&a, &b, 2).unwrap() {
            ModSolve::Certificate(al) => {
                assert!(certificate_checks(&a, &b, &al, 2));
                assert_eq!(al, vec![1, 1]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn solvable_single() {
        let a = vec![vec![1]];
        let b = vec![1];
        assert_eq!(solve_mod_p(&a, &b, 2).unwrap(), ModSolve::Solution(vec![1]));
    }

    #[test]
    fn rejects_composite_modulus() {
        assert!(solve_mod_p(&[vec![1]], &[1], 6).is_err());
    }

    #[test]
    fn exactly_one_arm_small_systems() {
        use rand::{Rng, SeedableRng};
        // cross-check both arms against exhaustive assignment search
        for p in [2u64, 3, 5] {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11 + p);
            for _ in 0..30 {
                let n = rng.gen_range(1..=4usize);
                let m = rng.gen_range(1..=5usize);
                let a: Vec<Vec<u64>> = (0..m)
                    .map(|_| (0..n).map(|_| rng.gen_range(0..p)).collect())
                    .collect();
                let b: Vec<u64> = (0..m).map(|_| rng.gen_range(0..p)).collect();
                let mut satisfiable = false;
                let total = (p as usize).pow(n as u32);
                'outer: for code in 0..total {
                    let mut x = Vec::with_capacity(n);
                    let mut c = code;
                    for _ in 0..n {
                        x.push((c % p as usize) as u64);
                        c /= p as usize;
                    }
                    if (0..m).all(|i| {
                        let lhs: u64 = a[i]
                            .iter()
                            .zip(&x)
                            .map(|(&ai, &xi)| mulmod(ai, xi, p))
                            .fold(0, |s, t| (s + t) % p);
                        lhs == b[i] % p
                    }) {
                        satisfiable = true;
                        break 'outer;
                    }
                }
                match solve_mod_p(&a, &b, p).unwrap() {
                    ModSolve::Solution(_) => assert!(satisfiable),
                    ModSolve::Certificate(al) => {
                        assert!(!satisfiable);
                        assert!(certificate_checks(&a, &b, &al, p));
                    }
                }
            }
        }
    }

    #[test]
    fn nullspace_of_no_rows() {
        assert!(nullspace_vector_dim(&[], 3).is_some());
        let v = nullspace_vector_dim(&[], 3).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v.iter().filter(|x| !x.is_zero()).count(), 1);
        let _ = i_rat(0);
    }
}
