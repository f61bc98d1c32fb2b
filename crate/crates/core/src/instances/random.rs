//! Seeded random k-XOR and k-CNF generators. Both sample constraints with
//! replacement from a ChaCha8 stream, so instances are reproducible across
//! runs and platforms for a given seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Cnf, Equation, LinSystemFq};

fn sample_support(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    assert!(k <= n, "k must not exceed n");
    // Floyd's algorithm for a k-subset, then sort
    let mut chosen = Vec::with_capacity(k);
    for j in n - k..n {
        let t = rng.gen_range(0..=j);
        if chosen.contains(&t) {
            chosen.push(j);
        } else {
            chosen.push(t);
        }
    }
    chosen.sort_unstable();
    chosen
}

/// m random width-k parity constraints over n variables.
pub fn random_kxor(n: usize, m: usize, k: usize, seed: u64) -> LinSystemFq {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let equations = (0..m)
        .map(|_| Equation {
            support: sample_support(&mut rng, n, k),
            coeffs: vec![1; k],
            rhs: rng.gen_range(0..2),
        })
        .collect();
    LinSystemFq {
        q: 2,
        width: k,
        n,
        equations,
    }
}

/// m random width-k clauses over n variables.
pub fn random_kcnf(n: usize, m: usize, k: usize, seed: u64) -> Cnf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses = (0..m)
        .map(|_| {
            sample_support(&mut rng, n, k)
                .into_iter()
                .map(|v| {
                    let lit = (v + 1) as i64;
                    if rng.gen_bool(0.5) {
                        lit
                    } else {
                        -lit
                    }
                })
                .collect()
        })
        .collect();
    Cnf {
        num_vars: n,
        clauses,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kxor_deterministic() {
        let a = random_kxor(6, 12, 3, 1);
        let b = random_kxor(6, 12, 3, 1);
        assert_eq!(a, b);
        assert_eq!(a.m(), 12);
        assert!(a.equations.iter().all(|e| e.width() == 3));
        assert!(a
            .equations
            .iter()
            .all(|e| e.support.windows(2).all(|w| w[0] < w[1])));
    }

    #[test]
    fn kcnf_deterministic_and_valid() {
        let a = random_kcnf(8, 20, 3, 42);
        let b = random_kcnf(8, 20, 3, 42);
        assert_eq!(a, b);
        assert!(Cnf::new(8, a.clauses.clone()).is_ok());
    }

    #[test]
    fn different_seeds_differ() {
        assert_ne!(random_kxor(6, 12, 3, 1), random_kxor(6, 12, 3, 2));
    }
}
