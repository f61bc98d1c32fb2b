//! Boundary expansion of constraint-variable graphs by exact subset
//! enumeration.

use crate::num::{i_rat, Rational};

use super::LinSystemFq;

/// Default cap on the number of enumerated subsets. Overridable per call and
/// through `CUTPLANES_ENUM_BUDGET` in the CLI.
pub const DEFAULT_ENUM_BUDGET: u64 = 5_000_000;

#[derive(Debug, thiserror::Error)]
#[error("subset enumeration needs {needed} subsets, budget is {budget}")]
pub struct BudgetExceeded {
    pub needed: u128,
    pub budget: u64,
}

/// The boundary of `subset`: variables occurring in exactly one of its
/// equations.
pub fn boundary_size(sys: &LinSystemFq, subset: &[usize]) -> usize {
    let mut count = std::collections::HashMap::new();
    for &i in subset {
        for &v in &sys.equations[i].support {
            *count.entry(v).or_insert(0usize) += 1;
        }
    }
    count.values().filter(|&&c| c == 1).count()
}

/// Exact minimizer of `|boundary(W)| / |W|` over all nonempty subsets of at
/// most `r` equations. Ties are broken by lexicographically smallest subset.
pub fn boundary_expansion(
    sys: &LinSystemFq,
    r: usize,
    budget: u64,
) -> Result<(Vec<usize>, Rational), BudgetExceeded> {
    let m = sys.m();
    let r = r.min(m);
    assert!(r >= 1, "need r >= 1 and at least one equation");
    let mut needed: u128 = 0;
    let mut binom: u128 = 1;
    for j in 1..=r {
        binom = binom * (m - j + 1) as u128 / j as u128;
        needed += binom;
    }
    if needed > budget as u128 {
        return Err(BudgetExceeded { needed, budget });
    }

    let mut best: Option<(Vec<usize>, Rational)> = None;
    let mut subset: Vec<usize> = Vec::new();
    // iterate subsets in lexicographic order of the index sequence
    fn walk(
        sys: &LinSystemFq,
        r: usize,
        start: usize,
        subset: &mut Vec<usize>,
        best: &mut Option<(Vec<usize>, Rational)>,
    ) {
        for i in start..sys.m() {
            subset.push(i);
            let ratio = i_rat(boundary_size(sys, subset) as i64)
                / i_rat(subset.len() as i64);
            let better = match best {
                None => true,
                Some((bw, br)) => ratio < *br || (ratio == *br && subset[..] < bw[..]),
            };
            if better {
                *best = Some((subset.clone(), ratio));
            }
            if subset.len() < r {
                walk(sys, r, i + 1, subset, best);
            }
            subset.pop();
        }
    }
    walk(sys, r, 0, &mut subset, &mut best);
    Ok(best.expect("at least one nonempty subset"))
}
