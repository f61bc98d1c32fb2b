//! Exact resolution depth via the Prover–Adversary game: memoized minimax
//! over partial-assignment states, with the full table retained so walks
//! can query an optimal Adversary.

use std::collections::HashMap;

use crate::instances::Cnf;

pub const DEFAULT_RESDEPTH_BUDGET: usize = 14;

/// Game value of a state: rounds the Prover needs from here, or infinity
/// when the Adversary can avoid falsification forever.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameValue {
    Depth(u32),
    Infinite,
}

impl GameValue {
    fn key(self) -> u32 {
        match self {
            GameValue::Depth(d) => d,
            GameValue::Infinite => u32::MAX,
        }
    }
    fn from_key(k: u32) -> Self {
        if k == u32::MAX {
            GameValue::Infinite
        } else {
            GameValue::Depth(k)
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{n} variables exceed the game budget {budget}")]
pub struct ResDepthBudget {
    pub n: usize,
    pub budget: usize,
}

/// Memoized Prover–Adversary game table for a formula.
pub struct GameTable {
    f: Cnf,
    memo: HashMap<u64, u32>,
}

/// A state assigns each variable *, 0, or 1 (2 bits per variable).
fn encode(vals: &[Option<bool>]) -> u64 {
    let mut s = 0u64;
    for (i, v) in vals.iter().enumerate() {
        let code = match v {
            None => 0u64,
            Some(false) => 1,
            Some(true) => 2,
        };
        s |= code << (2 * i);
    }
    s
}

impl GameTable {
    pub fn new(f: &Cnf, budget: usize) -> Result<Self, ResDepthBudget> {
        if f.num_vars > budget || f.num_vars > 31 {
            return Err(ResDepthBudget {
                n: f.num_vars,
                budget,
            });
        }
        Ok(GameTable {
            f: f.clone(),
            memo: HashMap::new(),
        })
    }

    fn falsifies_some_clause(&self, vals: &[Option<bool>]) -> bool {
        self.f.clauses.iter().any(|c| {
            c.iter().all(|&lit| {
                let v = lit.unsigned_abs() as usize - 1;
                matches!(vals[v], Some(b) if b != (lit > 0))
            })
        })
    }

    pub fn value_at(&mut self, vals: &mut Vec<Option<bool>>) -> GameValue {
        let key = encode(vals);
        if let Some(&v) = self.memo.get(&key) {
            return GameValue::from_key(v);
        }
        let v = if self.falsifies_some_clause(vals) {
            GameValue::Depth(0)
        } else if vals.iter().all(Option::is_some) {
            GameValue::Infinite
        } else {
            // Prover minimizes over queried variables; Adversary maximizes
            // over answers
            let mut best = GameValue::Infinite;
            for i in 0..vals.len() {
                if vals[i].is_some() {
                    continue;
                }
                let mut worst = GameValue::Depth(0);
                for b in [false, true] {
                    vals[i] = Some(b);
                    let v = self.value_at(vals);
                    vals[i] = None;
                    worst = match (worst, v) {
                        (GameValue::Infinite, _) | (_, GameValue::Infinite) => GameValue::Infinite,
                        (GameValue::Depth(a), GameValue::Depth(b)) => GameValue::Depth(a.max(b)),
                    };
                }
                best = match (best, worst) {
                    (GameValue::Infinite, w) => w,
                    (b, GameValue::Infinite) => b,
                    (GameValue::Depth(a), GameValue::Depth(b)) => GameValue::Depth(a.min(b)),
                };
            }
            match best {
                GameValue::Infinite => GameValue::Infinite,
                GameValue::Depth(d) => GameValue::Depth(d + 1),
            }
        };
        self.memo.insert(key, v.key());
        v
    }

    /// The optimal Adversary answer at a state for a queried variable: the
    /// value-maximizing bit (ties answer 0) and the resulting game value.
    pub fn adversary(
        &mut self,
        vals: &mut Vec<Option<bool>>,
        var: usize,
    ) -> (bool, GameValue) {
        assert!(vals[var].is_none(), "queried variable must be free");
        let mut best = (false, GameValue::Depth(0));
        let mut first = true;
        for b in [false, true] {
            vals[var] = Some(b);
            let v = self.value_at(vals);
            vals[var] = None;
            let better = match (best.1, v) {
                (_, GameValue::Infinite) => !matches!(best.1, GameValue::Infinite),
                (GameValue::Infinite, _) => false,
                (GameValue::Depth(a), GameValue::Depth(c)) => c > a,
            };
            if first || better {
                best = (b, v);
                first = false;
            }
        }
        best
    }
}

/// Exact resolution depth of `f`: the minimal number of rounds in which the
/// Prover can force a falsified axiom against every Adversary.
pub fn res_depth(f: &Cnf, budget: usize) -> Result<GameValue, ResDepthBudget> {
    let mut t = GameTable::new(f, budget)?;
    let mut vals = vec![None; f.num_vars];
    Ok(t.value_at(&mut vals))
}

/// `res_depth` together with the solved table (for walks).
pub fn res_depth_with_table(
    f: &Cnf,
    budget: usize,
) -> Result<(GameValue, GameTable), ResDepthBudget> {
    let mut t = GameTable::new(f, budget)?;
    let mut vals = vec![None; f.num_vars];
    let v = t.value_at(&mut vals);
    Ok((v, t))
}
