//! A proof-complexity workbench for Cutting Planes and Stabbing Planes.
//!
//! The crate builds unsatisfiable linear-algebraic instances (Tseitin
//! formulas, F_q-linear systems, random k-XOR/k-CNF), constructs Stabbing
//! Planes refutations of unsatisfiable F_q-linear systems, compiles them
//! into Cutting Planes refutations, verifies every proof object with exact
//! rational arithmetic, and runs the semantic-CP depth lower-bound walks as
//! executable procedures.
//!
//! Everything is exact: proof lines are integer vectors with rational
//! thresholds, and all verification is certificate recomputation.

pub mod num;

pub mod exact;
pub mod instances;

pub mod cp;
pub mod refuter;
pub mod resolution;
pub mod scp;
pub mod sp;
pub mod translate;

pub use exact::lp::{lp_optimum, Direction, LpResult};
pub use exact::{farkas_check, IntVec, LinIneq, Polytope, Sense};
pub use num::{Int, Rational};
