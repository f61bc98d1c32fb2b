//! Tseitin formulas and the graph families used to generate them.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Equation, GraphWithLabels, LinSystemFq};

#[derive(Debug, thiserror::Error)]
pub enum TseitinError {
    #[error("graph is not connected")]
    Disconnected,
}

/// The Tseitin system of `(G, l)`: one F_2 equation per vertex, over one
/// variable per edge, asserting that the parities of incident edges match
/// the vertex labels. Unsatisfiable iff the label sum is odd.
pub fn tseitin(g: &GraphWithLabels) -> Result<LinSystemFq, TseitinError> {
    if !g.is_connected() {
        return Err(TseitinError::Disconnected);
    }
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); g.n];
    for (e, &(u, v)) in g.edges.iter().enumerate() {
        incident[u].push(e);
        incident[v].push(e);
    }
    let width = incident.iter().map(Vec::len).max().unwrap_or(0);
    let equations = (0..g.n)
        .map(|v| Equation {
            support: incident[v].clone(),
            coeffs: vec![1; incident[v].len()],
            rhs: g.labels[v] as u64,
        })
        .collect();
    Ok(LinSystemFq {
        q: 2,
        width,
        n: g.edges.len(),
        equations,
    })
}

/// `K_k` with an odd label sum: label 1 on vertex 0 only.
pub fn complete_graph(k: usize) -> GraphWithLabels {
    let mut edges = Vec::new();
    for u in 0..k {
        for v in u + 1..k {
            edges.push((u, v));
        }
    }
    let mut labels = vec![false; k];
    if k > 0 {
        labels[0] = true;
    }
    GraphWithLabels::new(k, edges, labels).expect("complete graph is simple")
}

/// `K_k` with every label 1.
pub fn complete_graph_all_one(k: usize) -> GraphWithLabels {
    let mut g = complete_graph(k);
    g.labels = vec![true; k];
    g
}

/// The cycle `C_k` with an odd label sum.
pub fn cycle_graph(k: usize) -> GraphWithLabels {
    assert!(k >= 3, "cycle needs at least 3 vertices");
    let edges = (0..k).map(|i| (i, (i + 1) % k)).collect();
    let mut labels = vec![false; k];
    labels[0] = true;
    GraphWithLabels::new(k, edges, labels).expect("cycle is simple")
}

#[derive(Debug, thiserror::Error)]
pub enum RegularGraphError {
    #[error("n*d must be even")]
    OddStubCount,
    #[error("no simple {d}-regular graph on {n} vertices found within {attempts} attempts")]
    AttemptsExhausted { n: usize, d: usize, attempts: usize },
}

/// Random d-regular simple connected graph via the configuration model with
/// rejection, deterministic for a given seed. Label sum is made odd by
/// labelling vertex 0.
pub fn random_regular_graph(
    n: usize,
    d: usize,
    seed: u64,
) -> Result<GraphWithLabels, RegularGraphError> {
    if n * d % 2 != 0 {
        return Err(RegularGraphError::OddStubCount);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let attempts = 2000;
    for _ in 0..attempts {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
        stubs.shuffle(&mut rng);
        let mut seen = std::collections::BTreeSet::new();
        let mut edges = Vec::with_capacity(n * d / 2);
        let mut ok = true;
        for pair in stubs.chunks(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v {
                ok = false;
                break;
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                ok = false;
                break;
            }
            edges.push(e);
        }
        if !ok {
            continue;
        }
        let mut labels = vec![false; n];
        labels[0] = true;
        let g = GraphWithLabels::new(n, edges, labels).expect("checked simple");
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(RegularGraphError::AttemptsExhausted { n, d, attempts })
}
