//! Shared test support: an exhaustive transportation oracle and random
//! measure generators.

use mixfit::measure::MixingMeasure;
use mixfit::rng::RandomStream;

/// Exhaustive minimum-cost transport: enumerate every basis (spanning tree
/// of the bipartite supply/demand graph), solve its flows by leaf
/// elimination, and keep the cheapest feasible one. Exponential, for small
/// instances only.
pub fn oracle_min_cost(cost: &[f64], m: usize, n: usize, supply: &[f64], demand: &[f64]) -> f64 {
    let edges: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .collect();
    let basis_size = m + n - 1;
    let mut best = f64::INFINITY;
    let mut subset: Vec<usize> = (0..basis_size).collect();
    loop {
        if let Some(c) = tree_cost(&subset, &edges, cost, m, n, supply, demand) {
            best = best.min(c);
        }
        // next combination in lexicographic order
        let mut i = basis_size;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] != edges.len() - basis_size + i {
                subset[i] += 1;
                for t in i + 1..basis_size {
                    subset[t] = subset[t - 1] + 1;
                }
                break;
            }
        }
    }
}

// Solve flows on the candidate edge set by repeatedly fixing the flow at a
// degree-1 node. None when the set has a cycle or yields negative flow.
fn tree_cost(
    subset: &[usize],
    edges: &[(usize, usize)],
    cost: &[f64],
    m: usize,
    n: usize,
    supply: &[f64],
    demand: &[f64],
) -> Option<f64> {
    let mut active: Vec<(usize, usize)> = subset.iter().map(|&e| edges[e]).collect();
    let mut residual: Vec<f64> = supply.iter().chain(demand.iter()).copied().collect();
    let mut total = 0.0;
    while !active.is_empty() {
        // degree count over the m + n nodes
        let mut degree = vec![0usize; m + n];
        for &(i, j) in &active {
            degree[i] += 1;
            degree[m + j] += 1;
        }
        let leaf = (0..m + n).find(|&v| degree[v] == 1)?;
        let pos = active
            .iter()
            .position(|&(i, j)| i == leaf || m + j == leaf)
            .expect("leaf has one incident edge");
        let (i, j) = active.swap_remove(pos);
        let flow = residual[leaf];
        if flow < -1e-9 {
            return None;
        }
        total += flow * cost[i * n + j];
        // the shipped flow drains the leaf and debits the other endpoint
        residual[leaf] = 0.0;
        let other = if leaf == i { m + j } else { i };
        residual[other] -= flow;
    }
    if residual.iter().any(|&r| r.abs() > 1e-9) {
        return None;
    }
    Some(total)
}

/// Oracle Wasserstein-ell distance via [`oracle_min_cost`].
pub fn oracle_wasserstein(g: &MixingMeasure, h: &MixingMeasure, ell: f64) -> f64 {
    let (m, n) = (g.k(), h.k());
    let mut cost = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            let d2: f64 = g
                .atom(i)
                .iter()
                .zip(h.atom(j))
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            cost[i * n + j] = d2.sqrt().powf(ell);
        }
    }
    oracle_min_cost(&cost, m, n, g.weights(), h.weights())
        .max(0.0)
        .powf(1.0 / ell)
}

/// Random measure with `k` atoms in `[-3, 3]^q` and simplex weights at
/// least 0.05 apiece.
pub fn random_measure(rng: &mut RandomStream, k: usize, q: usize) -> MixingMeasure {
    let atoms: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..q).map(|_| rng.uniform_in(-3.0, 3.0)).collect())
        .collect();
    let mut weights = rng.simplex(k);
    // keep weights bounded away from zero so measure validation passes
    let floor = 0.05;
    let total: f64 = weights.iter().map(|w| w + floor).sum();
    for w in weights.iter_mut() {
        *w = (*w + floor) / total;
    }
    MixingMeasure::new(atoms, weights, None).expect("valid random measure")
}
