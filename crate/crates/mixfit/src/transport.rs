//! Exact solver for the dense transportation problem.
//!
//! Simplex on the spanning-tree basis of the bipartite supply/demand graph,
//! with Bland's rule for both the entering and leaving variable so the
//! iteration terminates even on degenerate instances. Problem sizes here are
//! tiny (atom counts of mixing measures), so no effort is spent on sparse
//! data structures.

/// Minimum cost of moving `supply` onto `demand` with unit costs `cost`
/// (row-major `m x n`). Supplies and demands must be nonnegative and have
/// equal totals.
pub fn min_cost_transport(cost: &[f64], m: usize, n: usize, supply: &[f64], demand: &[f64]) -> f64 {
    assert_eq!(cost.len(), m * n);
    assert_eq!(supply.len(), m);
    assert_eq!(demand.len(), n);
    debug_assert!(
        (supply.iter().sum::<f64>() - demand.iter().sum::<f64>()).abs() < 1e-9,
        "unbalanced transportation problem"
    );

    let mut basis: Vec<(usize, usize, f64)> = northwest_corner(supply, demand);
    let scale = cost.iter().fold(1.0_f64, |acc, &c| acc.max(c.abs()));
    let tol = 1e-12 * scale;
    let max_iters = 1000 * (m + n) * (m + n);

    for _ in 0..max_iters {
        let (u, v) = duals(cost, m, n, &basis);
        // Bland: first improving nonbasic cell in row-major order.
        let mut entering = None;
        'search: for i in 0..m {
            for j in 0..n {
                if basis.iter().any(|&(bi, bj, _)| bi == i && bj == j) {
                    continue;
                }
                if cost[i * n + j] - u[i] - v[j] < -tol {
                    entering = Some((i, j));
                    break 'search;
                }
            }
        }
        let Some((ei, ej)) = entering else { break };

        // Unique tree path from column node ej back to row node ei.
        let path = tree_path(m, n, &basis, m + ej, ei);
        // Cycle: entering edge gets +theta, then signs alternate along the path.
        let mut minus_cells: Vec<usize> = Vec::new();
        for (t, &edge) in path.iter().enumerate() {
            if t % 2 == 0 {
                minus_cells.push(edge);
            }
        }
        let (leave_pos, theta) = minus_cells
            .iter()
            .map(|&e| (e, basis[e].2))
            .min_by(|a, b| {
                a.1.partial_cmp(&b.1)
                    .unwrap()
                    .then_with(|| (basis[a.0].0, basis[a.0].1).cmp(&(basis[b.0].0, basis[b.0].1)))
            })
            .expect("transportation cycle has a leaving cell");

        for (t, &edge) in path.iter().enumerate() {
            if t % 2 == 0 {
                basis[edge].2 -= theta;
            } else {
                basis[edge].2 += theta;
            }
        }
        basis[leave_pos] = (ei, ej, theta);
    }

    basis
        .iter()
        .map(|&(i, j, f)| f.max(0.0) * cost[i * n + j])
        .sum()
}

// Northwest-corner initial basic feasible solution: m + n - 1 cells.
fn northwest_corner(supply: &[f64], demand: &[f64]) -> Vec<(usize, usize, f64)> {
    let (m, n) = (supply.len(), demand.len());
    let mut a = supply.to_vec();
    let mut b = demand.to_vec();
    let mut cells = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let x = a[i].min(b[j]);
        cells.push((i, j, x.max(0.0)));
        a[i] -= x;
        b[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        // advance along the exhausted side; keep the cell count at m+n-1
        if (a[i] <= b[j] && i < m - 1) || j == n - 1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    cells
}

// Dual potentials u (rows) and v (columns) with u[0] = 0, solved by
// propagation over the spanning tree of basic cells.
fn duals(cost: &[f64], m: usize, n: usize, basis: &[(usize, usize, f64)]) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![f64::NAN; m];
    let mut v = vec![f64::NAN; n];
    u[0] = 0.0;
    let mut settled = 1;
    while settled < m + n {
        let mut progressed = false;
        for &(i, j, _) in basis {
            if !u[i].is_nan() && v[j].is_nan() {
                v[j] = cost[i * n + j] - u[i];
                settled += 1;
                progressed = true;
            } else if u[i].is_nan() && !v[j].is_nan() {
                u[i] = cost[i * n + j] - v[j];
                settled += 1;
                progressed = true;
            }
        }
        assert!(progressed, "basis does not span the bipartite graph");
    }
    (u, v)
}

// BFS over basic edges from node `start` to node `goal`; nodes 0..m are rows
// and m..m+n are columns. Returns the path as basis-edge indices, ordered
// from `start` to `goal`.
fn tree_path(m: usize, n: usize, basis: &[(usize, usize, f64)], start: usize, goal: usize) -> Vec<usize> {
    let total = m + n;
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; total]; // (node, edge index)
    let mut visited = vec![false; total];
    visited[start] = true;
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        if node == goal {
            break;
        }
        for (e, &(i, j, _)) in basis.iter().enumerate() {
            let (r, c) = (i, m + j);
            let next = if node == r {
                c
            } else if node == c {
                r
            } else {
                continue;
            };
            if !visited[next] {
                visited[next] = true;
                parent[next] = Some((node, e));
                queue.push_back(next);
            }
        }
    }
    let mut path = Vec::new();
    let mut node = goal;
    while let Some((prev, e)) = parent[node] {
        path.push(e);
        node = prev;
    }
    path.reverse();
    path
}
