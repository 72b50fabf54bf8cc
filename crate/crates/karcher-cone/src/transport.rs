//! Exact solvers for the finite transportation problem.
//!
//! `min_cost_transport` solves `min Σ f_ij c_ij` over nonnegative flows with
//! prescribed row sums (supplies) and column sums (demands) by successive
//! shortest augmenting paths with node potentials: reduced costs stay
//! nonnegative, so every augmentation rides a Dijkstra pass over the dense
//! bipartite residual graph. Supplies are real-valued; no integral scaling is
//! assumed.
//!
//! `bottleneck_assignment` solves `min_σ max_j c[j][σ(j)]` by binary search
//! on the sorted cost set with a matching-feasibility test per candidate
//! threshold.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Mass below this is treated as exhausted.
const MASS_TOL: f64 = 1e-13;

/// Residual flow below this is snapped to zero after an augmentation.
const FLOW_SNAP: f64 = 1e-15;

/// Exact transportation LP. `supply` and `demand` must each sum to the same
/// total (they are probability weights here, so both sum to one). Returns the
/// optimal cost and the flow matrix.
pub fn min_cost_transport(
    supply: &[f64],
    demand: &[f64],
    cost: &DMatrix<f64>,
) -> Result<(f64, DMatrix<f64>)> {
    let m = supply.len();
    let n = demand.len();
    assert_eq!(cost.nrows(), m);
    assert_eq!(cost.ncols(), n);

    let mut remaining_supply = supply.to_vec();
    let mut remaining_demand = demand.to_vec();
    let mut flow = DMatrix::<f64>::zeros(m, n);

    // Node potentials keeping all residual reduced costs nonnegative.
    let mut pot_source = vec![0.0f64; m];
    let mut pot_sink = vec![0.0f64; n];

    let budget = 40 * (m + n) * (m + n) + 1000;
    let mut augmentations = 0usize;

    while remaining_supply.iter().sum::<f64>() > MASS_TOL * m.max(1) as f64 {
        augmentations += 1;
        if augmentations > budget {
            return Err(Error::TransportStalled(augmentations));
        }

        // Dense Dijkstra over m sources then n sinks (indices m..m+n).
        let total = m + n;
        let mut dist = vec![f64::INFINITY; total];
        let mut parent: Vec<Option<usize>> = vec![None; total];
        let mut done = vec![false; total];
        for i in 0..m {
            if remaining_supply[i] > MASS_TOL {
                dist[i] = 0.0;
            }
        }

        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..total {
                if !done[v] && dist[v] < best {
                    best = dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;

            if u < m {
                // Forward arcs source u -> every sink.
                for j in 0..n {
                    let v = m + j;
                    if done[v] {
                        continue;
                    }
                    let reduced = (cost[(u, j)] + pot_source[u] - pot_sink[j]).max(0.0);
                    if dist[u] + reduced < dist[v] {
                        dist[v] = dist[u] + reduced;
                        parent[v] = Some(u);
                    }
                }
            } else {
                // Backward arcs sink -> sources with positive flow.
                let j = u - m;
                for i in 0..m {
                    if done[i] || flow[(i, j)] <= 0.0 {
                        continue;
                    }
                    let reduced = (-cost[(i, j)] - pot_source[i] + pot_sink[j]).max(0.0);
                    if dist[u] + reduced < dist[i] {
                        dist[i] = dist[u] + reduced;
                        parent[i] = Some(u);
                    }
                }
            }
        }

        // Closest sink still demanding mass.
        let mut target = None;
        let mut best = f64::INFINITY;
        for j in 0..n {
            if remaining_demand[j] > MASS_TOL && dist[m + j] < best {
                best = dist[m + j];
                target = Some(j);
            }
        }
        let Some(target) = target else {
            // Unreachable demand: the remaining mass imbalance is below
            // tolerance, so stop.
            break;
        };

        // Trace the augmenting path back to its origin source.
        let mut path = Vec::new();
        let mut node = m + target;
        while let Some(prev) = parent[node] {
            path.push((prev, node));
            node = prev;
        }
        let origin = node;

        let mut delta = remaining_supply[origin].min(remaining_demand[target]);
        for &(a, b) in &path {
            if a >= m {
                // Backward arc (sink a-m) -> (source b): bounded by the flow
                // it cancels.
                delta = delta.min(flow[(b, a - m)]);
            }
        }

        for &(a, b) in &path {
            if a < m {
                flow[(a, b - m)] += delta;
            } else {
                flow[(b, a - m)] -= delta;
                if flow[(b, a - m)] < FLOW_SNAP {
                    flow[(b, a - m)] = 0.0;
                }
            }
        }
        remaining_supply[origin] = (remaining_supply[origin] - delta).max(0.0);
        remaining_demand[target] = (remaining_demand[target] - delta).max(0.0);

        // Fold distances into the potentials (capped at the target's label).
        let cap = dist[m + target];
        for i in 0..m {
            if dist[i].is_finite() {
                pot_source[i] += dist[i].min(cap);
            }
        }
        for j in 0..n {
            if dist[m + j].is_finite() {
                pot_sink[j] += dist[m + j].min(cap);
            }
        }
    }

    let mut total_cost = 0.0;
    for i in 0..m {
        for j in 0..n {
            total_cost += flow[(i, j)] * cost[(i, j)];
        }
    }
    Ok((total_cost, flow))
}

/// Kuhn's augmenting-path test: does the bipartite graph over `n x n` with
/// adjacency `adj` admit a perfect matching?
pub fn has_perfect_matching(n: usize, adj: impl Fn(usize, usize) -> bool) -> bool {
    let mut matched_col: Vec<Option<usize>> = vec![None; n];

    fn try_augment(
        row: usize,
        n: usize,
        adj: &impl Fn(usize, usize) -> bool,
        visited: &mut [bool],
        matched_col: &mut [Option<usize>],
    ) -> bool {
        for col in 0..n {
            if adj(row, col) && !visited[col] {
                visited[col] = true;
                let free = match matched_col[col] {
                    None => true,
                    Some(prev) => try_augment(prev, n, adj, visited, matched_col),
                };
                if free {
                    matched_col[col] = Some(row);
                    return true;
                }
            }
        }
        false
    }

    for row in 0..n {
        let mut visited = vec![false; n];
        if !try_augment(row, n, &adj, &mut visited, &mut matched_col) {
            return false;
        }
    }
    true
}

/// Exact bottleneck assignment `min_σ max_j cost[(j, σ(j))]` by binary search
/// over the sorted set of cost values.
pub fn bottleneck_assignment(cost: &DMatrix<f64>) -> f64 {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols());
    if n == 0 {
        return 0.0;
    }

    let mut levels: Vec<f64> = cost.iter().copied().collect();
    levels.sort_by(|a, b| a.partial_cmp(b).expect("costs are finite"));
    levels.dedup();

    let feasible = |threshold: f64| has_perfect_matching(n, |i, j| cost[(i, j)] <= threshold);

    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    debug_assert!(feasible(levels[hi]));
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(levels[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    levels[lo]
}
