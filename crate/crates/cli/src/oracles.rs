//! Serial reference implementations the `verify` command checks schedules
//! against. Each oracle walks the graph directly and stays independent of
//! the plan-driven engine.

use graphweave_core::graph::{Graph, VertexId};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Same "infinity" the shipped shortest-paths program uses.
pub const UNREACHED: i64 = 2147483647;

/// Dense power iteration with the damping update the PageRank program
/// applies per round.
pub fn pagerank(graph: &Graph, iters: usize, damp: f64) -> Vec<f64> {
    let n = graph.n.max(1);
    let base = (1.0 - damp) / n as f64;
    let mut old = vec![1.0 / n as f64; n];
    let mut new = vec![0.0; n];
    for _ in 0..iters {
        for s in 0..n as VertexId {
            let contrib = old[s as usize] / graph.out_degree(s) as f64;
            for &d in graph.out_adj.neighbors_of(s) {
                new[d as usize] += contrib;
            }
        }
        for v in 0..n {
            new[v] = base + damp * new[v];
            old[v] = new[v];
            new[v] = 0.0;
        }
    }
    old
}

/// PageRankDelta exactly as the shipped program computes it: frontier in
/// ascending id order, first-round delta adjustment, `|Δ| > ε·rank` filter.
pub fn prdelta(graph: &Graph, iters: usize, damp: f64, epsilon: f64) -> Vec<f64> {
    let n = graph.n.max(1);
    let one_over_n = 1.0 / n as f64;
    let base = (1.0 - damp) * one_over_n;
    let mut rank = vec![0.0; n];
    let mut delta_sum = vec![0.0; n];
    let mut delta = vec![one_over_n; n];
    let mut frontier: Vec<VertexId> = (0..n as VertexId).collect();
    for round in 1..=iters {
        for &s in &frontier {
            let contrib = delta[s as usize] / graph.out_degree(s) as f64;
            for &d in graph.out_adj.neighbors_of(s) {
                delta_sum[d as usize] += contrib;
            }
        }
        let mut next = Vec::new();
        for v in 0..n {
            if round == 1 {
                delta[v] = damp * delta_sum[v] + base;
                rank[v] += delta[v];
                delta[v] -= one_over_n;
                let keep = delta[v].abs() > epsilon * rank[v];
                delta_sum[v] = 0.0;
                if keep {
                    next.push(v as VertexId);
                }
            } else {
                delta[v] = delta_sum[v] * damp;
                rank[v] += delta[v];
                delta_sum[v] = 0.0;
                if delta[v].abs() > epsilon * rank[v] {
                    next.push(v as VertexId);
                }
            }
        }
        frontier = next;
    }
    rank
}

/// Level-synchronous BFS levels (-1 for unreached vertices).
pub fn bfs_levels(graph: &Graph, source: VertexId) -> Vec<i64> {
    let n = graph.n;
    let mut level = vec![-1i64; n];
    if n == 0 {
        return level;
    }
    level[source as usize] = 0;
    let mut frontier = vec![source];
    let mut depth = 0i64;
    while !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for &s in &frontier {
            for &d in graph.out_adj.neighbors_of(s) {
                if level[d as usize] < 0 {
                    level[d as usize] = depth;
                    next.push(d);
                }
            }
        }
        frontier = next;
    }
    level
}

/// Levels implied by a parent array (what schedule invariance compares).
pub fn levels_from_parents(parents: &[i64]) -> Vec<i64> {
    parents
        .iter()
        .enumerate()
        .map(|(v, &p)| {
            if p < 0 {
                return -1;
            }
            let mut at = v;
            let mut level = 0i64;
            let mut hops = 0usize;
            while parents[at] as usize != at {
                at = parents[at] as usize;
                level += 1;
                hops += 1;
                if hops > parents.len() {
                    return i64::MIN; // cycle: invalid parents
                }
            }
            level
        })
        .collect()
}

/// Serial min-label propagation to fixpoint.
pub fn cc_labels(graph: &Graph) -> Vec<i64> {
    let n = graph.n;
    let mut labels: Vec<i64> = (0..n as i64).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..n as VertexId {
            for &d in graph.out_adj.neighbors_of(s) {
                if labels[s as usize] < labels[d as usize] {
                    labels[d as usize] = labels[s as usize];
                    changed = true;
                }
            }
        }
    }
    labels
}

/// Dijkstra with the program's saturating "infinity".
pub fn sssp_dijkstra(graph: &Graph, source: VertexId) -> Vec<i64> {
    let n = graph.n;
    let mut dist = vec![UNREACHED; n];
    if n == 0 {
        return dist;
    }
    dist[source as usize] = 0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0i64, source)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v as usize] {
            continue;
        }
        for i in graph.out_adj.edge_range(v) {
            let u = graph.out_adj.neighbors[i];
            let w = graph.out_adj.weights.as_ref().map_or(1, |ws| ws[i]);
            let nd = d + w;
            if nd < dist[u as usize] {
                dist[u as usize] = nd;
                heap.push(Reverse((nd, u)));
            }
        }
    }
    dist
}

/// Serial Brandes dependencies for one source (level-synchronous, matching
/// the two-phase program: forward path counts, backward accumulation).
pub fn bc_dependencies(graph: &Graph, source: VertexId) -> Vec<f64> {
    let n = graph.n;
    let mut sigma = vec![0.0f64; n];
    let mut level = vec![-1i64; n];
    if n == 0 {
        return sigma;
    }
    sigma[source as usize] = 1.0;
    level[source as usize] = 0;
    let mut frontiers = vec![vec![source]];
    loop {
        let last = frontiers.last().unwrap();
        let mut next = Vec::new();
        let depth = frontiers.len() as i64;
        for &s in last {
            for &d in graph.out_adj.neighbors_of(s) {
                if level[d as usize] < 0 {
                    level[d as usize] = depth;
                    next.push(d);
                }
            }
        }
        // Path counts accumulate from every same-level predecessor.
        for &s in last {
            for &d in graph.out_adj.neighbors_of(s) {
                if level[d as usize] == depth {
                    sigma[d as usize] += sigma[s as usize];
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontiers.push(next);
    }
    let mut delta = vec![0.0f64; n];
    for d in (0..frontiers.len().saturating_sub(1)).rev() {
        for &v in &frontiers[d] {
            for &w in graph.out_adj.neighbors_of(v) {
                if level[w as usize] == d as i64 + 1 {
                    delta[v as usize] +=
                        (sigma[v as usize] / sigma[w as usize]) * (1.0 + delta[w as usize]);
                }
            }
        }
    }
    delta
}

/// Squared-error loss of a K-factor model over the rating edges.
pub fn cf_loss(graph: &Graph, user_latent: &[Vec<f64>], item_latent: &[Vec<f64>]) -> f64 {
    graph
        .edges()
        .map(|(s, d, r)| {
            let est: f64 = user_latent
                .iter()
                .zip(item_latent)
                .map(|(lu, li)| lu[s as usize] * li[d as usize])
                .sum();
            (r as f64 - est).powi(2)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use graphweave_core::gen;

    #[test]
    fn bfs_levels_on_path() {
        let g = gen::path(5);
        assert_eq!(bfs_levels(&g, 0), vec![0, 1, 2, 3, 4]);
        assert_eq!(bfs_levels(&g, 2), vec![-1, -1, 0, 1, 2]);
    }

    #[test]
    fn dijkstra_prefers_cheaper_path() {
        let g = Graph::from_edges(Some(3), vec![(0, 1, 1), (1, 2, 1), (0, 2, 5)], true);
        assert_eq!(sssp_dijkstra(&g, 0), vec![0, 1, 2]);
    }

    #[test]
    fn cc_on_disjoint_triangles() {
        let edges: Vec<_> = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]
            .into_iter()
            .flat_map(|(a, b)| [(a, b, 1), (b, a, 1)])
            .collect();
        let g = Graph::from_edges(Some(6), edges, false);
        assert_eq!(cc_labels(&g), vec![0, 0, 0, 3, 3, 3]);
    }

    #[test]
    fn brandes_on_path() {
        let g = gen::path(4);
        let dep = bc_dependencies(&g, 0);
        assert_eq!(dep, vec![3.0, 2.0, 1.0, 0.0]);
    }
}
