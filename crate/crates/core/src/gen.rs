//! Deterministic graph generators for tests and benchmarks: RMAT, path,
//! grid, star, uniform random, and random bipartite rating graphs.

use crate::graph::{Graph, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// RMAT/Kronecker generator with the usual (0.57, 0.19, 0.19) skew.
/// Duplicate edges and self-loops are kept, matching what the loaders accept.
pub fn rmat(scale: u32, edge_factor: usize, seed: u64) -> Graph {
    let n = 1usize << scale;
    let m = n * edge_factor;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b, c) = (0.57, 0.19, 0.19);
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (mut src, mut dst) = (0usize, 0usize);
        for bit in (0..scale).rev() {
            let r: f64 = rng.gen();
            let (sbit, dbit) = if r < a {
                (0, 0)
            } else if r < a + b {
                (0, 1)
            } else if r < a + b + c {
                (1, 0)
            } else {
                (1, 1)
            };
            src |= sbit << bit;
            dst |= dbit << bit;
        }
        edges.push((src as VertexId, dst as VertexId, 1 + (rng.gen::<u64>() % 10) as i64));
    }
    Graph::from_edges(Some(n), edges, false)
}

/// Like [`rmat`] but keeps the generated weights (1..=10).
pub fn rmat_weighted(scale: u32, edge_factor: usize, seed: u64) -> Graph {
    let g = rmat(scale, edge_factor, seed);
    let edges = g.edges().collect();
    Graph::from_edges(Some(g.n), edges, true)
}

/// Directed path 0 → 1 → ... → n-1.
pub fn path(n: usize) -> Graph {
    let edges = (0..n.saturating_sub(1) as VertexId).map(|v| (v, v + 1, 1)).collect();
    Graph::from_edges(Some(n), edges, false)
}

pub fn path_weighted(n: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (0..n.saturating_sub(1) as VertexId)
        .map(|v| (v, v + 1, rng.gen_range(1..=10)))
        .collect();
    Graph::from_edges(Some(n), edges, true)
}

/// rows × cols grid, 4-neighborhood, both directions per adjacency.
pub fn grid(rows: usize, cols: usize) -> Graph {
    let at = |r: usize, c: usize| (r * cols + c) as VertexId;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((at(r, c), at(r, c + 1), 1));
                edges.push((at(r, c + 1), at(r, c), 1));
            }
            if r + 1 < rows {
                edges.push((at(r, c), at(r + 1, c), 1));
                edges.push((at(r + 1, c), at(r, c), 1));
            }
        }
    }
    Graph::from_edges(Some(rows * cols), edges, false)
}

/// Star: center 0 with out-edges to each of `leaves` leaves.
pub fn star(leaves: usize) -> Graph {
    let edges = (1..=leaves as VertexId).map(|v| (0, v, 1)).collect();
    Graph::from_edges(Some(leaves + 1), edges, false)
}

/// Uniform random directed graph.
pub fn uniform(n: usize, m: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (0..m)
        .map(|_| {
            (rng.gen_range(0..n) as VertexId, rng.gen_range(0..n) as VertexId, rng.gen_range(1..=10))
        })
        .collect();
    Graph::from_edges(Some(n), edges, true)
}

/// Bipartite rating graph in a shared id space: users take ids
/// `0..num_users`, items take `num_users..num_users+num_items`; every edge
/// goes user → item with an integer rating in 1..=5.
pub fn random_bipartite(num_users: usize, num_items: usize, edges_per_user: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = num_users + num_items;
    let mut edges = Vec::with_capacity(num_users * edges_per_user);
    for u in 0..num_users as VertexId {
        for _ in 0..edges_per_user {
            let item = (num_users + rng.gen_range(0..num_items)) as VertexId;
            edges.push((u, item, rng.gen_range(1..=5)));
        }
    }
    Graph::from_edges(Some(n), edges, true)
}

/// Serialize as a text edge list (`.el` when unweighted, `.wel` style with
/// weights otherwise), with an explicit vertex-count header.
pub fn to_edge_list(graph: &Graph) -> String {
    let mut out = format!("# n = {}\n", graph.n);
    for (s, d, w) in graph.edges() {
        if graph.weighted {
            out.push_str(&format!("{s} {d} {w}\n"));
        } else {
            out.push_str(&format!("{s} {d}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmat_is_reproducible() {
        let a = rmat(8, 8, 42);
        let b = rmat(8, 8, 42);
        assert_eq!(a, b);
        assert_eq!(a.n, 256);
        assert_eq!(a.m, 256 * 8);
    }

    #[test]
    fn path_shape() {
        let g = path(5);
        assert_eq!((g.n, g.m), (5, 4));
        assert_eq!(g.out_adj.neighbors_of(0), &[1]);
        assert_eq!(g.out_degree(4), 0);
    }

    #[test]
    fn grid_degrees() {
        let g = grid(3, 3);
        assert_eq!(g.n, 9);
        // Corner has 2 out-neighbors, center has 4.
        assert_eq!(g.out_degree(0), 2);
        assert_eq!(g.out_degree(4), 4);
    }

    #[test]
    fn bipartite_edges_point_into_items() {
        let g = random_bipartite(10, 5, 3, 7);
        for (s, d, w) in g.edges() {
            assert!(s < 10);
            assert!((10..15).contains(&d));
            assert!((1..=5).contains(&w));
        }
    }
}
