//! Frontier (vertex subset) representations: sparse id array, dense boolean
//! array, and 64-bit-word bitvector, with lossless conversions.

use crate::graph::{Graph, VertexId};
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Repr {
    Sparse,
    Bool,
    Bits,
}

#[derive(Debug, Clone)]
enum Store {
    /// Ascending, duplicate-free vertex ids.
    Sparse(Vec<VertexId>),
    Bool(Vec<bool>),
    Bits(Vec<u64>),
}

/// A vertex subset over a domain of `n` vertices.
fn init_lock<T>(v: Option<T>) -> OnceLock<T> {
    let lock = OnceLock::new();
    if let Some(v) = v {
        let _ = lock.set(v);
    }
    lock
}

#[derive(Debug, Clone)]
pub struct Frontier {
    n: usize,
    store: Store,
    size: OnceLock<usize>,
    out_degree_sum: OnceLock<u64>,
}

impl Frontier {
    pub fn empty(n: usize) -> Frontier {
        Frontier::from_ids(n, Vec::new())
    }

    /// Vertices `0..k` active (the `new vertexset{V}(k)` constructor).
    pub fn full_prefix(n: usize, k: usize) -> Frontier {
        Frontier::from_ids(n, (0..k.min(n) as VertexId).collect())
    }

    pub fn from_ids(n: usize, mut ids: Vec<VertexId>) -> Frontier {
        ids.sort_unstable();
        ids.dedup();
        let size = ids.len();
        Frontier {
            n,
            store: Store::Sparse(ids),
            size: init_lock(Some(size)),
            out_degree_sum: OnceLock::new(),
        }
    }

    /// Build from unsorted per-worker id buffers known to be duplicate-free.
    pub fn from_unsorted_ids(n: usize, mut ids: Vec<VertexId>) -> Frontier {
        ids.sort_unstable();
        let size = ids.len();
        Frontier {
            n,
            store: Store::Sparse(ids),
            size: init_lock(Some(size)),
            out_degree_sum: OnceLock::new(),
        }
    }

    pub fn from_bools(flags: Vec<bool>) -> Frontier {
        Frontier {
            n: flags.len(),
            store: Store::Bool(flags),
            size: OnceLock::new(),
            out_degree_sum: OnceLock::new(),
        }
    }

    pub fn domain(&self) -> usize {
        self.n
    }

    pub fn repr(&self) -> Repr {
        match self.store {
            Store::Sparse(_) => Repr::Sparse,
            Store::Bool(_) => Repr::Bool,
            Store::Bits(_) => Repr::Bits,
        }
    }

    pub fn len(&self) -> usize {
        *self.size.get_or_init(|| match &self.store {
            Store::Sparse(ids) => ids.len(),
            Store::Bool(flags) => flags.iter().filter(|b| **b).count(),
            Store::Bits(words) => words.iter().map(|w| w.count_ones() as usize).sum(),
        })
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, v: VertexId) -> bool {
        match &self.store {
            Store::Sparse(ids) => ids.binary_search(&v).is_ok(),
            Store::Bool(flags) => flags[v as usize],
            Store::Bits(words) => {
                (words[v as usize / 64] >> (v as usize % 64)) & 1 == 1
            }
        }
    }

    /// Ascending iteration over members, any representation.
    pub fn iter(&self) -> Box<dyn Iterator<Item = VertexId> + '_> {
        match &self.store {
            Store::Sparse(ids) => Box::new(ids.iter().copied()),
            Store::Bool(flags) => Box::new(
                flags.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i as VertexId),
            ),
            Store::Bits(words) => Box::new(
                words
                    .iter()
                    .enumerate()
                    .flat_map(|(wi, w)| {
                        let w = *w;
                        (0..64).filter_map(move |bit| {
                            if (w >> bit) & 1 == 1 {
                                Some((wi * 64 + bit) as VertexId)
                            } else {
                                None
                            }
                        })
                    })
                    .filter(move |v| (*v as usize) < self.n),
            ),
        }
    }

    pub fn ids(&self) -> Vec<VertexId> {
        self.iter().collect()
    }

    /// Borrow the sparse id slice (only valid on sparse frontiers).
    pub fn sparse_ids(&self) -> Option<&[VertexId]> {
        match &self.store {
            Store::Sparse(ids) => Some(ids),
            _ => None,
        }
    }

    /// Convert to another representation of the same set.
    pub fn convert(&self, target: Repr) -> Frontier {
        if self.repr() == target {
            return self.clone();
        }
        let out = match target {
            Repr::Sparse => Store::Sparse(self.ids()),
            Repr::Bool => {
                let mut flags = vec![false; self.n];
                for v in self.iter() {
                    flags[v as usize] = true;
                }
                Store::Bool(flags)
            }
            Repr::Bits => {
                let mut words = vec![0u64; self.n.div_ceil(64)];
                for v in self.iter() {
                    words[v as usize / 64] |= 1 << (v as usize % 64);
                }
                Store::Bits(words)
            }
        };
        Frontier {
            n: self.n,
            store: out,
            size: init_lock(Some(self.len())),
            out_degree_sum: self.out_degree_sum.clone(),
        }
    }

    /// Σ out-degree over the members; cached after first computation.
    pub fn sum_out_degrees(&self, graph: &Graph) -> u64 {
        *self
            .out_degree_sum
            .get_or_init(|| self.iter().map(|v| graph.out_degree(v) as u64).sum())
    }

    /// Whether sum_out_degrees() has already been computed (the hybrid
    /// selector charges degree reads only once).
    pub fn degree_sum_cached(&self) -> bool {
        self.out_degree_sum.get().is_some()
    }
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.ids() == other.ids()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_to_bool() {
        let f = Frontier::from_ids(4, vec![3, 1]);
        let b = f.convert(Repr::Bool);
        assert_eq!(b.ids(), vec![1, 3]);
        assert!(b.contains(1) && b.contains(3));
        assert!(!b.contains(0) && !b.contains(2));
    }

    #[test]
    fn all_false_bool_to_sparse() {
        let f = Frontier::from_bools(vec![false; 8]);
        let s = f.convert(Repr::Sparse);
        assert_eq!(s.len(), 0);
        assert!(s.ids().is_empty());
    }

    #[test]
    fn conversion_chain_preserves_set() {
        let ids: Vec<VertexId> = (0..1000).filter(|v| v % 7 == 3).collect();
        let f = Frontier::from_ids(1000, ids.clone());
        let round = f.convert(Repr::Bits).convert(Repr::Bool).convert(Repr::Sparse);
        assert_eq!(round.ids(), ids);
    }

    #[test]
    fn full_prefix_counts() {
        let f = Frontier::full_prefix(10, 10);
        assert_eq!(f.len(), 10);
        let e = Frontier::full_prefix(10, 0);
        assert!(e.is_empty());
    }

    #[test]
    fn bitvector_tail_is_clean() {
        let f = Frontier::from_ids(70, vec![69]);
        let bits = f.convert(Repr::Bits);
        assert_eq!(bits.len(), 1);
        assert_eq!(bits.ids(), vec![69]);
    }
}
