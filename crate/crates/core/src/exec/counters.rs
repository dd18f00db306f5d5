//! Work and locality counters, tallied per worker and merged.

use serde::Serialize;
use std::ops::AddAssign;

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Counters {
    /// Adjacency entries visited by inner loops.
    pub edges_examined: u64,
    /// Apply-function invocations (all filters passed).
    pub edges_applied: u64,
    /// Outer-loop vertices considered by dense modes (membership/filter
    /// tests); sparse iteration contributes nothing here.
    pub vertices_examined: u64,
    /// Atomic read-modify-write operations (CAS attempts, swaps).
    pub atomics_executed: u64,
    /// Frontier representation conversions performed by the engine.
    pub frontier_conversions: u64,
    /// Segmented subgraphs processed.
    pub ssg_passes: u64,
    /// Per-(segment, vector) merges of local buffers.
    pub merge_ops: u64,
    /// Out-degree lookups performed by the hybrid direction selector.
    pub selector_degree_reads: u64,
}

impl AddAssign for Counters {
    fn add_assign(&mut self, rhs: Counters) {
        self.edges_examined += rhs.edges_examined;
        self.edges_applied += rhs.edges_applied;
        self.vertices_examined += rhs.vertices_examined;
        self.atomics_executed += rhs.atomics_executed;
        self.frontier_conversions += rhs.frontier_conversions;
        self.ssg_passes += rhs.ssg_passes;
        self.merge_ops += rhs.merge_ops;
        self.selector_degree_reads += rhs.selector_degree_reads;
    }
}

impl Counters {
    pub fn merged(mut self, rhs: Counters) -> Counters {
        self += rhs;
        self
    }
}

/// Per-traversal record emitted into the stats report.
#[derive(Debug, Clone, Serialize)]
pub struct TraversalRecord {
    pub label: String,
    pub variant_chosen: String,
    pub counters: Counters,
    pub wall_time_ns: u128,
}
