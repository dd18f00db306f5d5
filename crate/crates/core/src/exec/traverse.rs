//! The edge traversal engine: nested S → B → Outer → Inner loops driven by a
//! plan variant's graph-iteration-space tags.

use crate::deps::SyncKind;
use crate::exec::compile::{claim_open, run_claim, ClaimSpec, CompiledFunc, EvalCtx, VisitedFlags};
use crate::exec::counters::Counters;
use crate::exec::value::{RtVal, SegmentBuffer, SlotId, VectorStore};
use crate::frontier::{Frontier, Repr};
use crate::gis::{Endpoint, FilterTag, GisVector, ParallelTag, PlanVariant, VariantKind};
use crate::graph::{Adjacency, Graph, VertexId};
use crate::partition::{build_bsg_chunks, SegmentedSubgraph};
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::atomic::Ordering;

/// Neighbor-span width for edge-parallel inner loops.
const INNER_SPAN: usize = 512;

pub struct TraversalSpec<'a> {
    pub variant: &'a PlanVariant,
    pub apply: &'a CompiledFunc,
    pub src_filter: Option<&'a CompiledFunc>,
    pub dst_filter: Option<&'a CompiledFunc>,
    pub edge_filter: Option<&'a CompiledFunc>,
    pub claim: Option<&'a ClaimSpec>,
    /// Source-side frontier, already converted to the tag's representation.
    pub from: Option<&'a Frontier>,
    pub to: Option<&'a Frontier>,
    pub weighted: bool,
    pub build_frontier: bool,
    pub dedup: bool,
    /// Slots whose writes go to per-segment buffers under this variant.
    pub buffered: Vec<(SlotId, crate::deps::ReduceKind)>,
    /// Tracked slot (applyModified), for merge-time modification detection.
    pub tracked_slot: Option<SlotId>,
    pub max_locals: usize,
}

pub struct TraversalEnv<'a> {
    pub graph: &'a Graph,
    pub store: &'a VectorStore,
    pub globals: &'a [RtVal],
    pub visited: &'a VisitedFlags,
    pub threads: usize,
}

pub struct TraversalOutput {
    pub counters: Counters,
    pub frontier: Option<Frontier>,
    pub had_duplicates: bool,
}

#[derive(Default)]
struct WorkerResult {
    tally: Counters,
    out_ids: Vec<VertexId>,
}

impl WorkerResult {
    fn merge(mut self, mut other: WorkerResult) -> WorkerResult {
        self.tally += other.tally;
        self.out_ids.append(&mut other.out_ids);
        self
    }
}

struct Worker<'a, 'b> {
    env: &'b TraversalEnv<'a>,
    spec: &'b TraversalSpec<'a>,
    ctx: EvalCtx<'a>,
    res: WorkerResult,
    serial: bool,
    adj: &'b Adjacency,
}

impl<'a, 'b> Worker<'a, 'b> {
    fn new(
        env: &'b TraversalEnv<'a>,
        spec: &'b TraversalSpec<'a>,
        adj: &'b Adjacency,
        serial: bool,
        buffers: Option<&'a HashMap<usize, SegmentBuffer>>,
        buffer_atomic: bool,
    ) -> Worker<'a, 'b> {
        let mut ctx = EvalCtx::new(env.store, env.globals, spec.max_locals);
        ctx.buffers = buffers;
        ctx.buffer_atomic = buffer_atomic;
        Worker { env, spec, ctx, res: WorkerResult::default(), serial, adj }
    }

    #[inline]
    fn run_filter(&mut self, func: &CompiledFunc, v: i64) -> bool {
        self.ctx.params[0] = v;
        let saved = self.ctx.atomics;
        self.ctx.run(func);
        self.ctx.atomics = saved; // filters never write
        self.ctx.output
    }

    #[inline]
    fn membership(f: &Frontier, v: VertexId) -> bool {
        f.contains(v)
    }

    /// Record a modified destination in the output frontier.
    #[inline]
    fn emit(&mut self, dst: VertexId) {
        if !self.spec.build_frontier {
            return;
        }
        if self.spec.dedup {
            if !self.serial {
                self.res.tally.atomics_executed += 1;
            }
            if !self.env.visited.claim(dst as usize) {
                return;
            }
        }
        self.res.out_ids.push(dst);
    }

    /// Push direction, one source vertex: visit out-neighbors.
    fn push_row(&mut self, src: VertexId) {
        if let Some(f) = self.spec.src_filter {
            if !self.run_filter(f, src as i64) {
                return;
            }
        }
        let range = self.adj.edge_range(src);
        if self.spec.variant.gis.inner.parallel.is_parallel() && range.len() > INNER_SPAN {
            self.push_row_edge_parallel(src, range);
            return;
        }
        for i in range {
            self.push_edge(src, i);
        }
    }

    #[inline]
    fn push_edge(&mut self, src: VertexId, i: usize) {
        self.res.tally.edges_examined += 1;
        let dst = self.adj.neighbors[i];
        if let Some(to) = self.spec.to {
            if !Self::membership(to, dst) {
                return;
            }
        }
        let weight = self.adj.weights.as_ref().map_or(1, |w| w[i]);
        if let Some(claim) = self.spec.claim {
            if !claim_open(self.env.store, claim, dst as usize) {
                return;
            }
            if let Some(f) = self.spec.edge_filter {
                if !self.run_edge_filter(f, src, dst, weight) {
                    return;
                }
            }
            self.ctx.params = [src as i64, dst as i64, weight];
            self.res.tally.edges_applied += 1;
            let won = run_claim(&mut self.ctx, claim, self.serial);
            self.res.tally.atomics_executed += self.take_atomics();
            if won {
                self.emit(dst);
            }
            return;
        }
        if let Some(f) = self.spec.dst_filter {
            if !self.run_filter(f, dst as i64) {
                return;
            }
        }
        if let Some(f) = self.spec.edge_filter {
            if !self.run_edge_filter(f, src, dst, weight) {
                return;
            }
        }
        self.ctx.params = [src as i64, dst as i64, weight];
        self.res.tally.edges_applied += 1;
        self.ctx.run(self.spec.apply);
        self.res.tally.atomics_executed += self.take_atomics();
        if self.ctx.modified {
            self.emit(dst);
        }
    }

    #[inline]
    fn take_atomics(&mut self) -> u64 {
        std::mem::replace(&mut self.ctx.atomics, 0)
    }

    #[inline]
    fn run_edge_filter(&mut self, f: &CompiledFunc, src: VertexId, dst: VertexId, w: i64) -> bool {
        self.ctx.params = [src as i64, dst as i64, w];
        let saved = self.ctx.atomics;
        self.ctx.run(f);
        self.ctx.atomics = saved;
        self.ctx.output
    }

    fn push_row_edge_parallel(&mut self, src: VertexId, range: std::ops::Range<usize>) {
        let spans: Vec<(usize, usize)> = {
            let mut v = Vec::new();
            let mut at = range.start;
            while at < range.end {
                let end = (at + INNER_SPAN).min(range.end);
                v.push((at, end));
                at = end;
            }
            v
        };
        let merged: WorkerResult = spans
            .into_par_iter()
            .map(|(lo, hi)| {
                let mut w = Worker::new(
                    self.env,
                    self.spec,
                    self.adj,
                    false,
                    self.ctx.buffers,
                    self.ctx.buffer_atomic,
                );
                for i in lo..hi {
                    w.push_edge(src, i);
                }
                w.res
            })
            .reduce(WorkerResult::default, WorkerResult::merge);
        self.res = std::mem::take(&mut self.res).merge(merged);
    }

    /// Pull direction, one destination vertex: scan in-neighbors.
    fn pull_row(&mut self, dst: VertexId) {
        self.res.tally.vertices_examined += 1;
        if let Some(to) = self.spec.to {
            if !Self::membership(to, dst) {
                return;
            }
        }
        if let Some(claim) = self.spec.claim {
            if !claim_open(self.env.store, claim, dst as usize) {
                return;
            }
        } else if let Some(f) = self.spec.dst_filter {
            if !self.run_filter(f, dst as i64) {
                return;
            }
        }
        let range = self.adj.edge_range(dst);
        if self.spec.variant.gis.inner.parallel.is_parallel() && range.len() > INNER_SPAN {
            // Edge-parallel pull: no early exit, spans processed concurrently.
            self.pull_row_edge_parallel(dst, range);
            return;
        }
        let early_exit = self.spec.claim.is_some();
        let mut modified_here = false;
        for i in range {
            let done = self.pull_edge(dst, i, &mut modified_here);
            if done && early_exit {
                break;
            }
        }
        if modified_here {
            self.emit(dst);
        }
    }

    /// Returns true when a claim succeeded (candidate for early exit).
    #[inline]
    fn pull_edge(&mut self, dst: VertexId, i: usize, modified_here: &mut bool) -> bool {
        self.res.tally.edges_examined += 1;
        let src = self.adj.neighbors[i];
        if let Some(from) = self.spec.from {
            if !Self::membership(from, src) {
                return false;
            }
        }
        if let Some(f) = self.spec.src_filter {
            if !self.run_filter(f, src as i64) {
                return false;
            }
        }
        let weight = self.adj.weights.as_ref().map_or(1, |w| w[i]);
        if let Some(f) = self.spec.edge_filter {
            if !self.run_edge_filter(f, src, dst, weight) {
                return false;
            }
        }
        self.ctx.params = [src as i64, dst as i64, weight];
        self.res.tally.edges_applied += 1;
        if let Some(claim) = self.spec.claim {
            let won = run_claim(&mut self.ctx, claim, self.serial);
            self.res.tally.atomics_executed += self.take_atomics();
            if won {
                *modified_here = true;
            }
            won
        } else {
            self.ctx.run(self.spec.apply);
            self.res.tally.atomics_executed += self.take_atomics();
            if self.ctx.modified {
                *modified_here = true;
            }
            false
        }
    }

    fn pull_row_edge_parallel(&mut self, dst: VertexId, range: std::ops::Range<usize>) {
        let spans: Vec<(usize, usize)> = {
            let mut v = Vec::new();
            let mut at = range.start;
            while at < range.end {
                let end = (at + INNER_SPAN).min(range.end);
                v.push((at, end));
                at = end;
            }
            v
        };
        let (merged, any_modified): (WorkerResult, bool) = spans
            .into_par_iter()
            .map(|(lo, hi)| {
                let mut w = Worker::new(
                    self.env,
                    self.spec,
                    self.adj,
                    false,
                    self.ctx.buffers,
                    self.ctx.buffer_atomic,
                );
                let mut modified = false;
                for i in lo..hi {
                    w.pull_edge(dst, i, &mut modified);
                }
                (w.res, modified)
            })
            .reduce(
                || (WorkerResult::default(), false),
                |(a, ma), (b, mb)| (a.merge(b), ma || mb),
            );
        self.res = std::mem::take(&mut self.res).merge(merged);
        if any_modified {
            self.emit(dst);
        }
    }
}

/// The outer iteration domain of one segment.
enum OuterDomain<'a> {
    SparseIds(&'a [VertexId]),
    Range(VertexId, VertexId),
}

fn chunk_domain(
    domain: &OuterDomain<'_>,
    gis: &GisVector,
    degree_of: &dyn Fn(VertexId) -> usize,
) -> Vec<(usize, usize)> {
    // Chunks are position ranges into the domain (indices for sparse ids,
    // vertex ids for ranges).
    match gis.bsg {
        None => match domain {
            OuterDomain::SparseIds(ids) => vec![(0, ids.len())],
            OuterDomain::Range(lo, hi) => vec![(*lo as usize, *hi as usize)],
        },
        Some(b) => {
            let (lo, hi) = match domain {
                OuterDomain::SparseIds(ids) => (0u32, ids.len() as u32),
                OuterDomain::Range(lo, hi) => (*lo, *hi),
            };
            let degree = |pos: VertexId| match domain {
                OuterDomain::SparseIds(ids) => degree_of(ids[pos as usize]),
                OuterDomain::Range(..) => degree_of(pos),
            };
            let chunks = build_bsg_chunks(lo, hi, b.grain, b.scheme, degree);
            (0..chunks.len())
                .map(|i| {
                    let r = chunks.range(i);
                    (r.start as usize, r.end as usize)
                })
                .collect()
        }
    }
}

/// Run one segment (whole graph or one SSG slice) under the B-layer
/// parallelization.
#[allow(clippy::too_many_arguments)]
fn run_segment<'a>(
    env: &TraversalEnv<'a>,
    spec: &TraversalSpec<'a>,
    adj: &Adjacency,
    domain: OuterDomain<'_>,
    push: bool,
    serial: bool,
    buffers: Option<&'a HashMap<usize, SegmentBuffer>>,
    buffer_atomic: bool,
) -> WorkerResult {
    let gis = &spec.variant.gis;
    let degree_of = |v: VertexId| adj.degree(v);
    let chunks = chunk_domain(&domain, gis, &degree_of);

    let run_chunk = |chunk: (usize, usize), serial_worker: bool| -> WorkerResult {
        let mut w = Worker::new(env, spec, adj, serial_worker, buffers, buffer_atomic);
        match &domain {
            OuterDomain::SparseIds(ids) => {
                for &src in &ids[chunk.0..chunk.1] {
                    w.push_row(src);
                }
            }
            OuterDomain::Range(..) => {
                for v in chunk.0 as VertexId..chunk.1 as VertexId {
                    if push {
                        w.res.tally.vertices_examined += 1;
                        if let Some(from) = spec.from {
                            if !from.contains(v) {
                                continue;
                            }
                        }
                        w.push_row(v);
                    } else {
                        w.pull_row(v);
                    }
                }
            }
        }
        w.res
    };

    let bsg_parallel = gis.bsg.map(|b| b.parallel).unwrap_or(ParallelTag::SR);
    match bsg_parallel {
        ParallelTag::SR => {
            let mut acc = WorkerResult::default();
            for c in chunks {
                acc = acc.merge(run_chunk(c, serial));
            }
            acc
        }
        ParallelTag::WSP => chunks
            .into_par_iter()
            .map(|c| run_chunk(c, false))
            .reduce(WorkerResult::default, WorkerResult::merge),
        ParallelTag::SP => {
            // Static assignment: contiguous chunk groups, one per worker.
            let t = env.threads.max(1);
            let per = chunks.len().div_ceil(t).max(1);
            let groups: Vec<&[(usize, usize)]> = chunks.chunks(per).collect();
            groups
                .into_par_iter()
                .map(|group| {
                    let mut acc = WorkerResult::default();
                    for c in group {
                        acc = acc.merge(run_chunk(*c, false));
                    }
                    acc
                })
                .reduce(WorkerResult::default, WorkerResult::merge)
        }
    }
}

/// Segment buffers for every buffered slot of one segment executor.
fn make_buffers(
    spec: &TraversalSpec<'_>,
    store: &VectorStore,
    n: usize,
) -> HashMap<usize, SegmentBuffer> {
    spec.buffered
        .iter()
        .map(|(slot, op)| {
            (slot.0, SegmentBuffer::new(*slot, *op, store.slot(*slot).ty, n))
        })
        .collect()
}

/// Merge segment buffers into the global store in ascending segment order.
/// Returns ids whose tracked value changed at merge time.
fn merge_buffers(
    env: &TraversalEnv<'_>,
    spec: &TraversalSpec<'_>,
    all: Vec<HashMap<usize, SegmentBuffer>>,
    tally: &mut Counters,
) -> Vec<VertexId> {
    let mut changed = Vec::new();
    for seg in all {
        let mut slots: Vec<_> = seg.into_values().collect();
        slots.sort_by_key(|b| b.slot.0);
        for buf in slots {
            tally.merge_ops += 1;
            let ident = crate::exec::value::reduce_identity(buf.op, buf.ty);
            let tracks = spec.tracked_slot == Some(buf.slot);
            for v in 0..env.store.n {
                let contrib = buf.cells[v].load(Ordering::Relaxed);
                if contrib == ident {
                    continue;
                }
                let was = env.store.reduce_plain(
                    buf.slot,
                    v,
                    buf.op,
                    RtVal::from_bits(contrib, buf.ty),
                );
                if tracks && was {
                    changed.push(v as VertexId);
                }
            }
        }
    }
    changed
}

/// Execute one plan variant over the graph (S → B → O → I nesting).
pub fn run_variant<'a>(
    env: &TraversalEnv<'a>,
    spec: &TraversalSpec<'a>,
    ssgs: Option<&'a [SegmentedSubgraph]>,
) -> TraversalOutput {
    let gis = &spec.variant.gis;
    let push = spec.variant.kind.push();
    let n = env.graph.n as VertexId;
    // A traversal with no parallel dimension runs fully serial; claims and
    // dedup can then use plain reads and writes.
    let serial = !gis.outer_parallel() && !gis.inner_parallel();

    let whole_adj = if push { &env.graph.out_adj } else { &env.graph.in_adj };

    let sparse_ids = match (spec.variant.kind, spec.from) {
        (VariantKind::SparsePush, Some(f)) => f.sparse_ids().map(|s| s.to_vec()),
        (VariantKind::SparsePush, None) => Some((0..n).collect()),
        _ => None,
    };

    let mut result = WorkerResult::default();
    let mut merge_changed = Vec::new();

    match (&gis.ssg, ssgs) {
        (None, _) => {
            let domain = match &sparse_ids {
                Some(ids) => OuterDomain::SparseIds(ids),
                None => OuterDomain::Range(0, n),
            };
            result = run_segment(env, spec, whole_adj, domain, push, serial, None, false);
        }
        (Some(cfg), Some(segments)) => {
            let buffered = !spec.buffered.is_empty() && cfg.parallel.is_parallel();
            let buffer_atomic = gis.inner.parallel.is_parallel();

            let run_one = |sg: &SegmentedSubgraph,
                           buffers: Option<&HashMap<usize, SegmentBuffer>>|
             -> WorkerResult {
                let domain = match &sparse_ids {
                    Some(ids) => OuterDomain::SparseIds(ids),
                    None => OuterDomain::Range(0, n),
                };
                let mut r = run_segment(env, spec, &sg.adj, domain, push, false, buffers, buffer_atomic);
                r.tally.ssg_passes += 1;
                r
            };

            match cfg.parallel {
                ParallelTag::SR => {
                    for sg in segments {
                        let domain = match &sparse_ids {
                            Some(ids) => OuterDomain::SparseIds(ids),
                            None => OuterDomain::Range(0, n),
                        };
                        let mut r =
                            run_segment(env, spec, &sg.adj, domain, push, serial, None, false);
                        r.tally.ssg_passes += 1;
                        result = result.merge(r);
                    }
                }
                ParallelTag::WSP | ParallelTag::SP => {
                    let buffer_sets: Vec<HashMap<usize, SegmentBuffer>> = if buffered {
                        segments.iter().map(|_| make_buffers(spec, env.store, env.store.n)).collect()
                    } else {
                        Vec::new()
                    };
                    let merged: WorkerResult = if cfg.parallel == ParallelTag::WSP {
                        segments
                            .par_iter()
                            .enumerate()
                            .map(|(i, sg)| run_one(sg, buffer_sets.get(i)))
                            .reduce(WorkerResult::default, WorkerResult::merge)
                    } else {
                        let t = env.threads.max(1);
                        let per = segments.len().div_ceil(t).max(1);
                        segments
                            .par_chunks(per)
                            .enumerate()
                            .map(|(gi, group)| {
                                let mut acc = WorkerResult::default();
                                for (i, sg) in group.iter().enumerate() {
                                    acc = acc.merge(run_one(sg, buffer_sets.get(gi * per + i)));
                                }
                                acc
                            })
                            .reduce(WorkerResult::default, WorkerResult::merge)
                    };
                    result = result.merge(merged);
                    if buffered {
                        merge_changed = merge_buffers(env, spec, buffer_sets, &mut result.tally);
                    }
                }
            }
        }
        (Some(_), None) => unreachable!("segmented plan executed without prebuilt SSGs"),
    }

    // Merge-time modifications join the output frontier (deduplicated by
    // construction: each vertex merges once per traversal).
    result.out_ids.extend(merge_changed);

    let (frontier, had_duplicates) = if spec.build_frontier {
        let mut ids = std::mem::take(&mut result.out_ids);
        ids.sort_unstable();
        let had = ids.windows(2).any(|w| w[0] == w[1]);
        (Some(Frontier::from_unsorted_ids(env.graph.n, ids)), had)
    } else {
        (None, false)
    };

    TraversalOutput { counters: result.tally, frontier, had_duplicates }
}

/// Representation demanded by a filter tag, if any.
pub fn repr_for_tag(tag: FilterTag) -> Option<Repr> {
    match tag {
        FilterTag::SA => Some(Repr::Sparse),
        FilterTag::BA => Some(Repr::Bool),
        FilterTag::BV => Some(Repr::Bits),
        FilterTag::None => None,
    }
}

/// Which side (src frontier / to-set) maps to which dimension's tag.
pub fn frontier_tags(gis: &GisVector) -> (FilterTag, FilterTag) {
    // Returns (src_side_tag, dst_side_tag).
    if gis.outer.direction == Endpoint::Src {
        (gis.outer.filter, gis.inner.filter)
    } else {
        (gis.inner.filter, gis.outer.filter)
    }
}

/// Resolve the write mode for each vector under a sync plan.
pub fn write_mode_of(kind: SyncKind) -> crate::exec::compile::WriteMode {
    match kind {
        SyncKind::NoSync => crate::exec::compile::WriteMode::Plain,
        SyncKind::AtomicReduction => crate::exec::compile::WriteMode::Atomic,
        SyncKind::LocalBufferMerge => crate::exec::compile::WriteMode::Buffer,
    }
}
