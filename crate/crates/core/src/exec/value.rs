//! Runtime values and vertex-vector storage.
//!
//! Every vector element lives in a 64-bit atomic cell (i64, f64 bit pattern,
//! or 0/1 bool). Relaxed loads and stores compile to plain moves, so serial
//! code pays nothing; parallel traversals pick plain or compare-and-swap
//! access per the inferred sync plan. Fused vectors share one interleaved
//! buffer (array of records); the slot's stride and offset route every
//! access through the record layout.

use crate::ast::ScalarType;
use crate::deps::ReduceKind;
use crate::gis::{LayoutBucket, LayoutPlan};
use std::sync::atomic::{AtomicU64, Ordering};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RtVal {
    Int(i64),
    Double(f64),
    Bool(bool),
}

impl RtVal {
    pub fn zero(ty: ScalarType) -> RtVal {
        match ty {
            ScalarType::Int => RtVal::Int(0),
            ScalarType::Double => RtVal::Double(0.0),
            ScalarType::Bool => RtVal::Bool(false),
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            RtVal::Int(v) => v,
            RtVal::Double(v) => v as i64,
            RtVal::Bool(b) => b as i64,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            RtVal::Int(v) => v as f64,
            RtVal::Double(v) => v,
            RtVal::Bool(b) => b as i64 as f64,
        }
    }

    pub fn as_bool(self) -> bool {
        match self {
            RtVal::Bool(b) => b,
            RtVal::Int(v) => v != 0,
            RtVal::Double(v) => v != 0.0,
        }
    }

    pub fn to_bits(self, ty: ScalarType) -> u64 {
        match ty {
            ScalarType::Int => self.as_i64() as u64,
            ScalarType::Double => self.as_f64().to_bits(),
            ScalarType::Bool => self.as_bool() as u64,
        }
    }

    pub fn from_bits(bits: u64, ty: ScalarType) -> RtVal {
        match ty {
            ScalarType::Int => RtVal::Int(bits as i64),
            ScalarType::Double => RtVal::Double(f64::from_bits(bits)),
            ScalarType::Bool => RtVal::Bool(bits != 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotId(pub usize);

#[derive(Debug, Clone)]
pub struct Slot {
    pub name: String,
    pub ty: ScalarType,
    pub buffer: usize,
    pub offset: usize,
    pub stride: usize,
}

/// Identity element of a reduction over the given scalar type, as bits.
pub fn reduce_identity(op: ReduceKind, ty: ScalarType) -> u64 {
    let v = match (op, ty) {
        (ReduceKind::Sum, ScalarType::Double) => RtVal::Double(0.0),
        (ReduceKind::Sum, _) => RtVal::Int(0),
        (ReduceKind::Min, ScalarType::Double) => RtVal::Double(f64::INFINITY),
        (ReduceKind::Min, _) => RtVal::Int(i64::MAX),
        (ReduceKind::Max, ScalarType::Double) => RtVal::Double(f64::NEG_INFINITY),
        (ReduceKind::Max, _) => RtVal::Int(i64::MIN),
    };
    v.to_bits(ty)
}

pub fn combine(op: ReduceKind, ty: ScalarType, a: u64, b: u64) -> u64 {
    let (a, b) = (RtVal::from_bits(a, ty), RtVal::from_bits(b, ty));
    let out = match (op, ty) {
        (ReduceKind::Sum, ScalarType::Double) => RtVal::Double(a.as_f64() + b.as_f64()),
        (ReduceKind::Sum, _) => RtVal::Int(a.as_i64().wrapping_add(b.as_i64())),
        (ReduceKind::Min, ScalarType::Double) => RtVal::Double(a.as_f64().min(b.as_f64())),
        (ReduceKind::Min, _) => RtVal::Int(a.as_i64().min(b.as_i64())),
        (ReduceKind::Max, ScalarType::Double) => RtVal::Double(a.as_f64().max(b.as_f64())),
        (ReduceKind::Max, _) => RtVal::Int(a.as_i64().max(b.as_i64())),
    };
    out.to_bits(ty)
}

/// Would `b` improve on `a` under the reduction? (For min/max: strict
/// improvement; for sum: any nonzero contribution.)
fn improves(op: ReduceKind, ty: ScalarType, a: u64, b: u64) -> bool {
    combine(op, ty, a, b) != a
}

pub struct VectorStore {
    buffers: Vec<Vec<AtomicU64>>,
    slots: Vec<Slot>,
    pub n: usize,
}

impl VectorStore {
    /// Lay out the named vectors per the layout plan. Declaration order of
    /// `vectors` fixes slot ids.
    pub fn build(vectors: &[(String, ScalarType)], layout: &LayoutPlan, n: usize) -> VectorStore {
        let mut buffers: Vec<Vec<AtomicU64>> = Vec::new();
        // One interleaved buffer per fused group, allocated up front.
        let mut group_buffer = Vec::new();
        for g in &layout.groups {
            group_buffer.push(buffers.len());
            let stride = g.members.len();
            buffers.push((0..n * stride).map(|_| AtomicU64::new(0)).collect());
        }
        let mut slots = Vec::new();
        for (name, ty) in vectors {
            let slot = match layout.bucket_of(name) {
                LayoutBucket::Soa => {
                    let buffer = buffers.len();
                    buffers.push((0..n).map(|_| AtomicU64::new(0)).collect());
                    Slot { name: name.clone(), ty: *ty, buffer, offset: 0, stride: 1 }
                }
                LayoutBucket::Aos { group, slot } => Slot {
                    name: name.clone(),
                    ty: *ty,
                    buffer: group_buffer[group],
                    offset: slot,
                    stride: layout.groups[group].members.len(),
                },
            };
            slots.push(slot);
        }
        VectorStore { buffers, slots, n }
    }

    pub fn slot_id(&self, name: &str) -> Option<SlotId> {
        self.slots.iter().position(|s| s.name == name).map(SlotId)
    }

    pub fn slot(&self, id: SlotId) -> &Slot {
        &self.slots[id.0]
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    #[inline]
    fn cell(&self, id: SlotId, v: usize) -> &AtomicU64 {
        let s = &self.slots[id.0];
        &self.buffers[s.buffer][v * s.stride + s.offset]
    }

    #[inline]
    pub fn load(&self, id: SlotId, v: usize) -> u64 {
        self.cell(id, v).load(Ordering::Relaxed)
    }

    #[inline]
    pub fn get(&self, id: SlotId, v: usize) -> RtVal {
        RtVal::from_bits(self.load(id, v), self.slots[id.0].ty)
    }

    /// Plain store. Returns whether the stored bits differ from the old ones.
    #[inline]
    pub fn store(&self, id: SlotId, v: usize, val: RtVal) -> bool {
        let ty = self.slots[id.0].ty;
        let bits = val.to_bits(ty);
        let old = self.load(id, v);
        self.cell(id, v).store(bits, Ordering::Relaxed);
        old != bits
    }

    /// Unconditional atomic exchange; returns whether the value changed.
    #[inline]
    pub fn swap(&self, id: SlotId, v: usize, val: RtVal) -> bool {
        let ty = self.slots[id.0].ty;
        let bits = val.to_bits(ty);
        self.cell(id, v).swap(bits, Ordering::Relaxed) != bits
    }

    /// Claim `expected -> val` with a single compare-and-swap.
    #[inline]
    pub fn cas_claim(&self, id: SlotId, v: usize, expected: u64, val: RtVal) -> bool {
        let ty = self.slots[id.0].ty;
        self.cell(id, v)
            .compare_exchange(expected, val.to_bits(ty), Ordering::Relaxed, Ordering::Relaxed)
            .is_ok()
    }

    /// Serial reduction. Returns whether the cell changed.
    #[inline]
    pub fn reduce_plain(&self, id: SlotId, v: usize, op: ReduceKind, val: RtVal) -> bool {
        let ty = self.slots[id.0].ty;
        let cell = self.cell(id, v);
        let old = cell.load(Ordering::Relaxed);
        let new = combine(op, ty, old, val.to_bits(ty));
        if new != old {
            cell.store(new, Ordering::Relaxed);
            true
        } else {
            false
        }
    }

    /// Atomic reduction (CAS loop on the bit pattern). Returns
    /// (changed, cas_attempts).
    #[inline]
    pub fn reduce_atomic(&self, id: SlotId, v: usize, op: ReduceKind, val: RtVal) -> (bool, u64) {
        let ty = self.slots[id.0].ty;
        let bits = val.to_bits(ty);
        let cell = self.cell(id, v);
        let mut attempts = 0u64;
        let mut old = cell.load(Ordering::Relaxed);
        loop {
            if !improves(op, ty, old, bits) {
                return (false, attempts);
            }
            let new = combine(op, ty, old, bits);
            attempts += 1;
            match cell.compare_exchange_weak(old, new, Ordering::Relaxed, Ordering::Relaxed) {
                Ok(_) => return (true, attempts),
                Err(cur) => old = cur,
            }
        }
    }

    /// Fill a slot with a constant (initialization path).
    pub fn fill(&self, id: SlotId, val: RtVal) {
        let ty = self.slots[id.0].ty;
        let bits = val.to_bits(ty);
        for v in 0..self.n {
            self.cell(id, v).store(bits, Ordering::Relaxed);
        }
    }
}

/// Per-segment accumulation buffers used by local-buffer-merge sync.
pub struct SegmentBuffer {
    pub slot: SlotId,
    pub op: ReduceKind,
    pub ty: ScalarType,
    pub cells: Vec<AtomicU64>,
}

impl SegmentBuffer {
    pub fn new(slot: SlotId, op: ReduceKind, ty: ScalarType, n: usize) -> SegmentBuffer {
        let ident = reduce_identity(op, ty);
        SegmentBuffer {
            slot,
            op,
            ty,
            cells: (0..n).map(|_| AtomicU64::new(ident)).collect(),
        }
    }

    #[inline]
    pub fn reduce_plain(&self, v: usize, val: RtVal) {
        let cell = &self.cells[v];
        let old = cell.load(Ordering::Relaxed);
        cell.store(combine(self.op, self.ty, old, val.to_bits(self.ty)), Ordering::Relaxed);
    }

    #[inline]
    pub fn reduce_atomic(&self, v: usize, val: RtVal) -> u64 {
        let bits = val.to_bits(self.ty);
        let cell = &self.cells[v];
        let mut attempts = 0u64;
        let mut old = cell.load(Ordering::Relaxed);
        loop {
            let new = combine(self.op, self.ty, old, bits);
            if new == old {
                return attempts;
            }
            attempts += 1;
            match cell.compare_exchange_weak(old, new, Ordering::Relaxed, Ordering::Relaxed) {
                Ok(_) => return attempts,
                Err(cur) => old = cur,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gis::FusedGroup;

    #[test]
    fn fused_layout_interleaves() {
        let layout = LayoutPlan {
            groups: vec![FusedGroup {
                element: "Vertex".into(),
                members: vec!["a".into(), "b".into()],
            }],
        };
        let store = VectorStore::build(
            &[
                ("a".into(), ScalarType::Double),
                ("b".into(), ScalarType::Int),
                ("c".into(), ScalarType::Int),
            ],
            &layout,
            4,
        );
        let a = store.slot_id("a").unwrap();
        let b = store.slot_id("b").unwrap();
        let c = store.slot_id("c").unwrap();
        assert_eq!(store.slot(a).buffer, store.slot(b).buffer);
        assert_eq!(store.slot(a).stride, 2);
        assert_ne!(store.slot(a).buffer, store.slot(c).buffer);
        store.store(a, 2, RtVal::Double(1.5));
        store.store(b, 2, RtVal::Int(7));
        assert_eq!(store.get(a, 2), RtVal::Double(1.5));
        assert_eq!(store.get(b, 2), RtVal::Int(7));
        assert_eq!(store.get(a, 1), RtVal::Double(0.0));
    }

    #[test]
    fn atomic_min_reports_change() {
        let store = VectorStore::build(&[("x".into(), ScalarType::Int)], &LayoutPlan::default(), 2);
        let x = store.slot_id("x").unwrap();
        store.store(x, 0, RtVal::Int(10));
        let (changed, _) = store.reduce_atomic(x, 0, ReduceKind::Min, RtVal::Int(3));
        assert!(changed);
        let (changed, _) = store.reduce_atomic(x, 0, ReduceKind::Min, RtVal::Int(5));
        assert!(!changed);
        assert_eq!(store.get(x, 0), RtVal::Int(3));
    }

    #[test]
    fn float_sum_cas_loop() {
        let store =
            VectorStore::build(&[("x".into(), ScalarType::Double)], &LayoutPlan::default(), 1);
        let x = store.slot_id("x").unwrap();
        let (changed, _) = store.reduce_atomic(x, 0, ReduceKind::Sum, RtVal::Double(0.5));
        assert!(changed);
        let (changed, _) = store.reduce_atomic(x, 0, ReduceKind::Sum, RtVal::Double(0.0));
        assert!(!changed);
        assert_eq!(store.get(x, 0), RtVal::Double(0.5));
    }
}
