//! Vertex-vector access classification, distance vectors over
//! (OuterIter, InnerIter), and synchronization inference.

use crate::ast::*;
use crate::gis::{Endpoint, GisVector, PlanVariant, VariantKind};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AccessError {
    #[error("vector `{vector}` is both plainly read and written in function `{func}`")]
    MixedAccess { vector: String, func: String },
    #[error("vector `{vector}` uses conflicting reduction operators in function `{func}`")]
    ConflictingReductions { vector: String, func: String },
    #[error("vector `{vector}` is written at more than one endpoint in function `{func}`")]
    MultipleWriteEndpoints { vector: String, func: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReduceKind {
    Sum,
    Min,
    Max,
}

impl ReduceKind {
    pub fn of(op: ReduceOp) -> ReduceKind {
        match op {
            ReduceOp::Sum => ReduceKind::Sum,
            ReduceOp::Min | ReduceOp::AsyncMin => ReduceKind::Min,
            ReduceOp::Max | ReduceOp::AsyncMax => ReduceKind::Max,
        }
    }
}

impl fmt::Display for ReduceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReduceKind::Sum => write!(f, "sum"),
            ReduceKind::Min => write!(f, "min"),
            ReduceKind::Max => write!(f, "max"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessClass {
    ReadOnly,
    WriteOnly,
    Reduction(ReduceKind),
    AsyncReduction(ReduceKind),
}

impl fmt::Display for AccessClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AccessClass::ReadOnly => write!(f, "read-only"),
            AccessClass::WriteOnly => write!(f, "write-only"),
            AccessClass::Reduction(k) => write!(f, "reduction({k})"),
            AccessClass::AsyncReduction(k) => write!(f, "async-reduction({k})"),
        }
    }
}

/// Classified access of one vector within one function.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorAccess {
    pub class: AccessClass,
    /// Parameter index the writes are keyed by (None for read-only).
    pub write_param: Option<usize>,
}

pub type AccessMap = BTreeMap<String, VectorAccess>;

#[derive(Default)]
struct RawAccess {
    read_params: Vec<usize>,
    plain_write_params: Vec<usize>,
    reduce_params: Vec<(ReduceOp, usize)>,
}

fn param_index(func: &FuncDecl, name: &str) -> Option<usize> {
    func.params.iter().position(|p| p.name == name)
}

fn record_expr(func: &FuncDecl, e: &Expr, raw: &mut BTreeMap<String, RawAccess>) {
    match e {
        Expr::VectorIndex { vector, index } => {
            if let Expr::Name(n) = index.as_ref() {
                if let Some(pi) = param_index(func, n) {
                    raw.entry(vector.clone()).or_default().read_params.push(pi);
                }
            }
        }
        Expr::Binary { lhs, rhs, .. } => {
            record_expr(func, lhs, raw);
            record_expr(func, rhs, raw);
        }
        Expr::Neg(x) | Expr::Not(x) | Expr::Fabs(x) => record_expr(func, x, raw),
        _ => {}
    }
}

fn record_stmts(func: &FuncDecl, stmts: &[LStmt], raw: &mut BTreeMap<String, RawAccess>) {
    for s in stmts {
        match &s.stmt {
            Stmt::Assign { target, value } => {
                record_expr(func, value, raw);
                if let LValue::VectorElem { vector, index } = target {
                    if let Expr::Name(n) = index {
                        if let Some(pi) = param_index(func, n) {
                            raw.entry(vector.clone()).or_default().plain_write_params.push(pi);
                        }
                    }
                }
            }
            Stmt::Reduce { target, op, value } => {
                record_expr(func, value, raw);
                if let LValue::VectorElem { vector, index } = target {
                    if let Expr::Name(n) = index {
                        if let Some(pi) = param_index(func, n) {
                            raw.entry(vector.clone()).or_default().reduce_params.push((*op, pi));
                        }
                    }
                }
            }
            Stmt::VarDecl { init, .. } => record_expr(func, init, raw),
            Stmt::If { cond, then_body, else_body } => {
                record_expr(func, cond, raw);
                record_stmts(func, then_body, raw);
                record_stmts(func, else_body, raw);
            }
            _ => {}
        }
    }
}

/// Classify every vertex-vector access in one function.
///
/// A vector may be read at one endpoint while being reduction-updated at the
/// other (level-synchronous accumulation relies on this); a plain write mixed
/// with any read of the same vector is rejected. The restriction is for
/// edgeset apply/filter functions; unary vertex functions access everything
/// through their single parameter and use [`classify_accesses_permissive`].
pub fn classify_accesses(func: &FuncDecl) -> Result<AccessMap, AccessError> {
    let mut raw = BTreeMap::new();
    record_stmts(func, &func.body, &mut raw);

    let mut out = AccessMap::new();
    for (vector, acc) in raw {
        let has_reads = !acc.read_params.is_empty();
        let has_writes = !acc.plain_write_params.is_empty();
        let has_reduces = !acc.reduce_params.is_empty();

        if has_writes && (has_reads || has_reduces) {
            return Err(AccessError::MixedAccess { vector, func: func.name.clone() });
        }

        let entry = if has_reduces {
            let (op0, p0) = acc.reduce_params[0];
            for (op, p) in &acc.reduce_params {
                if ReduceKind::of(*op) != ReduceKind::of(op0) || op.is_async() != op0.is_async() {
                    return Err(AccessError::ConflictingReductions {
                        vector,
                        func: func.name.clone(),
                    });
                }
                if *p != p0 {
                    return Err(AccessError::MultipleWriteEndpoints {
                        vector,
                        func: func.name.clone(),
                    });
                }
            }
            let kind = ReduceKind::of(op0);
            let class = if op0.is_async() {
                AccessClass::AsyncReduction(kind)
            } else {
                AccessClass::Reduction(kind)
            };
            VectorAccess { class, write_param: Some(p0) }
        } else if has_writes {
            let p0 = acc.plain_write_params[0];
            if acc.plain_write_params.iter().any(|p| *p != p0) {
                return Err(AccessError::MultipleWriteEndpoints { vector, func: func.name.clone() });
            }
            VectorAccess { class: AccessClass::WriteOnly, write_param: Some(p0) }
        } else {
            VectorAccess { class: AccessClass::ReadOnly, write_param: None }
        };
        out.insert(vector, entry);
    }
    Ok(out)
}

/// Access map for unary vertex functions: every access goes through the
/// single parameter, so read-plus-write of one vector is ordinary. Writes
/// take precedence over reads in the recorded class.
pub fn classify_accesses_permissive(func: &FuncDecl) -> AccessMap {
    let mut raw = BTreeMap::new();
    record_stmts(func, &func.body, &mut raw);
    let mut out = AccessMap::new();
    for (vector, acc) in raw {
        let entry = if let Some((op, p)) = acc.reduce_params.first() {
            let kind = ReduceKind::of(*op);
            let class = if op.is_async() {
                AccessClass::AsyncReduction(kind)
            } else {
                AccessClass::Reduction(kind)
            };
            VectorAccess { class, write_param: Some(*p) }
        } else if let Some(p) = acc.plain_write_params.first() {
            VectorAccess { class: AccessClass::WriteOnly, write_param: Some(*p) }
        } else {
            VectorAccess { class: AccessClass::ReadOnly, write_param: None }
        };
        out.insert(vector, entry);
    }
    out
}

// ---------------------------------------------------------------------------
// Distance vectors
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dist {
    Zero,
    Star,
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Zero => write!(f, "0"),
            Dist::Star => write!(f, "*"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistanceVector {
    pub outer: Dist,
    pub inner: Dist,
    pub indexed_by: Option<Endpoint>,
}

impl DistanceVector {
    pub fn dump(&self) -> String {
        format!("⟨{},{}⟩", self.outer, self.inner)
    }
}

/// Endpoint a write parameter maps to, given the apply function's arity.
/// Unary (vertex) functions key by whichever endpoint the traversal applies
/// them to; for edge functions param 0 is src and param 1 is dst.
fn endpoint_of_param(p: usize) -> Option<Endpoint> {
    match p {
        0 => Some(Endpoint::Src),
        1 => Some(Endpoint::Dst),
        _ => None,
    }
}

/// Build per-vector distance vectors for one traversal shape.
///
/// A written vector indexed by endpoint `e` carries Star on the dimension
/// whose direction tag differs from `e` and Zero on the matching dimension.
/// When the plan has a parallel S dimension, a vector indexed by the outer
/// endpoint is additionally Star on the outer dimension: the same outer
/// vertex recurs in every concurrent segment.
pub fn distance_vectors(access: &AccessMap, gis: &GisVector) -> BTreeMap<String, DistanceVector> {
    let mut out = BTreeMap::new();
    for (vector, acc) in access {
        let dv = match acc.write_param.and_then(endpoint_of_param) {
            None => DistanceVector { outer: Dist::Zero, inner: Dist::Zero, indexed_by: None },
            Some(e) => {
                let mut outer = if gis.outer.direction == e { Dist::Zero } else { Dist::Star };
                let inner = if gis.inner.direction == e { Dist::Zero } else { Dist::Star };
                if e == gis.outer.direction
                    && gis.ssg.map_or(false, |s| s.parallel.is_parallel())
                {
                    outer = Dist::Star;
                }
                DistanceVector { outer, inner, indexed_by: Some(e) }
            }
        };
        out.insert(vector.clone(), dv);
    }
    out
}

// ---------------------------------------------------------------------------
// Synchronization inference
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncKind {
    NoSync,
    AtomicReduction,
    LocalBufferMerge,
}

impl fmt::Display for SyncKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyncKind::NoSync => write!(f, "none"),
            SyncKind::AtomicReduction => write!(f, "atomic"),
            SyncKind::LocalBufferMerge => write!(f, "local-buffer-merge"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DedupStrategy {
    None,
    VisitedFlagCas,
}

/// Per-variant synchronization decision for one apply function.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncPlan {
    pub per_vector: BTreeMap<String, SyncKind>,
    pub dedup: DedupStrategy,
}

/// Decide synchronization per written vector: Star on a parallelized
/// dimension needs atomics; Star on both parallelized dimensions switches to
/// per-partition buffers with a deterministic merge. Async reductions always
/// go through compare-and-swap regardless of the parallel tags. Reductions
/// keyed by the inner endpoint under inner parallelism are kept atomic even
/// at distance zero, so duplicate edges inside one neighbor list stay safe.
pub fn infer_sync(
    variant: &PlanVariant,
    access: &AccessMap,
    dvs: &BTreeMap<String, DistanceVector>,
    dedup_enabled: bool,
    tracked_vector: Option<&str>,
) -> SyncPlan {
    let gis = &variant.gis;
    let outer_par = gis.outer_parallel();
    let inner_par = gis.inner_parallel();

    let mut per_vector = BTreeMap::new();
    for (vector, acc) in access {
        let kind = match acc.class {
            AccessClass::ReadOnly => SyncKind::NoSync,
            AccessClass::AsyncReduction(_) => SyncKind::AtomicReduction,
            AccessClass::Reduction(_) | AccessClass::WriteOnly => {
                let dv = dvs[vector];
                let outer_hot = dv.outer == Dist::Star && outer_par;
                let inner_hot = dv.inner == Dist::Star && inner_par;
                let dup_hot = inner_par
                    && acc.write_param.and_then(endpoint_of_param) == Some(gis.inner.direction);
                if outer_hot && inner_hot {
                    SyncKind::LocalBufferMerge
                } else if outer_hot || inner_hot || dup_hot {
                    SyncKind::AtomicReduction
                } else {
                    SyncKind::NoSync
                }
            }
        };
        per_vector.insert(vector.clone(), kind);
    }

    let dedup = if tracked_vector.is_some() && dedup_enabled {
        DedupStrategy::VisitedFlagCas
    } else {
        DedupStrategy::None
    };
    SyncPlan { per_vector, dedup }
}

/// `dump-deps` line format: `name  ⟨d_outer,d_inner⟩  class  sync`.
pub fn dump_deps(
    label: &str,
    kind: VariantKind,
    access: &AccessMap,
    dvs: &BTreeMap<String, DistanceVector>,
    sync: &SyncPlan,
) -> String {
    let mut out = format!(
        "{label} [{}]\n",
        match kind {
            VariantKind::SparsePush => "SparsePush",
            VariantKind::DensePush => "DensePush",
            VariantKind::DensePull => "DensePull",
        }
    );
    for (vector, acc) in access {
        let dv = dvs[vector];
        let sync_kind = sync.per_vector[vector];
        out.push_str(&format!("{vector}  {}  {}  {}\n", dv.dump(), acc.class, sync_kind));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gis::{apply_schedule, Mode};
    use crate::parser::{parse_program, parse_schedule};

    const PRDELTA: &str = include_str!("../tests/fixtures/prdelta.gt");

    fn prdelta_access() -> AccessMap {
        let ir = parse_program(PRDELTA).unwrap();
        classify_accesses(ir.func("updateEdge").unwrap()).unwrap()
    }

    #[test]
    fn prdelta_update_edge_classes() {
        let access = prdelta_access();
        assert_eq!(access["DeltaSum"].class, AccessClass::Reduction(ReduceKind::Sum));
        assert_eq!(access["DeltaSum"].write_param, Some(1));
        assert_eq!(access["Delta"].class, AccessClass::ReadOnly);
        assert_eq!(access["OutDegree"].class, AccessClass::ReadOnly);
    }

    #[test]
    fn plain_read_plus_write_is_mixed() {
        let src = r#"
element Vertex end
element Edge end
const edges : edgeset{Edge}(Vertex,Vertex) = load(argv[1]);
x : vector{Vertex}(int) = 0;
func bad(src : Vertex, dst : Vertex)
    x[dst] = x[src] + 1;
end
func main() end
"#;
        let ir = parse_program(src).unwrap();
        let err = classify_accesses(ir.func("bad").unwrap()).unwrap_err();
        assert_eq!(err, AccessError::MixedAccess { vector: "x".into(), func: "bad".into() });
    }

    #[test]
    fn async_min_classifies_as_async_reduction() {
        let src = r#"
element Vertex end
element Edge end
const edges : edgeset{Edge}(Vertex,Vertex) = load(argv[1]);
IDs : vector{Vertex}(int) = 1;
func updateEdge(src : Vertex, dst : Vertex)
    IDs[dst] asyncMin= IDs[src];
end
func main() end
"#;
        let ir = parse_program(src).unwrap();
        let access = classify_accesses(ir.func("updateEdge").unwrap()).unwrap();
        assert_eq!(access["IDs"].class, AccessClass::AsyncReduction(ReduceKind::Min));
    }

    #[test]
    fn function_with_no_vectors() {
        let src = r#"
element Vertex end
element Edge end
const edges : edgeset{Edge}(Vertex,Vertex) = load(argv[1]);
func f(src : Vertex, dst : Vertex) end
func main() end
"#;
        let ir = parse_program(src).unwrap();
        assert!(classify_accesses(ir.func("f").unwrap()).unwrap().is_empty());
    }

    fn variant_for(schedule: &str) -> Vec<PlanVariant> {
        let ir = parse_program(PRDELTA).unwrap();
        let sched = parse_schedule(schedule).unwrap();
        let lowered = apply_schedule(&ir, &sched, Mode::Strict).unwrap();
        lowered.plans.iter().find(|p| p.label == "s1").unwrap().variants.clone()
    }

    #[test]
    fn push_distance_vectors() {
        let access = prdelta_access();
        let variants = variant_for("");
        let dvs = distance_vectors(&access, &variants[0].gis);
        assert_eq!((dvs["DeltaSum"].outer, dvs["DeltaSum"].inner), (Dist::Star, Dist::Zero));
        assert_eq!((dvs["Delta"].outer, dvs["Delta"].inner), (Dist::Zero, Dist::Zero));
        assert_eq!((dvs["OutDegree"].outer, dvs["OutDegree"].inner), (Dist::Zero, Dist::Zero));
    }

    #[test]
    fn pull_distance_vectors() {
        let access = prdelta_access();
        let variants = variant_for(r#"program->configApplyDirection("s1","DensePull");"#);
        let dvs = distance_vectors(&access, &variants[0].gis);
        assert_eq!((dvs["DeltaSum"].outer, dvs["DeltaSum"].inner), (Dist::Zero, Dist::Star));
    }

    #[test]
    fn sync_push_parallel_is_atomic() {
        let access = prdelta_access();
        let variants = variant_for(
            r#"program->configApplyParallelization("s1","dynamic-vertex-parallel");"#,
        );
        let dvs = distance_vectors(&access, &variants[0].gis);
        let sync = infer_sync(&variants[0], &access, &dvs, false, None);
        assert_eq!(sync.per_vector["DeltaSum"], SyncKind::AtomicReduction);
        assert_eq!(sync.per_vector["Delta"], SyncKind::NoSync);
    }

    #[test]
    fn sync_pull_parallel_needs_nothing() {
        let access = prdelta_access();
        let variants = variant_for(
            r#"program->configApplyDirection("s1","DensePull")
                      ->configApplyParallelization("s1","dynamic-vertex-parallel");"#,
        );
        let dvs = distance_vectors(&access, &variants[0].gis);
        let sync = infer_sync(&variants[0], &access, &dvs, false, None);
        assert_eq!(sync.per_vector["DeltaSum"], SyncKind::NoSync);
    }

    #[test]
    fn sync_pull_segment_parallel_uses_buffers() {
        let access = prdelta_access();
        let variants = variant_for(
            r#"program->configApplyDirection("s1","DensePull")
                      ->configApplyParallelization("s1","dynamic-vertex-parallel")
                      ->configApplyNumSSG("s1","fixed-vertex-count",4)
                      ->configApplyNUMA("s1","static-parallel");"#,
        );
        let dvs = distance_vectors(&access, &variants[0].gis);
        assert_eq!((dvs["DeltaSum"].outer, dvs["DeltaSum"].inner), (Dist::Star, Dist::Star));
        let sync = infer_sync(&variants[0], &access, &dvs, false, None);
        assert_eq!(sync.per_vector["DeltaSum"], SyncKind::LocalBufferMerge);
    }

    #[test]
    fn edge_parallel_pull_is_atomic() {
        let access = prdelta_access();
        let variants = variant_for(
            r#"program->configApplyDirection("s1","DensePull")
                      ->configApplyParallelization("s1","edge-parallel");"#,
        );
        let dvs = distance_vectors(&access, &variants[0].gis);
        let sync = infer_sync(&variants[0], &access, &dvs, false, None);
        assert_eq!(sync.per_vector["DeltaSum"], SyncKind::AtomicReduction);
    }
}
