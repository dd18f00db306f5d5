//! Graph iteration space: four-dimensional traversal descriptors with tags,
//! lowering of schedules onto the IR, and the dump notation
//! `⟨S[..], B[..], O[..], I[..]⟩`.

use crate::ast::*;
use crate::labels::{self, LabelError};
use crate::transforms::{self, TransformError};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GisError {
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("invalid combination: {0}")]
    InvalidCombination(String),
    #[error("`{0}` does not name an edgeset apply statement")]
    NotAnApplyStatement(String),
    #[error("unknown vector `{0}` in fuseFields")]
    UnknownVector(String),
    #[error("vector `{0}` is already in a fused group")]
    AlreadyFused(String),
    #[error("fuseFields vectors have mixed element kinds ({0} vs {1})")]
    MixedElementKinds(String, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParallelTag {
    SR,
    SP,
    WSP,
}

impl ParallelTag {
    pub fn is_parallel(self) -> bool {
        !matches!(self, ParallelTag::SR)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ParallelTag::SR => "SR",
            ParallelTag::SP => "SP",
            ParallelTag::WSP => "WSP",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterTag {
    SA,
    BA,
    BV,
    None,
}

impl FilterTag {
    pub fn is_dense(self) -> bool {
        matches!(self, FilterTag::BA | FilterTag::BV)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Src,
    Dst,
}

impl Endpoint {
    pub fn as_str(self) -> &'static str {
        match self {
            Endpoint::Src => "src",
            Endpoint::Dst => "dst",
        }
    }

    pub fn other(self) -> Endpoint {
        match self {
            Endpoint::Src => Endpoint::Dst,
            Endpoint::Dst => Endpoint::Src,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterCfg {
    pub direction: Endpoint,
    pub parallel: ParallelTag,
    pub filter: FilterTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BsgCfg {
    pub parallel: ParallelTag,
    pub scheme: PartitionScheme,
    pub grain: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SsgCfg {
    pub parallel: ParallelTag,
    pub scheme: PartitionScheme,
    pub num_segments: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GisVector {
    pub ssg: Option<SsgCfg>,
    pub bsg: Option<BsgCfg>,
    pub outer: IterCfg,
    pub inner: IterCfg,
}

impl GisVector {
    /// Is the outer dimension effectively parallel (directly or through B)?
    pub fn outer_parallel(&self) -> bool {
        self.outer.parallel.is_parallel()
            || self.bsg.map_or(false, |b| b.parallel.is_parallel())
    }

    /// Is the inner dimension effectively parallel (directly or through S)?
    pub fn inner_parallel(&self) -> bool {
        self.inner.parallel.is_parallel()
            || self.ssg.map_or(false, |s| s.parallel.is_parallel())
    }
}

/// One runnable traversal shape. Hybrid plans hold two, dense first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VariantKind {
    SparsePush,
    DensePush,
    DensePull,
}

impl VariantKind {
    pub fn push(self) -> bool {
        !matches!(self, VariantKind::DensePull)
    }

    pub fn qualifier(self) -> DirectionQualifier {
        match self {
            VariantKind::SparsePush => DirectionQualifier::SparsePush,
            VariantKind::DensePush => DirectionQualifier::DensePush,
            VariantKind::DensePull => DirectionQualifier::DensePull,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanVariant {
    pub kind: VariantKind,
    pub gis: GisVector,
}

/// Lowered execution descriptor for one edgeset-apply statement.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionPlan {
    pub stmt: StmtId,
    /// Scoped label path, or a synthетic placeholder for unlabeled statements.
    pub label: String,
    /// One variant, or two for hybrid directions (dense listed first).
    pub variants: Vec<PlanVariant>,
    pub hybrid: bool,
    pub dedup_enabled: bool,
    pub tracked_vector: Option<String>,
    pub apply_func: String,
    pub src_filter: Option<String>,
    pub dst_filter: Option<String>,
    pub edge_filter: Option<String>,
    pub has_from: bool,
    pub has_to: bool,
    pub returns_frontier: bool,
}

impl ExecutionPlan {
    pub fn variant(&self, kind: VariantKind) -> Option<&PlanVariant> {
        self.variants.iter().find(|v| v.kind == kind)
    }
}

/// Per-vector data layout: its own array (SoA) or a slot in a fused record
/// array (AoS).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayoutPlan {
    pub groups: Vec<FusedGroup>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusedGroup {
    pub element: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayoutBucket {
    Soa,
    Aos { group: usize, slot: usize },
}

impl LayoutPlan {
    pub fn bucket_of(&self, vector: &str) -> LayoutBucket {
        for (gi, g) in self.groups.iter().enumerate() {
            if let Some(si) = g.members.iter().position(|m| m == vector) {
                return LayoutBucket::Aos { group: gi, slot: si };
            }
        }
        LayoutBucket::Soa
    }

    pub fn fuse_fields(&mut self, ir: &ProgramIR, vectors: &[String]) -> Result<(), GisError> {
        let mut element: Option<String> = None;
        for v in vectors {
            let decl = ir.vector(v).ok_or_else(|| GisError::UnknownVector(v.clone()))?;
            if self.bucket_of(v) != LayoutBucket::Soa {
                return Err(GisError::AlreadyFused(v.clone()));
            }
            match &element {
                None => element = Some(decl.element.clone()),
                Some(e) if *e != decl.element => {
                    return Err(GisError::MixedElementKinds(e.clone(), decl.element.clone()))
                }
                _ => {}
            }
        }
        self.groups.push(FusedGroup { element: element.unwrap(), members: vectors.to_vec() });
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Strict,
    Lenient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoweredProgram {
    pub ir: ProgramIR,
    pub plans: Vec<ExecutionPlan>,
    pub layout: LayoutPlan,
    /// Calls ignored in lenient mode, with the reason each was dropped.
    pub dropped_calls: Vec<(SchedulingCall, String)>,
}

impl LoweredProgram {
    pub fn plan_for(&self, stmt: StmtId) -> Option<&ExecutionPlan> {
        self.plans.iter().find(|p| p.stmt == stmt)
    }
}

/// Default grain size when parallelization is configured without one.
pub const DEFAULT_GRAIN: u64 = 256;

fn default_variant(kind: VariantKind, chain: &ApplyChain) -> PlanVariant {
    let has_src_filter = chain.from.is_some() || chain.src_filter.is_some();
    let has_dst_filter = chain.to.is_some() || chain.dst_filter.is_some();
    let gis = match kind {
        VariantKind::SparsePush => GisVector {
            ssg: None,
            bsg: None,
            outer: IterCfg { direction: Endpoint::Src, parallel: ParallelTag::SR, filter: FilterTag::SA },
            inner: IterCfg {
                direction: Endpoint::Dst,
                parallel: ParallelTag::SR,
                filter: if has_dst_filter { FilterTag::BA } else { FilterTag::None },
            },
        },
        VariantKind::DensePush => GisVector {
            ssg: None,
            bsg: None,
            outer: IterCfg { direction: Endpoint::Src, parallel: ParallelTag::SR, filter: FilterTag::BA },
            inner: IterCfg {
                direction: Endpoint::Dst,
                parallel: ParallelTag::SR,
                filter: if has_dst_filter { FilterTag::BA } else { FilterTag::None },
            },
        },
        VariantKind::DensePull => GisVector {
            ssg: None,
            bsg: None,
            outer: IterCfg {
                direction: Endpoint::Dst,
                parallel: ParallelTag::SR,
                filter: if has_dst_filter { FilterTag::BA } else { FilterTag::None },
            },
            inner: IterCfg {
                direction: Endpoint::Src,
                parallel: ParallelTag::SR,
                filter: if has_src_filter { FilterTag::BA } else { FilterTag::None },
            },
        },
    };
    PlanVariant { kind, gis }
}

/// The default plan: serial SparsePush, dedup on for `applyModified`.
pub fn default_plan(ir: &ProgramIR, stmt: &LStmt) -> Option<ExecutionPlan> {
    let chain = match &stmt.stmt {
        Stmt::ExprStmt(Expr::EdgesetApply(c)) => c,
        Stmt::Assign { value: Expr::EdgesetApply(c), .. } => c,
        _ => return None,
    };
    let label = labels::path_of(ir, stmt.id).unwrap_or_else(|| format!("<stmt{}>", stmt.id.0));
    Some(ExecutionPlan {
        stmt: stmt.id,
        label,
        variants: vec![default_variant(VariantKind::SparsePush, chain)],
        hybrid: false,
        dedup_enabled: chain.dedup_enabled(),
        tracked_vector: chain.tracked_vector().map(str::to_string),
        apply_func: chain.apply_func().to_string(),
        src_filter: chain.src_filter.clone(),
        dst_filter: chain.dst_filter.clone(),
        edge_filter: chain.edge_filter.clone(),
        has_from: chain.from.is_some(),
        has_to: chain.to.is_some(),
        returns_frontier: chain.tracked_vector().is_some(),
    })
}

fn collect_default_plans(ir: &ProgramIR) -> Vec<ExecutionPlan> {
    let mut plans = Vec::new();
    ir.visit_main(&mut |_, stmt| {
        if let Some(p) = default_plan(ir, stmt) {
            plans.push(p);
        }
    });
    plans
}

struct Lowering<'a> {
    ir: &'a ProgramIR,
    plans: Vec<ExecutionPlan>,
    mode: Mode,
    dropped: Vec<(SchedulingCall, String)>,
}

impl<'a> Lowering<'a> {
    /// Strict mode surfaces the error; lenient mode records the dropped call.
    fn reject(&mut self, call: &SchedulingCall, why: String) -> Result<(), GisError> {
        match self.mode {
            Mode::Strict => Err(GisError::InvalidCombination(why)),
            Mode::Lenient => {
                self.dropped.push((call.clone(), why));
                Ok(())
            }
        }
    }

    fn plan_mut(&mut self, target: &str) -> Result<&mut ExecutionPlan, GisError> {
        let id = labels::resolve_label(self.ir, target)?;
        self.plans
            .iter_mut()
            .find(|p| p.stmt == id)
            .ok_or_else(|| GisError::NotAnApplyStatement(target.to_string()))
    }

    fn chain_for(&self, target: &str) -> Result<&'a ApplyChain, GisError> {
        let id = labels::resolve_label(self.ir, target)?;
        let stmt = labels::find_stmt(self.ir, id)
            .ok_or_else(|| LabelError::NotFound(target.to_string()))?;
        match &stmt.stmt {
            Stmt::ExprStmt(Expr::EdgesetApply(c)) => Ok(c),
            Stmt::Assign { value: Expr::EdgesetApply(c), .. } => Ok(c),
            _ => Err(GisError::NotAnApplyStatement(target.to_string())),
        }
    }

    fn apply(&mut self, call: &SchedulingCall) -> Result<(), GisError> {
        match call {
            SchedulingCall::ConfigApplyDirection { target, direction } => {
                let chain = self.chain_for(target)?;
                let plan = self.plan_mut(target)?;
                let variants = match direction {
                    DirectionOption::SparsePush => {
                        vec![default_variant(VariantKind::SparsePush, chain)]
                    }
                    DirectionOption::DensePush => {
                        vec![default_variant(VariantKind::DensePush, chain)]
                    }
                    DirectionOption::DensePull => {
                        vec![default_variant(VariantKind::DensePull, chain)]
                    }
                    DirectionOption::DensePullSparsePush => vec![
                        default_variant(VariantKind::DensePull, chain),
                        default_variant(VariantKind::SparsePush, chain),
                    ],
                    DirectionOption::DensePushSparsePush => vec![
                        default_variant(VariantKind::DensePush, chain),
                        default_variant(VariantKind::SparsePush, chain),
                    ],
                };
                plan.variants = variants;
                plan.hybrid = direction.is_hybrid();
                Ok(())
            }
            SchedulingCall::ConfigApplyParallelization { target, option, grain_size, direction } => {
                let grain = grain_size.unwrap_or(DEFAULT_GRAIN);
                let mode = self.mode;
                let plan = self.plan_mut(target)?;
                let targets = select_variants(plan, *direction);
                if targets.is_empty() {
                    let why = qualifier_miss(target, *direction);
                    return self.reject(call, why);
                }
                let mut conflict = None;
                for idx in targets {
                    let v = &mut plan.variants[idx];
                    match option {
                        ParallelOption::Serial => {
                            v.gis.bsg = None;
                            v.gis.outer.parallel = ParallelTag::SR;
                            v.gis.inner.parallel = ParallelTag::SR;
                        }
                        ParallelOption::DynamicVertexParallel
                        | ParallelOption::StaticVertexParallel
                        | ParallelOption::EdgeAwareDynamicVertexParallel => {
                            let (par, scheme) = match option {
                                ParallelOption::DynamicVertexParallel => {
                                    (ParallelTag::WSP, PartitionScheme::FixedVertexCount)
                                }
                                ParallelOption::StaticVertexParallel => {
                                    (ParallelTag::SP, PartitionScheme::FixedVertexCount)
                                }
                                _ => (ParallelTag::WSP, PartitionScheme::EdgeAwareVertexCount),
                            };
                            if let Some(b) = v.gis.bsg {
                                if b.parallel != par && mode == Mode::Strict {
                                    conflict = Some(format!(
                                        "two parallel tags requested for the B dimension of `{target}`"
                                    ));
                                }
                            }
                            v.gis.bsg = Some(BsgCfg { parallel: par, scheme, grain });
                            v.gis.inner.parallel = ParallelTag::SR;
                        }
                        ParallelOption::EdgeParallel => {
                            v.gis.bsg = None;
                            v.gis.inner.parallel = ParallelTag::WSP;
                        }
                    }
                }
                if let Some(why) = conflict {
                    return self.reject(call, why);
                }
                Ok(())
            }
            SchedulingCall::ConfigApplyDenseVertexSet { target, side, layout, direction } => {
                let plan = self.plan_mut(target)?;
                let targets = select_variants(plan, *direction);
                if targets.is_empty() {
                    let why = qualifier_miss(target, *direction);
                    return self.reject(call, why);
                }
                let tag = match layout {
                    DenseLayout::BoolArray => FilterTag::BA,
                    DenseLayout::Bitvector => FilterTag::BV,
                };
                for idx in targets {
                    let v = &mut plan.variants[idx];
                    let dims = [&mut v.gis.outer, &mut v.gis.inner];
                    for dim in dims {
                        let wanted = match side {
                            VertexsetSide::Both => dim.filter.is_dense(),
                            VertexsetSide::Src => dim.direction == Endpoint::Src,
                            VertexsetSide::Dst => dim.direction == Endpoint::Dst,
                        };
                        if wanted && dim.filter.is_dense() {
                            dim.filter = tag;
                        }
                    }
                }
                Ok(())
            }
            SchedulingCall::ConfigApplyNumSSG { target, scheme, num_segments, direction } => {
                let plan = self.plan_mut(target)?;
                let targets = select_variants(plan, *direction);
                if targets.is_empty() {
                    let why = qualifier_miss(target, *direction);
                    return self.reject(call, why);
                }
                for idx in targets {
                    plan.variants[idx].gis.ssg = Some(SsgCfg {
                        parallel: ParallelTag::SR,
                        scheme: *scheme,
                        num_segments: *num_segments,
                    });
                }
                Ok(())
            }
            SchedulingCall::ConfigApplyNuma { target, option, direction } => {
                let plan = self.plan_mut(target)?;
                let targets = select_variants(plan, *direction);
                if targets.is_empty() {
                    let why = qualifier_miss(target, *direction);
                    return self.reject(call, why);
                }
                let tag = match option {
                    NumaOption::Serial => ParallelTag::SR,
                    NumaOption::StaticParallel => ParallelTag::SP,
                    NumaOption::DynamicParallel => ParallelTag::WSP,
                };
                let mut missing = None;
                for idx in &targets {
                    if plan.variants[*idx].gis.ssg.is_none() {
                        missing = Some(format!(
                            "configApplyNUMA on `{target}` requires an S dimension (configApplyNumSSG first)"
                        ));
                    }
                }
                if let Some(why) = missing {
                    return self.reject(call, why);
                }
                for idx in targets {
                    plan.variants[idx].gis.ssg.as_mut().unwrap().parallel = tag;
                }
                Ok(())
            }
            SchedulingCall::FuseFields { .. }
            | SchedulingCall::FuseForLoop { .. }
            | SchedulingCall::FuseApplyFunctions { .. }
            | SchedulingCall::SplitForLoop { .. } => unreachable!("transform calls run in pass 1"),
        }
    }
}

fn qualifier_miss(target: &str, direction: Option<DirectionQualifier>) -> String {
    match direction {
        Some(d) => format!("direction qualifier `{}` names a direction absent from plan `{target}`", d.as_str()),
        None => format!("plan `{target}` has no variants"),
    }
}

fn select_variants(plan: &ExecutionPlan, qualifier: Option<DirectionQualifier>) -> Vec<usize> {
    match qualifier {
        None => (0..plan.variants.len()).collect(),
        Some(q) => plan
            .variants
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind.qualifier() == q)
            .map(|(i, _)| i)
            .collect(),
    }
}

/// Lower a schedule onto a program: run transform calls in schedule order,
/// build default plans for every edgeset apply in the transformed IR, then
/// resolve configApply* calls in order against it.
pub fn apply_schedule(
    ir: &ProgramIR,
    schedule: &Schedule,
    mode: Mode,
) -> Result<LoweredProgram, GisError> {
    let mut ir = ir.clone();
    let mut layout = LayoutPlan::default();
    let mut dropped = Vec::new();

    for call in schedule.calls.iter().filter(|c| c.is_transform()) {
        let result = match call {
            SchedulingCall::FuseFields { vectors } => layout.fuse_fields(&ir, vectors),
            SchedulingCall::FuseForLoop { first, second, fused_label } => {
                transforms::fuse_for_loops(&mut ir, first, second, fused_label).map_err(Into::into)
            }
            SchedulingCall::FuseApplyFunctions { first, second, fused_func } => {
                transforms::fuse_apply_functions(&mut ir, first, second, fused_func)
                    .map_err(Into::into)
            }
            SchedulingCall::SplitForLoop { target, first_label, second_label, split_point } => {
                transforms::split_for_loop(&mut ir, target, first_label, second_label, *split_point)
                    .map_err(Into::into)
            }
            _ => unreachable!(),
        };
        if let Err(e) = result {
            match mode {
                Mode::Strict => return Err(e),
                Mode::Lenient => dropped.push((call.clone(), e.to_string())),
            }
        }
    }

    let plans = collect_default_plans(&ir);
    let mut lowering = Lowering { ir: &ir, plans, mode, dropped };
    for call in schedule.calls.iter().filter(|c| !c.is_transform()) {
        if let Err(e) = lowering.apply(call) {
            match mode {
                Mode::Strict => return Err(e),
                Mode::Lenient => lowering.dropped.push((call.clone(), e.to_string())),
            }
        }
    }
    let Lowering { plans, dropped, .. } = lowering;
    Ok(LoweredProgram { ir, plans, layout, dropped_calls: dropped })
}

// ---------------------------------------------------------------------------
// Dump notation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpStyle {
    Unicode,
    Ascii,
}

fn fmt_iter(name: char, cfg: &IterCfg, out: &mut String) {
    out.push(name);
    out.push('[');
    out.push_str(cfg.direction.as_str());
    out.push(',');
    out.push_str(cfg.parallel.as_str());
    if cfg.filter != FilterTag::None {
        out.push(',');
        out.push_str(match cfg.filter {
            FilterTag::SA => "SA",
            FilterTag::BA => "BA",
            FilterTag::BV => "BV",
            FilterTag::None => unreachable!(),
        });
    }
    out.push(']');
}

impl GisVector {
    pub fn dump(&self, style: DumpStyle) -> String {
        let (open, close, bot) = match style {
            DumpStyle::Unicode => ("⟨", "⟩", "⊥"),
            DumpStyle::Ascii => ("<", ">", "_"),
        };
        let mut s = String::new();
        s.push_str(open);
        match &self.ssg {
            None => s.push_str(bot),
            Some(cfg) => {
                s.push_str("S[");
                s.push_str(cfg.parallel.as_str());
                s.push_str(",(");
                match cfg.scheme {
                    PartitionScheme::FixedVertexCount => {
                        s.push_str(&format!("FVC,num_vert/{}", cfg.num_segments))
                    }
                    PartitionScheme::EdgeAwareVertexCount => {
                        s.push_str(&format!("EVC,num_edge/{}", cfg.num_segments))
                    }
                }
                s.push_str(")]");
            }
        }
        s.push_str(", ");
        match &self.bsg {
            None => s.push_str(bot),
            Some(cfg) => {
                s.push_str("B[");
                s.push_str(cfg.parallel.as_str());
                s.push_str(",(");
                s.push_str(match cfg.scheme {
                    PartitionScheme::FixedVertexCount => "FVC",
                    PartitionScheme::EdgeAwareVertexCount => "EVC",
                });
                s.push_str(&format!(",{}", cfg.grain));
                s.push_str(")]");
            }
        }
        s.push_str(", ");
        fmt_iter('O', &self.outer, &mut s);
        s.push_str(", ");
        fmt_iter('I', &self.inner, &mut s);
        s.push_str(close);
        s
    }
}

impl fmt::Display for GisVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.dump(DumpStyle::Unicode))
    }
}

/// One line per plan: `label = ⟨...⟩` (hybrid plans list both vectors,
/// dense first, separated by ` | `).
pub fn dump_ir(lowered: &LoweredProgram, style: DumpStyle) -> String {
    let mut out = String::new();
    for plan in &lowered.plans {
        out.push_str(&plan.label);
        out.push_str(" = ");
        let vecs: Vec<String> = plan.variants.iter().map(|v| v.gis.dump(style)).collect();
        out.push_str(&vecs.join(" | "));
        out.push('\n');
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("malformed graph iteration space vector: {0}")]
pub struct GisParseError(String);

/// Parse the dump notation back into a `GisVector` (either style).
pub fn parse_gis_vector(text: &str) -> Result<GisVector, GisParseError> {
    let bad = || GisParseError(text.to_string());
    let t = text.trim();
    let inner = t
        .strip_prefix('⟨')
        .and_then(|r| r.strip_suffix('⟩'))
        .or_else(|| t.strip_prefix('<').and_then(|r| r.strip_suffix('>')))
        .ok_or_else(bad)?;
    // Split on top-level ", " (no nested angle brackets inside).
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for c in inner.chars() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    parts.push(cur.trim().to_string());
    if parts.len() != 4 {
        return Err(bad());
    }

    let parse_par = |s: &str| match s {
        "SR" => Ok(ParallelTag::SR),
        "SP" => Ok(ParallelTag::SP),
        "WSP" => Ok(ParallelTag::WSP),
        _ => Err(bad()),
    };
    let is_bot = |s: &str| s == "⊥" || s == "_";

    let ssg = if is_bot(&parts[0]) {
        None
    } else {
        let body = parts[0].strip_prefix("S[").and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
        let (par, rest) = body.split_once(',').ok_or_else(bad)?;
        let grp = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let (scheme, grain) = grp.split_once(',').ok_or_else(bad)?;
        let scheme = match scheme {
            "FVC" => PartitionScheme::FixedVertexCount,
            "EVC" => PartitionScheme::EdgeAwareVertexCount,
            _ => return Err(bad()),
        };
        let segs = grain
            .strip_prefix("num_vert/")
            .or_else(|| grain.strip_prefix("num_edge/"))
            .ok_or_else(bad)?
            .parse::<u64>()
            .map_err(|_| bad())?;
        Some(SsgCfg { parallel: parse_par(par)?, scheme, num_segments: segs })
    };

    let bsg = if is_bot(&parts[1]) {
        None
    } else {
        let body = parts[1].strip_prefix("B[").and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
        let (par, rest) = body.split_once(',').ok_or_else(bad)?;
        let grp = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let (scheme, grain) = grp.split_once(',').ok_or_else(bad)?;
        let scheme = match scheme {
            "FVC" => PartitionScheme::FixedVertexCount,
            "EVC" => PartitionScheme::EdgeAwareVertexCount,
            _ => return Err(bad()),
        };
        Some(BsgCfg {
            parallel: parse_par(par)?,
            scheme,
            grain: grain.parse().map_err(|_| bad())?,
        })
    };

    let parse_iter = |s: &str, name: char| -> Result<IterCfg, GisParseError> {
        let body = s
            .strip_prefix(name)
            .and_then(|r| r.strip_prefix('['))
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(bad)?;
        let fields: Vec<&str> = body.split(',').collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(bad());
        }
        let direction = match fields[0] {
            "src" => Endpoint::Src,
            "dst" => Endpoint::Dst,
            _ => return Err(bad()),
        };
        let parallel = parse_par(fields[1])?;
        let filter = if fields.len() == 3 {
            match fields[2] {
                "SA" => FilterTag::SA,
                "BA" => FilterTag::BA,
                "BV" => FilterTag::BV,
                _ => return Err(bad()),
            }
        } else {
            FilterTag::None
        };
        Ok(IterCfg { direction, parallel, filter })
    };

    let outer = parse_iter(&parts[2], 'O')?;
    let inner = parse_iter(&parts[3], 'I')?;
    if outer.direction == inner.direction {
        return Err(bad());
    }
    Ok(GisVector { ssg, bsg, outer, inner })
}

/// Map a lowered program's plans by label for quick lookup in tests.
pub fn plans_by_label(lowered: &LoweredProgram) -> BTreeMap<String, &ExecutionPlan> {
    lowered.plans.iter().map(|p| (p.label.clone(), p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, parse_schedule};

    const PRDELTA: &str = include_str!("../tests/fixtures/prdelta.gt");

    fn lower(schedule: &str) -> LoweredProgram {
        let ir = parse_program(PRDELTA).unwrap();
        let sched = parse_schedule(schedule).unwrap();
        apply_schedule(&ir, &sched, Mode::Strict).unwrap()
    }

    fn s1_dump(lowered: &LoweredProgram) -> Vec<String> {
        let plan = lowered.plans.iter().find(|p| p.label == "s1").unwrap();
        plan.variants.iter().map(|v| v.gis.dump(DumpStyle::Unicode)).collect()
    }

    #[test]
    fn default_plan_matches_sparse_push_row() {
        let lowered = lower("");
        assert_eq!(s1_dump(&lowered), vec!["⟨⊥, ⊥, O[src,SR,SA], I[dst,SR]⟩"]);
    }

    #[test]
    fn hybrid_with_parallelization_matches_row_three() {
        let lowered = lower(
            r#"program->configApplyDirection("s1","DensePull-SparsePush")
                      ->configApplyParallelization("s1","dynamic-vertex-parallel",1024);"#,
        );
        assert_eq!(
            s1_dump(&lowered),
            vec![
                "⟨⊥, B[WSP,(FVC,1024)], O[dst,SR], I[src,SR,BA]⟩",
                "⟨⊥, B[WSP,(FVC,1024)], O[src,SR,SA], I[dst,SR]⟩",
            ]
        );
    }

    #[test]
    fn bitvector_applies_to_pull_side_only() {
        let lowered = lower(
            r#"program->configApplyDirection("s1","DensePull-SparsePush")
                      ->configApplyParallelization("s1","dynamic-vertex-parallel",1024)
                      ->configApplyDenseVertexSet("s1","src-vertexset","bitvector","DensePull");"#,
        );
        assert_eq!(
            s1_dump(&lowered),
            vec![
                "⟨⊥, B[WSP,(FVC,1024)], O[dst,SR], I[src,SR,BV]⟩",
                "⟨⊥, B[WSP,(FVC,1024)], O[src,SR,SA], I[dst,SR]⟩",
            ]
        );
    }

    #[test]
    fn num_ssg_adds_segment_dimension() {
        let lowered = lower(
            r#"program->configApplyDirection("s1","DensePull-SparsePush")
                      ->configApplyParallelization("s1","dynamic-vertex-parallel",1024)
                      ->configApplyDenseVertexSet("s1","src-vertexset","bitvector","DensePull")
                      ->configApplyNumSSG("s1","fixed-vertex-count",5,"DensePull");"#,
        );
        assert_eq!(
            s1_dump(&lowered),
            vec![
                "⟨S[SR,(FVC,num_vert/5)], B[WSP,(FVC,1024)], O[dst,SR], I[src,SR,BV]⟩",
                "⟨⊥, B[WSP,(FVC,1024)], O[src,SR,SA], I[dst,SR]⟩",
            ]
        );
    }

    #[test]
    fn numa_requires_ssg() {
        let ir = parse_program(PRDELTA).unwrap();
        let sched = parse_schedule(r#"program->configApplyNUMA("s1","static-parallel");"#).unwrap();
        let err = apply_schedule(&ir, &sched, Mode::Strict).unwrap_err();
        assert!(matches!(err, GisError::InvalidCombination(_)));

        let lowered = apply_schedule(&ir, &sched, Mode::Lenient).unwrap();
        assert_eq!(lowered.dropped_calls.len(), 1);
        assert_eq!(s1_dump(&lowered), vec!["⟨⊥, ⊥, O[src,SR,SA], I[dst,SR]⟩"]);
    }

    #[test]
    fn ssg_qualifier_on_absent_direction_is_dropped_leniently() {
        let ir = parse_program(PRDELTA).unwrap();
        let sched = parse_schedule(
            r#"program->configApplyNumSSG("s1","fixed-vertex-count",4,"DensePull");"#,
        )
        .unwrap();
        // Plan is SparsePush-only, so the DensePull qualifier matches nothing.
        assert!(apply_schedule(&ir, &sched, Mode::Strict).is_err());
        let lowered = apply_schedule(&ir, &sched, Mode::Lenient).unwrap();
        assert_eq!(lowered.dropped_calls.len(), 1);
        assert_eq!(s1_dump(&lowered), vec!["⟨⊥, ⊥, O[src,SR,SA], I[dst,SR]⟩"]);
    }

    #[test]
    fn numa_on_existing_ssg_sets_parallel_tag() {
        let lowered = lower(
            r#"program->configApplyDirection("s1","DensePull")
                      ->configApplyNumSSG("s1","fixed-vertex-count",4)
                      ->configApplyNUMA("s1","static-parallel");"#,
        );
        let dumps = s1_dump(&lowered);
        assert_eq!(dumps, vec!["⟨S[SP,(FVC,num_vert/4)], ⊥, O[dst,SR], I[src,SR,BA]⟩"]);
    }

    #[test]
    fn dump_round_trips() {
        for text in [
            "⟨⊥, ⊥, O[src,SR,SA], I[dst,SR]⟩",
            "⟨S[SP,(FVC,num_vert/4)], B[WSP,(EVC,256)], O[dst,SR], I[src,SR,BV]⟩",
            "<_, B[SP,(FVC,64)], O[src,WSP,SA], I[dst,SR,BA]>",
        ] {
            let v = parse_gis_vector(text).unwrap();
            let style =
                if text.starts_with('⟨') { DumpStyle::Unicode } else { DumpStyle::Ascii };
            assert_eq!(v.dump(style), text, "round trip failed for {text}");
        }
    }

    #[test]
    fn determinism() {
        let a = lower(r#"program->configApplyDirection("s1","DensePull-SparsePush");"#);
        let b = lower(r#"program->configApplyDirection("s1","DensePull-SparsePush");"#);
        assert_eq!(dump_ir(&a, DumpStyle::Ascii), dump_ir(&b, DumpStyle::Ascii));
    }
}
