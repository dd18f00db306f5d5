//! Plan execution: prepares lowered programs against a graph (slot layout,
//! per-variant sync plans and compiled apply functions, prebuilt segment
//! partitions) and interprets `main`.

pub mod compile;
pub mod counters;
pub mod traverse;
pub mod value;

use crate::ast::*;
use crate::deps::{self, DistanceVector, ReduceKind, SyncKind, SyncPlan};
use crate::exec::compile::{
    detect_claim, ClaimSpec, CompiledFunc, EvalCtx, FuncCompiler, VisitedFlags, WriteMode,
};
use crate::exec::counters::{Counters, TraversalRecord};
use crate::exec::traverse::{frontier_tags, repr_for_tag, run_variant, TraversalEnv, TraversalSpec};
use crate::exec::value::{RtVal, SlotId, VectorStore};
use crate::frontier::Frontier;
use crate::gis::{ExecutionPlan, LoweredProgram, PlanVariant};
use crate::graph::{Graph, VertexId};
use crate::partition::{build_ssgs, SegmentedSubgraph, TraversalSide};
use crate::sema::SemaInfo;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("runtime error{}: {message}", label.as_ref().map(|l| format!(" at `{l}`")).unwrap_or_default())]
    Runtime { message: String, label: Option<String> },
    #[error("vector `{0}` not found")]
    VectorNotFound(String),
    #[error("segmented plan has no prebuilt subgraphs")]
    MissingSsgs,
    #[error("internal error: {0}")]
    Internal(String),
}

fn rt(message: impl Into<String>) -> ExecError {
    ExecError::Runtime { message: message.into(), label: None }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
}

impl ParamValue {
    pub fn parse(s: &str) -> Option<ParamValue> {
        if let Ok(v) = s.parse::<i64>() {
            return Some(ParamValue::Int(v));
        }
        s.parse::<f64>().ok().map(ParamValue::Float)
    }

    fn to_rt(self) -> RtVal {
        match self {
            ParamValue::Int(v) => RtVal::Int(v),
            ParamValue::Float(v) => RtVal::Double(v),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub threads: usize,
    /// Hybrid selector threshold; defaults to m / 20.
    pub hybrid_threshold: Option<u64>,
    /// Runtime-bound program parameters (`maxIters`, `source`, ...). A name
    /// matching a declared global constant overrides its initializer.
    pub params: BTreeMap<String, ParamValue>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { threads: 1, hybrid_threshold: None, params: BTreeMap::new() }
    }
}

/// One plan variant prepared for execution.
pub struct PreparedVariant {
    pub variant: PlanVariant,
    pub apply: CompiledFunc,
    pub claim: Option<ClaimSpec>,
    pub buffered: Vec<(SlotId, ReduceKind)>,
    pub sync: SyncPlan,
    pub dvs: BTreeMap<String, DistanceVector>,
    pub ssg_key: Option<(TraversalSide, PartitionScheme, u64)>,
}

pub struct PreparedPlan {
    pub plan: ExecutionPlan,
    pub variants: Vec<PreparedVariant>,
    pub max_locals: usize,
}

enum MVal {
    V(RtVal),
    Set(Frontier),
}

impl MVal {
    fn val(self) -> Result<RtVal, ExecError> {
        match self {
            MVal::V(v) => Ok(v),
            MVal::Set(_) => Err(rt("expected a scalar, found a vertexset")),
        }
    }

    fn set(self) -> Result<Frontier, ExecError> {
        match self {
            MVal::Set(s) => Ok(s),
            MVal::V(_) => Err(rt("expected a vertexset, found a scalar")),
        }
    }
}

#[derive(Default)]
struct Env {
    scalars: Vec<HashMap<String, RtVal>>,
    sets: HashMap<String, Frontier>,
}

impl Env {
    fn lookup(&self, name: &str) -> Option<RtVal> {
        self.scalars.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn assign(&mut self, name: &str, v: RtVal) -> bool {
        for scope in self.scalars.iter_mut().rev() {
            if let Some(slot) = scope.get_mut(name) {
                *slot = v;
                return true;
            }
        }
        false
    }
}

enum Flow {
    Normal,
    Break,
}

pub struct RunOutput {
    pub counters: Counters,
    pub records: Vec<TraversalRecord>,
    pub wall_time_ns: u128,
    /// True when any applyModified traversal emitted a duplicate id.
    pub had_duplicate_frontier: bool,
}

pub struct Executor {
    pub lowered: LoweredProgram,
    pub sema: SemaInfo,
    pub graph: Graph,
    pub store: VectorStore,
    pub opts: RunOptions,
    globals: Vec<RtVal>,
    global_index: HashMap<String, u16>,
    global_decls: Vec<GlobalScalarDecl>,
    funcs: HashMap<String, CompiledFunc>,
    plans: HashMap<StmtId, PreparedPlan>,
    ssg_cache: HashMap<(TraversalSide, PartitionScheme, u64), Vec<SegmentedSubgraph>>,
    visited: VisitedFlags,
    pool: rayon::ThreadPool,
    sizes: HashMap<String, i64>,
    counters: Counters,
    records: Vec<TraversalRecord>,
    had_duplicates: bool,
}

impl Executor {
    pub fn new(
        lowered: LoweredProgram,
        sema: SemaInfo,
        graph: Graph,
        opts: RunOptions,
    ) -> Result<Executor, ExecError> {
        let n = graph.n;
        // Set sizes are fixed by the graph: vertexsets cover the id domain,
        // edgesets have m edges.
        let mut sizes = HashMap::new();
        for s in &lowered.ir.set_decls {
            let v = match s {
                SetDecl::Edgeset { .. } => graph.m as i64,
                SetDecl::Vertexset { .. } => n as i64,
            };
            sizes.insert(s.name().to_string(), v);
        }

        let vectors: Vec<(String, ScalarType)> = lowered
            .ir
            .vector_decls
            .iter()
            .map(|v| (v.name.clone(), v.scalar))
            .collect();
        let store = VectorStore::build(&vectors, &lowered.layout, n.max(1));

        // Global scalars: evaluated in declaration order at run start.
        let global_decls = lowered.ir.scalar_decls.clone();
        let global_index: HashMap<String, u16> = global_decls
            .iter()
            .enumerate()
            .map(|(i, d)| (d.name.clone(), i as u16))
            .collect();

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads.max(1))
            .build()
            .map_err(|e| ExecError::Internal(format!("thread pool: {e}")))?;

        let mut ex = Executor {
            sema,
            store,
            globals: vec![RtVal::Int(0); global_decls.len()],
            global_index,
            global_decls,
            funcs: HashMap::new(),
            plans: HashMap::new(),
            ssg_cache: HashMap::new(),
            visited: VisitedFlags::new(n.max(1)),
            pool,
            sizes,
            counters: Counters::default(),
            records: Vec::new(),
            had_duplicates: false,
            graph,
            opts,
            lowered,
        };
        ex.compile_funcs()?;
        ex.prepare_plans()?;
        ex.prebuild_ssgs()?;
        Ok(ex)
    }

    /// Rewrite `size()` calls to constants so compiled functions avoid any
    /// runtime lookups.
    fn bind_sizes(&self, e: &Expr) -> Expr {
        match e {
            Expr::SetSize { set } => {
                Expr::IntLit(self.sizes.get(set).copied().unwrap_or_default())
            }
            Expr::Binary { op, lhs, rhs } => Expr::Binary {
                op: *op,
                lhs: Box::new(self.bind_sizes(lhs)),
                rhs: Box::new(self.bind_sizes(rhs)),
            },
            Expr::Neg(x) => Expr::Neg(Box::new(self.bind_sizes(x))),
            Expr::Not(x) => Expr::Not(Box::new(self.bind_sizes(x))),
            Expr::Fabs(x) => Expr::Fabs(Box::new(self.bind_sizes(x))),
            Expr::VectorIndex { vector, index } => Expr::VectorIndex {
                vector: vector.clone(),
                index: Box::new(self.bind_sizes(index)),
            },
            other => other.clone(),
        }
    }

    fn bind_sizes_in_func(&self, f: &FuncDecl) -> FuncDecl {
        fn walk(ex: &Executor, stmts: &[LStmt]) -> Vec<LStmt> {
            stmts
                .iter()
                .map(|s| {
                    let stmt = match &s.stmt {
                        Stmt::VarDecl { name, ty, init } => Stmt::VarDecl {
                            name: name.clone(),
                            ty: ty.clone(),
                            init: ex.bind_sizes(init),
                        },
                        Stmt::Assign { target, value } => Stmt::Assign {
                            target: bind_lvalue(ex, target),
                            value: ex.bind_sizes(value),
                        },
                        Stmt::Reduce { target, op, value } => Stmt::Reduce {
                            target: bind_lvalue(ex, target),
                            op: *op,
                            value: ex.bind_sizes(value),
                        },
                        Stmt::If { cond, then_body, else_body } => Stmt::If {
                            cond: ex.bind_sizes(cond),
                            then_body: walk(ex, then_body),
                            else_body: walk(ex, else_body),
                        },
                        other => other.clone(),
                    };
                    LStmt { id: s.id, label: s.label.clone(), stmt }
                })
                .collect()
        }
        fn bind_lvalue(ex: &Executor, lv: &LValue) -> LValue {
            match lv {
                LValue::Scalar(n) => LValue::Scalar(n.clone()),
                LValue::VectorElem { vector, index } => LValue::VectorElem {
                    vector: vector.clone(),
                    index: ex.bind_sizes(index),
                },
            }
        }
        FuncDecl {
            name: f.name.clone(),
            params: f.params.clone(),
            returns_bool: f.returns_bool.clone(),
            body: walk(self, &f.body),
        }
    }

    fn compile_funcs(&mut self) -> Result<(), ExecError> {
        let funcs = self.lowered.ir.funcs.clone();
        for f in &funcs {
            let bound = self.bind_sizes_in_func(f);
            let compiler = FuncCompiler {
                ir: &self.lowered.ir,
                store: &self.store,
                global_index: &self.global_index,
            };
            let compiled = compiler.compile(&bound, &HashMap::new(), None)?;
            self.funcs.insert(f.name.clone(), compiled);
        }
        Ok(())
    }

    fn prepare_plans(&mut self) -> Result<(), ExecError> {
        let plans = self.lowered.plans.clone();
        for plan in plans {
            let func_name = plan.apply_func.clone();
            let func = self
                .lowered
                .ir
                .func(&func_name)
                .ok_or_else(|| ExecError::Internal(format!("missing function `{func_name}`")))?
                .clone();
            let access = match self.sema.access.get(&func_name) {
                Some(a) => a.clone(),
                None => deps::classify_accesses(&func)
                    .map_err(|e| ExecError::Internal(e.to_string()))?,
            };

            let mut variants = Vec::new();
            let mut max_locals = 0usize;
            for variant in &plan.variants {
                let dvs = deps::distance_vectors(&access, &variant.gis);
                let sync = deps::infer_sync(
                    variant,
                    &access,
                    &dvs,
                    plan.dedup_enabled,
                    plan.tracked_vector.as_deref(),
                );
                let mut modes = HashMap::new();
                let mut buffered = Vec::new();
                for (vec, kind) in &sync.per_vector {
                    modes.insert(vec.clone(), traverse::write_mode_of(*kind));
                    if *kind == SyncKind::LocalBufferMerge {
                        let op = match access[vec].class {
                            deps::AccessClass::Reduction(k) => k,
                            deps::AccessClass::AsyncReduction(k) => k,
                            // Non-reduction buffered writes never occur: the
                            // sync inference only buffers reductions.
                            _ => ReduceKind::Sum,
                        };
                        let slot = self
                            .store
                            .slot_id(vec)
                            .ok_or_else(|| ExecError::VectorNotFound(vec.clone()))?;
                        buffered.push((slot, op));
                    }
                }
                // A serial variant keeps everything plain.
                if !variant.gis.outer_parallel() && !variant.gis.inner_parallel() {
                    for m in modes.values_mut() {
                        if *m == WriteMode::Atomic {
                            *m = WriteMode::Plain;
                        }
                    }
                }

                let bound = self.bind_sizes_in_func(&func);
                let compiler = FuncCompiler {
                    ir: &self.lowered.ir,
                    store: &self.store,
                    global_index: &self.global_index,
                };
                let apply =
                    compiler.compile(&bound, &modes, plan.tracked_vector.as_deref())?;

                let tracked_slot =
                    plan.tracked_vector.as_ref().and_then(|t| self.store.slot_id(t));
                let dst_filter = plan.dst_filter.as_ref().and_then(|f| self.funcs.get(f));
                let claim = detect_claim(&apply, dst_filter, tracked_slot, &self.store);

                max_locals = max_locals.max(apply.n_locals);
                for f in [&plan.src_filter, &plan.dst_filter, &plan.edge_filter]
                    .into_iter()
                    .flatten()
                {
                    if let Some(cf) = self.funcs.get(f) {
                        max_locals = max_locals.max(cf.n_locals);
                    }
                }

                let ssg_key = variant.gis.ssg.map(|cfg| {
                    let side = if variant.kind.push() {
                        TraversalSide::Push
                    } else {
                        TraversalSide::Pull
                    };
                    (side, cfg.scheme, cfg.num_segments)
                });

                variants.push(PreparedVariant {
                    variant: variant.clone(),
                    apply,
                    claim,
                    buffered,
                    sync,
                    dvs,
                    ssg_key,
                });
            }
            self.plans.insert(plan.stmt, PreparedPlan { plan, variants, max_locals });
        }
        Ok(())
    }

    fn prebuild_ssgs(&mut self) -> Result<(), ExecError> {
        let keys: Vec<_> = self
            .plans
            .values()
            .flat_map(|p| p.variants.iter().filter_map(|v| v.ssg_key))
            .collect();
        for key in keys {
            if self.ssg_cache.contains_key(&key) {
                continue;
            }
            let (side, scheme, segs) = key;
            let ssgs = build_ssgs(&self.graph, segs as usize, scheme, side)
                .map_err(|e| ExecError::Internal(e.to_string()))?;
            self.ssg_cache.insert(key, ssgs);
        }
        Ok(())
    }

    fn init_storage(&mut self) -> Result<(), ExecError> {
        // Vectors zero-fill; degree-vector initializers bind from the graph.
        for decl in &self.lowered.ir.vector_decls {
            let slot = self
                .store
                .slot_id(&decl.name)
                .ok_or_else(|| ExecError::VectorNotFound(decl.name.clone()))?;
            match &decl.init {
                Some(VectorInit::OutDegrees { .. }) => {
                    for v in 0..self.graph.n {
                        self.store.store(slot, v, RtVal::Int(self.graph.out_degree(v as VertexId) as i64));
                    }
                }
                _ => self.store.fill(slot, RtVal::zero(decl.scalar)),
            }
        }
        // Globals in declaration order; a matching runtime parameter
        // overrides the declared initializer.
        let decls = self.global_decls.clone();
        let mut env = Env { scalars: vec![HashMap::new()], sets: HashMap::new() };
        for (i, d) in decls.iter().enumerate() {
            let v = match self.opts.params.get(&d.name) {
                Some(p) => p.to_rt(),
                None => self.eval(&mut env, &d.init)?.val()?,
            };
            self.globals[i] = coerce(v, d.ty);
        }
        Ok(())
    }

    /// Interpret `main` and return counters plus per-traversal records.
    pub fn run(&mut self) -> Result<RunOutput, ExecError> {
        self.counters = Counters::default();
        self.records = Vec::new();
        self.had_duplicates = false;
        self.init_storage()?;
        let start = Instant::now();
        let mut env = Env { scalars: vec![HashMap::new()], sets: HashMap::new() };
        let main = self.lowered.ir.main.clone();
        self.exec_block(&mut env, &main)?;
        Ok(RunOutput {
            counters: self.counters,
            records: self.records.clone(),
            wall_time_ns: start.elapsed().as_nanos(),
            had_duplicate_frontier: self.had_duplicates,
        })
    }

    /// Per-traversal records of the most recent run.
    pub fn run_records(&self) -> &[TraversalRecord] {
        &self.records
    }

    /// Final values of one vector.
    pub fn vector_values(&self, name: &str) -> Option<Vec<RtVal>> {
        let slot = self.store.slot_id(name)?;
        Some((0..self.graph.n).map(|v| self.store.get(slot, v)).collect())
    }

    pub fn prepared_plans(&self) -> impl Iterator<Item = &PreparedPlan> {
        let mut v: Vec<_> = self.plans.values().collect();
        v.sort_by_key(|p| p.plan.stmt);
        v.into_iter()
    }

    pub fn cumulative_counters(&self) -> Counters {
        self.counters
    }

    fn exec_block(&mut self, env: &mut Env, stmts: &[LStmt]) -> Result<Flow, ExecError> {
        for s in stmts {
            match self.exec_stmt(env, s) {
                Ok(Flow::Break) => return Ok(Flow::Break),
                Ok(Flow::Normal) => {}
                Err(ExecError::Runtime { message, label: None }) => {
                    return Err(ExecError::Runtime { message, label: s.label.clone() })
                }
                Err(e) => return Err(e),
            }
        }
        Ok(Flow::Normal)
    }

    fn exec_stmt(&mut self, env: &mut Env, s: &LStmt) -> Result<Flow, ExecError> {
        // Edgeset-apply statements route through their prepared plan.
        match &s.stmt {
            Stmt::ExprStmt(Expr::EdgesetApply(_)) => {
                self.exec_chain_stmt(env, s)?;
                return Ok(Flow::Normal);
            }
            Stmt::Assign { target, value: Expr::EdgesetApply(_) } => {
                let out = self.exec_chain_stmt(env, s)?;
                let f = out.ok_or_else(|| rt("apply() returns no vertexset (use applyModified)"))?;
                match target {
                    LValue::Scalar(name) => {
                        env.sets.insert(name.clone(), f);
                    }
                    LValue::VectorElem { .. } => {
                        return Err(rt("cannot assign a vertexset to a vector element"))
                    }
                }
                return Ok(Flow::Normal);
            }
            Stmt::VarDecl { name, ty: TypeAnnot::Vertexset { .. }, init: Expr::EdgesetApply(_) } => {
                let out = self.exec_chain_stmt(env, s)?;
                let f = out.ok_or_else(|| rt("apply() returns no vertexset (use applyModified)"))?;
                env.sets.insert(name.clone(), f);
                return Ok(Flow::Normal);
            }
            _ => {}
        }
        match &s.stmt {
            Stmt::VarDecl { name, ty, init } => {
                let v = self.eval(env, init)?;
                match (ty, v) {
                    (TypeAnnot::Scalar(sc), MVal::V(v)) => {
                        env.scalars.last_mut().unwrap().insert(name.clone(), coerce(v, *sc));
                    }
                    (TypeAnnot::Vertexset { .. }, MVal::Set(f)) => {
                        env.sets.insert(name.clone(), f);
                    }
                    _ => return Err(rt(format!("var `{name}` initializer has the wrong kind"))),
                }
                Ok(Flow::Normal)
            }
            Stmt::Assign { target, value } => {
                match target {
                    LValue::Scalar(name) => {
                        if env.sets.contains_key(name) {
                            let f = self.eval(env, value)?.set()?;
                            env.sets.insert(name.clone(), f);
                        } else {
                            let v = self.eval(env, value)?.val()?;
                            if !env.assign(name, v) {
                                if let Some(idx) = self.global_index.get(name).copied() {
                                    let ty = self.global_decls[idx as usize].ty;
                                    self.globals[idx as usize] = coerce(v, ty);
                                } else {
                                    return Err(rt(format!("assignment to unknown `{name}`")));
                                }
                            }
                        }
                    }
                    LValue::VectorElem { vector, index } => {
                        let slot = self
                            .store
                            .slot_id(vector)
                            .ok_or_else(|| ExecError::VectorNotFound(vector.clone()))?;
                        let i = self.eval(env, index)?.val()?.as_i64();
                        let v = self.eval(env, value)?.val()?;
                        if i < 0 || i as usize >= self.graph.n {
                            return Err(rt(format!("index {i} out of range for `{vector}`")));
                        }
                        let ty = self.store.slot(slot).ty;
                        self.store.store(slot, i as usize, coerce(v, ty));
                    }
                }
                Ok(Flow::Normal)
            }
            Stmt::Reduce { .. } => Err(rt("reduction outside a function body")),
            Stmt::For { var, lo, hi, body } => {
                let lo = self.eval(env, lo)?.val()?.as_i64();
                let hi = self.eval(env, hi)?.val()?.as_i64();
                for i in lo..hi {
                    env.scalars.push(HashMap::from([(var.clone(), RtVal::Int(i))]));
                    let flow = self.exec_block(env, body);
                    env.scalars.pop();
                    match flow? {
                        Flow::Break => return Ok(Flow::Normal),
                        Flow::Normal => {}
                    }
                }
                Ok(Flow::Normal)
            }
            Stmt::While { cond, body } => {
                loop {
                    if !self.eval(env, cond)?.val()?.as_bool() {
                        return Ok(Flow::Normal);
                    }
                    env.scalars.push(HashMap::new());
                    let flow = self.exec_block(env, body);
                    env.scalars.pop();
                    match flow? {
                        Flow::Break => return Ok(Flow::Normal),
                        Flow::Normal => {}
                    }
                }
            }
            Stmt::If { cond, then_body, else_body } => {
                let c = self.eval(env, cond)?.val()?.as_bool();
                env.scalars.push(HashMap::new());
                let flow = self.exec_block(env, if c { then_body } else { else_body });
                env.scalars.pop();
                flow
            }
            Stmt::Break => Ok(Flow::Break),
            Stmt::ExprStmt(e) => {
                self.eval(env, e)?;
                Ok(Flow::Normal)
            }
            Stmt::VertexsetApply { set, func } => {
                let f = self.eval(env, set)?.set()?;
                self.vertexset_apply(&f, func)?;
                Ok(Flow::Normal)
            }
            Stmt::AddVertex { set, vertex } => {
                let v = self.eval(env, vertex)?.val()?.as_i64();
                if v < 0 || v as usize >= self.graph.n.max(1) {
                    return Err(rt(format!("addVertex({v}) out of range")));
                }
                let cur = env
                    .sets
                    .get(set)
                    .ok_or_else(|| rt(format!("unknown vertexset `{set}`")))?;
                let mut ids = cur.ids();
                ids.push(v as VertexId);
                env.sets.insert(set.clone(), Frontier::from_ids(self.graph.n, ids));
                Ok(Flow::Normal)
            }
            Stmt::NameNode { body } => self.exec_block(env, body),
        }
    }

    fn eval(&mut self, env: &mut Env, e: &Expr) -> Result<MVal, ExecError> {
        Ok(match e {
            Expr::IntLit(v) => MVal::V(RtVal::Int(*v)),
            Expr::FloatLit(v) => MVal::V(RtVal::Double(*v)),
            Expr::BoolLit(b) => MVal::V(RtVal::Bool(*b)),
            Expr::Name(n) => {
                if let Some(v) = env.lookup(n) {
                    MVal::V(v)
                } else if let Some(f) = env.sets.get(n) {
                    MVal::Set(f.clone())
                } else if let Some(idx) = self.global_index.get(n) {
                    MVal::V(self.globals[*idx as usize])
                } else if self.lowered.ir.set_decls.iter().any(|s| s.name() == n) {
                    MVal::Set(Frontier::full_prefix(self.graph.n, self.graph.n))
                } else if let Some(v) = self.opts.params.get(n) {
                    MVal::V(v.to_rt())
                } else {
                    return Err(rt(format!(
                        "unbound name `{n}` (missing --param {n}=<value>?)"
                    )));
                }
            }
            Expr::VectorIndex { vector, index } => {
                let slot = self
                    .store
                    .slot_id(vector)
                    .ok_or_else(|| ExecError::VectorNotFound(vector.clone()))?;
                let i = self.eval(env, index)?.val()?.as_i64();
                if i < 0 || i as usize >= self.graph.n {
                    return Err(rt(format!("index {i} out of range for `{vector}`")));
                }
                MVal::V(self.store.get(slot, i as usize))
            }
            Expr::Binary { op, lhs, rhs } => {
                let l = self.eval(env, lhs)?.val()?;
                let r = self.eval(env, rhs)?.val()?;
                MVal::V(compile::bin_op(*op, l, r))
            }
            Expr::Neg(x) => MVal::V(match self.eval(env, x)?.val()? {
                RtVal::Int(v) => RtVal::Int(-v),
                RtVal::Double(v) => RtVal::Double(-v),
                RtVal::Bool(b) => RtVal::Int(-(b as i64)),
            }),
            Expr::Not(x) => MVal::V(RtVal::Bool(!self.eval(env, x)?.val()?.as_bool())),
            Expr::Fabs(x) => MVal::V(RtVal::Double(self.eval(env, x)?.val()?.as_f64().abs())),
            Expr::SetSize { set } => MVal::V(RtVal::Int(
                self.sizes.get(set).copied().unwrap_or_default(),
            )),
            Expr::VertexSetSize { set } => {
                let f = self.eval(env, set)?.set()?;
                MVal::V(RtVal::Int(f.len() as i64))
            }
            Expr::NewVertexset { count, .. } => {
                let k = self.eval(env, count)?.val()?.as_i64();
                if k < 0 {
                    return Err(rt("negative vertexset size"));
                }
                MVal::Set(Frontier::full_prefix(self.graph.n, k as usize))
            }
            Expr::VertexsetFilter { set, func } => {
                let f = self.eval(env, set)?.set()?;
                MVal::Set(self.vertexset_filter(&f, func)?)
            }
            Expr::VertexsetApply { set, func } => {
                let f = self.eval(env, set)?.set()?;
                self.vertexset_apply(&f, func)?;
                MVal::V(RtVal::Bool(true))
            }
            Expr::AddVertex { .. } => return Err(rt("addVertex used as a value")),
            Expr::EdgesetApply(chain) => {
                // Resolved through the prepared plan for this statement; the
                // chain's own id is found by pointer identity on the stmt.
                return Err(ExecError::Internal(format!(
                    "unlowered edgeset chain on `{}`",
                    chain.edgeset
                )));
            }
        })
    }

    fn compiled_func(&self, name: &str) -> Result<&CompiledFunc, ExecError> {
        self.funcs
            .get(name)
            .ok_or_else(|| ExecError::Internal(format!("missing compiled function `{name}`")))
    }

    fn vertexset_members(&self, f: &Frontier) -> Vec<VertexId> {
        f.ids()
    }

    fn vertexset_apply(&mut self, set: &Frontier, func: &str) -> Result<(), ExecError> {
        let cf = self.compiled_func(func)?.clone();
        let members = self.vertexset_members(set);
        let store = &self.store;
        let globals = &self.globals;
        let run = |v: VertexId| {
            let mut ctx = EvalCtx::new(store, globals, cf.n_locals);
            ctx.params[0] = v as i64;
            ctx.run(&cf);
        };
        if self.opts.threads > 1 && members.len() >= 4096 {
            self.pool.install(|| {
                members.par_chunks(1024).for_each(|chunk| {
                    let mut ctx = EvalCtx::new(store, globals, cf.n_locals);
                    for &v in chunk {
                        ctx.params[0] = v as i64;
                        ctx.run(&cf);
                    }
                });
            });
        } else {
            members.into_iter().for_each(run);
        }
        Ok(())
    }

    fn vertexset_filter(&mut self, set: &Frontier, func: &str) -> Result<Frontier, ExecError> {
        let cf = self.compiled_func(func)?.clone();
        let members = self.vertexset_members(set);
        let store = &self.store;
        let globals = &self.globals;
        let ids: Vec<VertexId> = if self.opts.threads > 1 && members.len() >= 4096 {
            self.pool.install(|| {
                members
                    .par_chunks(1024)
                    .map(|chunk| {
                        let mut ctx = EvalCtx::new(store, globals, cf.n_locals);
                        let mut keep = Vec::new();
                        for &v in chunk {
                            ctx.params[0] = v as i64;
                            ctx.run(&cf);
                            if ctx.output {
                                keep.push(v);
                            }
                        }
                        keep
                    })
                    .collect::<Vec<_>>()
                    .concat()
            })
        } else {
            let mut ctx = EvalCtx::new(store, globals, cf.n_locals);
            let mut keep = Vec::new();
            for v in members {
                ctx.params[0] = v as i64;
                ctx.run(&cf);
                if ctx.output {
                    keep.push(v);
                }
            }
            keep
        };
        Ok(Frontier::from_unsorted_ids(self.graph.n, ids))
    }

    /// Run one edgeset-apply statement; returns the modified-vertex frontier
    /// for applyModified.
    fn run_edgeset_apply(
        &mut self,
        env: &mut Env,
        stmt_id: StmtId,
        chain: &ApplyChain,
    ) -> Result<Option<Frontier>, ExecError> {
        let from = match &chain.from {
            Some(e) => Some(self.eval(env, e)?.set()?),
            None => None,
        };
        let to = match &chain.to {
            Some(e) => Some(self.eval(env, e)?.set()?),
            None => None,
        };

        let start = Instant::now();
        let mut tally = Counters::default();

        let prepared = self
            .plans
            .get(&stmt_id)
            .ok_or_else(|| ExecError::Internal(format!("no plan for statement {stmt_id:?}")))?;

        // Hybrid selection: dense when |F| + Σ out-degree(F) clears the
        // threshold (default m/20). Without a from() the frontier is the
        // full set, whose mass n + m is known without degree reads.
        let chosen = if prepared.plan.hybrid {
            let mass = match from.as_ref() {
                Some(f) => {
                    tally.selector_degree_reads += f.len() as u64;
                    f.len() as u64 + f.sum_out_degrees(&self.graph)
                }
                None => (self.graph.n + self.graph.m) as u64,
            };
            let threshold = self.opts.hybrid_threshold.unwrap_or(self.graph.m as u64 / 20);
            if mass > threshold {
                0
            } else {
                1
            }
        } else {
            0
        };
        let pv = &prepared.variants[chosen];

        // Convert frontiers into the representations the tags demand.
        let (src_tag, dst_tag) = frontier_tags(&pv.variant.gis);
        let from = match (from, repr_for_tag(src_tag)) {
            (Some(f), Some(repr)) => {
                if f.repr() != repr {
                    tally.frontier_conversions += 1;
                }
                Some(f.convert(repr))
            }
            (f, _) => f,
        };
        let to = match (to, repr_for_tag(dst_tag)) {
            (Some(f), Some(repr)) => {
                if f.repr() != repr {
                    tally.frontier_conversions += 1;
                }
                Some(f.convert(repr))
            }
            (f, _) => f,
        };

        let weighted = self.graph.weighted;
        let dedup = prepared.plan.dedup_enabled && prepared.plan.tracked_vector.is_some();
        if dedup {
            self.visited.next_epoch();
        }

        let src_filter = match &prepared.plan.src_filter {
            Some(f) => Some(self.compiled_func(f)?),
            None => None,
        };
        let dst_filter = match &prepared.plan.dst_filter {
            Some(f) => Some(self.compiled_func(f)?),
            None => None,
        };
        let edge_filter = match &prepared.plan.edge_filter {
            Some(f) => Some(self.compiled_func(f)?),
            None => None,
        };
        let tracked_slot =
            prepared.plan.tracked_vector.as_ref().and_then(|t| self.store.slot_id(t));

        let ssgs = match pv.ssg_key {
            Some(key) => Some(
                self.ssg_cache
                    .get(&key)
                    .ok_or(ExecError::MissingSsgs)?
                    .as_slice(),
            ),
            None => None,
        };

        let spec = TraversalSpec {
            variant: &pv.variant,
            apply: &pv.apply,
            src_filter,
            dst_filter,
            edge_filter,
            claim: pv.claim.as_ref(),
            from: from.as_ref(),
            to: to.as_ref(),
            weighted,
            build_frontier: prepared.plan.returns_frontier,
            dedup,
            buffered: pv.buffered.clone(),
            tracked_slot,
            max_locals: prepared.max_locals,
        };
        let envx = TraversalEnv {
            graph: &self.graph,
            store: &self.store,
            globals: &self.globals,
            visited: &self.visited,
            threads: self.opts.threads,
        };

        let out = self.pool.install(|| run_variant(&envx, &spec, ssgs));
        tally += out.counters;
        self.counters += tally;
        self.had_duplicates |= out.had_duplicates;
        self.records.push(TraversalRecord {
            label: prepared.plan.label.clone(),
            variant_chosen: format!("{:?}", pv.variant.kind),
            counters: tally,
            wall_time_ns: start.elapsed().as_nanos(),
        });
        Ok(out.frontier)
    }
}

fn coerce(v: RtVal, ty: ScalarType) -> RtVal {
    match ty {
        ScalarType::Int => RtVal::Int(v.as_i64()),
        ScalarType::Double => RtVal::Double(v.as_f64()),
        ScalarType::Bool => RtVal::Bool(v.as_bool()),
    }
}

// The interpreter reaches edgeset chains in two statement forms; both route
// through `run_edgeset_apply` with the statement's own id so the prepared
// plan (built per statement) applies.
impl Executor {
    fn exec_chain_stmt(
        &mut self,
        env: &mut Env,
        s: &LStmt,
    ) -> Result<Option<Frontier>, ExecError> {
        match &s.stmt {
            Stmt::ExprStmt(Expr::EdgesetApply(chain)) => {
                self.run_edgeset_apply(env, s.id, chain)
            }
            Stmt::Assign { value: Expr::EdgesetApply(chain), .. } => {
                self.run_edgeset_apply(env, s.id, chain)
            }
            _ => Err(ExecError::Internal("not a chain statement".into())),
        }
    }
}
