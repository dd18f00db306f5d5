//! Compilation of user functions into a slot-resolved form the traversal
//! engine evaluates per edge or per vertex, with write modes baked in from
//! the sync plan.

use crate::ast::*;
use crate::deps::ReduceKind;
use crate::exec::value::{RtVal, SegmentBuffer, SlotId, VectorStore};
use crate::exec::ExecError;
use std::collections::HashMap;
use std::sync::atomic::Ordering;

#[derive(Debug, Clone)]
pub enum CExpr {
    Const(RtVal),
    Param(u8),
    Local(u16),
    Global(u16),
    VecLoad { slot: SlotId, index: Box<CExpr> },
    Bin { op: BinOp, lhs: Box<CExpr>, rhs: Box<CExpr> },
    Neg(Box<CExpr>),
    Not(Box<CExpr>),
    Fabs(Box<CExpr>),
}

/// How a write reaches memory, decided per (variant, vector).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriteMode {
    Plain,
    Atomic,
    /// Route into the active segment buffer.
    Buffer,
}

#[derive(Debug, Clone)]
pub enum CStmt {
    SetLocal { idx: u16, value: CExpr },
    SetOutput(CExpr),
    VecStore { slot: SlotId, index: CExpr, value: CExpr, mode: WriteMode, tracks: bool },
    VecReduce {
        slot: SlotId,
        index: CExpr,
        op: ReduceKind,
        value: CExpr,
        mode: WriteMode,
        tracks: bool,
    },
    If { cond: CExpr, then_body: Vec<CStmt>, else_body: Vec<CStmt> },
}

#[derive(Debug, Clone)]
pub struct CompiledFunc {
    pub name: String,
    pub n_params: usize,
    pub n_locals: usize,
    pub has_output: bool,
    pub body: Vec<CStmt>,
}

/// Claim-once pattern: a destination filter `vec[v] == literal` paired with
/// a plain write `vec[dst] = value` in the apply function. Executed as one
/// compare-and-swap so each destination is claimed exactly once.
#[derive(Debug, Clone)]
pub struct ClaimSpec {
    pub slot: SlotId,
    pub expected_bits: u64,
    pub value: CExpr,
}

pub struct FuncCompiler<'a> {
    pub ir: &'a ProgramIR,
    pub store: &'a VectorStore,
    pub global_index: &'a HashMap<String, u16>,
}

impl<'a> FuncCompiler<'a> {
    /// Compile `func` with the given per-vector write modes (empty map means
    /// everything plain; filters and vertex ops use that).
    pub fn compile(
        &self,
        func: &FuncDecl,
        modes: &HashMap<String, WriteMode>,
        tracked: Option<&str>,
    ) -> Result<CompiledFunc, ExecError> {
        let mut locals: HashMap<String, u16> = HashMap::new();
        let body = self.stmts(func, &func.body, modes, tracked, &mut locals)?;
        Ok(CompiledFunc {
            name: func.name.clone(),
            n_params: func.params.len(),
            n_locals: locals.len(),
            has_output: func.returns_bool.is_some(),
            body,
        })
    }

    fn stmts(
        &self,
        func: &FuncDecl,
        stmts: &[LStmt],
        modes: &HashMap<String, WriteMode>,
        tracked: Option<&str>,
        locals: &mut HashMap<String, u16>,
    ) -> Result<Vec<CStmt>, ExecError> {
        let mut out = Vec::with_capacity(stmts.len());
        for s in stmts {
            match &s.stmt {
                Stmt::VarDecl { name, init, .. } => {
                    let value = self.expr(func, init, locals)?;
                    let idx = locals.len() as u16;
                    locals.insert(name.clone(), idx);
                    out.push(CStmt::SetLocal { idx, value });
                }
                Stmt::Assign { target, value } => {
                    let value = self.expr(func, value, locals)?;
                    match target {
                        LValue::Scalar(name) => {
                            if Some(name) == func.returns_bool.as_ref() {
                                out.push(CStmt::SetOutput(value));
                            } else if let Some(idx) = locals.get(name) {
                                out.push(CStmt::SetLocal { idx: *idx, value });
                            } else {
                                return Err(ExecError::Internal(format!(
                                    "function `{}` assigns unknown scalar `{name}`",
                                    func.name
                                )));
                            }
                        }
                        LValue::VectorElem { vector, index } => {
                            let slot = self.slot_of(vector)?;
                            let index = self.expr(func, index, locals)?;
                            let mode = modes.get(vector).copied().unwrap_or(WriteMode::Plain);
                            out.push(CStmt::VecStore {
                                slot,
                                index,
                                value,
                                mode,
                                tracks: tracked == Some(vector.as_str()),
                            });
                        }
                    }
                }
                Stmt::Reduce { target, op, value } => {
                    let value = self.expr(func, value, locals)?;
                    let LValue::VectorElem { vector, index } = target else {
                        return Err(ExecError::Internal(format!(
                            "function `{}` reduces a scalar",
                            func.name
                        )));
                    };
                    let slot = self.slot_of(vector)?;
                    let index = self.expr(func, index, locals)?;
                    let mode = if op.is_async() {
                        WriteMode::Atomic
                    } else {
                        modes.get(vector).copied().unwrap_or(WriteMode::Plain)
                    };
                    out.push(CStmt::VecReduce {
                        slot,
                        index,
                        op: ReduceKind::of(*op),
                        value,
                        mode,
                        tracks: tracked == Some(vector.as_str()),
                    });
                }
                Stmt::If { cond, then_body, else_body } => {
                    let cond = self.expr(func, cond, locals)?;
                    let then_body = self.stmts(func, then_body, modes, tracked, locals)?;
                    let else_body = self.stmts(func, else_body, modes, tracked, locals)?;
                    out.push(CStmt::If { cond, then_body, else_body });
                }
                other => {
                    return Err(ExecError::Internal(format!(
                        "unsupported statement in function `{}`: {other:?}",
                        func.name
                    )))
                }
            }
        }
        Ok(out)
    }

    fn slot_of(&self, vector: &str) -> Result<SlotId, ExecError> {
        self.store.slot_id(vector).ok_or_else(|| ExecError::VectorNotFound(vector.to_string()))
    }

    fn expr(
        &self,
        func: &FuncDecl,
        e: &Expr,
        locals: &HashMap<String, u16>,
    ) -> Result<CExpr, ExecError> {
        Ok(match e {
            Expr::IntLit(v) => CExpr::Const(RtVal::Int(*v)),
            Expr::FloatLit(v) => CExpr::Const(RtVal::Double(*v)),
            Expr::BoolLit(b) => CExpr::Const(RtVal::Bool(*b)),
            Expr::Name(n) => {
                if let Some(p) = func.params.iter().position(|p| p.name == *n) {
                    CExpr::Param(p as u8)
                } else if let Some(idx) = locals.get(n) {
                    CExpr::Local(*idx)
                } else if let Some(g) = self.global_index.get(n) {
                    CExpr::Global(*g)
                } else {
                    return Err(ExecError::Internal(format!(
                        "function `{}` references unknown name `{n}`",
                        func.name
                    )));
                }
            }
            Expr::VectorIndex { vector, index } => CExpr::VecLoad {
                slot: self.slot_of(vector)?,
                index: Box::new(self.expr(func, index, locals)?),
            },
            Expr::Binary { op, lhs, rhs } => CExpr::Bin {
                op: *op,
                lhs: Box::new(self.expr(func, lhs, locals)?),
                rhs: Box::new(self.expr(func, rhs, locals)?),
            },
            Expr::Neg(x) => CExpr::Neg(Box::new(self.expr(func, x, locals)?)),
            Expr::Not(x) => CExpr::Not(Box::new(self.expr(func, x, locals)?)),
            Expr::Fabs(x) => CExpr::Fabs(Box::new(self.expr(func, x, locals)?)),
            Expr::SetSize { set } => {
                // Set sizes are fixed once the graph is loaded; the executor
                // rewrites them to constants before compiling (see
                // `Executor::bind_sizes`), so reaching one here is a bug.
                return Err(ExecError::Internal(format!("unbound size() of `{set}`")));
            }
            other => {
                return Err(ExecError::Internal(format!(
                    "unsupported expression in function `{}`: {other:?}",
                    func.name
                )))
            }
        })
    }
}

/// Evaluation context for one apply/filter invocation. Reused across edges
/// by resetting `params`; locals are overwritten by SetLocal before use.
pub struct EvalCtx<'a> {
    pub store: &'a VectorStore,
    pub globals: &'a [RtVal],
    pub params: [i64; 3],
    pub locals: Vec<RtVal>,
    pub output: bool,
    pub modified: bool,
    pub atomics: u64,
    /// Active segment buffers (only during buffered segment execution),
    /// keyed by slot id.
    pub buffers: Option<&'a HashMap<usize, SegmentBuffer>>,
    /// Use atomic ops on buffer cells (inner-parallel segments).
    pub buffer_atomic: bool,
}

impl<'a> EvalCtx<'a> {
    pub fn new(store: &'a VectorStore, globals: &'a [RtVal], n_locals: usize) -> EvalCtx<'a> {
        EvalCtx {
            store,
            globals,
            params: [0; 3],
            locals: vec![RtVal::Int(0); n_locals.max(4)],
            output: false,
            modified: false,
            atomics: 0,
            buffers: None,
            buffer_atomic: false,
        }
    }

    #[inline]
    pub fn eval(&self, e: &CExpr) -> RtVal {
        match e {
            CExpr::Const(v) => *v,
            CExpr::Param(p) => RtVal::Int(self.params[*p as usize]),
            CExpr::Local(i) => self.locals[*i as usize],
            CExpr::Global(g) => self.globals[*g as usize],
            CExpr::VecLoad { slot, index } => {
                let v = self.eval(index).as_i64() as usize;
                self.store.get(*slot, v)
            }
            CExpr::Bin { op, lhs, rhs } => {
                let l = self.eval(lhs);
                let r = self.eval(rhs);
                bin_op(*op, l, r)
            }
            CExpr::Neg(x) => match self.eval(x) {
                RtVal::Int(v) => RtVal::Int(-v),
                RtVal::Double(v) => RtVal::Double(-v),
                RtVal::Bool(b) => RtVal::Int(-(b as i64)),
            },
            CExpr::Not(x) => RtVal::Bool(!self.eval(x).as_bool()),
            CExpr::Fabs(x) => RtVal::Double(self.eval(x).as_f64().abs()),
        }
    }

    /// Run a compiled function body. `output`/`modified` are left set.
    pub fn run(&mut self, func: &CompiledFunc) {
        self.output = false;
        self.modified = false;
        self.exec_block(&func.body);
    }

    fn exec_block(&mut self, body: &[CStmt]) {
        for stmt in body {
            match stmt {
                CStmt::SetLocal { idx, value } => {
                    let v = self.eval(value);
                    if self.locals.len() <= *idx as usize {
                        self.locals.resize(*idx as usize + 1, RtVal::Int(0));
                    }
                    self.locals[*idx as usize] = v;
                }
                CStmt::SetOutput(value) => self.output = self.eval(value).as_bool(),
                CStmt::VecStore { slot, index, value, mode, tracks } => {
                    let v = self.eval(index).as_i64() as usize;
                    let val = self.eval(value);
                    let changed = match mode {
                        WriteMode::Plain => self.store.store(*slot, v, val),
                        WriteMode::Atomic => {
                            self.atomics += 1;
                            self.store.swap(*slot, v, val)
                        }
                        WriteMode::Buffer => {
                            // Plain writes are never buffered; fall back to
                            // an atomic exchange on the global cell.
                            self.atomics += 1;
                            self.store.swap(*slot, v, val)
                        }
                    };
                    if *tracks && changed {
                        self.modified = true;
                    }
                }
                CStmt::VecReduce { slot, index, op, value, mode, tracks } => {
                    let v = self.eval(index).as_i64() as usize;
                    let val = self.eval(value);
                    let changed = match mode {
                        WriteMode::Plain => self.store.reduce_plain(*slot, v, *op, val),
                        WriteMode::Atomic => {
                            let (changed, attempts) = self.store.reduce_atomic(*slot, v, *op, val);
                            self.atomics += attempts.max(1);
                            changed
                        }
                        WriteMode::Buffer => {
                            let buf = self
                                .buffers
                                .expect("buffered write outside segment execution")
                                .get(&slot.0)
                                .expect("missing segment buffer");
                            if self.buffer_atomic {
                                self.atomics += buf.reduce_atomic(v, val).max(1);
                            } else {
                                buf.reduce_plain(v, val);
                            }
                            // Global change is decided at merge time.
                            false
                        }
                    };
                    if *tracks && changed {
                        self.modified = true;
                    }
                }
                CStmt::If { cond, then_body, else_body } => {
                    if self.eval(cond).as_bool() {
                        self.exec_block(then_body);
                    } else {
                        self.exec_block(else_body);
                    }
                }
            }
        }
    }
}

#[inline]
pub fn bin_op(op: BinOp, l: RtVal, r: RtVal) -> RtVal {
    use RtVal::*;
    let both_int = matches!(l, Int(_) | Bool(_)) && matches!(r, Int(_) | Bool(_));
    match op {
        BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
            if both_int && op != BinOp::Div {
                let (a, b) = (l.as_i64(), r.as_i64());
                Int(match op {
                    BinOp::Add => a.wrapping_add(b),
                    BinOp::Sub => a.wrapping_sub(b),
                    BinOp::Mul => a.wrapping_mul(b),
                    _ => unreachable!(),
                })
            } else if both_int {
                let (a, b) = (l.as_i64(), r.as_i64());
                if b == 0 {
                    Int(0)
                } else {
                    Int(a / b)
                }
            } else {
                let (a, b) = (l.as_f64(), r.as_f64());
                Double(match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    _ => unreachable!(),
                })
            }
        }
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
            let res = if both_int {
                let (a, b) = (l.as_i64(), r.as_i64());
                match op {
                    BinOp::Eq => a == b,
                    BinOp::Ne => a != b,
                    BinOp::Lt => a < b,
                    BinOp::Le => a <= b,
                    BinOp::Gt => a > b,
                    BinOp::Ge => a >= b,
                    _ => unreachable!(),
                }
            } else {
                let (a, b) = (l.as_f64(), r.as_f64());
                match op {
                    BinOp::Eq => a == b,
                    BinOp::Ne => a != b,
                    BinOp::Lt => a < b,
                    BinOp::Le => a <= b,
                    BinOp::Gt => a > b,
                    BinOp::Ge => a >= b,
                    _ => unreachable!(),
                }
            };
            Bool(res)
        }
        BinOp::And => Bool(l.as_bool() && r.as_bool()),
        BinOp::Or => Bool(l.as_bool() || r.as_bool()),
    }
}

/// Detect the claim-once pattern given compiled apply and dst-filter bodies.
pub fn detect_claim(
    apply: &CompiledFunc,
    dst_filter: Option<&CompiledFunc>,
    tracked_slot: Option<SlotId>,
    store: &VectorStore,
) -> Option<ClaimSpec> {
    let tracked = tracked_slot?;
    let filter = dst_filter?;
    // Apply body: exactly one plain store to the tracked slot, indexed by dst.
    let [CStmt::VecStore { slot, index, value, .. }] = apply.body.as_slice() else {
        return None;
    };
    if *slot != tracked || !matches!(index, CExpr::Param(1)) {
        return None;
    }
    // Filter body: `output = tracked[v] == <const>` (either operand order).
    let [CStmt::SetOutput(CExpr::Bin { op: BinOp::Eq, lhs, rhs })] = filter.body.as_slice() else {
        return None;
    };
    let (load, konst) = match (lhs.as_ref(), rhs.as_ref()) {
        (CExpr::VecLoad { slot, index }, CExpr::Const(c))
            if *slot == tracked && matches!(index.as_ref(), CExpr::Param(0)) =>
        {
            (slot, c)
        }
        (CExpr::Const(c), CExpr::VecLoad { slot, index })
            if *slot == tracked && matches!(index.as_ref(), CExpr::Param(0)) =>
        {
            (slot, c)
        }
        _ => return None,
    };
    let ty = store.slot(*load).ty;
    Some(ClaimSpec { slot: tracked, expected_bits: konst.to_bits(ty), value: value.clone() })
}

/// Negated-claim constants need the same bit pattern as storage; helper for
/// checking a vertex still holds the expected value (pull-side prefilter).
pub fn claim_open(store: &VectorStore, claim: &ClaimSpec, v: usize) -> bool {
    store.load(claim.slot, v) == claim.expected_bits
}

/// Run a claim: CAS expected -> value. Returns success.
#[inline]
pub fn run_claim(ctx: &mut EvalCtx<'_>, claim: &ClaimSpec, serial: bool) -> bool {
    let v = ctx.params[1] as usize;
    let val = ctx.eval(&claim.value);
    if serial {
        if ctx.store.load(claim.slot, v) == claim.expected_bits {
            ctx.store.store(claim.slot, v, val);
            true
        } else {
            false
        }
    } else {
        ctx.atomics += 1;
        ctx.store.cas_claim(claim.slot, v, claim.expected_bits, val)
    }
}

/// Visited-flag table with epoch stamping, so dedup needs no O(n) clear per
/// traversal.
pub struct VisitedFlags {
    epochs: Vec<std::sync::atomic::AtomicU32>,
    current: u32,
}

impl VisitedFlags {
    pub fn new(n: usize) -> VisitedFlags {
        VisitedFlags {
            epochs: (0..n).map(|_| std::sync::atomic::AtomicU32::new(0)).collect(),
            current: 0,
        }
    }

    pub fn next_epoch(&mut self) {
        self.current = self.current.wrapping_add(1);
        if self.current == 0 {
            for e in &self.epochs {
                e.store(0, Ordering::Relaxed);
            }
            self.current = 1;
        }
    }

    /// First claim of `v` this epoch?
    #[inline]
    pub fn claim(&self, v: usize) -> bool {
        self.epochs[v].swap(self.current, Ordering::Relaxed) != self.current
    }
}
