//! Typed AST for the algorithm language (`ProgramIR`) and the scheduling
//! language (`Schedule`).
//!
//! Statement identity: every statement carries a `StmtId` assigned at parse
//! time (fresh ids are minted by transforms for cloned statements). Structural
//! equality deliberately ignores ids so that a pretty-print/reparse round trip
//! compares equal.

use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StmtId(pub u32);

static NEXT_STMT_ID: AtomicU32 = AtomicU32::new(0);

impl StmtId {
    pub fn fresh() -> StmtId {
        StmtId(NEXT_STMT_ID.fetch_add(1, Ordering::Relaxed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarType {
    Int,
    Double,
    Bool,
}

impl fmt::Display for ScalarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarType::Int => write!(f, "int"),
            ScalarType::Double => write!(f, "double"),
            ScalarType::Bool => write!(f, "bool"),
        }
    }
}

/// Type annotation as written in a declaration.
#[derive(Debug, Clone, PartialEq)]
pub enum TypeAnnot {
    Scalar(ScalarType),
    Vertexset { element: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementDecl {
    pub name: String,
}

/// `name : vector{Element}(scalar) = init;` — `is_const` records the
/// `const` keyword, which has no semantic weight beyond style.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorDecl {
    pub name: String,
    pub element: String,
    pub scalar: ScalarType,
    pub init: Option<VectorInit>,
    pub is_const: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VectorInit {
    /// Per-vertex expression, e.g. `1.0 / vertices.size()`.
    PerVertex(Expr),
    /// `edges.getOutDegrees()`
    OutDegrees { edgeset: String },
}

/// Top-level scalar declaration (`const` or `var`).
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalScalarDecl {
    pub name: String,
    pub ty: ScalarType,
    pub init: Expr,
    pub mutable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetDecl {
    /// `const edges : edgeset{Edge}(Src, Dst[, int]) = load(argv[K]);`
    Edgeset {
        name: String,
        element: String,
        src_element: String,
        dst_element: String,
        weighted: bool,
        argv_index: usize,
    },
    /// `const vertices : vertexset{Vertex} = <edgeset>.getVertices();`
    Vertexset { name: String, element: String, edgeset: String },
}

impl SetDecl {
    pub fn name(&self) -> &str {
        match self {
            SetDecl::Edgeset { name, .. } | SetDecl::Vertexset { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReduceOp {
    Sum,
    Min,
    Max,
    AsyncMin,
    AsyncMax,
}

impl ReduceOp {
    pub fn is_async(self) -> bool {
        matches!(self, ReduceOp::AsyncMin | ReduceOp::AsyncMax)
    }
}

impl fmt::Display for ReduceOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReduceOp::Sum => write!(f, "+="),
            ReduceOp::Min => write!(f, "min="),
            ReduceOp::Max => write!(f, "max="),
            ReduceOp::AsyncMin => write!(f, "asyncMin="),
            ReduceOp::AsyncMax => write!(f, "asyncMax="),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    IntLit(i64),
    FloatLit(f64),
    BoolLit(bool),
    /// Variable, parameter, global, or runtime-bound program parameter.
    Name(String),
    /// `vec[index]`
    VectorIndex { vector: String, index: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Neg(Box<Expr>),
    Not(Box<Expr>),
    /// `fabs(x)`
    Fabs(Box<Expr>),
    /// `<set>.size()`
    SetSize { set: String },
    /// `<vertexset-var>.getVertexSetSize()`
    VertexSetSize { set: Box<Expr> },
    /// `new vertexset{Element}(count)` — vertices `0..count` start active.
    NewVertexset { element: String, count: Box<Expr> },
    /// Lazy edgeset operator chain terminated by an apply-family operator.
    EdgesetApply(Box<ApplyChain>),
    /// `<vertexset>.filter(f)`
    VertexsetFilter { set: Box<Expr>, func: String },
    /// `<vertexset>.apply(f)` — statement position only.
    VertexsetApply { set: Box<Expr>, func: String },
    /// `<vertexset-var>.addVertex(v)` — statement position only.
    AddVertex { set: Box<Expr>, vertex: Box<Expr> },
}

/// The edge-traversal chain: `edges.from(F).to(T).srcFilter(f)...apply(g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApplyChain {
    pub edgeset: String,
    pub from: Option<Expr>,
    pub to: Option<Expr>,
    pub src_filter: Option<String>,
    pub dst_filter: Option<String>,
    pub edge_filter: Option<String>,
    pub terminator: ChainTerminator,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChainTerminator {
    Apply { func: String },
    ApplyModified { func: String, tracked: String, disable_dedup: bool },
}

impl ApplyChain {
    pub fn apply_func(&self) -> &str {
        match &self.terminator {
            ChainTerminator::Apply { func } => func,
            ChainTerminator::ApplyModified { func, .. } => func,
        }
    }

    pub fn tracked_vector(&self) -> Option<&str> {
        match &self.terminator {
            ChainTerminator::Apply { .. } => None,
            ChainTerminator::ApplyModified { tracked, .. } => Some(tracked),
        }
    }

    pub fn dedup_enabled(&self) -> bool {
        match &self.terminator {
            ChainTerminator::Apply { .. } => false,
            ChainTerminator::ApplyModified { disable_dedup, .. } => !disable_dedup,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LValue {
    Scalar(String),
    VectorElem { vector: String, index: Expr },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    /// `var x : T = init;`
    VarDecl { name: String, ty: TypeAnnot, init: Expr },
    Assign { target: LValue, value: Expr },
    Reduce { target: LValue, op: ReduceOp, value: Expr },
    /// `for v in lo:hi` (upper bound exclusive)
    For { var: String, lo: Expr, hi: Expr, body: Vec<LStmt> },
    While { cond: Expr, body: Vec<LStmt> },
    If { cond: Expr, then_body: Vec<LStmt>, else_body: Vec<LStmt> },
    Break,
    /// Expression evaluated for effect (edgeset apply, vertexset apply...).
    ExprStmt(Expr),
    /// `<vertexset>.apply(f)`
    VertexsetApply { set: Expr, func: String },
    /// `<vertexset-var>.addVertex(expr)`
    AddVertex { set: String, vertex: Expr },
    /// Post-transform scope marker: contributes a label scope, no behavior.
    NameNode { body: Vec<LStmt> },
}

/// Labeled statement. `id` is identity for plan attachment; it is excluded
/// from structural equality.
#[derive(Debug, Clone)]
pub struct LStmt {
    pub id: StmtId,
    pub label: Option<String>,
    pub stmt: Stmt,
}

impl PartialEq for LStmt {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.stmt == other.stmt
    }
}

impl LStmt {
    pub fn new(label: Option<String>, stmt: Stmt) -> LStmt {
        LStmt { id: StmtId::fresh(), label, stmt }
    }

    pub fn children(&self) -> &[LStmt] {
        match &self.stmt {
            Stmt::For { body, .. } | Stmt::While { body, .. } | Stmt::NameNode { body } => body,
            Stmt::If { then_body, .. } => then_body,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamRole {
    Src,
    Dst,
    Weight,
    Vertex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    /// Element kind for vertex params, or "int" for weights.
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuncDecl {
    pub name: String,
    pub params: Vec<Param>,
    /// `-> output : bool`
    pub returns_bool: Option<String>,
    pub body: Vec<LStmt>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProgramIR {
    pub element_decls: Vec<ElementDecl>,
    pub set_decls: Vec<SetDecl>,
    pub scalar_decls: Vec<GlobalScalarDecl>,
    pub vector_decls: Vec<VectorDecl>,
    pub funcs: Vec<FuncDecl>,
    pub main: Vec<LStmt>,
}

impl ProgramIR {
    pub fn func(&self, name: &str) -> Option<&FuncDecl> {
        self.funcs.iter().find(|f| f.name == name)
    }

    pub fn vector(&self, name: &str) -> Option<&VectorDecl> {
        self.vector_decls.iter().find(|v| v.name == name)
    }

    pub fn edgeset(&self, name: &str) -> Option<&SetDecl> {
        self.set_decls
            .iter()
            .find(|s| matches!(s, SetDecl::Edgeset { .. }) && s.name() == name)
    }

    /// Depth-first visit of every statement in `main`, with the scope path
    /// (labels of enclosing labeled statements) at each node.
    pub fn visit_main<'a>(&'a self, visit: &mut dyn FnMut(&[&'a str], &'a LStmt)) {
        fn walk<'a>(stmts: &'a [LStmt], scope: &mut Vec<&'a str>, visit: &mut dyn FnMut(&[&'a str], &'a LStmt)) {
            for s in stmts {
                visit(scope, s);
                let pushed = if let Some(l) = &s.label {
                    scope.push(l);
                    true
                } else {
                    false
                };
                match &s.stmt {
                    Stmt::For { body, .. } | Stmt::While { body, .. } | Stmt::NameNode { body } => {
                        walk(body, scope, visit)
                    }
                    Stmt::If { then_body, else_body, .. } => {
                        walk(then_body, scope, visit);
                        walk(else_body, scope, visit);
                    }
                    _ => {}
                }
                if pushed {
                    scope.pop();
                }
            }
        }
        let mut scope = Vec::new();
        walk(&self.main, &mut scope, visit);
    }
}

// ---------------------------------------------------------------------------
// Scheduling language
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DirectionOption {
    SparsePush,
    DensePush,
    DensePull,
    DensePullSparsePush,
    DensePushSparsePush,
}

impl DirectionOption {
    pub fn as_str(self) -> &'static str {
        match self {
            DirectionOption::SparsePush => "SparsePush",
            DirectionOption::DensePush => "DensePush",
            DirectionOption::DensePull => "DensePull",
            DirectionOption::DensePullSparsePush => "DensePull-SparsePush",
            DirectionOption::DensePushSparsePush => "DensePush-SparsePush",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "SparsePush" => DirectionOption::SparsePush,
            "DensePush" => DirectionOption::DensePush,
            "DensePull" => DirectionOption::DensePull,
            "DensePull-SparsePush" => DirectionOption::DensePullSparsePush,
            "DensePush-SparsePush" => DirectionOption::DensePushSparsePush,
            _ => return None,
        })
    }

    pub fn is_hybrid(self) -> bool {
        matches!(self, DirectionOption::DensePullSparsePush | DirectionOption::DensePushSparsePush)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParallelOption {
    Serial,
    DynamicVertexParallel,
    StaticVertexParallel,
    EdgeAwareDynamicVertexParallel,
    EdgeParallel,
}

impl ParallelOption {
    pub fn as_str(self) -> &'static str {
        match self {
            ParallelOption::Serial => "serial",
            ParallelOption::DynamicVertexParallel => "dynamic-vertex-parallel",
            ParallelOption::StaticVertexParallel => "static-vertex-parallel",
            ParallelOption::EdgeAwareDynamicVertexParallel => "edge-aware-dynamic-vertex-parallel",
            ParallelOption::EdgeParallel => "edge-parallel",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "serial" => ParallelOption::Serial,
            "dynamic-vertex-parallel" => ParallelOption::DynamicVertexParallel,
            "static-vertex-parallel" => ParallelOption::StaticVertexParallel,
            "edge-aware-dynamic-vertex-parallel" => ParallelOption::EdgeAwareDynamicVertexParallel,
            "edge-parallel" => ParallelOption::EdgeParallel,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexsetSide {
    Both,
    Src,
    Dst,
}

impl VertexsetSide {
    pub fn as_str(self) -> &'static str {
        match self {
            VertexsetSide::Both => "both",
            VertexsetSide::Src => "src-vertexset",
            VertexsetSide::Dst => "dst-vertexset",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "both" => VertexsetSide::Both,
            "src-vertexset" => VertexsetSide::Src,
            "dst-vertexset" => VertexsetSide::Dst,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DenseLayout {
    BoolArray,
    Bitvector,
}

impl DenseLayout {
    pub fn as_str(self) -> &'static str {
        match self {
            DenseLayout::BoolArray => "bool-array",
            DenseLayout::Bitvector => "bitvector",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "bool-array" => DenseLayout::BoolArray,
            "bitvector" => DenseLayout::Bitvector,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PartitionScheme {
    FixedVertexCount,
    EdgeAwareVertexCount,
}

impl PartitionScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            PartitionScheme::FixedVertexCount => "fixed-vertex-count",
            PartitionScheme::EdgeAwareVertexCount => "edge-aware-vertex-count",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "fixed-vertex-count" => PartitionScheme::FixedVertexCount,
            "edge-aware-vertex-count" => PartitionScheme::EdgeAwareVertexCount,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NumaOption {
    Serial,
    StaticParallel,
    DynamicParallel,
}

impl NumaOption {
    pub fn as_str(self) -> &'static str {
        match self {
            NumaOption::Serial => "serial",
            NumaOption::StaticParallel => "static-parallel",
            NumaOption::DynamicParallel => "dynamic-parallel",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "serial" => NumaOption::Serial,
            "static-parallel" => NumaOption::StaticParallel,
            "dynamic-parallel" => NumaOption::DynamicParallel,
            _ => return None,
        })
    }
}

/// A direction qualifier restricting a call to one side of a hybrid plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DirectionQualifier {
    SparsePush,
    DensePush,
    DensePull,
}

impl DirectionQualifier {
    pub fn as_str(self) -> &'static str {
        match self {
            DirectionQualifier::SparsePush => "SparsePush",
            DirectionQualifier::DensePush => "DensePush",
            DirectionQualifier::DensePull => "DensePull",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "SparsePush" => DirectionQualifier::SparsePush,
            "DensePush" => DirectionQualifier::DensePush,
            "DensePull" => DirectionQualifier::DensePull,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SchedulingCall {
    ConfigApplyDirection {
        target: String,
        direction: DirectionOption,
    },
    ConfigApplyParallelization {
        target: String,
        option: ParallelOption,
        grain_size: Option<u64>,
        direction: Option<DirectionQualifier>,
    },
    ConfigApplyDenseVertexSet {
        target: String,
        side: VertexsetSide,
        layout: DenseLayout,
        direction: Option<DirectionQualifier>,
    },
    ConfigApplyNumSSG {
        target: String,
        scheme: PartitionScheme,
        num_segments: u64,
        direction: Option<DirectionQualifier>,
    },
    ConfigApplyNuma {
        target: String,
        option: NumaOption,
        direction: Option<DirectionQualifier>,
    },
    FuseFields { vectors: Vec<String> },
    FuseForLoop { first: String, second: String, fused_label: String },
    FuseApplyFunctions { first: String, second: String, fused_func: String },
    SplitForLoop { target: String, first_label: String, second_label: String, split_point: i64 },
}

impl SchedulingCall {
    pub fn is_transform(&self) -> bool {
        matches!(
            self,
            SchedulingCall::FuseFields { .. }
                | SchedulingCall::FuseForLoop { .. }
                | SchedulingCall::FuseApplyFunctions { .. }
                | SchedulingCall::SplitForLoop { .. }
        )
    }
}

/// Ordered list of scheduling calls.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schedule {
    pub calls: Vec<SchedulingCall>,
}
