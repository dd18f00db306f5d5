//! Semantic checking: type agreement, operator arities, access-class
//! restrictions inside apply functions, and label uniqueness.
//!
//! Undeclared scalar names (like `maxIters` or `source` in the shipped
//! programs) resolve as runtime-bound program parameters of type int.

use crate::ast::*;
use crate::deps::{self, AccessError, AccessMap};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemaError {
    #[error("type error: {0}")]
    Type(String),
    #[error(transparent)]
    Access(#[from] AccessError),
    #[error("duplicate label `{0}` in one lexical scope")]
    DuplicateLabel(String),
    #[error("reduction operator used outside a function body")]
    ReductionOutsideFunction,
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
}

/// Result of a successful check: per-function access classes plus the set of
/// runtime-bound parameter names the program uses.
#[derive(Debug, Clone, Default)]
pub struct SemaInfo {
    pub access: HashMap<String, AccessMap>,
    pub runtime_params: BTreeSet<String>,
    /// Number of weight parameters apply functions over each edgeset expect.
    pub weighted_edgesets: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
enum Ty {
    Int,
    Double,
    Bool,
    Vertexset,
    Void,
}

impl Ty {
    fn of(s: ScalarType) -> Ty {
        match s {
            ScalarType::Int => Ty::Int,
            ScalarType::Double => Ty::Double,
            ScalarType::Bool => Ty::Bool,
        }
    }

    fn numeric(&self) -> bool {
        matches!(self, Ty::Int | Ty::Double)
    }
}

struct Checker<'a> {
    ir: &'a ProgramIR,
    errors: Vec<SemaError>,
    info: SemaInfo,
    /// Lexical scalar scopes (globals at the bottom); vertex params type Int.
    scopes: Vec<BTreeMap<String, Ty>>,
    in_func: bool,
}

pub fn check_semantics(ir: &ProgramIR) -> Result<SemaInfo, Vec<SemaError>> {
    let mut ck = Checker {
        ir,
        errors: Vec::new(),
        info: SemaInfo::default(),
        scopes: vec![BTreeMap::new()],
        in_func: false,
    };
    ck.run();
    if ck.errors.is_empty() {
        Ok(ck.info)
    } else {
        Err(ck.errors)
    }
}

impl<'a> Checker<'a> {
    fn error(&mut self, msg: impl Into<String>) {
        self.errors.push(SemaError::Type(msg.into()));
    }

    fn element_exists(&self, name: &str) -> bool {
        self.ir.element_decls.iter().any(|e| e.name == name)
    }

    fn run(&mut self) {
        self.check_decls();
        for f in &self.ir.funcs {
            self.check_func(f);
        }
        self.check_labels(&self.ir.main);
        // Globals already seeded by check_decls; now type main.
        self.in_func = false;
        self.scopes.push(BTreeMap::new());
        let main = self.ir.main.clone();
        self.check_stmts(&main);
        self.scopes.pop();
    }

    fn check_decls(&mut self) {
        let mut seen_elements = BTreeSet::new();
        for e in &self.ir.element_decls {
            if !seen_elements.insert(e.name.clone()) {
                self.error(format!("element kind `{}` declared twice", e.name));
            }
        }
        for s in &self.ir.set_decls {
            match s {
                SetDecl::Edgeset { element, src_element, dst_element, name, .. } => {
                    for kind in [element, src_element, dst_element] {
                        if !self.element_exists(kind) {
                            self.error(format!(
                                "edgeset `{name}` references undeclared element kind `{kind}`"
                            ));
                        }
                    }
                }
                SetDecl::Vertexset { element, edgeset, name } => {
                    if !self.element_exists(element) {
                        self.error(format!(
                            "vertexset `{name}` references undeclared element kind `{element}`"
                        ));
                    }
                    if self.ir.edgeset(edgeset).is_none() {
                        self.error(format!(
                            "vertexset `{name}` derives from undeclared edgeset `{edgeset}`"
                        ));
                    }
                }
            }
        }
        for v in &self.ir.vector_decls {
            if !self.element_exists(&v.element) {
                self.error(format!(
                    "vector `{}` references undeclared element kind `{}`",
                    v.name, v.element
                ));
            }
            if let Some(VectorInit::PerVertex(init)) = &v.init {
                let t = self.type_expr(init);
                self.require_assignable(&Ty::of(v.scalar), &t, &format!("initializer of `{}`", v.name));
            }
            if let Some(VectorInit::OutDegrees { edgeset }) = &v.init {
                if self.ir.edgeset(edgeset).is_none() {
                    self.error(format!(
                        "vector `{}` initialized from undeclared edgeset `{edgeset}`",
                        v.name
                    ));
                }
                if v.scalar != ScalarType::Int {
                    self.error(format!("degree vector `{}` must have scalar type int", v.name));
                }
            }
        }
        for sc in &self.ir.scalar_decls {
            let t = self.type_expr(&sc.init);
            self.require_assignable(&Ty::of(sc.ty), &t, &format!("initializer of `{}`", sc.name));
            self.scopes[0].insert(sc.name.clone(), Ty::of(sc.ty));
        }
        for (name, weighted) in self
            .ir
            .set_decls
            .iter()
            .filter_map(|s| match s {
                SetDecl::Edgeset { name, weighted, .. } => Some((name.clone(), *weighted)),
                _ => None,
            })
            .collect::<Vec<_>>()
        {
            if weighted {
                self.info.weighted_edgesets.insert(name);
            }
        }
    }

    fn require_assignable(&mut self, want: &Ty, got: &Ty, what: &str) {
        let ok = match (want, got) {
            (a, b) if a == b => true,
            (Ty::Double, Ty::Int) => true,
            _ => false,
        };
        if !ok {
            self.error(format!("{what}: expected {want:?}, found {got:?}"));
        }
    }

    fn check_func(&mut self, f: &FuncDecl) {
        // Parameter kinds: vertex params carry declared element kinds; an
        // optional final `int` parameter is the edge weight.
        let mut scope = BTreeMap::new();
        match f.params.len() {
            1 => {
                if !self.element_exists(&f.params[0].ty) {
                    self.error(format!(
                        "function `{}` parameter has unknown element kind `{}`",
                        f.name, f.params[0].ty
                    ));
                }
            }
            2 | 3 => {
                for p in &f.params[..2] {
                    if !self.element_exists(&p.ty) {
                        self.error(format!(
                            "function `{}` parameter has unknown element kind `{}`",
                            f.name, p.ty
                        ));
                    }
                }
                if f.params.len() == 3 && f.params[2].ty != "int" {
                    self.error(format!(
                        "function `{}` weight parameter must be int, found `{}`",
                        f.name, f.params[2].ty
                    ));
                }
            }
            0 => self.error(format!("function `{}` must take at least one parameter", f.name)),
            n => self.error(format!("function `{}` takes {n} parameters; at most 3 supported", f.name)),
        }
        for p in &f.params {
            scope.insert(p.name.clone(), Ty::Int);
        }
        if let Some(out) = &f.returns_bool {
            scope.insert(out.clone(), Ty::Bool);
        }

        self.scopes.push(scope);
        self.in_func = true;
        self.check_func_body(f, &f.body);
        self.in_func = false;
        self.scopes.pop();

        // The exclusive read-only/write-only/reduction restriction is for
        // edgeset apply and filter functions; unary vertex functions access
        // everything through one parameter.
        if f.params.len() >= 2 {
            match deps::classify_accesses(f) {
                Ok(map) => {
                    self.info.access.insert(f.name.clone(), map);
                }
                Err(e) => self.errors.push(e.into()),
            }
        } else {
            self.info.access.insert(f.name.clone(), deps::classify_accesses_permissive(f));
        }
    }

    fn check_func_body(&mut self, f: &FuncDecl, stmts: &[LStmt]) {
        for s in stmts {
            match &s.stmt {
                Stmt::VarDecl { name, ty, init } => {
                    let TypeAnnot::Scalar(sc) = ty else {
                        self.error(format!(
                            "function `{}` declares a non-scalar local `{name}`",
                            f.name
                        ));
                        continue;
                    };
                    let t = self.type_expr(init);
                    self.require_assignable(&Ty::of(*sc), &t, &format!("local `{name}`"));
                    self.scopes.last_mut().unwrap().insert(name.clone(), Ty::of(*sc));
                }
                Stmt::Assign { target, value } => self.check_write(f, target, value),
                Stmt::Reduce { target, value, .. } => self.check_write(f, target, value),
                Stmt::If { cond, then_body, else_body } => {
                    let t = self.type_expr(cond);
                    if t != Ty::Bool {
                        self.error(format!("if condition in `{}` is not bool", f.name));
                    }
                    self.check_func_body(f, then_body);
                    self.check_func_body(f, else_body);
                }
                Stmt::For { .. } | Stmt::While { .. } | Stmt::Break => {
                    self.error(format!("loops are not allowed inside function `{}`", f.name));
                }
                Stmt::ExprStmt(_)
                | Stmt::VertexsetApply { .. }
                | Stmt::AddVertex { .. }
                | Stmt::NameNode { .. } => {
                    self.error(format!("set operations are not allowed inside function `{}`", f.name));
                }
            }
        }
    }

    fn check_write(&mut self, f: &FuncDecl, target: &LValue, value: &Expr) {
        let vt = self.type_expr(value);
        match target {
            LValue::Scalar(name) => {
                // Only the boolean output and locals are assignable inside a
                // function; globals stay read-only so parallel applications
                // cannot race on them.
                if self.ir.scalar_decls.iter().any(|d| d.name == *name) {
                    self.error(format!(
                        "function `{}` assigns global scalar `{name}`; globals are read-only in functions",
                        f.name
                    ));
                    return;
                }
                match self.lookup(name) {
                    Some(t) => {
                        let t = t.clone();
                        self.require_assignable(&t, &vt, &format!("assignment to `{name}`"));
                    }
                    None => self.error(format!(
                        "assignment to undeclared name `{name}` in function `{}`",
                        f.name
                    )),
                }
            }
            LValue::VectorElem { vector, index } => {
                let Some(decl) = self.ir.vector(vector) else {
                    self.error(format!("unknown vector `{vector}` in function `{}`", f.name));
                    return;
                };
                // Inside functions, vector indices must be a bare parameter.
                match index {
                    Expr::Name(n) if f.params.iter().any(|p| p.name == *n) => {}
                    _ => self.error(format!(
                        "vector `{vector}` in function `{}` must be indexed by a parameter",
                        f.name
                    )),
                }
                self.require_assignable(
                    &Ty::of(decl.scalar),
                    &vt,
                    &format!("write to `{vector}` in `{}`", f.name),
                );
            }
        }
    }

    fn lookup(&self, name: &str) -> Option<&Ty> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    fn check_labels(&mut self, stmts: &[LStmt]) {
        let mut seen = BTreeSet::new();
        for s in stmts {
            if let Some(l) = &s.label {
                if !seen.insert(l.clone()) {
                    self.errors.push(SemaError::DuplicateLabel(l.clone()));
                }
            }
            match &s.stmt {
                Stmt::For { body, .. } | Stmt::While { body, .. } | Stmt::NameNode { body } => {
                    self.check_labels(body)
                }
                Stmt::If { then_body, else_body, .. } => {
                    self.check_labels(then_body);
                    self.check_labels(else_body);
                }
                _ => {}
            }
        }
    }

    fn check_stmts(&mut self, stmts: &[LStmt]) {
        for s in stmts {
            self.check_main_stmt(s);
        }
    }

    fn check_main_stmt(&mut self, s: &LStmt) {
        match &s.stmt {
            Stmt::VarDecl { name, ty, init } => {
                let t = self.type_expr(init);
                let want = match ty {
                    TypeAnnot::Scalar(sc) => Ty::of(*sc),
                    TypeAnnot::Vertexset { element } => {
                        if !self.element_exists(element) {
                            self.error(format!(
                                "vertexset var `{name}` has unknown element kind `{element}`"
                            ));
                        }
                        Ty::Vertexset
                    }
                };
                self.require_assignable(&want, &t, &format!("var `{name}`"));
                self.scopes.last_mut().unwrap().insert(name.clone(), want);
            }
            Stmt::Assign { target, value } => {
                let vt = self.type_expr(value);
                match target {
                    LValue::Scalar(name) => match self.lookup(name).cloned() {
                        Some(t) => {
                            self.require_assignable(&t, &vt, &format!("assignment to `{name}`"));
                            if self.ir.scalar_decls.iter().any(|d| d.name == *name && !d.mutable) {
                                self.error(format!("cannot assign to const `{name}`"));
                            }
                        }
                        None => {
                            self.error(format!("assignment to undeclared name `{name}` in main"))
                        }
                    },
                    LValue::VectorElem { vector, index } => {
                        let Some(decl) = self.ir.vector(vector) else {
                            self.error(format!("unknown vector `{vector}` in main"));
                            return;
                        };
                        let it = self.type_expr(index);
                        if !it.numeric() {
                            self.error(format!("index into `{vector}` is not an integer"));
                        }
                        self.require_assignable(
                            &Ty::of(decl.scalar),
                            &vt,
                            &format!("write to `{vector}`"),
                        );
                    }
                }
            }
            Stmt::Reduce { .. } => self.errors.push(SemaError::ReductionOutsideFunction),
            Stmt::For { var, lo, hi, body } => {
                for (side, e) in [("lower", lo), ("upper", hi)] {
                    let t = self.type_expr(e);
                    if t != Ty::Int {
                        self.error(format!("{side} bound of for loop is not int"));
                    }
                }
                self.scopes.push(BTreeMap::from([(var.clone(), Ty::Int)]));
                self.check_stmts(body);
                self.scopes.pop();
            }
            Stmt::While { cond, body } => {
                let t = self.type_expr(cond);
                if t != Ty::Bool {
                    self.error("while condition is not bool".to_string());
                }
                self.scopes.push(BTreeMap::new());
                self.check_stmts(body);
                self.scopes.pop();
            }
            Stmt::If { cond, then_body, else_body } => {
                let t = self.type_expr(cond);
                if t != Ty::Bool {
                    self.error("if condition is not bool".to_string());
                }
                self.scopes.push(BTreeMap::new());
                self.check_stmts(then_body);
                self.scopes.pop();
                self.scopes.push(BTreeMap::new());
                self.check_stmts(else_body);
                self.scopes.pop();
            }
            Stmt::Break => {}
            Stmt::ExprStmt(e) => {
                self.type_expr(e);
            }
            Stmt::VertexsetApply { set, func } => {
                let t = self.type_expr(set);
                if t != Ty::Vertexset {
                    self.error("apply receiver is not a vertexset".to_string());
                }
                self.require_vertex_func(func, false);
            }
            Stmt::AddVertex { set, vertex } => {
                match self.lookup(set) {
                    Some(Ty::Vertexset) => {}
                    _ => self.error(format!("`{set}` is not a vertexset variable")),
                }
                let t = self.type_expr(vertex);
                if t != Ty::Int {
                    self.error("addVertex argument is not int".to_string());
                }
            }
            Stmt::NameNode { body } => self.check_stmts(body),
        }
    }

    fn require_vertex_func(&mut self, name: &str, needs_bool: bool) {
        match self.ir.func(name) {
            None => self.errors.push(SemaError::UnknownFunction(name.to_string())),
            Some(f) => {
                if f.params.len() != 1 {
                    self.error(format!("function `{name}` must take one vertex parameter"));
                }
                if needs_bool && f.returns_bool.is_none() {
                    self.error(format!("filter function `{name}` must declare a boolean output"));
                }
            }
        }
    }

    fn require_edge_func(&mut self, name: &str, edgeset: &str, needs_bool: bool) {
        let weighted = self.info.weighted_edgesets.contains(edgeset);
        match self.ir.func(name) {
            None => self.errors.push(SemaError::UnknownFunction(name.to_string())),
            Some(f) => {
                let n = f.params.len();
                let ok = if weighted { n == 2 || n == 3 } else { n == 2 };
                if !ok {
                    self.error(format!(
                        "function `{name}` takes {n} parameters; edgeset `{edgeset}` applies \
                         (src, dst{})",
                        if weighted { "[, weight]" } else { "" }
                    ));
                }
                if needs_bool && f.returns_bool.is_none() {
                    self.error(format!("filter function `{name}` must declare a boolean output"));
                }
            }
        }
    }

    fn type_expr(&mut self, e: &Expr) -> Ty {
        match e {
            Expr::IntLit(_) => Ty::Int,
            Expr::FloatLit(_) => Ty::Double,
            Expr::BoolLit(_) => Ty::Bool,
            Expr::Name(n) => {
                if let Some(t) = self.lookup(n) {
                    return t.clone();
                }
                if self.ir.vector(n).is_some() {
                    self.error(format!("vector `{n}` used without an index"));
                    return Ty::Int;
                }
                if self.ir.set_decls.iter().any(|s| s.name() == n) {
                    return Ty::Vertexset;
                }
                // Runtime-bound program parameter.
                self.info.runtime_params.insert(n.clone());
                Ty::Int
            }
            Expr::VectorIndex { vector, index } => {
                let it = self.type_expr(index);
                if it != Ty::Int {
                    self.error(format!("index into `{vector}` is not an integer"));
                }
                match self.ir.vector(vector) {
                    Some(d) => Ty::of(d.scalar),
                    None => {
                        self.error(format!("unknown vector `{vector}`"));
                        Ty::Int
                    }
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                let lt = self.type_expr(lhs);
                let rt = self.type_expr(rhs);
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                        if !lt.numeric() || !rt.numeric() {
                            self.error("arithmetic on non-numeric operands".to_string());
                            Ty::Int
                        } else if lt == Ty::Double || rt == Ty::Double {
                            Ty::Double
                        } else {
                            Ty::Int
                        }
                    }
                    BinOp::Eq | BinOp::Ne => {
                        if (lt.numeric() && rt.numeric()) || lt == rt {
                            Ty::Bool
                        } else {
                            self.error("comparison of incompatible types".to_string());
                            Ty::Bool
                        }
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        if !lt.numeric() || !rt.numeric() {
                            self.error("ordering comparison on non-numeric operands".to_string());
                        }
                        Ty::Bool
                    }
                    BinOp::And | BinOp::Or => {
                        if lt != Ty::Bool || rt != Ty::Bool {
                            self.error("logical operator on non-bool operands".to_string());
                        }
                        Ty::Bool
                    }
                }
            }
            Expr::Neg(x) => {
                let t = self.type_expr(x);
                if !t.numeric() {
                    self.error("negation of non-numeric operand".to_string());
                }
                t
            }
            Expr::Not(x) => {
                if self.type_expr(x) != Ty::Bool {
                    self.error("`not` on non-bool operand".to_string());
                }
                Ty::Bool
            }
            Expr::Fabs(x) => {
                if !self.type_expr(x).numeric() {
                    self.error("fabs on non-numeric operand".to_string());
                }
                Ty::Double
            }
            Expr::SetSize { set } => {
                if !self.ir.set_decls.iter().any(|s| s.name() == *set) {
                    self.error(format!("size() on undeclared set `{set}`"));
                }
                Ty::Int
            }
            Expr::VertexSetSize { set } => {
                if self.type_expr(set) != Ty::Vertexset {
                    self.error("getVertexSetSize() receiver is not a vertexset".to_string());
                }
                Ty::Int
            }
            Expr::NewVertexset { element, count } => {
                if !self.element_exists(element) {
                    self.error(format!("new vertexset of unknown element kind `{element}`"));
                }
                if self.type_expr(count) != Ty::Int {
                    self.error("vertexset size is not int".to_string());
                }
                Ty::Vertexset
            }
            Expr::VertexsetFilter { set, func } => {
                if self.type_expr(set) != Ty::Vertexset {
                    self.error("filter receiver is not a vertexset".to_string());
                }
                self.require_vertex_func(func, true);
                Ty::Vertexset
            }
            Expr::VertexsetApply { .. } | Expr::AddVertex { .. } => {
                self.error("statement-only operation used as a value".to_string());
                Ty::Void
            }
            Expr::EdgesetApply(chain) => self.type_chain(chain),
        }
    }

    fn type_chain(&mut self, chain: &ApplyChain) -> Ty {
        if self.ir.edgeset(&chain.edgeset).is_none() {
            self.error(format!("chain on undeclared edgeset `{}`", chain.edgeset));
            return Ty::Void;
        }
        if self.in_func {
            self.error("edgeset traversal inside a function body".to_string());
        }
        for (what, e) in [("from", &chain.from), ("to", &chain.to)] {
            if let Some(e) = e {
                if self.type_expr(e) != Ty::Vertexset {
                    self.error(format!("`{what}` argument is not a vertexset"));
                }
            }
        }
        for f in [&chain.src_filter, &chain.dst_filter].into_iter().flatten() {
            self.require_vertex_func(f, true);
        }
        if let Some(f) = &chain.edge_filter {
            self.require_edge_func(f, &chain.edgeset, true);
        }
        self.require_edge_func(chain.apply_func(), &chain.edgeset, false);
        if let Some(tracked) = chain.tracked_vector() {
            if self.ir.vector(tracked).is_none() {
                self.error(format!("applyModified tracks unknown vector `{tracked}`"));
            }
        }
        match chain.terminator {
            ChainTerminator::Apply { .. } => Ty::Void,
            ChainTerminator::ApplyModified { .. } => Ty::Vertexset,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    const PRDELTA: &str = include_str!("../tests/fixtures/prdelta.gt");

    #[test]
    fn prdelta_checks_clean() {
        let ir = parse_program(PRDELTA).unwrap();
        let info = check_semantics(&ir).unwrap();
        assert!(info.runtime_params.contains("maxIters"));
        let access = &info.access["updateEdge"];
        assert_eq!(access.len(), 3);
    }

    #[test]
    fn mixed_access_is_rejected() {
        let src = r#"
element Vertex end
element Edge end
const edges : edgeset{Edge}(Vertex,Vertex) = load(argv[1]);
x : vector{Vertex}(int) = 0;
func bad(src : Vertex, dst : Vertex)
    x[dst] = x[src] + 1;
end
func main()
    edges.apply(bad);
end
"#;
        let ir = parse_program(src).unwrap();
        let errs = check_semantics(&ir).unwrap_err();
        assert!(errs.iter().any(|e| matches!(e, SemaError::Access(AccessError::MixedAccess { .. }))));
    }

    #[test]
    fn filter_functions_need_bool_output() {
        let src = r#"
element Vertex end
element Edge end
const edges : edgeset{Edge}(Vertex,Vertex) = load(argv[1]);
const vertices : vertexset{Vertex} = edges.getVertices();
func notAFilter(v : Vertex) end
func main()
    var f : vertexset{Vertex} = vertices.filter(notAFilter);
end
"#;
        let ir = parse_program(src).unwrap();
        let errs = check_semantics(&ir).unwrap_err();
        assert!(errs.iter().any(|e| matches!(e, SemaError::Type(m) if m.contains("boolean output"))));
    }

    #[test]
    fn weighted_apply_arity() {
        let src = r#"
element Vertex end
element Edge end
const edges : edgeset{Edge}(Vertex,Vertex,int) = load(argv[1]);
SP : vector{Vertex}(int) = 0;
func updateEdge(src : Vertex, dst : Vertex, weight : int)
    SP[dst] min= SP[src] + weight;
end
func main()
    edges.apply(updateEdge);
end
"#;
        let ir = parse_program(src).unwrap();
        check_semantics(&ir).unwrap();
    }

    #[test]
    fn reduction_outside_function_rejected() {
        let src = r#"
element Vertex end
element Edge end
const edges : edgeset{Edge}(Vertex,Vertex) = load(argv[1]);
x : vector{Vertex}(int) = 0;
func main()
    x[0] += 1;
end
"#;
        let ir = parse_program(src).unwrap();
        let errs = check_semantics(&ir).unwrap_err();
        assert!(errs.iter().any(|e| matches!(e, SemaError::ReductionOutsideFunction)));
    }

    #[test]
    fn duplicate_labels_in_scope_rejected() {
        let src = r#"
element Vertex end
element Edge end
const edges : edgeset{Edge}(Vertex,Vertex) = load(argv[1]);
func f(src : Vertex, dst : Vertex) end
func main()
    #s1# edges.apply(f);
    #s1# edges.apply(f);
end
"#;
        let ir = parse_program(src).unwrap();
        let errs = check_semantics(&ir).unwrap_err();
        assert!(errs.iter().any(|e| matches!(e, SemaError::DuplicateLabel(_))));
    }

    #[test]
    fn async_reduction_passes() {
        let src = r#"
element Vertex end
element Edge end
const edges : edgeset{Edge}(Vertex,Vertex) = load(argv[1]);
IDs : vector{Vertex}(int) = 1;
func updateEdge(src : Vertex, dst : Vertex)
    IDs[dst] asyncMin= IDs[src];
end
func main()
    edges.apply(updateEdge);
end
"#;
        let ir = parse_program(src).unwrap();
        check_semantics(&ir).unwrap();
    }
}
