//! Program-structure passes: loop fusion, loop splitting, apply-function
//! fusion, and vertex-data initializer lowering.
//!
//! All passes are IR-to-IR. Statements that merely move keep their ids;
//! cloned statements get fresh ids.

use crate::ast::*;
use crate::labels::{self, LabelError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error("`{0}` is not a for loop")]
    NotAForLoop(String),
    #[error("`{0}` and `{1}` are not sibling for loops")]
    NonSiblingLoops(String, String),
    #[error("loop bounds must be integer literals to fuse differing ranges")]
    NonLiteralBounds,
    #[error("split point {split} outside loop range {lo}:{hi}")]
    SplitOutOfRange { split: i64, lo: i64, hi: i64 },
    #[error("statements `{0}` and `{1}` have incompatible apply chains")]
    IncompatibleChains(String, String),
    #[error("apply functions `{0}` and `{1}` have mismatched parameter lists")]
    ParamMismatch(String, String),
    #[error("function name `{0}` is already declared")]
    DuplicateFunction(String),
}

fn clone_fresh(stmts: &[LStmt]) -> Vec<LStmt> {
    stmts
        .iter()
        .map(|s| {
            let stmt = match &s.stmt {
                Stmt::For { var, lo, hi, body } => Stmt::For {
                    var: var.clone(),
                    lo: lo.clone(),
                    hi: hi.clone(),
                    body: clone_fresh(body),
                },
                Stmt::While { cond, body } => {
                    Stmt::While { cond: cond.clone(), body: clone_fresh(body) }
                }
                Stmt::If { cond, then_body, else_body } => Stmt::If {
                    cond: cond.clone(),
                    then_body: clone_fresh(then_body),
                    else_body: clone_fresh(else_body),
                },
                Stmt::NameNode { body } => Stmt::NameNode { body: clone_fresh(body) },
                other => other.clone(),
            };
            LStmt::new(s.label.clone(), stmt)
        })
        .collect()
}

/// Substitute free occurrences of name `from` with `to` in an expression.
fn rename_expr(e: &mut Expr, from: &str, to: &str) {
    match e {
        Expr::Name(n) => {
            if n == from {
                *n = to.to_string();
            }
        }
        Expr::VectorIndex { index, .. } => rename_expr(index, from, to),
        Expr::Binary { lhs, rhs, .. } => {
            rename_expr(lhs, from, to);
            rename_expr(rhs, from, to);
        }
        Expr::Neg(x) | Expr::Not(x) | Expr::Fabs(x) => rename_expr(x, from, to),
        Expr::VertexSetSize { set } => rename_expr(set, from, to),
        Expr::NewVertexset { count, .. } => rename_expr(count, from, to),
        Expr::VertexsetFilter { set, .. } | Expr::VertexsetApply { set, .. } => {
            rename_expr(set, from, to)
        }
        Expr::AddVertex { set, vertex } => {
            rename_expr(set, from, to);
            rename_expr(vertex, from, to);
        }
        Expr::EdgesetApply(chain) => {
            if let Some(f) = &mut chain.from {
                rename_expr(f, from, to);
            }
            if let Some(t) = &mut chain.to {
                rename_expr(t, from, to);
            }
        }
        Expr::IntLit(_) | Expr::FloatLit(_) | Expr::BoolLit(_) | Expr::SetSize { .. } => {}
    }
}

fn rename_stmts(stmts: &mut [LStmt], from: &str, to: &str) {
    for s in stmts {
        match &mut s.stmt {
            Stmt::VarDecl { name, init, .. } => {
                rename_expr(init, from, to);
                if name == from {
                    // Shadowing re-declaration ends the substitution scope;
                    // our corpus never does this, but stay correct.
                    return;
                }
            }
            Stmt::Assign { target, value } | Stmt::Reduce { target, value, .. } => {
                if let LValue::VectorElem { index, .. } = target {
                    rename_expr(index, from, to);
                }
                if let LValue::Scalar(n) = target {
                    if n == from {
                        *n = to.to_string();
                    }
                }
                rename_expr(value, from, to);
            }
            Stmt::For { var, lo, hi, body } => {
                rename_expr(lo, from, to);
                rename_expr(hi, from, to);
                if var != from {
                    rename_stmts(body, from, to);
                }
            }
            Stmt::While { cond, body } => {
                rename_expr(cond, from, to);
                rename_stmts(body, from, to);
            }
            Stmt::If { cond, then_body, else_body } => {
                rename_expr(cond, from, to);
                rename_stmts(then_body, from, to);
                rename_stmts(else_body, from, to);
            }
            Stmt::ExprStmt(e) => rename_expr(e, from, to),
            Stmt::VertexsetApply { set, .. } => rename_expr(set, from, to),
            Stmt::AddVertex { vertex, .. } => rename_expr(vertex, from, to),
            Stmt::NameNode { body } => rename_stmts(body, from, to),
            Stmt::Break => {}
        }
    }
}

/// Run `f` on the statement list that directly contains `id`.
fn with_parent_list<R>(
    stmts: &mut Vec<LStmt>,
    id: StmtId,
    f: &mut dyn FnMut(&mut Vec<LStmt>, usize) -> R,
) -> Option<R> {
    if let Some(pos) = stmts.iter().position(|s| s.id == id) {
        return Some(f(stmts, pos));
    }
    for s in stmts {
        let found = match &mut s.stmt {
            Stmt::For { body, .. } | Stmt::While { body, .. } | Stmt::NameNode { body } => {
                with_parent_list(body, id, f)
            }
            Stmt::If { then_body, else_body, .. } => with_parent_list(then_body, id, f)
                .or_else(|| with_parent_list(else_body, id, f)),
            _ => None,
        };
        if found.is_some() {
            return found;
        }
    }
    None
}

fn literal_int(e: &Expr) -> Option<i64> {
    match e {
        Expr::IntLit(v) => Some(*v),
        Expr::Neg(inner) => literal_int(inner).map(|v| -v),
        _ => None,
    }
}

/// Fuse two sibling for loops into one loop whose body holds the original
/// bodies under name nodes, so inner labels stay reachable as
/// `fused:first:...` and `fused:second:...`. Differing ranges get a
/// prologue/epilogue loop covering the non-overlapping part.
pub fn fuse_for_loops(
    ir: &mut ProgramIR,
    first: &str,
    second: &str,
    fused_label: &str,
) -> Result<(), TransformError> {
    let id1 = labels::resolve_label(ir, first)?;
    let id2 = labels::resolve_label(ir, second)?;
    if id1 == id2 {
        return Err(TransformError::NonSiblingLoops(first.into(), second.into()));
    }

    let done = with_parent_list(&mut ir.main, id1, &mut |list, pos1| {
        let Some(pos2) = list.iter().position(|s| s.id == id2) else {
            return Err(TransformError::NonSiblingLoops(first.into(), second.into()));
        };
        let (loop1, loop2) = (list[pos1].clone(), list[pos2].clone());
        let Stmt::For { var: var1, lo: lo1, hi: hi1, body: body1 } = loop1.stmt else {
            return Err(TransformError::NotAForLoop(first.into()));
        };
        let Stmt::For { var: var2, lo: lo2, hi: hi2, body: mut body2 } = loop2.stmt else {
            return Err(TransformError::NotAForLoop(second.into()));
        };
        if var2 != var1 {
            rename_stmts(&mut body2, &var2, &var1);
        }

        let same_lo = lo1 == lo2;
        let same_hi = hi1 == hi2;
        let mut prologue = None;
        let mut epilogue = None;
        let (fused_lo, fused_hi);
        if same_lo && same_hi {
            fused_lo = lo1.clone();
            fused_hi = hi1.clone();
        } else {
            let (l1, h1, l2, h2) = match (
                literal_int(&lo1),
                literal_int(&hi1),
                literal_int(&lo2),
                literal_int(&hi2),
            ) {
                (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
                _ => return Err(TransformError::NonLiteralBounds),
            };
            fused_lo = Expr::IntLit(l1.max(l2));
            fused_hi = Expr::IntLit(h1.min(h2));
            if l1 != l2 {
                // The earlier-starting loop runs alone first.
                let (body, lo, hi) =
                    if l1 < l2 { (&body1, l1, l2) } else { (&body2, l2, l1) };
                prologue = Some(LStmt::new(
                    Some(format!("{fused_label}_prologue")),
                    Stmt::For {
                        var: var1.clone(),
                        lo: Expr::IntLit(lo),
                        hi: Expr::IntLit(hi),
                        body: clone_fresh(body),
                    },
                ));
            }
            if h1 != h2 {
                // The later-ending loop finishes alone.
                let (body, lo, hi) =
                    if h1 > h2 { (&body1, h2, h1) } else { (&body2, h1, h2) };
                epilogue = Some(LStmt::new(
                    Some(format!("{fused_label}_epilogue")),
                    Stmt::For {
                        var: var1.clone(),
                        lo: Expr::IntLit(lo),
                        hi: Expr::IntLit(hi),
                        body: clone_fresh(body),
                    },
                ));
            }
        }

        let fused_body = vec![
            LStmt::new(loop1.label.clone(), Stmt::NameNode { body: body1 }),
            LStmt::new(loop2.label.clone(), Stmt::NameNode { body: body2 }),
        ];
        let fused = LStmt::new(
            Some(fused_label.to_string()),
            Stmt::For { var: var1, lo: fused_lo, hi: fused_hi, body: fused_body },
        );

        // Replace loop1 with [prologue?, fused, epilogue?]; drop loop2.
        list.remove(pos2);
        let pos1 = if pos2 < pos1 { pos1 - 1 } else { pos1 };
        list.remove(pos1);
        let mut insert_at = pos1;
        if let Some(p) = prologue {
            list.insert(insert_at, p);
            insert_at += 1;
        }
        list.insert(insert_at, fused);
        insert_at += 1;
        if let Some(e) = epilogue {
            list.insert(insert_at, e);
        }
        Ok(())
    });
    match done {
        Some(r) => r,
        None => Err(TransformError::NonSiblingLoops(first.into(), second.into())),
    }
}

/// Split a for loop at an absolute split point into two consecutive loops
/// with cloned bodies, labeled `first_label` and `second_label`.
pub fn split_for_loop(
    ir: &mut ProgramIR,
    target: &str,
    first_label: &str,
    second_label: &str,
    split_point: i64,
) -> Result<(), TransformError> {
    let id = labels::resolve_label(ir, target)?;
    let done = with_parent_list(&mut ir.main, id, &mut |list, pos| {
        let Stmt::For { var, lo, hi, body } = &list[pos].stmt else {
            return Err(TransformError::NotAForLoop(target.into()));
        };
        let (Some(lo_v), Some(hi_v)) = (literal_int(lo), literal_int(hi)) else {
            return Err(TransformError::NonLiteralBounds);
        };
        if split_point < lo_v || split_point > hi_v {
            return Err(TransformError::SplitOutOfRange { split: split_point, lo: lo_v, hi: hi_v });
        }
        let first = LStmt::new(
            Some(first_label.to_string()),
            Stmt::For {
                var: var.clone(),
                lo: Expr::IntLit(lo_v),
                hi: Expr::IntLit(split_point),
                body: body.clone(),
            },
        );
        let second = LStmt::new(
            Some(second_label.to_string()),
            Stmt::For {
                var: var.clone(),
                lo: Expr::IntLit(split_point),
                hi: Expr::IntLit(hi_v),
                body: clone_fresh(body),
            },
        );
        list.remove(pos);
        list.insert(pos, second);
        list.insert(pos, first);
        Ok(())
    });
    done.unwrap_or(Err(TransformError::NotAForLoop(target.into())))
}

fn chain_of(stmt: &Stmt) -> Option<&ApplyChain> {
    match stmt {
        Stmt::ExprStmt(Expr::EdgesetApply(c)) => Some(c),
        Stmt::Assign { value: Expr::EdgesetApply(c), .. } => Some(c),
        _ => None,
    }
}

/// Fuse the apply functions of two edgeset-apply statements with identical
/// chains. The statement at `first` applies the new function; the statement
/// at `second` is removed.
pub fn fuse_apply_functions(
    ir: &mut ProgramIR,
    first: &str,
    second: &str,
    fused_name: &str,
) -> Result<(), TransformError> {
    let id1 = labels::resolve_label(ir, first)?;
    let id2 = labels::resolve_label(ir, second)?;
    if ir.func(fused_name).is_some() {
        return Err(TransformError::DuplicateFunction(fused_name.into()));
    }

    let incompatible = || TransformError::IncompatibleChains(first.into(), second.into());

    let s1 = labels::find_stmt(ir, id1).ok_or_else(|| LabelError::NotFound(first.into()))?;
    let s2 = labels::find_stmt(ir, id2).ok_or_else(|| LabelError::NotFound(second.into()))?;
    let c1 = chain_of(&s1.stmt).ok_or_else(incompatible)?;
    let c2 = chain_of(&s2.stmt).ok_or_else(incompatible)?;

    let plain = |c: &ApplyChain| matches!(c.terminator, ChainTerminator::Apply { .. });
    if !(plain(c1) && plain(c2))
        || c1.edgeset != c2.edgeset
        || c1.from != c2.from
        || c1.to != c2.to
        || c1.src_filter != c2.src_filter
        || c1.dst_filter != c2.dst_filter
        || c1.edge_filter != c2.edge_filter
    {
        return Err(incompatible());
    }

    let f1 = ir
        .func(c1.apply_func())
        .ok_or_else(|| LabelError::NotFound(c1.apply_func().into()))?
        .clone();
    let f2 = ir
        .func(c2.apply_func())
        .ok_or_else(|| LabelError::NotFound(c2.apply_func().into()))?
        .clone();
    if f1.params.len() != f2.params.len()
        || f1.returns_bool.is_some()
        || f2.returns_bool.is_some()
    {
        return Err(TransformError::ParamMismatch(f1.name, f2.name));
    }

    // Concatenate bodies, alpha-renaming the second function's parameters
    // to the first's.
    let mut body = clone_fresh(&f1.body);
    let mut tail = clone_fresh(&f2.body);
    for (p2, p1) in f2.params.iter().zip(&f1.params) {
        if p2.name != p1.name {
            rename_stmts(&mut tail, &p2.name, &p1.name);
        }
    }
    body.extend(tail);
    ir.funcs.push(FuncDecl {
        name: fused_name.to_string(),
        params: f1.params.clone(),
        returns_bool: None,
        body,
    });

    // Point the first statement at the fused function.
    with_parent_list(&mut ir.main, id1, &mut |list, pos| {
        if let Some(chain) = match &mut list[pos].stmt {
            Stmt::ExprStmt(Expr::EdgesetApply(c)) => Some(c),
            Stmt::Assign { value: Expr::EdgesetApply(c), .. } => Some(c),
            _ => None,
        } {
            chain.terminator = ChainTerminator::Apply { func: fused_name.to_string() };
        }
    });
    // Remove the second statement.
    with_parent_list(&mut ir.main, id2, &mut |list, pos| {
        list.remove(pos);
    });
    Ok(())
}

/// Lower per-vertex vector initializers into generated vertex functions plus
/// apply statements prepended to `main`, in declaration order.
pub fn lower_vector_initializers(ir: &mut ProgramIR) -> Result<(), TransformError> {
    let mut prefix = Vec::new();
    let decls = ir.vector_decls.clone();
    for decl in &decls {
        let Some(VectorInit::PerVertex(init)) = &decl.init else {
            continue;
        };
        let set = ir
            .set_decls
            .iter()
            .find_map(|s| match s {
                SetDecl::Vertexset { name, element, .. } if *element == decl.element => {
                    Some(name.clone())
                }
                _ => None,
            })
            .ok_or_else(|| {
                TransformError::IncompatibleChains(
                    decl.name.clone(),
                    format!("no vertexset declared for element kind {}", decl.element),
                )
            })?;

        let mut fname = format!("{}_init_f", decl.name);
        while ir.func(&fname).is_some() {
            fname.push('_');
        }
        let param = "v".to_string();
        ir.funcs.push(FuncDecl {
            name: fname.clone(),
            params: vec![Param { name: param.clone(), ty: decl.element.clone() }],
            returns_bool: None,
            body: vec![LStmt::new(
                None,
                Stmt::Assign {
                    target: LValue::VectorElem {
                        vector: decl.name.clone(),
                        index: Expr::Name(param),
                    },
                    value: init.clone(),
                },
            )],
        });
        prefix.push(LStmt::new(
            None,
            Stmt::VertexsetApply { set: Expr::Name(set), func: fname },
        ));
        // The declaration keeps no per-vertex expression; storage is
        // zero-filled and the generated apply runs before user code.
        let d = ir.vector_decls.iter_mut().find(|d| d.name == decl.name).unwrap();
        d.init = None;
    }
    ir.main.splice(0..0, prefix);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::resolve_label;
    use crate::parser::parse_program;

    const TWO_LOOPS: &str = r#"
element Vertex end
element Edge end
const edges : edgeset{Edge}(Vertex,Vertex) = load(argv[1]);
x : vector{Vertex}(int) = 0;
y : vector{Vertex}(int) = 0;
func func1(src : Vertex, dst : Vertex) x[dst] += 1; end
func func2(src : Vertex, dst : Vertex) y[dst] += 1; end
func main()
    #l1# for i in 1:10
        #s1# edges.apply(func1);
    end
    #l2# for i in 1:10
        #s1# edges.apply(func2);
    end
end
"#;

    #[test]
    fn fuse_produces_name_nodes_with_scoped_labels() {
        let mut ir = parse_program(TWO_LOOPS).unwrap();
        fuse_for_loops(&mut ir, "l1", "l2", "l3").unwrap();
        let a = resolve_label(&ir, "l3:l1:s1").unwrap();
        let b = resolve_label(&ir, "l3:l2:s1").unwrap();
        assert_ne!(a, b);
        // The bare `l1` is gone; it survives as the name node at l3:l1.
        assert!(matches!(resolve_label(&ir, "l1"), Err(LabelError::NotFound(_))));
        let l1 = resolve_label(&ir, "l3:l1").unwrap();
        assert!(matches!(labels::find_stmt(&ir, l1).unwrap().stmt, Stmt::NameNode { .. }));
    }

    #[test]
    fn fuse_loop_with_itself_fails() {
        let mut ir = parse_program(TWO_LOOPS).unwrap();
        assert_eq!(
            fuse_for_loops(&mut ir, "l1", "l1", "l3"),
            Err(TransformError::NonSiblingLoops("l1".into(), "l1".into()))
        );
    }

    #[test]
    fn fuse_differing_ranges_makes_epilogue() {
        let src = TWO_LOOPS.replace("#l2# for i in 1:10", "#l2# for i in 1:7");
        let mut ir = parse_program(&src).unwrap();
        fuse_for_loops(&mut ir, "l1", "l2", "l3").unwrap();
        let epi = resolve_label(&ir, "l3_epilogue").unwrap();
        let stmt = labels::find_stmt(&ir, epi).unwrap();
        match &stmt.stmt {
            Stmt::For { lo, hi, body, .. } => {
                assert_eq!(literal_int(lo), Some(7));
                assert_eq!(literal_int(hi), Some(10));
                // Epilogue carries only the first loop's body.
                assert_eq!(body.len(), 1);
            }
            _ => panic!("epilogue is not a for loop"),
        }
    }

    #[test]
    fn fuse_apply_functions_replaces_first_and_removes_second() {
        let mut ir = parse_program(TWO_LOOPS).unwrap();
        fuse_for_loops(&mut ir, "l1", "l2", "l3").unwrap();
        fuse_apply_functions(&mut ir, "l3:l1:s1", "l3:l2:s1", "fusedFunc").unwrap();
        let fused = ir.func("fusedFunc").expect("fused function declared");
        assert_eq!(fused.body.len(), 2);
        assert!(matches!(resolve_label(&ir, "l3:l2:s1"), Err(LabelError::NotFound(_))));
        let id = resolve_label(&ir, "l3:l1:s1").unwrap();
        let stmt = labels::find_stmt(&ir, id).unwrap();
        assert_eq!(chain_of(&stmt.stmt).unwrap().apply_func(), "fusedFunc");
    }

    #[test]
    fn fuse_rejects_extra_filter() {
        let src = TWO_LOOPS.replace("edges.apply(func2)", "edges.dstFilter(g).apply(func2)")
            + "\n"; // g is undeclared but fusion fails on chain shape first
        let mut ir = parse_program(&src).unwrap();
        fuse_for_loops(&mut ir, "l1", "l2", "l3").unwrap();
        assert!(matches!(
            fuse_apply_functions(&mut ir, "l3:l1:s1", "l3:l2:s1", "fusedFunc"),
            Err(TransformError::IncompatibleChains(..))
        ));
    }

    #[test]
    fn split_for_loop_clones_and_relabels() {
        let src = r#"
element Vertex end
element Edge end
const edges : edgeset{Edge}(Vertex,Vertex) = load(argv[1]);
func f(src : Vertex, dst : Vertex) end
func main()
    #l1# for i in 1:11
        #s1# edges.apply(f);
    end
end
"#;
        let mut ir = parse_program(src).unwrap();
        split_for_loop(&mut ir, "l1", "la", "lb", 4).unwrap();
        let a = resolve_label(&ir, "la:s1").unwrap();
        let b = resolve_label(&ir, "lb:s1").unwrap();
        assert_ne!(a, b);
        let la = resolve_label(&ir, "la").unwrap();
        match &labels::find_stmt(&ir, la).unwrap().stmt {
            Stmt::For { lo, hi, .. } => {
                assert_eq!((literal_int(lo), literal_int(hi)), (Some(1), Some(4)));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn split_at_range_start_and_out_of_range() {
        let src = r#"
element Vertex end
element Edge end
const edges : edgeset{Edge}(Vertex,Vertex) = load(argv[1]);
func f(src : Vertex, dst : Vertex) end
func main()
    #l1# for i in 1:11
        #s1# edges.apply(f);
    end
end
"#;
        let mut ir = parse_program(src).unwrap();
        split_for_loop(&mut ir, "l1", "la", "lb", 1).unwrap();
        let la = resolve_label(&ir, "la").unwrap();
        match &labels::find_stmt(&ir, la).unwrap().stmt {
            Stmt::For { lo, hi, .. } => {
                assert_eq!((literal_int(lo), literal_int(hi)), (Some(1), Some(1)));
            }
            _ => panic!(),
        }

        let mut ir2 = parse_program(src).unwrap();
        assert!(matches!(
            split_for_loop(&mut ir2, "l1", "la", "lb", 99),
            Err(TransformError::SplitOutOfRange { .. })
        ));
    }

    #[test]
    fn split_of_while_loop_fails() {
        let src = r#"
element Vertex end
element Edge end
const edges : edgeset{Edge}(Vertex,Vertex) = load(argv[1]);
func f(src : Vertex, dst : Vertex) end
func main()
    #l1# while true
        #s1# edges.apply(f);
    end
end
"#;
        let mut ir = parse_program(src).unwrap();
        assert!(matches!(
            split_for_loop(&mut ir, "l1", "la", "lb", 1),
            Err(TransformError::NotAForLoop(_))
        ));
    }

    #[test]
    fn initializer_lowering_generates_apply() {
        let src = r#"
element Vertex end
element Edge end
const edges : edgeset{Edge}(Vertex,Vertex) = load(argv[1]);
const vertices : vertexset{Vertex} = edges.getVertices();
parent : vector{Vertex}(int) = -1;
zeroed : vector{Vertex}(int);
func main()
end
"#;
        let mut ir = parse_program(src).unwrap();
        lower_vector_initializers(&mut ir).unwrap();
        assert!(ir.func("parent_init_f").is_some());
        assert_eq!(ir.main.len(), 1);
        assert!(matches!(&ir.main[0].stmt, Stmt::VertexsetApply { func, .. } if func == "parent_init_f"));
        // No initializer, no generated apply.
        assert!(ir.func("zeroed_init_f").is_none());
    }
}
