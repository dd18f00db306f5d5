//! Pretty-printer for `ProgramIR`. Output reparses to a structurally equal
//! program (name nodes print as `namenode ... end` blocks).

use crate::ast::*;
use std::fmt::Write;

pub fn pretty_program(ir: &ProgramIR) -> String {
    let mut out = String::new();
    for e in &ir.element_decls {
        writeln!(out, "element {} end", e.name).unwrap();
    }
    for s in &ir.set_decls {
        match s {
            SetDecl::Edgeset { name, element, src_element, dst_element, weighted, argv_index } => {
                let w = if *weighted { ",int" } else { "" };
                writeln!(
                    out,
                    "const {name} : edgeset{{{element}}}({src_element},{dst_element}{w}) = load(argv[{argv_index}]);"
                )
                .unwrap();
            }
            SetDecl::Vertexset { name, element, edgeset } => {
                writeln!(out, "const {name} : vertexset{{{element}}} = {edgeset}.getVertices();")
                    .unwrap();
            }
        }
    }
    for sc in &ir.scalar_decls {
        let kw = if sc.mutable { "var" } else { "const" };
        writeln!(out, "{kw} {} : {} = {};", sc.name, sc.ty, pretty_expr(&sc.init)).unwrap();
    }
    for v in &ir.vector_decls {
        let kw = if v.is_const { "const " } else { "" };
        let init = match &v.init {
            None => String::new(),
            Some(VectorInit::PerVertex(e)) => format!(" = {}", pretty_expr(e)),
            Some(VectorInit::OutDegrees { edgeset }) => format!(" = {edgeset}.getOutDegrees()"),
        };
        writeln!(out, "{kw}{} : vector{{{}}}({}){init};", v.name, v.element, v.scalar).unwrap();
    }
    for f in &ir.funcs {
        pretty_func(f, &mut out);
    }
    out.push_str("func main()\n");
    for s in &ir.main {
        pretty_stmt(s, 1, &mut out);
    }
    out.push_str("end\n");
    out
}

fn pretty_func(f: &FuncDecl, out: &mut String) {
    let params: Vec<String> = f.params.iter().map(|p| format!("{} : {}", p.name, p.ty)).collect();
    write!(out, "func {}({})", f.name, params.join(", ")).unwrap();
    if let Some(ret) = &f.returns_bool {
        write!(out, " -> {ret} : bool").unwrap();
    }
    out.push('\n');
    for s in &f.body {
        pretty_stmt(s, 1, out);
    }
    out.push_str("end\n");
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn pretty_stmt(s: &LStmt, depth: usize, out: &mut String) {
    indent(depth, out);
    if let Some(l) = &s.label {
        write!(out, "#{l}# ").unwrap();
    }
    match &s.stmt {
        Stmt::VarDecl { name, ty, init } => {
            let ty = match ty {
                TypeAnnot::Scalar(sc) => sc.to_string(),
                TypeAnnot::Vertexset { element } => format!("vertexset{{{element}}}"),
            };
            writeln!(out, "var {name} : {ty} = {};", pretty_expr(init)).unwrap();
        }
        Stmt::Assign { target, value } => {
            writeln!(out, "{} = {};", pretty_lvalue(target), pretty_expr(value)).unwrap();
        }
        Stmt::Reduce { target, op, value } => {
            writeln!(out, "{} {op} {};", pretty_lvalue(target), pretty_expr(value)).unwrap();
        }
        Stmt::For { var, lo, hi, body } => {
            writeln!(out, "for {var} in {}:{}", pretty_expr(lo), pretty_expr(hi)).unwrap();
            for b in body {
                pretty_stmt(b, depth + 1, out);
            }
            indent(depth, out);
            out.push_str("end\n");
        }
        Stmt::While { cond, body } => {
            writeln!(out, "while ({})", pretty_expr(cond)).unwrap();
            for b in body {
                pretty_stmt(b, depth + 1, out);
            }
            indent(depth, out);
            out.push_str("end\n");
        }
        Stmt::If { cond, then_body, else_body } => {
            writeln!(out, "if {}", pretty_expr(cond)).unwrap();
            for b in then_body {
                pretty_stmt(b, depth + 1, out);
            }
            if !else_body.is_empty() {
                indent(depth, out);
                out.push_str("else\n");
                for b in else_body {
                    pretty_stmt(b, depth + 1, out);
                }
            }
            indent(depth, out);
            out.push_str("end\n");
        }
        Stmt::Break => out.push_str("break;\n"),
        Stmt::ExprStmt(e) => writeln!(out, "{};", pretty_expr(e)).unwrap(),
        Stmt::VertexsetApply { set, func } => {
            writeln!(out, "{}.apply({func});", pretty_expr(set)).unwrap()
        }
        Stmt::AddVertex { set, vertex } => {
            writeln!(out, "{set}.addVertex({});", pretty_expr(vertex)).unwrap()
        }
        Stmt::NameNode { body } => {
            out.push_str("namenode\n");
            for b in body {
                pretty_stmt(b, depth + 1, out);
            }
            indent(depth, out);
            out.push_str("end\n");
        }
    }
}

fn pretty_lvalue(lv: &LValue) -> String {
    match lv {
        LValue::Scalar(n) => n.clone(),
        LValue::VectorElem { vector, index } => format!("{vector}[{}]", pretty_expr(index)),
    }
}

fn bin_op_str(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Div => "/",
        BinOp::Eq => "==",
        BinOp::Ne => "!=",
        BinOp::Lt => "<",
        BinOp::Le => "<=",
        BinOp::Gt => ">",
        BinOp::Ge => ">=",
        BinOp::And => "and",
        BinOp::Or => "or",
    }
}

pub fn pretty_expr(e: &Expr) -> String {
    match e {
        Expr::IntLit(v) => v.to_string(),
        Expr::FloatLit(v) => {
            if v.fract() == 0.0 && v.is_finite() && v.abs() < 1e15 {
                format!("{v:.1}")
            } else {
                format!("{v}")
            }
        }
        Expr::BoolLit(b) => b.to_string(),
        Expr::Name(n) => n.clone(),
        Expr::VectorIndex { vector, index } => format!("{vector}[{}]", pretty_expr(index)),
        Expr::Binary { op, lhs, rhs } => {
            format!("({} {} {})", pretty_expr(lhs), bin_op_str(*op), pretty_expr(rhs))
        }
        Expr::Neg(x) => format!("(-{})", pretty_expr(x)),
        Expr::Not(x) => format!("(not {})", pretty_expr(x)),
        Expr::Fabs(x) => format!("fabs({})", pretty_expr(x)),
        Expr::SetSize { set } => format!("{set}.size()"),
        Expr::VertexSetSize { set } => format!("{}.getVertexSetSize()", pretty_expr(set)),
        Expr::NewVertexset { element, count } => {
            format!("new vertexset{{{element}}}({})", pretty_expr(count))
        }
        Expr::VertexsetFilter { set, func } => format!("{}.filter({func})", pretty_expr(set)),
        Expr::VertexsetApply { set, func } => format!("{}.apply({func})", pretty_expr(set)),
        Expr::AddVertex { set, vertex } => {
            format!("{}.addVertex({})", pretty_expr(set), pretty_expr(vertex))
        }
        Expr::EdgesetApply(chain) => {
            let mut s = chain.edgeset.clone();
            if let Some(f) = &chain.from {
                s += &format!(".from({})", pretty_expr(f));
            }
            if let Some(t) = &chain.to {
                s += &format!(".to({})", pretty_expr(t));
            }
            if let Some(f) = &chain.src_filter {
                s += &format!(".srcFilter({f})");
            }
            if let Some(f) = &chain.dst_filter {
                s += &format!(".dstFilter({f})");
            }
            if let Some(f) = &chain.edge_filter {
                s += &format!(".filter({f})");
            }
            match &chain.terminator {
                ChainTerminator::Apply { func } => s += &format!(".apply({func})"),
                ChainTerminator::ApplyModified { func, tracked, disable_dedup } => {
                    if *disable_dedup {
                        s += &format!(".applyModified({func}, {tracked}, true)");
                    } else {
                        s += &format!(".applyModified({func}, {tracked})");
                    }
                }
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    #[test]
    fn prdelta_round_trips() {
        let src = include_str!("../tests/fixtures/prdelta.gt");
        let ir = parse_program(src).unwrap();
        let printed = pretty_program(&ir);
        let reparsed = parse_program(&printed).unwrap_or_else(|e| {
            panic!("pretty output failed to reparse: {e}\n---\n{printed}")
        });
        assert_eq!(ir, reparsed, "round trip changed structure:\n{printed}");
    }
}
