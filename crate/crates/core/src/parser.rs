//! Recursive-descent parser for the algorithm language and the scheduling
//! language.
//!
//! The grammar is whitespace-insensitive; simple statements end with `;`,
//! block statements with `end`. A trailing `schedule:` section in a `.gt`
//! file switches to the scheduling grammar.

use crate::ast::*;
use crate::lexer::{tokenize, LexError};
use crate::token::{Pos, Token, TokenKind};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("syntax error at {pos}: found {found}, expected {expected}")]
    Syntax { pos: Pos, found: String, expected: String },
    #[error("unknown scheduling function `{name}` at {pos}")]
    UnknownSchedulingFunction { name: String, pos: Pos },
    #[error("unknown option `{option}` for `{func}` at {pos}")]
    UnknownOption { func: String, option: String, pos: Pos },
    #[error("wrong number of arguments for `{func}` at {pos}: {detail}")]
    Arity { func: String, pos: Pos, detail: String },
}

pub struct ParsedSource {
    pub program: ProgramIR,
    pub schedule: Schedule,
}

/// Parse a whole `.gt` source, including an optional `schedule:` section.
pub fn parse_source(source: &str) -> Result<ParsedSource, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser::new(tokens);
    let program = p.program()?;
    let schedule = if p.eat_ident("schedule") {
        p.expect(&TokenKind::Colon)?;
        p.schedule()?
    } else {
        Schedule::default()
    };
    p.expect(&TokenKind::Eof)?;
    Ok(ParsedSource { program, schedule })
}

pub fn parse_program(source: &str) -> Result<ProgramIR, ParseError> {
    Ok(parse_source(source)?.program)
}

/// Parse a standalone schedule (`.sched` file). A leading `schedule:` is
/// accepted but not required.
pub fn parse_schedule(source: &str) -> Result<Schedule, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser::new(tokens);
    if p.peek_is_ident("schedule") {
        p.bump();
        p.expect(&TokenKind::Colon)?;
    }
    let schedule = p.schedule()?;
    p.expect(&TokenKind::Eof)?;
    Ok(schedule)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    edgeset_names: Vec<String>,
}

impl Parser {
    fn new(tokens: Vec<Token>) -> Parser {
        Parser { tokens, at: 0, edgeset_names: Vec::new() }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.at.min(self.tokens.len() - 1)]
    }

    fn peek_at(&self, n: usize) -> &Token {
        &self.tokens[(self.at + n).min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        if self.at < self.tokens.len() - 1 {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.peek().pos,
            found: self.peek().kind.to_string(),
            expected: expected.to_string(),
        })
    }

    fn expect(&mut self, kind: &TokenKind) -> Result<Token, ParseError> {
        if std::mem::discriminant(&self.peek().kind) == std::mem::discriminant(kind)
            && (!matches!(kind, TokenKind::Ident(_)) || self.peek().kind == *kind)
        {
            Ok(self.bump())
        } else {
            self.err(&kind.to_string())
        }
    }

    fn peek_is(&self, kind: &TokenKind) -> bool {
        self.peek().kind == *kind
    }

    fn peek_is_ident(&self, word: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(s) if s == word)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek_is(kind) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_ident(&mut self, word: &str) -> bool {
        if self.peek_is_ident(word) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match &self.peek().kind {
            TokenKind::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.err("identifier"),
        }
    }

    fn expect_ident(&mut self, word: &str) -> Result<(), ParseError> {
        if self.eat_ident(word) {
            Ok(())
        } else {
            self.err(&format!("`{word}`"))
        }
    }

    // -- program ------------------------------------------------------------

    fn program(&mut self) -> Result<ProgramIR, ParseError> {
        let mut ir = ProgramIR::default();
        loop {
            match &self.peek().kind {
                TokenKind::Eof => break,
                TokenKind::Ident(w) if w == "schedule" && self.peek_at(1).kind == TokenKind::Colon => break,
                TokenKind::Ident(w) if w == "element" => {
                    self.bump();
                    let name = self.ident()?;
                    self.expect_ident("end")?;
                    ir.element_decls.push(ElementDecl { name });
                }
                TokenKind::Ident(w) if w == "func" => {
                    let f = self.func_decl()?;
                    if f.name == "main" {
                        ir.main = f.body;
                    } else {
                        ir.funcs.push(f);
                    }
                }
                TokenKind::Ident(w) if w == "const" || w == "var" => {
                    let mutable = w == "var";
                    self.bump();
                    self.top_decl(&mut ir, mutable)?;
                }
                TokenKind::Ident(_) => self.top_decl(&mut ir, true)?,
                _ => return self.err("declaration or `func`"),
            }
        }
        Ok(ir)
    }

    /// Declaration after an optional leading `const`/`var`. `mutable` is
    /// false exactly when `const` was written.
    fn top_decl(&mut self, ir: &mut ProgramIR, mutable: bool) -> Result<(), ParseError> {
        let name = self.ident()?;
        self.expect(&TokenKind::Colon)?;
        match &self.peek().kind {
            TokenKind::Ident(w) if w == "edgeset" => {
                self.bump();
                self.expect(&TokenKind::LBrace)?;
                let element = self.ident()?;
                self.expect(&TokenKind::RBrace)?;
                self.expect(&TokenKind::LParen)?;
                let src_element = self.ident()?;
                self.expect(&TokenKind::Comma)?;
                let dst_element = self.ident()?;
                let weighted = if self.eat(&TokenKind::Comma) {
                    self.expect_ident("int")?;
                    true
                } else {
                    false
                };
                self.expect(&TokenKind::RParen)?;
                self.expect(&TokenKind::Assign)?;
                self.expect_ident("load")?;
                self.expect(&TokenKind::LParen)?;
                self.expect_ident("argv")?;
                self.expect(&TokenKind::LBracket)?;
                let argv_index = match self.bump().kind {
                    TokenKind::IntLit(v) if v >= 0 => v as usize,
                    _ => return self.err("argv index"),
                };
                self.expect(&TokenKind::RBracket)?;
                self.expect(&TokenKind::RParen)?;
                self.expect(&TokenKind::Semicolon)?;
                self.edgeset_names.push(name.clone());
                ir.set_decls.push(SetDecl::Edgeset {
                    name,
                    element,
                    src_element,
                    dst_element,
                    weighted,
                    argv_index,
                });
            }
            TokenKind::Ident(w) if w == "vertexset" => {
                self.bump();
                self.expect(&TokenKind::LBrace)?;
                let element = self.ident()?;
                self.expect(&TokenKind::RBrace)?;
                self.expect(&TokenKind::Assign)?;
                let edgeset = self.ident()?;
                self.expect(&TokenKind::Dot)?;
                self.expect_ident("getVertices")?;
                self.expect(&TokenKind::LParen)?;
                self.expect(&TokenKind::RParen)?;
                self.expect(&TokenKind::Semicolon)?;
                ir.set_decls.push(SetDecl::Vertexset { name, element, edgeset });
            }
            TokenKind::Ident(w) if w == "vector" => {
                self.bump();
                self.expect(&TokenKind::LBrace)?;
                let element = self.ident()?;
                self.expect(&TokenKind::RBrace)?;
                self.expect(&TokenKind::LParen)?;
                let scalar = self.scalar_type()?;
                self.expect(&TokenKind::RParen)?;
                let init = if self.eat(&TokenKind::Assign) {
                    Some(self.vector_init()?)
                } else {
                    None
                };
                self.expect(&TokenKind::Semicolon)?;
                ir.vector_decls.push(VectorDecl { name, element, scalar, init, is_const: !mutable });
            }
            _ => {
                let ty = self.scalar_type()?;
                self.expect(&TokenKind::Assign)?;
                let init = self.expr()?;
                self.expect(&TokenKind::Semicolon)?;
                ir.scalar_decls.push(GlobalScalarDecl { name, ty, init, mutable });
            }
        }
        Ok(())
    }

    fn vector_init(&mut self) -> Result<VectorInit, ParseError> {
        // `edges.getOutDegrees()` vs. an ordinary per-vertex expression.
        if let TokenKind::Ident(recv) = &self.peek().kind {
            if self.peek_at(1).kind == TokenKind::Dot
                && matches!(&self.peek_at(2).kind, TokenKind::Ident(m) if m == "getOutDegrees")
            {
                let recv = recv.clone();
                self.bump();
                self.bump();
                self.bump();
                self.expect(&TokenKind::LParen)?;
                self.expect(&TokenKind::RParen)?;
                return Ok(VectorInit::OutDegrees { edgeset: recv });
            }
        }
        Ok(VectorInit::PerVertex(self.expr()?))
    }

    fn scalar_type(&mut self) -> Result<ScalarType, ParseError> {
        let name = self.ident()?;
        match name.as_str() {
            "int" => Ok(ScalarType::Int),
            "double" | "float" => Ok(ScalarType::Double),
            "bool" => Ok(ScalarType::Bool),
            _ => self.err("scalar type (int, double, bool)"),
        }
    }

    fn type_annot(&mut self) -> Result<TypeAnnot, ParseError> {
        if self.peek_is_ident("vertexset") {
            self.bump();
            self.expect(&TokenKind::LBrace)?;
            let element = self.ident()?;
            self.expect(&TokenKind::RBrace)?;
            Ok(TypeAnnot::Vertexset { element })
        } else {
            Ok(TypeAnnot::Scalar(self.scalar_type()?))
        }
    }

    fn func_decl(&mut self) -> Result<FuncDecl, ParseError> {
        self.expect_ident("func")?;
        let name = self.ident()?;
        self.expect(&TokenKind::LParen)?;
        let mut params = Vec::new();
        while !self.peek_is(&TokenKind::RParen) {
            if !params.is_empty() {
                self.expect(&TokenKind::Comma)?;
            }
            let pname = self.ident()?;
            self.expect(&TokenKind::Colon)?;
            let ty = self.ident()?;
            params.push(Param { name: pname, ty });
        }
        self.expect(&TokenKind::RParen)?;
        let returns_bool = if self.eat(&TokenKind::Arrow) {
            let out = self.ident()?;
            self.expect(&TokenKind::Colon)?;
            self.expect_ident("bool")?;
            Some(out)
        } else {
            None
        };
        let body = self.stmt_block(&["end"])?;
        self.expect_ident("end")?;
        Ok(FuncDecl { name, params, returns_bool, body })
    }

    // -- statements ---------------------------------------------------------

    fn stmt_block(&mut self, terminators: &[&str]) -> Result<Vec<LStmt>, ParseError> {
        let mut out = Vec::new();
        loop {
            if self.peek_is(&TokenKind::Eof) {
                return Ok(out);
            }
            if let TokenKind::Ident(w) = &self.peek().kind {
                if terminators.contains(&w.as_str()) {
                    return Ok(out);
                }
            }
            out.push(self.stmt()?);
        }
    }

    fn stmt(&mut self) -> Result<LStmt, ParseError> {
        let label = if let TokenKind::Label(l) = &self.peek().kind {
            let l = l.clone();
            self.bump();
            Some(l)
        } else {
            None
        };
        let stmt = self.raw_stmt()?;
        Ok(LStmt::new(label, stmt))
    }

    fn raw_stmt(&mut self) -> Result<Stmt, ParseError> {
        match &self.peek().kind {
            TokenKind::Ident(w) => match w.as_str() {
                "var" => {
                    self.bump();
                    let name = self.ident()?;
                    self.expect(&TokenKind::Colon)?;
                    let ty = self.type_annot()?;
                    self.expect(&TokenKind::Assign)?;
                    let init = self.expr()?;
                    self.expect(&TokenKind::Semicolon)?;
                    Ok(Stmt::VarDecl { name, ty, init })
                }
                "for" => {
                    self.bump();
                    let var = self.ident()?;
                    self.expect_ident("in")?;
                    let lo = self.expr()?;
                    self.expect(&TokenKind::Colon)?;
                    let hi = self.expr()?;
                    let body = self.stmt_block(&["end"])?;
                    self.expect_ident("end")?;
                    Ok(Stmt::For { var, lo, hi, body })
                }
                "while" => {
                    self.bump();
                    let cond = self.expr()?;
                    let body = self.stmt_block(&["end"])?;
                    self.expect_ident("end")?;
                    Ok(Stmt::While { cond, body })
                }
                "if" => {
                    self.bump();
                    let cond = self.expr()?;
                    let then_body = self.stmt_block(&["else", "end"])?;
                    let else_body = if self.eat_ident("else") {
                        self.stmt_block(&["end"])?
                    } else {
                        Vec::new()
                    };
                    self.expect_ident("end")?;
                    Ok(Stmt::If { cond, then_body, else_body })
                }
                "break" => {
                    self.bump();
                    self.expect(&TokenKind::Semicolon)?;
                    Ok(Stmt::Break)
                }
                "namenode" => {
                    self.bump();
                    let body = self.stmt_block(&["end"])?;
                    self.expect_ident("end")?;
                    Ok(Stmt::NameNode { body })
                }
                _ => self.expr_or_assign_stmt(),
            },
            _ => self.expr_or_assign_stmt(),
        }
    }

    fn expr_or_assign_stmt(&mut self) -> Result<Stmt, ParseError> {
        let expr = self.expr()?;
        let reduce_op = match &self.peek().kind {
            TokenKind::Assign => None,
            TokenKind::PlusEq => Some(ReduceOp::Sum),
            TokenKind::MinEq => Some(ReduceOp::Min),
            TokenKind::MaxEq => Some(ReduceOp::Max),
            TokenKind::AsyncMinEq => Some(ReduceOp::AsyncMin),
            TokenKind::AsyncMaxEq => Some(ReduceOp::AsyncMax),
            _ => {
                self.expect(&TokenKind::Semicolon)?;
                return Ok(match expr {
                    Expr::VertexsetApply { set, func } => Stmt::VertexsetApply { set: *set, func },
                    Expr::AddVertex { set, vertex } => match *set {
                        Expr::Name(name) => Stmt::AddVertex { set: name, vertex: *vertex },
                        _ => return self.err("vertexset variable before `.addVertex`"),
                    },
                    other => Stmt::ExprStmt(other),
                });
            }
        };
        let is_assign = self.peek_is(&TokenKind::Assign);
        let target = match expr {
            Expr::Name(n) => LValue::Scalar(n),
            Expr::VectorIndex { vector, index } => LValue::VectorElem { vector, index: *index },
            _ => return self.err("assignable target"),
        };
        self.bump(); // the assignment / reduction token
        let value = self.expr()?;
        self.expect(&TokenKind::Semicolon)?;
        if is_assign {
            Ok(Stmt::Assign { target, value })
        } else {
            Ok(Stmt::Reduce { target, op: reduce_op.unwrap(), value })
        }
    }

    // -- expressions ----------------------------------------------------------

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.eat(&TokenKind::OrOr) {
            let rhs = self.and_expr()?;
            lhs = Expr::Binary { op: BinOp::Or, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.cmp_expr()?;
        while self.eat(&TokenKind::AndAnd) {
            let rhs = self.cmp_expr()?;
            lhs = Expr::Binary { op: BinOp::And, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.add_expr()?;
        let op = match self.peek().kind {
            TokenKind::EqEq => BinOp::Eq,
            TokenKind::NotEq => BinOp::Ne,
            TokenKind::Lt => BinOp::Lt,
            TokenKind::Le => BinOp::Le,
            TokenKind::Gt => BinOp::Gt,
            TokenKind::Ge => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.add_expr()?;
        Ok(Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) })
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.mul_expr()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
    }

    fn mul_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary_expr()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
    }

    fn unary_expr(&mut self) -> Result<Expr, ParseError> {
        match self.peek().kind {
            TokenKind::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary_expr()?)))
            }
            TokenKind::Not => {
                self.bump();
                Ok(Expr::Not(Box::new(self.unary_expr()?)))
            }
            _ => self.postfix_expr(),
        }
    }

    fn postfix_expr(&mut self) -> Result<Expr, ParseError> {
        let mut expr = self.primary_expr()?;
        loop {
            match self.peek().kind {
                TokenKind::Dot => {
                    self.bump();
                    expr = self.method_call(expr)?;
                }
                TokenKind::LBracket => {
                    let vector = match expr {
                        Expr::Name(n) => n,
                        _ => return self.err("vector name before `[`"),
                    };
                    self.bump();
                    let index = self.expr()?;
                    self.expect(&TokenKind::RBracket)?;
                    expr = Expr::VectorIndex { vector, index: Box::new(index) };
                }
                _ => return Ok(expr),
            }
        }
    }

    fn method_call(&mut self, recv: Expr) -> Result<Expr, ParseError> {
        let pos = self.peek().pos;
        let method = self.ident()?;
        let is_edgeset = matches!(&recv, Expr::Name(n) if self.edgeset_names.contains(n));
        match method.as_str() {
            "size" => {
                self.expect(&TokenKind::LParen)?;
                self.expect(&TokenKind::RParen)?;
                match recv {
                    Expr::Name(set) => Ok(Expr::SetSize { set }),
                    _ => Err(ParseError::Syntax {
                        pos,
                        found: "size() on expression".into(),
                        expected: "declared set name".into(),
                    }),
                }
            }
            "getVertexSetSize" => {
                self.expect(&TokenKind::LParen)?;
                self.expect(&TokenKind::RParen)?;
                Ok(Expr::VertexSetSize { set: Box::new(recv) })
            }
            "filter" if !is_edgeset => {
                self.expect(&TokenKind::LParen)?;
                let func = self.ident()?;
                self.expect(&TokenKind::RParen)?;
                Ok(Expr::VertexsetFilter { set: Box::new(recv), func })
            }
            "from" | "to" | "srcFilter" | "dstFilter" | "filter" | "apply" | "applyModified"
                if is_edgeset =>
            {
                let edgeset = match recv {
                    Expr::Name(n) => n,
                    _ => unreachable!(),
                };
                self.apply_chain(edgeset, method)
            }
            "apply" => {
                self.expect(&TokenKind::LParen)?;
                let func = self.ident()?;
                self.expect(&TokenKind::RParen)?;
                Ok(Expr::VertexsetApply { set: Box::new(recv), func })
            }
            "addVertex" => {
                self.expect(&TokenKind::LParen)?;
                let vertex = self.expr()?;
                self.expect(&TokenKind::RParen)?;
                Ok(Expr::AddVertex { set: Box::new(recv), vertex: Box::new(vertex) })
            }
            _ => Err(ParseError::Syntax {
                pos,
                found: format!("method `{method}`"),
                expected: "set operator".into(),
            }),
        }
    }

    /// Parse the rest of a chain on `edgeset`, starting with `first_method`
    /// whose `(` has not been consumed yet.
    fn apply_chain(&mut self, edgeset: String, first_method: String) -> Result<Expr, ParseError> {
        let mut chain = ApplyChain {
            edgeset,
            from: None,
            to: None,
            src_filter: None,
            dst_filter: None,
            edge_filter: None,
            terminator: ChainTerminator::Apply { func: String::new() },
        };
        let mut method = first_method;
        loop {
            let pos = self.peek().pos;
            self.expect(&TokenKind::LParen)?;
            match method.as_str() {
                "from" => chain.from = Some(self.expr()?),
                "to" => chain.to = Some(self.expr()?),
                "srcFilter" => chain.src_filter = Some(self.ident()?),
                "dstFilter" => chain.dst_filter = Some(self.ident()?),
                "filter" => chain.edge_filter = Some(self.ident()?),
                "apply" => {
                    let func = self.ident()?;
                    self.expect(&TokenKind::RParen)?;
                    chain.terminator = ChainTerminator::Apply { func };
                    return Ok(Expr::EdgesetApply(Box::new(chain)));
                }
                "applyModified" => {
                    let func = self.ident()?;
                    self.expect(&TokenKind::Comma)?;
                    let tracked = self.ident()?;
                    let disable_dedup = if self.eat(&TokenKind::Comma) {
                        match self.ident()?.as_str() {
                            "true" => true,
                            "false" => false,
                            _ => return self.err("`true` or `false`"),
                        }
                    } else {
                        false
                    };
                    self.expect(&TokenKind::RParen)?;
                    chain.terminator =
                        ChainTerminator::ApplyModified { func, tracked, disable_dedup };
                    return Ok(Expr::EdgesetApply(Box::new(chain)));
                }
                other => {
                    return Err(ParseError::Syntax {
                        pos,
                        found: format!("`{other}`"),
                        expected: "edgeset operator (from/to/srcFilter/dstFilter/filter/apply/applyModified)"
                            .into(),
                    })
                }
            }
            self.expect(&TokenKind::RParen)?;
            // The chain is lazy: it must keep going until an apply.
            self.expect(&TokenKind::Dot)?;
            method = self.ident()?;
        }
    }

    fn primary_expr(&mut self) -> Result<Expr, ParseError> {
        match self.peek().kind.clone() {
            TokenKind::IntLit(v) => {
                self.bump();
                Ok(Expr::IntLit(v))
            }
            TokenKind::FloatLit(v) => {
                self.bump();
                Ok(Expr::FloatLit(v))
            }
            TokenKind::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&TokenKind::RParen)?;
                Ok(e)
            }
            TokenKind::Ident(w) => match w.as_str() {
                "true" => {
                    self.bump();
                    Ok(Expr::BoolLit(true))
                }
                "false" => {
                    self.bump();
                    Ok(Expr::BoolLit(false))
                }
                "fabs" => {
                    self.bump();
                    self.expect(&TokenKind::LParen)?;
                    let e = self.expr()?;
                    self.expect(&TokenKind::RParen)?;
                    Ok(Expr::Fabs(Box::new(e)))
                }
                "new" => {
                    self.bump();
                    self.expect_ident("vertexset")?;
                    self.expect(&TokenKind::LBrace)?;
                    let element = self.ident()?;
                    self.expect(&TokenKind::RBrace)?;
                    self.expect(&TokenKind::LParen)?;
                    let count = self.expr()?;
                    self.expect(&TokenKind::RParen)?;
                    Ok(Expr::NewVertexset { element, count: Box::new(count) })
                }
                _ => {
                    self.bump();
                    Ok(Expr::Name(w))
                }
            },
            _ => self.err("expression"),
        }
    }

    // -- scheduling language --------------------------------------------------

    fn schedule(&mut self) -> Result<Schedule, ParseError> {
        let mut calls = Vec::new();
        while self.peek_is_ident("program") {
            self.bump();
            while self.eat(&TokenKind::Arrow) {
                calls.push(self.scheduling_call()?);
            }
            self.eat(&TokenKind::Semicolon);
        }
        Ok(Schedule { calls })
    }

    fn string_arg(&mut self) -> Result<(String, Pos), ParseError> {
        let pos = self.peek().pos;
        match self.peek().kind.clone() {
            TokenKind::StringLit(s) => {
                self.bump();
                Ok((s, pos))
            }
            _ => self.err("string argument"),
        }
    }

    fn int_arg(&mut self) -> Result<(i64, Pos), ParseError> {
        let pos = self.peek().pos;
        match self.peek().kind {
            TokenKind::IntLit(v) => {
                self.bump();
                Ok((v, pos))
            }
            _ => self.err("integer argument"),
        }
    }

    fn scheduling_call(&mut self) -> Result<SchedulingCall, ParseError> {
        let pos = self.peek().pos;
        let name = self.ident()?;
        self.expect(&TokenKind::LParen)?;
        let call = match name.as_str() {
            "configApplyDirection" => {
                let (target, _) = self.string_arg()?;
                self.expect(&TokenKind::Comma)?;
                let (dir, dpos) = self.string_arg()?;
                let direction = DirectionOption::parse(&dir).ok_or(ParseError::UnknownOption {
                    func: name.clone(),
                    option: dir,
                    pos: dpos,
                })?;
                SchedulingCall::ConfigApplyDirection { target, direction }
            }
            "configApplyParallelization" => {
                let (target, _) = self.string_arg()?;
                self.expect(&TokenKind::Comma)?;
                let (opt, opos) = self.string_arg()?;
                let option = ParallelOption::parse(&opt).ok_or(ParseError::UnknownOption {
                    func: name.clone(),
                    option: opt,
                    pos: opos,
                })?;
                let mut grain_size = None;
                let mut direction = None;
                while self.eat(&TokenKind::Comma) {
                    match self.peek().kind.clone() {
                        TokenKind::IntLit(v) if v > 0 => {
                            self.bump();
                            grain_size = Some(v as u64);
                        }
                        TokenKind::StringLit(s) => {
                            let qpos = self.peek().pos;
                            self.bump();
                            direction = Some(DirectionQualifier::parse(&s).ok_or(
                                ParseError::UnknownOption { func: name.clone(), option: s, pos: qpos },
                            )?);
                        }
                        _ => return self.err("grain size or direction qualifier"),
                    }
                }
                SchedulingCall::ConfigApplyParallelization { target, option, grain_size, direction }
            }
            "configApplyDenseVertexSet" => {
                let (target, _) = self.string_arg()?;
                // Remaining string args are classified by value; the
                // vertexset-side and layout vocabularies are disjoint.
                let mut side = VertexsetSide::Both;
                let mut layout = None;
                let mut direction = None;
                while self.eat(&TokenKind::Comma) {
                    let (arg, apos) = self.string_arg()?;
                    if let Some(s) = VertexsetSide::parse(&arg) {
                        side = s;
                    } else if let Some(l) = DenseLayout::parse(&arg) {
                        layout = Some(l);
                    } else if let Some(d) = DirectionQualifier::parse(&arg) {
                        direction = Some(d);
                    } else {
                        return Err(ParseError::UnknownOption {
                            func: name.clone(),
                            option: arg,
                            pos: apos,
                        });
                    }
                }
                let layout = layout.ok_or(ParseError::Arity {
                    func: name.clone(),
                    pos,
                    detail: "missing layout option (bool-array or bitvector)".into(),
                })?;
                SchedulingCall::ConfigApplyDenseVertexSet { target, side, layout, direction }
            }
            "configApplyNumSSG" => {
                let (target, _) = self.string_arg()?;
                self.expect(&TokenKind::Comma)?;
                let (s, spos) = self.string_arg()?;
                let scheme = PartitionScheme::parse(&s).ok_or(ParseError::UnknownOption {
                    func: name.clone(),
                    option: s,
                    pos: spos,
                })?;
                self.expect(&TokenKind::Comma)?;
                let (segs, ipos) = self.int_arg()?;
                if segs <= 0 {
                    return Err(ParseError::Arity {
                        func: name.clone(),
                        pos: ipos,
                        detail: "numSegments must be positive".into(),
                    });
                }
                let direction = if self.eat(&TokenKind::Comma) {
                    let (d, dpos) = self.string_arg()?;
                    Some(DirectionQualifier::parse(&d).ok_or(ParseError::UnknownOption {
                        func: name.clone(),
                        option: d,
                        pos: dpos,
                    })?)
                } else {
                    None
                };
                SchedulingCall::ConfigApplyNumSSG {
                    target,
                    scheme,
                    num_segments: segs as u64,
                    direction,
                }
            }
            "configApplyNUMA" => {
                let (target, _) = self.string_arg()?;
                self.expect(&TokenKind::Comma)?;
                let (o, opos) = self.string_arg()?;
                let option = NumaOption::parse(&o).ok_or(ParseError::UnknownOption {
                    func: name.clone(),
                    option: o,
                    pos: opos,
                })?;
                let direction = if self.eat(&TokenKind::Comma) {
                    let (d, dpos) = self.string_arg()?;
                    Some(DirectionQualifier::parse(&d).ok_or(ParseError::UnknownOption {
                        func: name.clone(),
                        option: d,
                        pos: dpos,
                    })?)
                } else {
                    None
                };
                SchedulingCall::ConfigApplyNuma { target, option, direction }
            }
            "fuseFields" => {
                let mut vectors = Vec::new();
                if self.eat(&TokenKind::LBrace) {
                    loop {
                        vectors.push(self.string_arg()?.0);
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                    self.expect(&TokenKind::RBrace)?;
                } else {
                    loop {
                        vectors.push(self.string_arg()?.0);
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                }
                if vectors.is_empty() {
                    return Err(ParseError::Arity {
                        func: name,
                        pos,
                        detail: "needs at least one vector".into(),
                    });
                }
                SchedulingCall::FuseFields { vectors }
            }
            "fuseForLoop" => {
                let (first, _) = self.string_arg()?;
                self.expect(&TokenKind::Comma)?;
                let (second, _) = self.string_arg()?;
                self.expect(&TokenKind::Comma)?;
                let (fused_label, _) = self.string_arg()?;
                SchedulingCall::FuseForLoop { first, second, fused_label }
            }
            "fuseApplyFunctions" => {
                let (first, _) = self.string_arg()?;
                self.expect(&TokenKind::Comma)?;
                let (second, _) = self.string_arg()?;
                self.expect(&TokenKind::Comma)?;
                let (fused_func, _) = self.string_arg()?;
                SchedulingCall::FuseApplyFunctions { first, second, fused_func }
            }
            "splitForLoop" => {
                let (target, _) = self.string_arg()?;
                self.expect(&TokenKind::Comma)?;
                let (first_label, _) = self.string_arg()?;
                self.expect(&TokenKind::Comma)?;
                let (second_label, _) = self.string_arg()?;
                self.expect(&TokenKind::Comma)?;
                let (split_point, _) = self.int_arg()?;
                SchedulingCall::SplitForLoop { target, first_label, second_label, split_point }
            }
            _ => return Err(ParseError::UnknownSchedulingFunction { name, pos }),
        };
        self.expect(&TokenKind::RParen)?;
        Ok(call)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PRDELTA: &str = include_str!("../tests/fixtures/prdelta.gt");

    #[test]
    fn parses_prdelta_shape() {
        let ir = parse_program(PRDELTA).unwrap();
        assert_eq!(ir.element_decls.len(), 2);
        assert_eq!(ir.vector_decls.len(), 4);
        let names: Vec<_> = ir.vector_decls.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["OutDegree", "Rank", "DeltaSum", "Delta"]);
        assert_eq!(ir.funcs.len(), 3);
        let mut labels = Vec::new();
        ir.visit_main(&mut |_, s| {
            if let Some(l) = &s.label {
                labels.push(l.clone());
            }
        });
        assert_eq!(labels, ["s1"]);
    }

    #[test]
    fn element_alone() {
        let ir = parse_program("element Vertex end").unwrap();
        assert_eq!(ir.element_decls.len(), 1);
        assert!(ir.vector_decls.is_empty());
        assert!(ir.funcs.is_empty());
        assert!(ir.main.is_empty());
    }

    #[test]
    fn apply_modified_dedup_flag() {
        let src = r#"
element Vertex end
element Edge end
const edges : edgeset{Edge}(Vertex,Vertex) = load(argv[1]);
parent : vector{Vertex}(int) = -1;
func updateEdge(src : Vertex, dst : Vertex) parent[dst] = src; end
func main()
    var frontier : vertexset{Vertex} = new vertexset{Vertex}(0);
    frontier = edges.from(frontier).applyModified(updateEdge, parent, true);
end
"#;
        let ir = parse_program(src).unwrap();
        let mut found = false;
        ir.visit_main(&mut |_, s| {
            if let Stmt::Assign { value: Expr::EdgesetApply(chain), .. } = &s.stmt {
                assert!(matches!(
                    &chain.terminator,
                    ChainTerminator::ApplyModified { disable_dedup: true, tracked, .. } if tracked == "parent"
                ));
                found = true;
            }
        });
        assert!(found);
    }

    #[test]
    fn schedule_single_call() {
        let sched = parse_schedule(r#"program->configApplyDirection("s1","DensePull-SparsePush");"#)
            .unwrap();
        assert_eq!(
            sched.calls,
            vec![SchedulingCall::ConfigApplyDirection {
                target: "s1".into(),
                direction: DirectionOption::DensePullSparsePush,
            }]
        );
    }

    #[test]
    fn empty_schedule() {
        assert!(parse_schedule("").unwrap().calls.is_empty());
    }

    #[test]
    fn fused_schedule_with_scoped_labels() {
        let sched = parse_schedule(
            r#"program->fuseForLoop("l1","l2","l3")->fuseApplyFunctions("l3:l1:s1","l3:l2:s1","fusedFunc")"#,
        )
        .unwrap();
        assert_eq!(sched.calls.len(), 2);
        assert_eq!(
            sched.calls[1],
            SchedulingCall::FuseApplyFunctions {
                first: "l3:l1:s1".into(),
                second: "l3:l2:s1".into(),
                fused_func: "fusedFunc".into(),
            }
        );
    }

    #[test]
    fn dense_vertexset_arg_order_is_flexible() {
        for src in [
            r#"program->configApplyDenseVertexSet("s1","src-vertexset","bitvector","DensePull");"#,
            r#"program->configApplyDenseVertexSet("s1","bitvector","src-vertexset","DensePull");"#,
        ] {
            let sched = parse_schedule(src).unwrap();
            assert_eq!(
                sched.calls[0],
                SchedulingCall::ConfigApplyDenseVertexSet {
                    target: "s1".into(),
                    side: VertexsetSide::Src,
                    layout: DenseLayout::Bitvector,
                    direction: Some(DirectionQualifier::DensePull),
                }
            );
        }
    }

    #[test]
    fn unknown_option_is_an_error() {
        let err = parse_schedule(r#"program->configApplyDirection("s1","Sideways");"#).unwrap_err();
        assert!(matches!(err, ParseError::UnknownOption { .. }));
    }

    #[test]
    fn unknown_function_is_an_error() {
        let err = parse_schedule(r#"program->configApplyWarp("s1","x");"#).unwrap_err();
        assert!(matches!(err, ParseError::UnknownSchedulingFunction { .. }));
    }

    #[test]
    fn trailing_schedule_section() {
        let src = r#"
element Vertex end
element Edge end
const edges : edgeset{Edge}(Vertex,Vertex) = load(argv[1]);
func f(src : Vertex, dst : Vertex) end
func main()
    #s1# edges.apply(f);
end
schedule:
program->configApplyDirection("s1","DensePull");
"#;
        let parsed = parse_source(src).unwrap();
        assert_eq!(parsed.schedule.calls.len(), 1);
    }
}
