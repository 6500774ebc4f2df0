//! Recursive-descent parser for skeleton sources.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::FrontendError;

type PResult<T> = Result<T, FrontendError>;

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "class", "float", "double", "switch", "case", "try", "catch", "throw", "interface", "import",
    "package", "null", "this", "super", "goto", "instanceof",
];

pub fn parse(src: &str) -> PResult<SkeletonAst> {
    parse_with_entry(src, None)
}

/// Parse a program whose entry function may lack `@MAIN`, as in rendered
/// instances; `entry` names the function to use then.
pub fn parse_with_entry(src: &str, entry: Option<&str>) -> PResult<SkeletonAst> {
    let tokens = tokenize(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        next_id: 0,
        placeholders: Vec::new(),
        default_entry: entry.map(str::to_string),
    };
    p.program()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    next_id: NodeId,
    placeholders: Vec<Placeholder>,
    default_entry: Option<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn id(&mut self) -> NodeId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == name)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{p}'")))
        }
    }

    fn expect_ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.check_supported(&s)?;
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.is_ident(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{kw}'")))
        }
    }

    fn check_supported(&self, word: &str) -> PResult<()> {
        if UNSUPPORTED_KEYWORDS.contains(&word) {
            Err(FrontendError::unsupported(self.span(), format!("'{word}'")))
        } else {
            Ok(())
        }
    }

    fn unexpected(&self, expected: &str) -> FrontendError {
        let found = match self.peek() {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int { value, .. } => format!("'{value}'"),
            Tok::Char(_) => "character literal".into(),
            Tok::Str(_) => "string literal".into(),
            Tok::Annotation(a) => format!("'@{a}'"),
            Tok::Punct(p) => format!("'{p}'"),
            Tok::Eof => "end of input".into(),
        };
        if let Tok::Ident(s) = self.peek() {
            if UNSUPPORTED_KEYWORDS.contains(&s.as_str()) {
                return FrontendError::unsupported(self.span(), format!("'{s}'"));
            }
        }
        FrontendError::syntax(self.span(), format!("expected {expected}, found {found}"))
    }

    // ---- program structure ----

    fn program(&mut self) -> PResult<SkeletonAst> {
        if self.looks_like_function() {
            let mut functions = Vec::new();
            while !matches!(self.peek(), Tok::Eof) {
                functions.push(self.function()?);
            }
            if let Some(name) = &self.default_entry {
                if !functions.iter().any(|f| f.is_entry) {
                    for f in functions.iter_mut() {
                        f.is_entry = &f.name == name;
                    }
                }
            }
            let entries: Vec<&FunctionDecl> = functions.iter().filter(|f| f.is_entry).collect();
            let entry = match entries.as_slice() {
                [one] => one.name.clone(),
                [] => {
                    return Err(FrontendError::semantic(
                        Span::new(1, 1),
                        "no function is annotated with @MAIN",
                    ))
                }
                [_, second, ..] => {
                    return Err(FrontendError::semantic(
                        second.span,
                        "more than one function is annotated with @MAIN",
                    ))
                }
            };
            for (i, f) in functions.iter().enumerate() {
                if functions[..i].iter().any(|g| g.name == f.name) {
                    return Err(FrontendError::semantic(
                        f.span,
                        format!("function '{}' is defined twice", f.name),
                    ));
                }
            }
            Ok(SkeletonAst {
                functions,
                entry,
                placeholders: std::mem::take(&mut self.placeholders),
                implicit_main: false,
                next_id: self.next_id,
            })
        } else {
            let span = self.span();
            let mut stmts = Vec::new();
            while !matches!(self.peek(), Tok::Eof) {
                if self.looks_like_function() {
                    return Err(FrontendError::syntax(
                        self.span(),
                        "function declarations cannot follow top-level statements",
                    ));
                }
                self.stmt_into(&mut stmts)?;
            }
            let body = Stmt::new(self.id(), span, StmtKind::Block(stmts));
            Ok(SkeletonAst {
                functions: vec![FunctionDecl {
                    name: "main".into(),
                    params: vec![],
                    ret: None,
                    body,
                    rec_bound: None,
                    is_entry: true,
                    span,
                }],
                entry: "main".into(),
                placeholders: std::mem::take(&mut self.placeholders),
                implicit_main: true,
                next_id: self.next_id,
            })
        }
    }

    fn looks_like_function(&self) -> bool {
        match self.peek() {
            Tok::Annotation(_) => return true,
            Tok::Ident(s) if matches!(s.as_str(), "static" | "public" | "private" | "final" | "void") => {
                return true
            }
            _ => {}
        }
        // type IDENT '('  (possibly with [] after the type)
        if !matches!(self.peek_at(0), Tok::Ident(s) if is_type_keyword(s)) {
            return false;
        }
        let mut j = 1;
        while matches!(self.peek_at(j), Tok::Punct("[")) && matches!(self.peek_at(j + 1), Tok::Punct("]")) {
            j += 2;
        }
        matches!(self.peek_at(j), Tok::Ident(_)) && matches!(self.peek_at(j + 1), Tok::Punct("("))
    }

    fn function(&mut self) -> PResult<FunctionDecl> {
        let span = self.span();
        let mut is_entry = false;
        let mut rec_bound = None;
        loop {
            match self.peek().clone() {
                Tok::Annotation(a) if a == "MAIN" => {
                    self.bump();
                    is_entry = true;
                }
                Tok::Annotation(a) if a == "REC" => {
                    let at = self.span();
                    self.bump();
                    self.expect_punct("(")?;
                    let k = match self.bump().tok {
                        Tok::Int { value, long: false } if value <= u32::MAX as u64 => value as u32,
                        _ => return Err(FrontendError::syntax(at, "@REC expects a natural number")),
                    };
                    self.expect_punct(")")?;
                    rec_bound = Some(k);
                }
                Tok::Annotation(a) => {
                    return Err(FrontendError::unsupported(self.span(), format!("annotation '@{a}'")))
                }
                Tok::Ident(s) if matches!(s.as_str(), "static" | "public" | "private" | "final") => {
                    self.bump();
                }
                _ => break,
            }
        }
        let ret = if self.is_ident("void") {
            self.bump();
            None
        } else {
            Some(self.parse_type()?)
        };
        let name = self.expect_ident()?;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.is_punct(")") {
            loop {
                let mut ty = self.parse_type()?;
                let pname = self.expect_ident()?;
                ty = self.trailing_dims(ty)?;
                params.push(Param { name: pname, ty });
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        if !self.is_punct("{") {
            return Err(self.unexpected("function body"));
        }
        let body = self.stmt_single()?;
        Ok(FunctionDecl {
            name,
            params,
            ret,
            body,
            rec_bound,
            is_entry,
            span,
        })
    }

    fn parse_type(&mut self) -> PResult<JType> {
        let span = self.span();
        let base = match self.peek().clone() {
            Tok::Ident(s) => {
                self.check_supported(&s)?;
                match s.as_str() {
                    "boolean" => JType::Boolean,
                    "byte" => JType::Byte,
                    "short" => JType::Short,
                    "int" => JType::Int,
                    "long" => JType::Long,
                    "char" => JType::Char,
                    "String" => JType::String,
                    _ => return Err(self.unexpected("type")),
                }
            }
            _ => return Err(self.unexpected("type")),
        };
        self.bump();
        let mut ty = base;
        while self.is_punct("[") && matches!(self.peek_at(1), Tok::Punct("]")) {
            self.bump();
            self.bump();
            ty = ty
                .array_of()
                .ok_or_else(|| FrontendError::unsupported(span, format!("arrays of {ty}")))?;
        }
        Ok(ty)
    }

    /// C-style declarators such as `int r[]`.
    fn trailing_dims(&mut self, mut ty: JType) -> PResult<JType> {
        while self.is_punct("[") && matches!(self.peek_at(1), Tok::Punct("]")) {
            let span = self.span();
            self.bump();
            self.bump();
            ty = ty
                .array_of()
                .ok_or_else(|| FrontendError::unsupported(span, format!("arrays of {ty}")))?;
        }
        Ok(ty)
    }

    // ---- statements ----

    fn stmt_single(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let mut v = Vec::new();
        self.stmt_into(&mut v)?;
        if v.len() == 1 {
            Ok(v.pop().unwrap())
        } else {
            // multiple declarators in a position that takes one statement
            Ok(Stmt::new(self.id(), span, StmtKind::Block(v)))
        }
    }

    fn stmt_into(&mut self, out: &mut Vec<Stmt>) -> PResult<()> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Punct("{") => {
                self.bump();
                let mut stmts = Vec::new();
                while !self.is_punct("}") {
                    if matches!(self.peek(), Tok::Eof) {
                        return Err(self.unexpected("'}'"));
                    }
                    self.stmt_into(&mut stmts)?;
                }
                self.bump();
                let id = self.id();
                out.push(Stmt::new(id, span, StmtKind::Block(stmts)));
            }
            Tok::Punct(";") => {
                self.bump();
                let id = self.id();
                out.push(Stmt::new(id, span, StmtKind::Empty));
            }
            Tok::Annotation(a) => {
                return Err(FrontendError::misplaced(
                    span,
                    format!("'@{a}' is only allowed before a function declaration"),
                ))
            }
            Tok::Ident(word) => {
                self.check_supported(&word)?;
                match word.as_str() {
                    "if" => {
                        self.bump();
                        self.expect_punct("(")?;
                        let cond = self.expr()?;
                        self.expect_punct(")")?;
                        let then_branch = Box::new(self.stmt_single()?);
                        let else_branch = if self.is_ident("else") {
                            self.bump();
                            Some(Box::new(self.stmt_single()?))
                        } else {
                            None
                        };
                        let id = self.id();
                        out.push(Stmt::new(
                            id,
                            span,
                            StmtKind::If {
                                cond,
                                then_branch,
                                else_branch,
                            },
                        ));
                    }
                    "while" | "do" | "for" => {
                        let s = self.loop_stmt(None, None)?;
                        out.push(s);
                    }
                    "return" => {
                        self.bump();
                        let e = if self.is_punct(";") {
                            None
                        } else {
                            Some(self.expr()?)
                        };
                        self.expect_punct(";")?;
                        let id = self.id();
                        out.push(Stmt::new(id, span, StmtKind::Return(e)));
                    }
                    "break" | "continue" => {
                        self.bump();
                        if matches!(self.peek(), Tok::Ident(_)) {
                            return Err(FrontendError::unsupported(self.span(), "labeled jumps"));
                        }
                        self.expect_punct(";")?;
                        let id = self.id();
                        let kind = if word == "break" {
                            StmtKind::Break
                        } else {
                            StmtKind::Continue
                        };
                        out.push(Stmt::new(id, span, kind));
                    }
                    "else" => return Err(FrontendError::syntax(span, "'else' without 'if'")),
                    "System" => {
                        self.bump();
                        self.expect_punct(".")?;
                        self.expect_keyword("out")?;
                        self.expect_punct(".")?;
                        let newline = if self.is_ident("print") {
                            false
                        } else if self.is_ident("println") {
                            true
                        } else {
                            return Err(self.unexpected("'print' or 'println'"));
                        };
                        self.bump();
                        self.expect_punct("(")?;
                        let arg = if self.is_punct(")") {
                            if !newline {
                                return Err(FrontendError::syntax(span, "print requires an argument"));
                            }
                            None
                        } else {
                            Some(self.expr()?)
                        };
                        self.expect_punct(")")?;
                        self.expect_punct(";")?;
                        let id = self.id();
                        out.push(Stmt::new(id, span, StmtKind::Print { arg, newline }));
                    }
                    "ASSERT" => {
                        self.bump();
                        self.expect_punct("(")?;
                        let e = self.expr()?;
                        self.expect_punct(")")?;
                        self.expect_punct(";")?;
                        let id = self.id();
                        out.push(Stmt::new(id, span, StmtKind::Assert(e)));
                    }
                    "ASSERTBLOCK" => {
                        self.bump();
                        self.expect_punct("(")?;
                        self.expect_punct(")")?;
                        self.expect_punct(";")?;
                        if !self.is_punct("{") {
                            return Err(FrontendError::misplaced(
                                span,
                                "ASSERTBLOCK must be followed by a block",
                            ));
                        }
                        let block = self.stmt_single()?;
                        let id = self.id();
                        out.push(Stmt::new(id, span, StmtKind::AssertBlock(Box::new(block))));
                    }
                    "LOOP" => {
                        self.bump();
                        self.expect_punct("(")?;
                        let spec = self.value_spec(SpecKind::Int)?;
                        self.expect_punct(")")?;
                        self.expect_punct(";")?;
                        if let ValueSpec::Range(lo, _) = spec {
                            if lo < 0 {
                                return Err(FrontendError::semantic(
                                    span,
                                    "loop bounds must be nonnegative",
                                ));
                            }
                        }
                        if !matches!(self.peek(), Tok::Ident(s) if matches!(s.as_str(), "while" | "do" | "for"))
                        {
                            return Err(FrontendError::misplaced(
                                span,
                                "LOOP must immediately precede a loop",
                            ));
                        }
                        let s = self.loop_stmt(Some(LoopBound { spec }), None)?;
                        out.push(s);
                    }
                    "INVARIANT" => {
                        self.bump();
                        self.expect_punct("(")?;
                        let inv = self.expr()?;
                        self.expect_punct(")")?;
                        self.expect_punct(";")?;
                        if !self.is_ident("while") {
                            return Err(FrontendError::misplaced(
                                span,
                                "INVARIANT must immediately precede a while loop",
                            ));
                        }
                        let s = self.loop_stmt(None, Some(inv))?;
                        out.push(s);
                    }
                    w if is_type_keyword(w) && self.is_declaration() => {
                        self.declaration_into(out)?;
                        self.expect_punct(";")?;
                    }
                    _ => {
                        let s = self.simple_stmt()?;
                        self.expect_punct(";")?;
                        out.push(s);
                    }
                }
            }
            _ => {
                let s = self.simple_stmt()?;
                self.expect_punct(";")?;
                out.push(s);
            }
        }
        Ok(())
    }

    fn is_declaration(&self) -> bool {
        let mut j = 1;
        while matches!(self.peek_at(j), Tok::Punct("[")) && matches!(self.peek_at(j + 1), Tok::Punct("]")) {
            j += 2;
        }
        matches!(self.peek_at(j), Tok::Ident(_))
    }

    fn declaration_into(&mut self, out: &mut Vec<Stmt>) -> PResult<()> {
        let base = self.parse_type()?;
        loop {
            let span = self.span();
            let name = self.expect_ident()?;
            let ty = self.trailing_dims(base)?;
            let init = if self.eat_punct("=") {
                if self.is_punct("{") {
                    Some(self.array_initializer(ty)?)
                } else {
                    Some(self.expr()?)
                }
            } else {
                None
            };
            let id = self.id();
            out.push(Stmt::new(id, span, StmtKind::VarDecl { ty, name, init }));
            if !self.eat_punct(",") {
                return Ok(());
            }
        }
    }

    fn loop_stmt(&mut self, bound: Option<LoopBound>, invariant: Option<Expr>) -> PResult<Stmt> {
        let span = self.span();
        let word = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return Err(self.unexpected("loop")),
        };
        self.bump();
        let kind = match word.as_str() {
            "while" => {
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                let body = Box::new(self.stmt_single()?);
                StmtKind::While {
                    cond,
                    body,
                    bound,
                    invariant,
                }
            }
            "do" => {
                let body = Box::new(self.stmt_single()?);
                self.expect_keyword("while")?;
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                self.expect_punct(";")?;
                StmtKind::DoWhile { body, cond, bound }
            }
            "for" => {
                self.expect_punct("(")?;
                let init = if self.is_punct(";") {
                    None
                } else if matches!(self.peek(), Tok::Ident(s) if is_type_keyword(s)) && self.is_declaration() {
                    let mut v = Vec::new();
                    self.declaration_into(&mut v)?;
                    if v.len() != 1 {
                        return Err(FrontendError::unsupported(span, "multiple declarators in for-init"));
                    }
                    Some(Box::new(v.pop().unwrap()))
                } else {
                    Some(Box::new(self.simple_stmt()?))
                };
                self.expect_punct(";")?;
                let cond = if self.is_punct(";") {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect_punct(";")?;
                let mut update = Vec::new();
                if !self.is_punct(")") {
                    loop {
                        update.push(self.simple_stmt()?);
                        if !self.eat_punct(",") {
                            break;
                        }
                    }
                }
                self.expect_punct(")")?;
                let body = Box::new(self.stmt_single()?);
                StmtKind::For {
                    init,
                    cond,
                    update,
                    body,
                    bound,
                }
            }
            _ => return Err(FrontendError::syntax(span, "expected a loop")),
        };
        let id = self.id();
        Ok(Stmt::new(id, span, kind))
    }

    /// Assignment, compound assignment, or expression statement.
    fn simple_stmt(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let lhs = self.expr()?;
        let compound = match self.peek() {
            Tok::Punct("=") => None,
            Tok::Punct("+=") => Some(BinOp::Add),
            Tok::Punct("-=") => Some(BinOp::Sub),
            Tok::Punct("*=") => Some(BinOp::Mul),
            Tok::Punct("/=") => Some(BinOp::Div),
            Tok::Punct("%=") => Some(BinOp::Rem),
            _ => {
                if !matches!(lhs.kind, ExprKind::IncDec { .. } | ExprKind::Call { .. }) {
                    return Err(FrontendError::syntax(span, "not a statement"));
                }
                let id = self.id();
                return Ok(Stmt::new(id, span, StmtKind::Expr(lhs)));
            }
        };
        self.bump();
        if !matches!(lhs.kind, ExprKind::Var(_) | ExprKind::Index(..)) {
            return Err(FrontendError::syntax(span, "invalid assignment target"));
        }
        let value = self.expr()?;
        let id = self.id();
        let kind = match compound {
            None => StmtKind::Assign { target: lhs, value },
            Some(op) => StmtKind::CompoundAssign {
                target: lhs,
                op,
                value,
            },
        };
        Ok(Stmt::new(id, span, kind))
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        let cond = self.binary(1)?;
        if self.is_punct("?") {
            let span = cond.span;
            self.bump();
            let a = self.expr()?;
            self.expect_punct(":")?;
            let b = self.expr()?;
            return Ok(Expr::new(
                ExprKind::Ternary(Box::new(cond), Box::new(a), Box::new(b)),
                span,
            ));
        }
        Ok(cond)
    }

    fn binop_at(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Punct("||") => BinOp::Or,
            Tok::Punct("&&") => BinOp::And,
            Tok::Punct("==") => BinOp::Eq,
            Tok::Punct("!=") => BinOp::Ne,
            Tok::Punct("<") => BinOp::Lt,
            Tok::Punct(">") => BinOp::Gt,
            Tok::Punct("<=") => BinOp::Le,
            Tok::Punct(">=") => BinOp::Ge,
            Tok::Punct("+") => BinOp::Add,
            Tok::Punct("-") => BinOp::Sub,
            Tok::Punct("*") => BinOp::Mul,
            Tok::Punct("/") => BinOp::Div,
            Tok::Punct("%") => BinOp::Rem,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop_at() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            let span = lhs.span;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Punct("-") => {
                self.bump();
                if let Tok::Int { value, long } = *self.peek() {
                    // fold negative literals so MIN values are expressible
                    if !matches!(self.peek_at(1), Tok::Punct("[") | Tok::Punct(".")) {
                        self.bump();
                        let v = (value as i128).wrapping_neg();
                        let ty = if long { JType::Long } else { JType::Int };
                        let v = if long { v as i64 } else { v as i32 as i64 };
                        return self.postfix(Expr::int_lit(v, ty, span));
                    }
                }
                let e = self.unary()?;
                Ok(Expr::new(ExprKind::Unary(UnOp::Neg, Box::new(e)), span))
            }
            Tok::Punct("+") => {
                self.bump();
                let e = self.unary()?;
                Ok(Expr::new(ExprKind::Unary(UnOp::Plus, Box::new(e)), span))
            }
            Tok::Punct("!") => {
                self.bump();
                let e = self.unary()?;
                Ok(Expr::new(ExprKind::Unary(UnOp::Not, Box::new(e)), span))
            }
            Tok::Punct("++") | Tok::Punct("--") => {
                let increment = self.is_punct("++");
                self.bump();
                let target = self.unary()?;
                if !matches!(target.kind, ExprKind::Var(_) | ExprKind::Index(..)) {
                    return Err(FrontendError::syntax(span, "invalid increment target"));
                }
                Ok(Expr::new(
                    ExprKind::IncDec {
                        target: Box::new(target),
                        increment,
                        prefix: true,
                    },
                    span,
                ))
            }
            Tok::Punct("(") if self.is_cast() => {
                self.bump();
                let ty = self.parse_type()?;
                self.expect_punct(")")?;
                let e = self.unary()?;
                Ok(Expr::new(ExprKind::Cast(ty, Box::new(e)), span))
            }
            _ => {
                let e = self.primary()?;
                self.postfix(e)
            }
        }
    }

    fn is_cast(&self) -> bool {
        matches!(self.peek_at(1), Tok::Ident(s) if matches!(s.as_str(), "byte" | "short" | "int" | "long" | "char" | "boolean"))
            && matches!(self.peek_at(2), Tok::Punct(")"))
    }

    fn postfix(&mut self, mut e: Expr) -> PResult<Expr> {
        loop {
            let span = e.span;
            match self.peek() {
                Tok::Punct("[") => {
                    self.bump();
                    let idx = self.expr()?;
                    self.expect_punct("]")?;
                    e = Expr::new(ExprKind::Index(Box::new(e), Box::new(idx)), span);
                }
                Tok::Punct(".") => {
                    self.bump();
                    let name = self.expect_ident()?;
                    match name.as_str() {
                        "length" if self.is_punct("(") => {
                            self.bump();
                            self.expect_punct(")")?;
                            e = Expr::new(ExprKind::StrLength(Box::new(e)), span);
                        }
                        "length" => e = Expr::new(ExprKind::Length(Box::new(e)), span),
                        "equals" => {
                            self.expect_punct("(")?;
                            let arg = self.expr()?;
                            self.expect_punct(")")?;
                            e = Expr::new(ExprKind::StrEquals(Box::new(e), Box::new(arg)), span);
                        }
                        other => {
                            return Err(FrontendError::unsupported(
                                span,
                                format!("member access '.{other}'"),
                            ))
                        }
                    }
                }
                Tok::Punct("++") | Tok::Punct("--") => {
                    let increment = self.is_punct("++");
                    if !matches!(e.kind, ExprKind::Var(_) | ExprKind::Index(..)) {
                        return Err(FrontendError::syntax(span, "invalid increment target"));
                    }
                    self.bump();
                    e = Expr::new(
                        ExprKind::IncDec {
                            target: Box::new(e),
                            increment,
                            prefix: false,
                        },
                        span,
                    );
                }
                _ => return Ok(e),
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int { value, long } => {
                self.bump();
                if !long && value == 1 << 31 {
                    return Err(FrontendError::lex(span, "integer literal out of range"));
                }
                let ty = if long { JType::Long } else { JType::Int };
                let v = if long { value as i64 } else { value as u32 as i32 as i64 };
                Ok(Expr::int_lit(v, ty, span))
            }
            Tok::Char(c) => {
                self.bump();
                Ok(Expr::typed(ExprKind::Lit(Literal::Char(c)), span, JType::Char))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::typed(ExprKind::Lit(Literal::Str(s)), span, JType::String))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Punct("{") => Err(FrontendError::syntax(
                span,
                "array initializer is only allowed in a declaration or after 'new'",
            )),
            Tok::Ident(word) => {
                self.check_supported(&word)?;
                match word.as_str() {
                    "true" | "false" => {
                        self.bump();
                        Ok(Expr::bool_lit(word == "true", span))
                    }
                    "new" => self.new_array(),
                    "__out" => {
                        self.bump();
                        Ok(Expr::new(ExprKind::Out, span))
                    }
                    "Math" => {
                        self.bump();
                        self.expect_punct(".")?;
                        self.expect_keyword("abs")?;
                        self.expect_punct("(")?;
                        let e = self.expr()?;
                        self.expect_punct(")")?;
                        Ok(Expr::new(ExprKind::Abs(Box::new(e)), span))
                    }
                    "HOLE" => {
                        self.bump();
                        self.expect_punct("(")?;
                        let e = self.placeholder(true)?;
                        self.expect_punct(")")?;
                        Ok(e)
                    }
                    "range" | "list" => Err(FrontendError::misplaced(
                        span,
                        format!("'{word}' is only allowed inside a placeholder or LOOP"),
                    )),
                    "ASSERT" | "LOOP" | "INVARIANT" | "ASSERTBLOCK" => Err(FrontendError::misplaced(
                        span,
                        format!("'{word}' is a statement annotation"),
                    )),
                    w if PlaceholderKind::from_keyword(w).is_some() => self.placeholder(false),
                    "__distinct" | "__impl" => {
                        self.bump();
                        self.expect_punct("(")?;
                        let a = self.expr()?;
                        self.expect_punct(",")?;
                        let b = self.expr()?;
                        self.expect_punct(")")?;
                        let kind = if word == "__distinct" {
                            ExprKind::Distinct(Box::new(a), Box::new(b))
                        } else {
                            ExprKind::Impl(Box::new(a), Box::new(b))
                        };
                        Ok(Expr::new(kind, span))
                    }
                    w if is_type_keyword(w) || w == "void" => Err(FrontendError::syntax(
                        span,
                        format!("unexpected type '{w}' in expression"),
                    )),
                    _ => {
                        self.bump();
                        if self.is_punct("(") {
                            self.bump();
                            let mut args = Vec::new();
                            if !self.is_punct(")") {
                                loop {
                                    args.push(self.expr()?);
                                    if !self.eat_punct(",") {
                                        break;
                                    }
                                }
                            }
                            self.expect_punct(")")?;
                            Ok(Expr::new(ExprKind::Call { name: word, args }, span))
                        } else {
                            Ok(Expr::new(ExprKind::Var(word), span))
                        }
                    }
                }
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    fn new_array(&mut self) -> PResult<Expr> {
        let span = self.span();
        self.bump(); // new
        let base = match self.peek().clone() {
            Tok::Ident(s) if s == "int" => JType::Int,
            Tok::Ident(s) if s == "String" => JType::String,
            Tok::Ident(s) => {
                self.check_supported(&s)?;
                return Err(FrontendError::unsupported(span, format!("'new {s}'")));
            }
            _ => return Err(self.unexpected("array element type")),
        };
        self.bump();
        let mut dims = Vec::new();
        let mut ty = base;
        let mut empty_dims = 0;
        while self.is_punct("[") {
            self.bump();
            ty = ty
                .array_of()
                .ok_or_else(|| FrontendError::unsupported(span, format!("arrays of {ty}")))?;
            if self.is_punct("]") {
                self.bump();
                empty_dims += 1;
            } else {
                if empty_dims > 0 {
                    return Err(FrontendError::syntax(span, "array dimension after '[]'"));
                }
                dims.push(self.expr()?);
                self.expect_punct("]")?;
            }
        }
        if ty == base {
            return Err(FrontendError::unsupported(span, "object creation"));
        }
        if dims.is_empty() {
            if !self.is_punct("{") {
                return Err(self.unexpected("array initializer"));
            }
            return self.array_initializer(ty);
        }
        if empty_dims > 0 {
            return Err(FrontendError::unsupported(span, "partially dimensioned arrays"));
        }
        Ok(Expr::new(ExprKind::NewArray { ty, dims }, span))
    }

    fn array_initializer(&mut self, ty: JType) -> PResult<Expr> {
        let span = self.span();
        self.expect_punct("{")?;
        let elem_ty = ty
            .element()
            .ok_or_else(|| FrontendError::type_error(span, format!("array initializer for {ty}")))?;
        let mut elems = Vec::new();
        while !self.is_punct("}") {
            if self.is_punct("{") {
                elems.push(self.array_initializer(elem_ty)?);
            } else {
                elems.push(self.expr()?);
            }
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct("}")?;
        Ok(Expr::new(ExprKind::ArrayLit { ty, elems }, span))
    }

    // ---- placeholders ----

    fn placeholder(&mut self, is_hole: bool) -> PResult<Expr> {
        let span = self.span();
        let word = match self.peek().clone() {
            Tok::Ident(w) => w,
            _ => return Err(self.unexpected("placeholder")),
        };
        let kind = PlaceholderKind::from_keyword(&word)
            .ok_or_else(|| FrontendError::syntax(span, "HOLE expects a placeholder"))?;
        self.bump();
        self.expect_punct("(")?;
        let (values, length, inner_length) = match kind {
            PlaceholderKind::Int => (self.value_spec(SpecKind::Int)?, None, None),
            PlaceholderKind::Char => (self.value_spec(SpecKind::Char)?, None, None),
            PlaceholderKind::String => (self.value_spec(SpecKind::Str)?, None, None),
            PlaceholderKind::Boolean => {
                if self.is_punct(")") {
                    (ValueSpec::Any, None, None)
                } else {
                    (self.value_spec(SpecKind::Bool)?, None, None)
                }
            }
            PlaceholderKind::IntArray | PlaceholderKind::StringArray => {
                let len = self.length_spec()?;
                self.expect_punct(",")?;
                let elem_kind = if kind == PlaceholderKind::IntArray {
                    SpecKind::Int
                } else {
                    SpecKind::Str
                };
                (self.value_spec(elem_kind)?, Some(len), None)
            }
            PlaceholderKind::Int2DArray => {
                let len = self.length_spec()?;
                self.expect_punct(",")?;
                let inner = self.length_spec()?;
                self.expect_punct(",")?;
                (self.value_spec(SpecKind::Int)?, Some(len), Some(inner))
            }
        };
        self.expect_punct(")")?;
        let id = self.placeholders.len();
        self.placeholders.push(Placeholder {
            id,
            kind,
            values,
            length,
            inner_length,
            is_hole,
            span,
        });
        let mut e = Expr::new(ExprKind::Placeholder(id), span);
        e.ty = Some(kind.java_type());
        Ok(e)
    }

    fn length_spec(&mut self) -> PResult<ValueSpec> {
        let span = self.span();
        let spec = self.value_spec(SpecKind::Int)?;
        let (lo, _) = spec.int_bounds().expect("integral spec");
        if lo < 0 {
            return Err(FrontendError::semantic(span, "array lengths must be nonnegative"));
        }
        Ok(spec)
    }

    fn value_spec(&mut self, kind: SpecKind) -> PResult<ValueSpec> {
        let span = self.span();
        if self.is_ident("range") {
            if !matches!(kind, SpecKind::Int | SpecKind::Char) {
                return Err(FrontendError::semantic(span, "range() requires an integral placeholder"));
            }
            self.bump();
            self.expect_punct("(")?;
            let lo = self.spec_literal(kind)?;
            self.expect_punct(",")?;
            let hi = self.spec_literal(kind)?;
            self.expect_punct(")")?;
            let (lo, hi) = (literal_as_i64(&lo).unwrap(), literal_as_i64(&hi).unwrap());
            if lo > hi {
                return Err(FrontendError::semantic(
                    span,
                    format!("empty range({lo}, {hi}): lower bound exceeds upper bound"),
                ));
            }
            Ok(ValueSpec::Range(lo, hi))
        } else if self.is_ident("list") {
            self.bump();
            self.expect_punct("(")?;
            let mut items = Vec::new();
            if !self.is_punct(")") {
                loop {
                    items.push(self.spec_literal(kind)?);
                    if !self.eat_punct(",") {
                        break;
                    }
                }
            }
            self.expect_punct(")")?;
            if items.is_empty() {
                return Err(FrontendError::semantic(span, "list() must not be empty"));
            }
            Ok(ValueSpec::List(items))
        } else {
            Err(self.unexpected("range(..) or list(..)"))
        }
    }

    fn spec_literal(&mut self, kind: SpecKind) -> PResult<Literal> {
        let span = self.span();
        let neg = self.eat_punct("-");
        let lit = match (self.bump().tok, kind) {
            (Tok::Int { value, long: false }, SpecKind::Int) => {
                let v = if neg { -(value as i64) } else { value as i64 };
                if v < i32::MIN as i64 || v > i32::MAX as i64 {
                    return Err(FrontendError::semantic(span, "value out of int range"));
                }
                Literal::Int(v)
            }
            (Tok::Char(c), SpecKind::Char) if !neg => Literal::Char(c),
            (Tok::Str(s), SpecKind::Str) if !neg => Literal::Str(s),
            (Tok::Ident(w), SpecKind::Bool) if !neg && (w == "true" || w == "false") => {
                Literal::Bool(w == "true")
            }
            _ => {
                return Err(FrontendError::type_error(
                    span,
                    format!("expected {} literal in value specification", kind.name()),
                ))
            }
        };
        Ok(lit)
    }
}

#[derive(Clone, Copy)]
enum SpecKind {
    Int,
    Char,
    Str,
    Bool,
}

impl SpecKind {
    fn name(self) -> &'static str {
        match self {
            SpecKind::Int => "an int",
            SpecKind::Char => "a char",
            SpecKind::Str => "a string",
            SpecKind::Bool => "a boolean",
        }
    }
}

fn is_type_keyword(s: &str) -> bool {
    matches!(
        s,
        "boolean" | "byte" | "short" | "int" | "long" | "char" | "String"
    )
}

#[cfg(test)]
mod tests {
    use super::super::FrontendErrorKind;
    use super::*;

    #[test]
    fn recursive_skeleton_entry_and_bound() {
        let ast = parse(include_str!("../../fixtures/minmax_rec5.java")).unwrap();
        assert_eq!(ast.entry, "start");
        let m = ast.function("mystery").unwrap();
        assert_eq!(m.rec_bound, Some(5));
        assert_eq!(m.params.len(), 3);
        assert_eq!(ast.placeholders.len(), 1);
        assert_eq!(ast.placeholders[0].length, Some(ValueSpec::List(vec![Literal::Int(12)])));
        assert_eq!(ast.placeholders[0].values, ValueSpec::Range(-25, 25));
    }

    #[test]
    fn bare_statements_get_an_implicit_entry() {
        let ast = parse("int a = 0;").unwrap();
        assert!(ast.implicit_main);
        let body = &ast.entry_function().body;
        let StmtKind::Block(stmts) = &body.kind else { panic!() };
        assert_eq!(stmts.len(), 1);
        match &stmts[0].kind {
            StmtKind::VarDecl { ty, name, init } => {
                assert_eq!(*ty, JType::Int);
                assert_eq!(name, "a");
                assert_eq!(init.as_ref().unwrap().as_lit(), Some(&Literal::Int(0)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn loop_annotation_must_precede_a_loop() {
        let err = parse("LOOP(range(1,20));\nint x = 1;").unwrap_err();
        assert_eq!(err.kind, FrontendErrorKind::MisplacedAnnotation);
        assert_eq!(err.span, Span::new(1, 1));
        let err = parse("int i = 0; INVARIANT(i >= 0); for (;i < 3;) i++;").unwrap_err();
        assert_eq!(err.kind, FrontendErrorKind::MisplacedAnnotation);
    }

    #[test]
    fn loop_bound_is_attached() {
        let ast = parse(include_str!("../../fixtures/loops_abc.java")).unwrap();
        let mut bounds = Vec::new();
        ast.walk_stmts(&mut |s| {
            if let StmtKind::For { bound, .. } = &s.kind {
                bounds.push(bound.clone().unwrap());
            }
        });
        assert_eq!(bounds, vec![LoopBound::range(1, 20); 3]);
        assert_eq!(ast.placeholders.len(), 6);
    }

    #[test]
    fn unsupported_constructs() {
        for src in ["class A {}", "float f = 1;", "double d = 1.5;", "int x = null;"] {
            let err = parse(src).unwrap_err();
            assert!(
                matches!(err.kind, FrontendErrorKind::Unsupported | FrontendErrorKind::Lex),
                "{src}: {err}"
            );
        }
    }

    #[test]
    fn spec_validation() {
        assert!(parse("int x = INT(range(5, 1));").is_err());
        assert!(parse("int x = INT(list());").is_err());
        assert!(parse("int x = INT(list('a'));").is_err());
        assert!(parse("char c = CHAR(range('a', 'z'));").is_ok());
        assert!(parse("String s = STRING(list(\"a\", \"b\"));").is_ok());
        assert!(parse("boolean b = BOOLEAN();").is_ok());
        assert!(parse("int[][] m = INT2DARRAY(range(1, 2), list(3), range(0, 9));").is_ok());
    }

    #[test]
    fn min_int_literal() {
        let ast = parse("int x = -2147483648;").unwrap();
        let mut seen = false;
        ast.walk_stmts(&mut |s| {
            if let StmtKind::VarDecl { init: Some(e), .. } = &s.kind {
                seen = e.as_lit() == Some(&Literal::Int(i32::MIN as i64));
            }
        });
        assert!(seen);
        assert!(parse("int x = 2147483648;").is_err());
    }

    #[test]
    fn hole_wrapper_marks_placeholder() {
        let ast = parse("int a = INT(range(0, 3)); int b = HOLE(INT(range(1, 2)));").unwrap();
        assert!(!ast.placeholders[0].is_hole);
        assert!(ast.placeholders[1].is_hole);
        assert_eq!(ast.hole().unwrap().id, 1);
    }

    #[test]
    fn precedence() {
        let ast = parse("int x = 1 + 2 * 3 - 4 % 2;").unwrap();
        let f = ast.entry_function();
        let StmtKind::Block(stmts) = &f.body.kind else { panic!() };
        let StmtKind::VarDecl { init: Some(e), .. } = &stmts[0].kind else { panic!() };
        let ExprKind::Binary(BinOp::Sub, l, r) = &e.kind else { panic!("{e:?}") };
        assert!(matches!(l.kind, ExprKind::Binary(BinOp::Add, _, _)));
        assert!(matches!(r.kind, ExprKind::Binary(BinOp::Rem, _, _)));
    }
}
