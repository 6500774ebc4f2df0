//! Source printing for skeletons and rendered instances.

use std::collections::BTreeMap;

use super::ast::*;
use crate::value::{char_literal, string_literal, Value};

/// What to print.
#[derive(Clone, Copy)]
pub enum Mode<'a> {
    /// Everything, annotations included; re-parses to the same tree.
    Skeleton,
    /// Student-facing code: placeholders replaced by values, generation-only
    /// code removed, the hole (if any) shown as `??`.
    Instance {
        values: &'a BTreeMap<usize, Value>,
        hole: Option<usize>,
    },
}

pub fn print_skeleton(ast: &SkeletonAst) -> String {
    Printer::new(ast, Mode::Skeleton).program()
}

/// Render an instance. Placeholders without a value print as `??`.
pub fn print_instance(
    ast: &SkeletonAst,
    values: &BTreeMap<usize, Value>,
    hole: Option<usize>,
) -> String {
    Printer::new(ast, Mode::Instance { values, hole }).program()
}

/// Print a single expression in skeleton syntax.
pub fn print_expr(ast: &SkeletonAst, e: &Expr) -> String {
    Printer::new(ast, Mode::Skeleton).expr(e, 0)
}

pub struct Printer<'a> {
    ast: &'a SkeletonAst,
    mode: Mode<'a>,
    out: String,
    indent: usize,
}

const PREC_TERNARY: u8 = 0;
const PREC_UNARY: u8 = 7;
const PREC_POSTFIX: u8 = 8;

impl<'a> Printer<'a> {
    pub fn new(ast: &'a SkeletonAst, mode: Mode<'a>) -> Self {
        Printer {
            ast,
            mode,
            out: String::new(),
            indent: 0,
        }
    }

    fn skeleton(&self) -> bool {
        matches!(self.mode, Mode::Skeleton)
    }

    pub fn program(mut self) -> String {
        if self.ast.implicit_main {
            let body = &self.ast.functions[0].body;
            match &body.kind {
                StmtKind::Block(stmts) => {
                    for s in stmts {
                        self.stmt(s);
                    }
                }
                _ => self.stmt(body),
            }
            return self.out;
        }
        for (i, f) in self.ast.functions.iter().enumerate() {
            if i > 0 {
                self.out.push('\n');
            }
            self.function(f);
        }
        self.out
    }

    fn line(&mut self, text: &str) {
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn function(&mut self, f: &FunctionDecl) {
        if self.skeleton() {
            if f.is_entry {
                self.line("@MAIN");
            }
            if let Some(k) = f.rec_bound {
                self.line(&format!("@REC({k})"));
            }
        }
        let ret = f.ret.map(|t| t.java_name()).unwrap_or("void");
        let params: Vec<String> = f
            .params
            .iter()
            .map(|p| format!("{} {}", p.ty, p.name))
            .collect();
        let head = format!("static {ret} {}({})", f.name, params.join(", "));
        self.block_with_head(&head, &f.body, "");
    }

    /// `head {` ... `}tail`, or `head` plus an indented statement when the
    /// body is not a block. Returns whether the output ends with `}`.
    fn block_with_head(&mut self, head: &str, body: &Stmt, tail: &str) -> bool {
        let braced = matches!(body.kind, StmtKind::Block(_));
        if braced {
            self.line(&format!("{head} {{"));
        } else {
            self.line(head);
        }
        self.branch_body(body, braced);
        if !tail.is_empty() && !braced {
            self.line(tail.trim_start());
        } else if !tail.is_empty() {
            self.out.truncate(self.out.len() - 1);
            self.out.push_str(tail);
            self.out.push('\n');
        }
        braced
    }

    fn branch_body(&mut self, body: &Stmt, braced: bool) {
        self.indent += 1;
        match &body.kind {
            StmtKind::Block(stmts) => {
                for s in stmts {
                    self.stmt(s);
                }
            }
            _ if self.dropped(body) => self.line("{}"),
            _ => self.stmt(body),
        }
        self.indent -= 1;
        if braced {
            self.line("}");
        }
    }

    /// Start a line, or continue the previous `}` line when `fold` is set.
    fn open(&mut self, fold: bool, text: &str) {
        if fold {
            self.out.truncate(self.out.len() - 1);
            self.out.push(' ');
            self.out.push_str(text);
            self.out.push('\n');
        } else {
            self.line(text);
        }
    }

    /// Whether the statement disappears from instances.
    fn dropped(&self, s: &Stmt) -> bool {
        !self.skeleton() && matches!(s.kind, StmtKind::Assert(_) | StmtKind::AssertBlock(_))
    }

    fn stmt(&mut self, s: &Stmt) {
        if self.dropped(s) {
            return;
        }
        match &s.kind {
            StmtKind::Empty => self.line(";"),
            StmtKind::Block(stmts) => {
                self.line("{");
                self.indent += 1;
                for st in stmts {
                    self.stmt(st);
                }
                self.indent -= 1;
                self.line("}");
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let head = format!("if ({})", self.expr(cond, 0));
                let ended = self.block_with_head(&head, then_branch, "");
                if let Some(e) = else_branch {
                    self.else_part(e, ended);
                }
            }
            StmtKind::While {
                cond,
                body,
                bound,
                invariant,
            } => {
                if self.skeleton() {
                    if let Some(inv) = invariant {
                        let text = format!("INVARIANT({});", self.expr(inv, 0));
                        self.line(&text);
                    }
                    if let Some(b) = bound {
                        let text = format!("LOOP({});", self.spec(&b.spec));
                        self.line(&text);
                    }
                }
                let head = format!("while ({})", self.expr(cond, 0));
                self.block_with_head(&head, body, "");
            }
            StmtKind::DoWhile { body, cond, bound } => {
                if self.skeleton() {
                    if let Some(b) = bound {
                        let text = format!("LOOP({});", self.spec(&b.spec));
                        self.line(&text);
                    }
                }
                let tail = format!(" while ({});", self.expr(cond, 0));
                self.block_with_head("do", body, &tail);
            }
            StmtKind::For {
                init,
                cond,
                update,
                body,
                bound,
            } => {
                if self.skeleton() {
                    if let Some(b) = bound {
                        let text = format!("LOOP({});", self.spec(&b.spec));
                        self.line(&text);
                    }
                }
                let init = init.as_ref().map(|s| self.simple(s)).unwrap_or_default();
                let cond = cond.as_ref().map(|c| self.expr(c, 0)).unwrap_or_default();
                let update: Vec<String> = update.iter().map(|u| self.simple(u)).collect();
                let head = format!("for ({init}; {cond}; {})", update.join(", "));
                self.block_with_head(head.trim_end(), body, "");
            }
            StmtKind::Return(e) => {
                let text = match e {
                    Some(e) => format!("return {};", self.expr(e, 0)),
                    None => "return;".into(),
                };
                self.line(&text);
            }
            StmtKind::Break => self.line("break;"),
            StmtKind::Continue => self.line("continue;"),
            StmtKind::Print { arg, newline } => {
                let f = if *newline { "println" } else { "print" };
                let a = arg.as_ref().map(|a| self.expr(a, 0)).unwrap_or_default();
                self.line(&format!("System.out.{f}({a});"));
            }
            StmtKind::Assert(e) => {
                let text = format!("ASSERT({});", self.expr(e, 0));
                self.line(&text);
            }
            StmtKind::AssertBlock(b) => {
                self.line("ASSERTBLOCK();");
                self.stmt(b);
            }
            StmtKind::VarDecl { .. }
            | StmtKind::Assign { .. }
            | StmtKind::CompoundAssign { .. }
            | StmtKind::Expr(_) => {
                let text = format!("{};", self.simple(s));
                self.line(&text);
            }
        }
    }

    fn else_part(&mut self, e: &Stmt, fold: bool) {
        match &e.kind {
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let braced = matches!(then_branch.kind, StmtKind::Block(_));
                let head = format!("else if ({})", self.expr(cond, 0));
                self.open(fold, &if braced { format!("{head} {{") } else { head });
                self.branch_body(then_branch, braced);
                if let Some(next) = else_branch {
                    self.else_part(next, braced);
                }
            }
            _ => {
                let braced = matches!(e.kind, StmtKind::Block(_));
                self.open(fold, if braced { "else {" } else { "else" });
                self.branch_body(e, braced);
            }
        }
    }

    /// Statement text without the trailing semicolon.
    fn simple(&mut self, s: &Stmt) -> String {
        match &s.kind {
            StmtKind::VarDecl { ty, name, init } => match init {
                Some(e) => format!("{ty} {name} = {}", self.initializer(e)),
                None => format!("{ty} {name}"),
            },
            StmtKind::Assign { target, value } => {
                format!("{} = {}", self.expr(target, 0), self.initializer(value))
            }
            StmtKind::CompoundAssign { target, op, value } => format!(
                "{} {}= {}",
                self.expr(target, 0),
                op.symbol(),
                self.expr(value, 0)
            ),
            StmtKind::Expr(e) => self.expr(e, 0),
            _ => {
                // only simple statements occur in for headers
                let mut p = Printer::new(self.ast, self.mode);
                p.stmt(s);
                p.out.trim().trim_end_matches(';').to_string()
            }
        }
    }

    fn initializer(&mut self, e: &Expr) -> String {
        self.expr(e, 0)
    }

    fn spec(&self, spec: &ValueSpec) -> String {
        match spec {
            ValueSpec::Range(lo, hi) => format!("range({lo}, {hi})"),
            ValueSpec::List(items) => format!(
                "list({})",
                items.iter().map(spec_literal).collect::<Vec<_>>().join(", ")
            ),
            ValueSpec::Any => String::new(),
        }
    }

    fn range_item(&self, spec: &ValueSpec, char_kind: bool) -> String {
        match (spec, char_kind) {
            (ValueSpec::Range(lo, hi), true) => {
                format!("range({}, {})", char_literal(*lo as u16), char_literal(*hi as u16))
            }
            _ => self.spec(spec),
        }
    }

    fn placeholder(&self, id: usize) -> String {
        let p = &self.ast.placeholders[id];
        if let Mode::Instance { values, hole } = self.mode {
            if hole == Some(id) {
                return "??".into();
            }
            return values.get(&id).map(|v| v.to_java()).unwrap_or_else(|| "??".into());
        }
        let mut args = Vec::new();
        if let Some(l) = &p.length {
            args.push(self.spec(l));
        }
        if let Some(l) = &p.inner_length {
            args.push(self.spec(l));
        }
        let vals = self.range_item(&p.values, p.kind == PlaceholderKind::Char);
        if !vals.is_empty() {
            args.push(vals);
        }
        let text = format!("{}({})", p.kind.keyword(), args.join(", "));
        if p.is_hole {
            format!("HOLE({text})")
        } else {
            text
        }
    }

    /// Print `e`, parenthesized if its precedence is below `min`.
    pub fn expr(&mut self, e: &Expr, min: u8) -> String {
        let (text, prec) = self.expr_inner(e);
        if prec < min {
            format!("({text})")
        } else {
            text
        }
    }

    fn expr_inner(&mut self, e: &Expr) -> (String, u8) {
        match &e.kind {
            ExprKind::Lit(l) => {
                let text = match l {
                    Literal::Int(v) if e.ty == Some(JType::Long) => format!("{v}L"),
                    other => spec_literal(other),
                };
                // a leading minus must not fuse with a preceding operator
                let prec = if text.starts_with('-') { PREC_UNARY } else { PREC_POSTFIX };
                (text, prec)
            }
            ExprKind::Var(n) => (n.clone(), PREC_POSTFIX),
            ExprKind::Unary(op, a) => {
                let sym = match op {
                    UnOp::Neg => "-",
                    UnOp::Plus => "+",
                    UnOp::Not => "!",
                };
                let inner = self.expr(a, PREC_UNARY);
                let inner = if inner.starts_with(['-', '+']) {
                    format!("({inner})")
                } else {
                    inner
                };
                (format!("{sym}{inner}"), PREC_UNARY)
            }
            ExprKind::Binary(op, a, b) => {
                let p = op.precedence();
                let l = self.expr(a, p);
                let r = self.expr(b, p + 1);
                (format!("{l} {} {r}", op.symbol()), p)
            }
            ExprKind::Concat(a, b) => {
                let p = BinOp::Add.precedence();
                let l = self.expr(a, p);
                let r = self.expr(b, p + 1);
                (format!("{l} + {r}"), p)
            }
            ExprKind::Ternary(c, a, b) => {
                let c = self.expr(c, 1);
                let a = self.expr(a, PREC_TERNARY);
                let b = self.expr(b, PREC_TERNARY);
                (format!("{c} ? {a} : {b}"), PREC_TERNARY)
            }
            ExprKind::IncDec {
                target,
                increment,
                prefix,
            } => {
                let sym = if *increment { "++" } else { "--" };
                let t = self.expr(target, PREC_POSTFIX);
                if *prefix {
                    (format!("{sym}{t}"), PREC_UNARY)
                } else {
                    (format!("{t}{sym}"), PREC_POSTFIX)
                }
            }
            ExprKind::Index(a, i) => {
                let a = self.expr(a, PREC_POSTFIX);
                let i = self.expr(i, 0);
                (format!("{a}[{i}]"), PREC_POSTFIX)
            }
            ExprKind::Length(a) => (format!("{}.length", self.expr(a, PREC_POSTFIX)), PREC_POSTFIX),
            ExprKind::StrLength(a) => {
                (format!("{}.length()", self.expr(a, PREC_POSTFIX)), PREC_POSTFIX)
            }
            ExprKind::StrEquals(a, b) => {
                let a = self.expr(a, PREC_POSTFIX);
                let b = self.expr(b, 0);
                (format!("{a}.equals({b})"), PREC_POSTFIX)
            }
            ExprKind::NewArray { ty, dims } => {
                let mut base = *ty;
                for _ in 0..dims.len() {
                    base = base_elem(base);
                }
                let mut text = format!("new {}", base_name(*ty));
                for d in dims {
                    text.push_str(&format!("[{}]", self.expr(d, 0)));
                }
                let extra = array_depth(*ty) - dims.len();
                for _ in 0..extra {
                    text.push_str("[]");
                }
                (text, PREC_POSTFIX)
            }
            ExprKind::ArrayLit { ty, elems } => {
                let items: Vec<String> = elems.iter().map(|x| self.array_item(x)).collect();
                let body = if items.is_empty() {
                    "{}".to_string()
                } else {
                    format!("{{ {} }}", items.join(", "))
                };
                (format!("new {ty} {body}"), PREC_POSTFIX)
            }
            ExprKind::Call { name, args } => {
                let args: Vec<String> = args.iter().map(|a| self.expr(a, 0)).collect();
                (format!("{name}({})", args.join(", ")), PREC_POSTFIX)
            }
            ExprKind::Placeholder(id) => {
                let text = self.placeholder(*id);
                let prec = if text.starts_with('-') { PREC_UNARY } else { PREC_POSTFIX };
                (text, prec)
            }
            ExprKind::Distinct(a, n) => {
                let a = self.expr(a, 0);
                let n = self.expr(n, 0);
                (format!("__distinct({a}, {n})"), PREC_POSTFIX)
            }
            ExprKind::Impl(a, b) => {
                let a = self.expr(a, 0);
                let b = self.expr(b, 0);
                (format!("__impl({a}, {b})"), PREC_POSTFIX)
            }
            ExprKind::Out => ("__out".into(), PREC_POSTFIX),
            ExprKind::Abs(a) => (format!("Math.abs({})", self.expr(a, 0)), PREC_POSTFIX),
            ExprKind::Cast(ty, a) => {
                let inner = self.expr(a, PREC_UNARY);
                (format!("({ty}) {inner}"), PREC_UNARY)
            }
        }
    }

    /// Nested initializer rows print as `new int[] { .. }`, which parses back
    /// to the same tree.
    fn array_item(&mut self, e: &Expr) -> String {
        self.expr(e, 0)
    }
}

fn base_elem(t: JType) -> JType {
    t.element().unwrap_or(t)
}

fn base_name(t: JType) -> &'static str {
    match t {
        JType::StringArray => "String",
        _ => "int",
    }
}

fn array_depth(t: JType) -> usize {
    match t {
        JType::IntArray2D => 2,
        JType::IntArray | JType::StringArray => 1,
        _ => 0,
    }
}

fn spec_literal(l: &Literal) -> String {
    match l {
        Literal::Bool(b) => b.to_string(),
        Literal::Int(v) => v.to_string(),
        Literal::Char(c) => char_literal(*c),
        Literal::Str(s) => string_literal(s),
    }
}
