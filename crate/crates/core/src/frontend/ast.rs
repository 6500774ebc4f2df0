//! Syntax tree for annotated program skeletons.
//!
//! The tree covers a small, Pascal-like subset of Java plus the generator
//! annotations (`ASSERT`, `ASSERTBLOCK`, `LOOP`, `INVARIANT`, placeholders,
//! `@MAIN`, `@REC`). Annotations that govern another statement are attached
//! to it rather than kept as separate statements.

use std::fmt;

use serde::Serialize;

/// 1-based source position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Statement identity, stable across normalization and optimization of the
/// statements that survive those passes.
pub type NodeId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum JType {
    Boolean,
    Byte,
    Short,
    Int,
    Long,
    Char,
    String,
    IntArray,
    IntArray2D,
    StringArray,
}

impl JType {
    pub fn is_integral(self) -> bool {
        matches!(
            self,
            JType::Byte | JType::Short | JType::Int | JType::Long | JType::Char
        )
    }

    pub fn is_array(self) -> bool {
        matches!(self, JType::IntArray | JType::IntArray2D | JType::StringArray)
    }

    /// Bit width of integral types.
    pub fn width(self) -> Option<u32> {
        match self {
            JType::Byte => Some(8),
            JType::Short | JType::Char => Some(16),
            JType::Int => Some(32),
            JType::Long => Some(64),
            _ => None,
        }
    }

    /// Element type of an array type.
    pub fn element(self) -> Option<JType> {
        match self {
            JType::IntArray => Some(JType::Int),
            JType::IntArray2D => Some(JType::IntArray),
            JType::StringArray => Some(JType::String),
            _ => None,
        }
    }

    /// Array type whose elements are `self`.
    pub fn array_of(self) -> Option<JType> {
        match self {
            JType::Int => Some(JType::IntArray),
            JType::IntArray => Some(JType::IntArray2D),
            JType::String => Some(JType::StringArray),
            _ => None,
        }
    }

    pub fn java_name(self) -> &'static str {
        match self {
            JType::Boolean => "boolean",
            JType::Byte => "byte",
            JType::Short => "short",
            JType::Int => "int",
            JType::Long => "long",
            JType::Char => "char",
            JType::String => "String",
            JType::IntArray => "int[]",
            JType::IntArray2D => "int[][]",
            JType::StringArray => "String[]",
        }
    }
}

impl fmt::Display for JType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.java_name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Literal {
    Bool(bool),
    /// Integral value; the width comes from the owning expression's type.
    Int(i64),
    Char(u16),
    Str(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum UnOp {
    Neg,
    Plus,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(
            self,
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem
        )
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge | BinOp::Eq | BinOp::Ne
        )
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }

    /// Binding strength used by the parser and the printer.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
    /// Filled in by the type checker.
    pub ty: Option<JType>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ExprKind {
    Lit(Literal),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
    IncDec {
        target: Box<Expr>,
        increment: bool,
        prefix: bool,
    },
    Index(Box<Expr>, Box<Expr>),
    Length(Box<Expr>),
    /// `new int[a][b]`; `ty` is the type of the created array.
    NewArray {
        ty: JType,
        dims: Vec<Expr>,
    },
    /// `new int[] { .. }` or a bare `{ .. }` initializer.
    ArrayLit {
        ty: JType,
        elems: Vec<Expr>,
    },
    Call {
        name: String,
        args: Vec<Expr>,
    },
    /// Index into [`SkeletonAst::placeholders`].
    Placeholder(usize),
    /// `__distinct(arr, n)`: the first `n` elements are pairwise distinct.
    Distinct(Box<Expr>, Box<Expr>),
    /// `__impl(a, b)`: logical implication.
    Impl(Box<Expr>, Box<Expr>),
    /// `__out`: everything printed so far.
    Out,
    /// String concatenation (produced by the type checker from `+`).
    Concat(Box<Expr>, Box<Expr>),
    StrEquals(Box<Expr>, Box<Expr>),
    StrLength(Box<Expr>),
    Abs(Box<Expr>),
    Cast(JType, Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr {
            kind,
            span,
            ty: None,
        }
    }

    pub fn typed(kind: ExprKind, span: Span, ty: JType) -> Self {
        Expr {
            kind,
            span,
            ty: Some(ty),
        }
    }

    pub fn ty(&self) -> JType {
        self.ty.expect("expression not type checked")
    }

    pub fn int_lit(value: i64, ty: JType, span: Span) -> Self {
        Expr::typed(ExprKind::Lit(Literal::Int(value)), span, ty)
    }

    pub fn bool_lit(value: bool, span: Span) -> Self {
        Expr::typed(ExprKind::Lit(Literal::Bool(value)), span, JType::Boolean)
    }

    pub fn var(name: &str, ty: JType, span: Span) -> Self {
        Expr::typed(ExprKind::Var(name.to_string()), span, ty)
    }

    pub fn negated(e: Expr) -> Self {
        let span = e.span;
        Expr::typed(ExprKind::Unary(UnOp::Not, Box::new(e)), span, JType::Boolean)
    }

    pub fn and(a: Expr, b: Expr) -> Self {
        let span = a.span;
        Expr::typed(
            ExprKind::Binary(BinOp::And, Box::new(a), Box::new(b)),
            span,
            JType::Boolean,
        )
    }

    pub fn as_lit(&self) -> Option<&Literal> {
        match &self.kind {
            ExprKind::Lit(l) => Some(l),
            _ => None,
        }
    }

    /// Visit this expression and all sub-expressions, parents first.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        for child in self.children() {
            child.walk(f);
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Lit(_) | ExprKind::Var(_) | ExprKind::Placeholder(_) | ExprKind::Out => {
                vec![]
            }
            ExprKind::Unary(_, e)
            | ExprKind::Length(e)
            | ExprKind::StrLength(e)
            | ExprKind::Abs(e)
            | ExprKind::Cast(_, e) => vec![e],
            ExprKind::IncDec { target, .. } => vec![target],
            ExprKind::Binary(_, a, b)
            | ExprKind::Index(a, b)
            | ExprKind::Distinct(a, b)
            | ExprKind::Impl(a, b)
            | ExprKind::Concat(a, b)
            | ExprKind::StrEquals(a, b) => vec![a, b],
            ExprKind::Ternary(a, b, c) => vec![a, b, c],
            ExprKind::NewArray { dims, .. } => dims.iter().collect(),
            ExprKind::ArrayLit { elems, .. } => elems.iter().collect(),
            ExprKind::Call { args, .. } => args.iter().collect(),
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            ExprKind::Lit(_) | ExprKind::Var(_) | ExprKind::Placeholder(_) | ExprKind::Out => {
                vec![]
            }
            ExprKind::Unary(_, e)
            | ExprKind::Length(e)
            | ExprKind::StrLength(e)
            | ExprKind::Abs(e)
            | ExprKind::Cast(_, e) => vec![e],
            ExprKind::IncDec { target, .. } => vec![target],
            ExprKind::Binary(_, a, b)
            | ExprKind::Index(a, b)
            | ExprKind::Distinct(a, b)
            | ExprKind::Impl(a, b)
            | ExprKind::Concat(a, b)
            | ExprKind::StrEquals(a, b) => vec![a, b],
            ExprKind::Ternary(a, b, c) => vec![a, b, c],
            ExprKind::NewArray { dims, .. } => dims.iter_mut().collect(),
            ExprKind::ArrayLit { elems, .. } => elems.iter_mut().collect(),
            ExprKind::Call { args, .. } => args.iter_mut().collect(),
        }
    }

    /// True if evaluating the expression may change program state: variable
    /// updates, heap writes, output, or calls to user functions.
    pub fn has_side_effects(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if matches!(e.kind, ExprKind::IncDec { .. } | ExprKind::Call { .. }) {
                found = true;
            }
        });
        found
    }

    /// True if the expression allocates arrays.
    pub fn allocates(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if matches!(e.kind, ExprKind::NewArray { .. } | ExprKind::ArrayLit { .. }) {
                found = true;
            }
        });
        found
    }

    pub fn walk_mut(&mut self, f: &mut dyn FnMut(&mut Expr)) {
        f(self);
        for child in self.children_mut() {
            child.walk_mut(f);
        }
    }

    pub fn placeholders(&self, out: &mut Vec<usize>) {
        self.walk(&mut |e| {
            if let ExprKind::Placeholder(id) = e.kind {
                out.push(id);
            }
        });
    }
}

/// Allowed values of a placeholder or iteration counts of a loop.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ValueSpec {
    /// Inclusive integer range (characters use their code points).
    Range(i64, i64),
    List(Vec<Literal>),
    /// Unconstrained; only valid for `BOOLEAN()`.
    Any,
}

impl ValueSpec {
    /// Smallest and largest integral value admitted.
    pub fn int_bounds(&self) -> Option<(i64, i64)> {
        match self {
            ValueSpec::Range(lo, hi) => Some((*lo, *hi)),
            ValueSpec::List(items) => {
                let values: Vec<i64> = items.iter().filter_map(literal_as_i64).collect();
                if values.len() != items.len() || values.is_empty() {
                    return None;
                }
                Some((*values.iter().min()?, *values.iter().max()?))
            }
            ValueSpec::Any => None,
        }
    }

    /// Whether `value` is admitted by an integral spec.
    pub fn admits_int(&self, value: i64) -> bool {
        match self {
            ValueSpec::Range(lo, hi) => *lo <= value && value <= *hi,
            ValueSpec::List(items) => items
                .iter()
                .any(|l| literal_as_i64(l).is_some_and(|v| v == value)),
            ValueSpec::Any => true,
        }
    }

    /// The single admitted literal, if the value spec admits exactly one.
    pub fn singleton(&self) -> Option<Literal> {
        match self {
            ValueSpec::Range(lo, hi) if lo == hi => Some(Literal::Int(*lo)),
            ValueSpec::List(items) if items.len() == 1 => Some(items[0].clone()),
            ValueSpec::List(items) if !items.is_empty() && items.iter().all(|l| *l == items[0]) => {
                Some(items[0].clone())
            }
            _ => None,
        }
    }
}

pub fn literal_as_i64(lit: &Literal) -> Option<i64> {
    match lit {
        Literal::Int(v) => Some(*v),
        Literal::Char(c) => Some(*c as i64),
        _ => None,
    }
}

/// Iteration count constraint of a `LOOP` annotation, counting body
/// executions per execution of the loop statement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoopBound {
    pub spec: ValueSpec,
}

impl LoopBound {
    pub fn range(lo: i64, hi: i64) -> Self {
        LoopBound {
            spec: ValueSpec::Range(lo, hi),
        }
    }

    pub fn lower(&self) -> u64 {
        self.spec.int_bounds().map(|(lo, _)| lo.max(0) as u64).unwrap_or(0)
    }

    pub fn upper(&self) -> u64 {
        self.spec.int_bounds().map(|(_, hi)| hi.max(0) as u64).unwrap_or(0)
    }

    /// Whether the loop may stop after exactly `count` iterations.
    pub fn allows(&self, count: u64) -> bool {
        self.spec.admits_int(count as i64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PlaceholderKind {
    Int,
    Boolean,
    Char,
    String,
    IntArray,
    Int2DArray,
    StringArray,
}

impl PlaceholderKind {
    pub fn java_type(self) -> JType {
        match self {
            PlaceholderKind::Int => JType::Int,
            PlaceholderKind::Boolean => JType::Boolean,
            PlaceholderKind::Char => JType::Char,
            PlaceholderKind::String => JType::String,
            PlaceholderKind::IntArray => JType::IntArray,
            PlaceholderKind::Int2DArray => JType::IntArray2D,
            PlaceholderKind::StringArray => JType::StringArray,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            PlaceholderKind::Int => "INT",
            PlaceholderKind::Boolean => "BOOLEAN",
            PlaceholderKind::Char => "CHAR",
            PlaceholderKind::String => "STRING",
            PlaceholderKind::IntArray => "INTARRAY",
            PlaceholderKind::Int2DArray => "INT2DARRAY",
            PlaceholderKind::StringArray => "STRINGARRAY",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Some(match word {
            "INT" => PlaceholderKind::Int,
            "BOOLEAN" => PlaceholderKind::Boolean,
            "CHAR" => PlaceholderKind::Char,
            "STRING" => PlaceholderKind::String,
            "INTARRAY" => PlaceholderKind::IntArray,
            "INT2DARRAY" => PlaceholderKind::Int2DArray,
            "STRINGARRAY" => PlaceholderKind::StringArray,
            _ => return None,
        })
    }
}

/// A typed hole whose value the solver chooses.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Placeholder {
    /// Ordinal in source order, starting at 0.
    pub id: usize,
    pub kind: PlaceholderKind,
    /// Scalar values, or array elements for array kinds.
    pub values: ValueSpec,
    /// Array length (outer length for 2-D arrays).
    pub length: Option<ValueSpec>,
    /// Row length of 2-D arrays.
    pub inner_length: Option<ValueSpec>,
    pub is_hole: bool,
    pub span: Span,
}

impl Placeholder {
    pub fn max_length(&self) -> Option<usize> {
        self.length
            .as_ref()
            .and_then(|l| l.int_bounds())
            .map(|(_, hi)| hi.max(0) as usize)
    }

    pub fn max_inner_length(&self) -> Option<usize> {
        self.inner_length
            .as_ref()
            .and_then(|l| l.int_bounds())
            .map(|(_, hi)| hi.max(0) as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stmt {
    pub id: NodeId,
    pub span: Span,
    pub kind: StmtKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum StmtKind {
    Empty,
    Block(Vec<Stmt>),
    VarDecl {
        ty: JType,
        name: String,
        init: Option<Expr>,
    },
    Assign {
        target: Expr,
        value: Expr,
    },
    CompoundAssign {
        target: Expr,
        op: BinOp,
        value: Expr,
    },
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
        bound: Option<LoopBound>,
        invariant: Option<Expr>,
    },
    DoWhile {
        body: Box<Stmt>,
        cond: Expr,
        bound: Option<LoopBound>,
    },
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        update: Vec<Stmt>,
        body: Box<Stmt>,
        bound: Option<LoopBound>,
    },
    Return(Option<Expr>),
    Break,
    Continue,
    Print {
        arg: Option<Expr>,
        newline: bool,
    },
    Expr(Expr),
    Assert(Expr),
    /// Generation-only block: evaluated during generation, removed from
    /// rendered instances.
    AssertBlock(Box<Stmt>),
}

impl Stmt {
    pub fn new(id: NodeId, span: Span, kind: StmtKind) -> Self {
        Stmt { id, span, kind }
    }

    pub fn is_loop(&self) -> bool {
        matches!(
            self.kind,
            StmtKind::While { .. } | StmtKind::DoWhile { .. } | StmtKind::For { .. }
        )
    }

    /// Direct child statements.
    pub fn children(&self) -> Vec<&Stmt> {
        match &self.kind {
            StmtKind::Block(stmts) => stmts.iter().collect(),
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                let mut v: Vec<&Stmt> = vec![then_branch];
                if let Some(e) = else_branch {
                    v.push(e);
                }
                v
            }
            StmtKind::While { body, .. } | StmtKind::DoWhile { body, .. } => vec![body],
            StmtKind::For {
                init, update, body, ..
            } => {
                let mut v: Vec<&Stmt> = Vec::new();
                if let Some(i) = init {
                    v.push(i);
                }
                v.extend(update.iter());
                v.push(body);
                v
            }
            StmtKind::AssertBlock(b) => vec![b],
            _ => vec![],
        }
    }

    /// Expressions owned directly by this statement.
    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::VarDecl { init, .. } => init.iter().collect(),
            StmtKind::Assign { target, value } | StmtKind::CompoundAssign { target, value, .. } => {
                vec![target, value]
            }
            StmtKind::If { cond, .. } | StmtKind::DoWhile { cond, .. } => vec![cond],
            StmtKind::While { cond, invariant, .. } => {
                let mut v = vec![cond];
                if let Some(i) = invariant {
                    v.push(i);
                }
                v
            }
            StmtKind::For { cond, .. } => cond.iter().collect(),
            StmtKind::Return(e) => e.iter().collect(),
            StmtKind::Print { arg, .. } => arg.iter().collect(),
            StmtKind::Expr(e) | StmtKind::Assert(e) => vec![e],
            _ => vec![],
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Stmt> {
        match &mut self.kind {
            StmtKind::Block(stmts) => stmts.iter_mut().collect(),
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                let mut v: Vec<&mut Stmt> = vec![then_branch];
                if let Some(e) = else_branch {
                    v.push(e);
                }
                v
            }
            StmtKind::While { body, .. } | StmtKind::DoWhile { body, .. } => vec![body],
            StmtKind::For {
                init, update, body, ..
            } => {
                let mut v: Vec<&mut Stmt> = Vec::new();
                if let Some(i) = init {
                    v.push(i);
                }
                v.extend(update.iter_mut());
                v.push(body);
                v
            }
            StmtKind::AssertBlock(b) => vec![b],
            _ => vec![],
        }
    }

    pub fn exprs_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            StmtKind::VarDecl { init, .. } => init.iter_mut().collect(),
            StmtKind::Assign { target, value } | StmtKind::CompoundAssign { target, value, .. } => {
                vec![target, value]
            }
            StmtKind::If { cond, .. } | StmtKind::DoWhile { cond, .. } => vec![cond],
            StmtKind::While { cond, invariant, .. } => {
                let mut v = vec![cond];
                if let Some(i) = invariant {
                    v.push(i);
                }
                v
            }
            StmtKind::For { cond, .. } => cond.iter_mut().collect(),
            StmtKind::Return(e) => e.iter_mut().collect(),
            StmtKind::Print { arg, .. } => arg.iter_mut().collect(),
            StmtKind::Expr(e) | StmtKind::Assert(e) => vec![e],
            _ => vec![],
        }
    }

    pub fn walk_mut(&mut self, f: &mut dyn FnMut(&mut Stmt)) {
        f(self);
        for c in self.children_mut() {
            c.walk_mut(f);
        }
    }

    /// Visit this statement and every nested statement, parents first.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Stmt)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Param {
    pub name: String,
    pub ty: JType,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionDecl {
    pub name: String,
    pub params: Vec<Param>,
    /// `None` for `void`.
    pub ret: Option<JType>,
    pub body: Stmt,
    /// From `@REC(k)`.
    pub rec_bound: Option<u32>,
    pub is_entry: bool,
    pub span: Span,
}

impl FunctionDecl {
    /// Allowed number of nested re-activations; absent `@REC` means none.
    pub fn recursion_limit(&self) -> u32 {
        self.rec_bound.unwrap_or(0)
    }
}

/// A parsed skeleton.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkeletonAst {
    pub functions: Vec<FunctionDecl>,
    /// Name of the `@MAIN` function.
    pub entry: String,
    pub placeholders: Vec<Placeholder>,
    /// The source was a bare statement list wrapped into an implicit entry.
    pub implicit_main: bool,
    pub next_id: NodeId,
}

impl SkeletonAst {
    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn entry_function(&self) -> &FunctionDecl {
        self.function(&self.entry).expect("entry function exists")
    }

    pub fn fresh_id(&mut self) -> NodeId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub fn hole(&self) -> Option<&Placeholder> {
        self.placeholders.iter().find(|p| p.is_hole)
    }

    /// Copy with all spans and statement ids zeroed, for structural
    /// comparison.
    pub fn without_positions(&self) -> SkeletonAst {
        let mut ast = self.clone();
        ast.next_id = 0;
        for p in &mut ast.placeholders {
            p.span = Span::default();
        }
        for f in &mut ast.functions {
            f.span = Span::default();
            f.body.walk_mut(&mut |s| {
                s.id = 0;
                s.span = Span::default();
                for e in s.exprs_mut() {
                    e.walk_mut(&mut |x| x.span = Span::default());
                }
            });
        }
        ast
    }

    /// Visit every statement of every function.
    pub fn walk_stmts<'a>(&'a self, f: &mut dyn FnMut(&'a Stmt)) {
        for func in &self.functions {
            func.body.walk(f);
        }
    }
}
