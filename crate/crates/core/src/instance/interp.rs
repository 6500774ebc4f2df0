//! Reference interpreter for the skeleton fragment.
//!
//! Runs a skeleton with a placeholder valuation (or a plain parsed program)
//! under Java semantics. Skeleton assertions are evaluated where they occur
//! and recorded instead of aborting the run, so a single execution yields a
//! full verdict list.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::arith;
use crate::frontend::ast::*;
use crate::frontend::typecheck::binary_promote;
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InterpConfig {
    /// Statement budget; exceeding it is a fault.
    pub max_steps: u64,
    /// Stop as soon as a LOOP-annotated loop or a recursive call exceeds its
    /// declared limit. Used when searching valuations exhaustively.
    pub enforce_bounds: bool,
}

impl Default for InterpConfig {
    fn default() -> Self {
        InterpConfig {
            max_steps: 10_000_000,
            enforce_bounds: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fault {
    DivisionByZero { line: u32, col: u32 },
    IndexOutOfBounds { line: u32, col: u32, index: i64, length: i64 },
    NegativeArraySize { line: u32, col: u32, size: i64 },
    StepLimit { steps: u64 },
    LoopBound { line: u32, col: u32, iterations: u64 },
    RecursionBound { function: String, depth: u32 },
    MissingValue { placeholder: usize },
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fault::DivisionByZero { line, col } => write!(f, "{line}:{col}: division by zero"),
            Fault::IndexOutOfBounds {
                line,
                col,
                index,
                length,
            } => write!(f, "{line}:{col}: index {index} out of bounds for length {length}"),
            Fault::NegativeArraySize { line, col, size } => {
                write!(f, "{line}:{col}: negative array size {size}")
            }
            Fault::StepLimit { steps } => write!(f, "step limit of {steps} exhausted"),
            Fault::LoopBound {
                line,
                col,
                iterations,
            } => write!(f, "{line}:{col}: loop exceeded its bound after {iterations} iterations"),
            Fault::RecursionBound { function, depth } => {
                write!(f, "recursion depth {depth} of '{function}' exceeds its bound")
            }
            Fault::MissingValue { placeholder } => {
                write!(f, "no value for placeholder {placeholder}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AssertionVerdict {
    pub line: u32,
    pub col: u32,
    /// True if every evaluation at this site held.
    pub holds: bool,
    pub evaluations: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LoopRecord {
    /// Position among the loops visible in the rendered program.
    pub ordinal: usize,
    pub line: u32,
    /// Body executions for each execution of the loop statement.
    pub iterations: Vec<u64>,
}

/// Observable result of one execution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExecTrace {
    pub output: String,
    pub return_value: Option<Value>,
    pub assertions: Vec<AssertionVerdict>,
    pub steps: u64,
    pub loops: Vec<LoopRecord>,
    /// Deepest number of simultaneously active re-activations per function.
    pub recursion_depth: BTreeMap<String, u32>,
    pub fault: Option<Fault>,
    /// Variables of the entry function when it finished.
    #[serde(skip)]
    pub final_store: BTreeMap<String, Value>,
    /// Iteration counts keyed by loop statement id, including loops in
    /// generation-only code.
    #[serde(skip)]
    pub loop_counts: BTreeMap<NodeId, Vec<u64>>,
    /// Verdicts keyed by assertion statement id.
    #[serde(skip)]
    pub assertion_ids: BTreeMap<NodeId, bool>,
}

impl ExecTrace {
    pub fn all_assertions_hold(&self) -> bool {
        self.assertions.iter().all(|a| a.holds)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum RValue {
    Bool(bool),
    Int(i64),
    Str(String),
    Arr(usize),
}

impl RValue {
    fn int(&self) -> i64 {
        match self {
            RValue::Int(v) => *v,
            other => panic!("expected integer, found {other:?}"),
        }
    }

    fn bool(&self) -> bool {
        match self {
            RValue::Bool(b) => *b,
            other => panic!("expected boolean, found {other:?}"),
        }
    }

    fn arr(&self) -> usize {
        match self {
            RValue::Arr(a) => *a,
            other => panic!("expected array, found {other:?}"),
        }
    }

    fn str(&self) -> &str {
        match self {
            RValue::Str(s) => s,
            other => panic!("expected string, found {other:?}"),
        }
    }
}

enum Flow {
    Normal,
    Break,
    Continue,
    Return(Option<RValue>),
}

/// Unwinds execution on a fault.
struct Abort(Fault);

type R<T> = Result<T, Abort>;

struct Frame {
    scopes: Vec<HashMap<String, (JType, RValue)>>,
}

/// Map from visible loop statement to its ordinal. Loops inside
/// ASSERTBLOCK are not part of the rendered program and get no ordinal.
pub fn visible_loop_ordinals(ast: &SkeletonAst) -> HashMap<NodeId, usize> {
    fn go(s: &Stmt, out: &mut HashMap<NodeId, usize>) {
        if matches!(s.kind, StmtKind::AssertBlock(_)) {
            return;
        }
        if s.is_loop() {
            let n = out.len();
            out.insert(s.id, n);
        }
        for c in s.children() {
            go(c, out);
        }
    }
    let mut out = HashMap::new();
    for f in &ast.functions {
        go(&f.body, &mut out);
    }
    out
}

/// Run the entry function of `ast` with `values` substituted for the
/// placeholders.
pub fn interpret(ast: &SkeletonAst, values: &BTreeMap<usize, Value>, cfg: &InterpConfig) -> ExecTrace {
    let mut it = Interp {
        ast,
        values,
        cfg,
        heap: Vec::new(),
        frames: Vec::new(),
        output: String::new(),
        steps: 0,
        assertions: BTreeMap::new(),
        assertion_ids: BTreeMap::new(),
        loop_counts: BTreeMap::new(),
        active: HashMap::new(),
        max_depth: BTreeMap::new(),
        final_store: BTreeMap::new(),
        gen_only: 0,
    };
    let entry = ast.entry_function();
    let result = it.call(entry, Vec::new(), true);
    let (return_value, fault) = match result {
        Ok(v) => (v.map(|v| it.export(&v, entry.ret.unwrap())), None),
        Err(Abort(f)) => (None, Some(f)),
    };
    let ordinals = visible_loop_ordinals(ast);
    let mut lines = HashMap::new();
    ast.walk_stmts(&mut |s| {
        if s.is_loop() {
            lines.insert(s.id, s.span.line);
        }
    });
    let mut loops: Vec<LoopRecord> = it
        .loop_counts
        .iter()
        .filter_map(|(id, counts)| {
            ordinals.get(id).map(|&ordinal| LoopRecord {
                ordinal,
                line: lines[id],
                iterations: counts.clone(),
            })
        })
        .collect();
    loops.sort_by_key(|l| l.ordinal);
    ExecTrace {
        output: it.output,
        return_value,
        assertions: it
            .assertions
            .into_iter()
            .map(|(span, (holds, evaluations))| AssertionVerdict {
                line: span.line,
                col: span.col,
                holds,
                evaluations,
            })
            .collect(),
        steps: it.steps,
        loops,
        recursion_depth: it.max_depth,
        fault,
        final_store: it.final_store,
        loop_counts: it.loop_counts,
        assertion_ids: it.assertion_ids,
    }
}

struct Interp<'a> {
    ast: &'a SkeletonAst,
    values: &'a BTreeMap<usize, Value>,
    cfg: &'a InterpConfig,
    heap: Vec<Vec<RValue>>,
    frames: Vec<Frame>,
    output: String,
    steps: u64,
    assertions: BTreeMap<Span, (bool, u64)>,
    assertion_ids: BTreeMap<NodeId, bool>,
    loop_counts: BTreeMap<NodeId, Vec<u64>>,
    active: HashMap<String, u32>,
    max_depth: BTreeMap<String, u32>,
    final_store: BTreeMap<String, Value>,
    /// Nesting of generation-only code, whose statements are not counted.
    gen_only: u32,
}

fn fault_at(span: Span, make: impl FnOnce(u32, u32) -> Fault) -> Abort {
    Abort(make(span.line, span.col))
}

impl<'a> Interp<'a> {
    fn frame(&mut self) -> &mut Frame {
        self.frames.last_mut().expect("active frame")
    }

    fn lookup(&self, name: &str) -> &(JType, RValue) {
        let frame = self.frames.last().expect("active frame");
        frame
            .scopes
            .iter()
            .rev()
            .find_map(|s| s.get(name))
            .unwrap_or_else(|| panic!("unbound variable '{name}'"))
    }

    fn set_var(&mut self, name: &str, v: RValue) {
        let frame = self.frame();
        for scope in frame.scopes.iter_mut().rev() {
            if let Some(slot) = scope.get_mut(name) {
                let v = match v {
                    RValue::Int(i) => RValue::Int(arith::wrap(i, slot.0)),
                    other => other,
                };
                slot.1 = v;
                return;
            }
        }
        panic!("assignment to unbound variable '{name}'");
    }

    fn declare(&mut self, name: &str, ty: JType, v: RValue) {
        let v = match v {
            RValue::Int(i) => RValue::Int(arith::wrap(i, ty)),
            other => other,
        };
        self.frame()
            .scopes
            .last_mut()
            .unwrap()
            .insert(name.to_string(), (ty, v));
    }

    fn tick(&mut self) -> R<()> {
        if self.gen_only > 0 {
            return Ok(());
        }
        self.steps += 1;
        if self.steps > self.cfg.max_steps {
            return Err(Abort(Fault::StepLimit {
                steps: self.cfg.max_steps,
            }));
        }
        Ok(())
    }

    fn alloc(&mut self, elems: Vec<RValue>) -> RValue {
        self.heap.push(elems);
        RValue::Arr(self.heap.len() - 1)
    }

    /// Convert an interpreter value into a self-contained value.
    fn export(&self, v: &RValue, ty: JType) -> Value {
        match (v, ty) {
            (RValue::Bool(b), _) => Value::Bool(*b),
            (RValue::Int(i), JType::Char) => Value::Char(*i as u16),
            (RValue::Int(i), _) => Value::Int(*i),
            (RValue::Str(s), _) => Value::Str(s.clone()),
            (RValue::Arr(a), JType::IntArray) => {
                Value::IntArray(self.heap[*a].iter().map(|x| x.int()).collect())
            }
            (RValue::Arr(a), JType::StringArray) => {
                Value::StringArray(self.heap[*a].iter().map(|x| x.str().to_string()).collect())
            }
            (RValue::Arr(a), JType::IntArray2D) => Value::IntArray2D(
                self.heap[*a]
                    .iter()
                    .map(|row| self.heap[row.arr()].iter().map(|x| x.int()).collect())
                    .collect(),
            ),
            (RValue::Arr(_), other) => panic!("array value for {other}"),
        }
    }

    fn import(&mut self, v: &Value) -> RValue {
        match v {
            Value::Bool(b) => RValue::Bool(*b),
            Value::Int(i) => RValue::Int(*i),
            Value::Char(c) => RValue::Int(*c as i64),
            Value::Str(s) => RValue::Str(s.clone()),
            Value::IntArray(xs) => self.alloc(xs.iter().map(|x| RValue::Int(*x)).collect()),
            Value::StringArray(xs) => self.alloc(xs.iter().map(|x| RValue::Str(x.clone())).collect()),
            Value::IntArray2D(rows) => {
                let rows: Vec<RValue> = rows
                    .iter()
                    .map(|r| self.alloc(r.iter().map(|x| RValue::Int(*x)).collect()))
                    .collect();
                self.alloc(rows)
            }
        }
    }

    fn call(&mut self, f: &'a FunctionDecl, args: Vec<RValue>, entry: bool) -> R<Option<RValue>> {
        let prior = *self.active.get(&f.name).unwrap_or(&0);
        let depth = self.max_depth.entry(f.name.clone()).or_insert(0);
        *depth = (*depth).max(prior);
        if self.cfg.enforce_bounds && prior > f.recursion_limit() {
            return Err(Abort(Fault::RecursionBound {
                function: f.name.clone(),
                depth: prior,
            }));
        }
        *self.active.entry(f.name.clone()).or_insert(0) += 1;
        let mut scope = HashMap::new();
        for (p, a) in f.params.iter().zip(args) {
            let a = match a {
                RValue::Int(i) => RValue::Int(arith::wrap(i, p.ty)),
                other => other,
            };
            scope.insert(p.name.clone(), (p.ty, a));
        }
        self.frames.push(Frame {
            scopes: vec![scope],
        });
        let result = self.function_body(&f.body, entry);
        self.frames.pop();
        *self.active.get_mut(&f.name).unwrap() -= 1;
        let flow = result?;
        Ok(match flow {
            Flow::Return(v) => v.map(|v| match (v, f.ret) {
                (RValue::Int(i), Some(t)) => RValue::Int(arith::wrap(i, t)),
                (other, _) => other,
            }),
            _ => None,
        })
    }

    fn function_body(&mut self, body: &'a Stmt, entry: bool) -> R<Flow> {
        let StmtKind::Block(stmts) = &body.kind else {
            return self.stmt(body);
        };
        self.frame().scopes.push(HashMap::new());
        let mut flow = Ok(Flow::Normal);
        for s in stmts {
            flow = self.stmt(s);
            if !matches!(flow, Ok(Flow::Normal)) {
                break;
            }
        }
        if entry {
            let mut store = BTreeMap::new();
            let scopes = std::mem::take(&mut self.frame().scopes);
            for scope in &scopes {
                for (name, (ty, v)) in scope {
                    store.insert(name.clone(), self.export(v, *ty));
                }
            }
            self.frame().scopes = scopes;
            self.final_store = store;
        }
        self.frame().scopes.pop();
        flow
    }

    fn block(&mut self, stmts: &'a [Stmt]) -> R<Flow> {
        self.frame().scopes.push(HashMap::new());
        let mut flow = Ok(Flow::Normal);
        for s in stmts {
            flow = self.stmt(s);
            if !matches!(flow, Ok(Flow::Normal)) {
                break;
            }
        }
        self.frame().scopes.pop();
        flow
    }

    fn scoped_stmt(&mut self, s: &'a Stmt) -> R<Flow> {
        self.frame().scopes.push(HashMap::new());
        let r = self.stmt(s);
        self.frame().scopes.pop();
        r
    }

    fn record_assertion(&mut self, s: &Stmt, holds: bool) {
        let e = self.assertions.entry(s.span).or_insert((true, 0));
        e.0 &= holds;
        e.1 += 1;
        let slot = self.assertion_ids.entry(s.id).or_insert(true);
        *slot &= holds;
    }

    fn record_check(&mut self, span: Span, holds: bool) {
        let e = self.assertions.entry(span).or_insert((true, 0));
        e.0 &= holds;
        e.1 += 1;
    }

    fn stmt(&mut self, s: &'a Stmt) -> R<Flow> {
        match &s.kind {
            StmtKind::Empty => Ok(Flow::Normal),
            StmtKind::Block(stmts) => self.block(stmts),
            StmtKind::VarDecl { ty, name, init } => {
                self.tick()?;
                let v = match init {
                    Some(e) => self.expr(e)?,
                    None => default_value(*ty),
                };
                self.declare(name, *ty, v);
                Ok(Flow::Normal)
            }
            StmtKind::Assign { target, value } => {
                self.tick()?;
                match &target.kind {
                    ExprKind::Var(name) => {
                        let v = self.expr(value)?;
                        self.set_var(name, v);
                    }
                    ExprKind::Index(a, i) => {
                        let arr = self.expr(a)?.arr();
                        let idx = self.expr(i)?.int();
                        let v = self.expr(value)?;
                        self.store(arr, idx, v, target.ty(), target.span)?;
                    }
                    _ => unreachable!("assignment target"),
                }
                Ok(Flow::Normal)
            }
            StmtKind::CompoundAssign { target, op, value } => {
                self.tick()?;
                let tty = target.ty();
                match &target.kind {
                    ExprKind::Var(name) => {
                        let old = self.lookup(name).1.clone();
                        let rhs = self.expr(value)?;
                        let v = self.combine(*op, old, tty, rhs, value.ty(), s.span)?;
                        self.set_var(name, v);
                    }
                    ExprKind::Index(a, i) => {
                        let arr = self.expr(a)?.arr();
                        let idx = self.expr(i)?.int();
                        let old = self.load(arr, idx, target.span)?;
                        let rhs = self.expr(value)?;
                        let v = self.combine(*op, old, tty, rhs, value.ty(), s.span)?;
                        self.store(arr, idx, v, tty, target.span)?;
                    }
                    _ => unreachable!("assignment target"),
                }
                Ok(Flow::Normal)
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.tick()?;
                if self.expr(cond)?.bool() {
                    self.scoped_stmt(then_branch)
                } else if let Some(e) = else_branch {
                    self.scoped_stmt(e)
                } else {
                    Ok(Flow::Normal)
                }
            }
            StmtKind::While {
                cond,
                body,
                bound,
                invariant,
            } => {
                self.tick()?;
                let mut n = 0u64;
                loop {
                    if let Some(inv) = invariant {
                        let holds = self.gen(|it| it.expr(inv))?.bool();
                        self.record_check(inv.span, holds);
                    }
                    if !self.expr(cond)?.bool() {
                        break;
                    }
                    n += 1;
                    self.check_overrun(s, bound.as_ref(), n)?;
                    match self.scoped_stmt(body)? {
                        Flow::Break => break,
                        Flow::Return(v) => {
                            self.finish_loop(s, n);
                            return Ok(Flow::Return(v));
                        }
                        _ => {}
                    }
                }
                self.finish_loop(s, n);
                Ok(Flow::Normal)
            }
            StmtKind::DoWhile { body, cond, bound } => {
                self.tick()?;
                let mut n = 0u64;
                loop {
                    n += 1;
                    self.check_overrun(s, bound.as_ref(), n)?;
                    match self.scoped_stmt(body)? {
                        Flow::Break => break,
                        Flow::Return(v) => {
                            self.finish_loop(s, n);
                            return Ok(Flow::Return(v));
                        }
                        _ => {}
                    }
                    if !self.expr(cond)?.bool() {
                        break;
                    }
                }
                self.finish_loop(s, n);
                Ok(Flow::Normal)
            }
            StmtKind::For {
                init,
                cond,
                update,
                body,
                bound,
            } => {
                self.tick()?;
                self.frame().scopes.push(HashMap::new());
                let r = self.for_loop(s, init.as_deref(), cond.as_ref(), update, body, bound.as_ref());
                self.frame().scopes.pop();
                r
            }
            StmtKind::Return(e) => {
                self.tick()?;
                let v = match e {
                    Some(e) => Some(self.expr(e)?),
                    None => None,
                };
                Ok(Flow::Return(v))
            }
            StmtKind::Break => {
                self.tick()?;
                Ok(Flow::Break)
            }
            StmtKind::Continue => {
                self.tick()?;
                Ok(Flow::Continue)
            }
            StmtKind::Print { arg, newline } => {
                self.tick()?;
                if let Some(a) = arg {
                    let v = self.expr(a)?;
                    let text = self.stringify(&v, a.ty());
                    self.output.push_str(&text);
                }
                if *newline {
                    self.output.push('\n');
                }
                Ok(Flow::Normal)
            }
            StmtKind::Expr(e) => {
                self.tick()?;
                if let ExprKind::Call { .. } = &e.kind {
                    self.call_expr(e)?;
                } else {
                    self.expr(e)?;
                }
                Ok(Flow::Normal)
            }
            StmtKind::Assert(e) => {
                let holds = self.gen(|it| it.expr(e))?.bool();
                self.record_assertion(s, holds);
                Ok(Flow::Normal)
            }
            StmtKind::AssertBlock(body) => {
                self.gen(|it| it.scoped_stmt(body))?;
                Ok(Flow::Normal)
            }
        }
    }

    fn gen<T>(&mut self, f: impl FnOnce(&mut Self) -> R<T>) -> R<T> {
        self.gen_only += 1;
        let r = f(self);
        self.gen_only -= 1;
        r
    }

    fn for_loop(
        &mut self,
        s: &'a Stmt,
        init: Option<&'a Stmt>,
        cond: Option<&'a Expr>,
        update: &'a [Stmt],
        body: &'a Stmt,
        bound: Option<&LoopBound>,
    ) -> R<Flow> {
        if let Some(i) = init {
            self.stmt(i)?;
        }
        let mut n = 0u64;
        loop {
            if let Some(c) = cond {
                if !self.expr(c)?.bool() {
                    break;
                }
            }
            n += 1;
            self.check_overrun(s, bound, n)?;
            match self.scoped_stmt(body)? {
                Flow::Break => break,
                Flow::Return(v) => {
                    self.finish_loop(s, n);
                    return Ok(Flow::Return(v));
                }
                _ => {}
            }
            for u in update {
                self.stmt(u)?;
            }
        }
        self.finish_loop(s, n);
        Ok(Flow::Normal)
    }

    fn check_overrun(&mut self, s: &Stmt, bound: Option<&LoopBound>, n: u64) -> R<()> {
        if let (true, Some(b)) = (self.cfg.enforce_bounds, bound) {
            if n > b.upper() {
                return Err(fault_at(s.span, |line, col| Fault::LoopBound {
                    line,
                    col,
                    iterations: n,
                }));
            }
        }
        Ok(())
    }

    fn finish_loop(&mut self, s: &Stmt, n: u64) {
        self.loop_counts.entry(s.id).or_default().push(n);
    }

    fn load(&self, arr: usize, idx: i64, span: Span) -> R<RValue> {
        let a = &self.heap[arr];
        if idx < 0 || idx >= a.len() as i64 {
            return Err(fault_at(span, |line, col| Fault::IndexOutOfBounds {
                line,
                col,
                index: idx,
                length: a.len() as i64,
            }));
        }
        Ok(a[idx as usize].clone())
    }

    fn store(&mut self, arr: usize, idx: i64, v: RValue, ty: JType, span: Span) -> R<()> {
        let len = self.heap[arr].len() as i64;
        if idx < 0 || idx >= len {
            return Err(fault_at(span, |line, col| Fault::IndexOutOfBounds {
                line,
                col,
                index: idx,
                length: len,
            }));
        }
        let v = match v {
            RValue::Int(i) => RValue::Int(arith::wrap(i, ty)),
            other => other,
        };
        self.heap[arr][idx as usize] = v;
        Ok(())
    }

    /// `old op= rhs` including the implicit narrowing cast.
    fn combine(&mut self, op: BinOp, old: RValue, tty: JType, rhs: RValue, rty: JType, span: Span) -> R<RValue> {
        if tty == JType::String {
            let text = format!("{}{}", old.str(), self.stringify(&rhs, rty));
            return Ok(RValue::Str(text));
        }
        let pt = binary_promote(tty, rty);
        let r = arith::arith(op, old.int(), rhs.int(), pt)
            .ok_or_else(|| fault_at(span, |line, col| Fault::DivisionByZero { line, col }))?;
        Ok(RValue::Int(arith::wrap(r, tty)))
    }

    fn stringify(&self, v: &RValue, ty: JType) -> String {
        match (v, ty) {
            (RValue::Bool(b), _) => b.to_string(),
            (RValue::Int(c), JType::Char) => char::from_u32(*c as u32)
                .map(String::from)
                .unwrap_or_else(|| char::REPLACEMENT_CHARACTER.to_string()),
            (RValue::Int(i), _) => i.to_string(),
            (RValue::Str(s), _) => s.clone(),
            (RValue::Arr(_), _) => panic!("printing arrays is rejected by the type checker"),
        }
    }

    fn call_expr(&mut self, e: &'a Expr) -> R<Option<RValue>> {
        let ExprKind::Call { name, args } = &e.kind else {
            unreachable!()
        };
        let f = self.ast.function(name).expect("resolved function");
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            vals.push(self.expr(a)?);
        }
        self.call(f, vals, false)
    }

    fn expr(&mut self, e: &'a Expr) -> R<RValue> {
        let span = e.span;
        Ok(match &e.kind {
            ExprKind::Lit(l) => match l {
                Literal::Bool(b) => RValue::Bool(*b),
                Literal::Int(v) => RValue::Int(arith::wrap(*v, e.ty.unwrap_or(JType::Int))),
                Literal::Char(c) => RValue::Int(*c as i64),
                Literal::Str(s) => RValue::Str(s.clone()),
            },
            ExprKind::Var(name) => self.lookup(name).1.clone(),
            ExprKind::Unary(op, a) => {
                let v = self.expr(a)?;
                match op {
                    UnOp::Not => RValue::Bool(!v.bool()),
                    UnOp::Neg => RValue::Int(arith::neg(v.int(), e.ty())),
                    UnOp::Plus => v,
                }
            }
            ExprKind::Binary(op, a, b) => match op {
                BinOp::And => {
                    RValue::Bool(self.expr(a)?.bool() && self.expr(b)?.bool())
                }
                BinOp::Or => RValue::Bool(self.expr(a)?.bool() || self.expr(b)?.bool()),
                _ => {
                    let x = self.expr(a)?;
                    let y = self.expr(b)?;
                    if op.is_arithmetic() {
                        let r = arith::arith(*op, x.int(), y.int(), e.ty()).ok_or_else(|| {
                            fault_at(span, |line, col| Fault::DivisionByZero { line, col })
                        })?;
                        RValue::Int(r)
                    } else {
                        match (x, y) {
                            (RValue::Bool(p), RValue::Bool(q)) => RValue::Bool(match op {
                                BinOp::Eq => p == q,
                                BinOp::Ne => p != q,
                                _ => unreachable!("boolean ordering"),
                            }),
                            (x, y) => RValue::Bool(arith::compare(*op, x.int(), y.int())),
                        }
                    }
                }
            },
            ExprKind::Ternary(c, a, b) => {
                let v = if self.expr(c)?.bool() {
                    self.expr(a)?
                } else {
                    self.expr(b)?
                };
                match v {
                    RValue::Int(i) => RValue::Int(arith::wrap(i, e.ty())),
                    other => other,
                }
            }
            ExprKind::IncDec {
                target,
                increment,
                prefix,
            } => {
                let ty = target.ty();
                let delta = if *increment { 1 } else { -1 };
                match &target.kind {
                    ExprKind::Var(name) => {
                        let old = self.lookup(name).1.int();
                        let new = arith::wrap(old + delta, ty);
                        self.set_var(name, RValue::Int(new));
                        RValue::Int(if *prefix { new } else { old })
                    }
                    ExprKind::Index(a, i) => {
                        let arr = self.expr(a)?.arr();
                        let idx = self.expr(i)?.int();
                        let old = self.load(arr, idx, target.span)?.int();
                        let new = arith::wrap(old + delta, ty);
                        self.store(arr, idx, RValue::Int(new), ty, target.span)?;
                        RValue::Int(if *prefix { new } else { old })
                    }
                    _ => unreachable!("increment target"),
                }
            }
            ExprKind::Index(a, i) => {
                let arr = self.expr(a)?.arr();
                let idx = self.expr(i)?.int();
                self.load(arr, idx, span)?
            }
            ExprKind::Length(a) => {
                let arr = self.expr(a)?.arr();
                RValue::Int(self.heap[arr].len() as i64)
            }
            ExprKind::NewArray { ty, dims } => {
                let mut sizes = Vec::new();
                for d in dims {
                    let n = self.expr(d)?.int();
                    if n < 0 {
                        return Err(fault_at(span, |line, col| Fault::NegativeArraySize {
                            line,
                            col,
                            size: n,
                        }));
                    }
                    sizes.push(n as usize);
                }
                self.new_array(*ty, &sizes)
            }
            ExprKind::ArrayLit { elems, .. } => {
                let elem_ty = e.ty().element().expect("array type");
                let mut vals = Vec::with_capacity(elems.len());
                for x in elems {
                    let v = self.expr(x)?;
                    vals.push(match v {
                        RValue::Int(i) => RValue::Int(arith::wrap(i, elem_ty)),
                        other => other,
                    });
                }
                self.alloc(vals)
            }
            ExprKind::Call { .. } => self.call_expr(e)?.expect("non-void call"),
            ExprKind::Placeholder(id) => {
                let Some(v) = self.values.get(id) else {
                    return Err(Abort(Fault::MissingValue { placeholder: *id }));
                };
                self.import(v)
            }
            ExprKind::Distinct(a, n) => {
                let arr = self.expr(a)?.arr();
                let n = self.expr(n)?.int();
                let elems = &self.heap[arr];
                if n < 0 || n as usize > elems.len() {
                    return Err(fault_at(span, |line, col| Fault::IndexOutOfBounds {
                        line,
                        col,
                        index: n - 1,
                        length: elems.len() as i64,
                    }));
                }
                let prefix = &elems[..n as usize];
                let distinct = prefix
                    .iter()
                    .enumerate()
                    .all(|(i, x)| prefix[i + 1..].iter().all(|y| x != y));
                RValue::Bool(distinct)
            }
            ExprKind::Impl(a, b) => RValue::Bool(!self.expr(a)?.bool() || self.expr(b)?.bool()),
            ExprKind::Out => RValue::Str(self.output.clone()),
            ExprKind::Concat(a, b) => {
                let x = self.expr(a)?;
                let y = self.expr(b)?;
                let text = format!("{}{}", self.stringify(&x, a.ty()), self.stringify(&y, b.ty()));
                RValue::Str(text)
            }
            ExprKind::StrEquals(a, b) => {
                let x = self.expr(a)?;
                let y = self.expr(b)?;
                RValue::Bool(x.str() == y.str())
            }
            ExprKind::StrLength(a) => {
                let x = self.expr(a)?;
                RValue::Int(x.str().encode_utf16().count() as i64)
            }
            ExprKind::Abs(a) => {
                let v = self.expr(a)?.int();
                RValue::Int(arith::abs(v, e.ty()))
            }
            ExprKind::Cast(ty, a) => {
                let v = self.expr(a)?;
                match v {
                    RValue::Int(i) => RValue::Int(arith::wrap(i, *ty)),
                    other => other,
                }
            }
        })
    }

    fn new_array(&mut self, ty: JType, sizes: &[usize]) -> RValue {
        let elem = ty.element().expect("array type");
        match sizes {
            [] => unreachable!("array without dimensions"),
            [n] => {
                let v = vec![default_value(elem); *n];
                self.alloc(v)
            }
            [n, rest @ ..] => {
                let rows: Vec<RValue> = (0..*n).map(|_| self.new_array(elem, rest)).collect();
                self.alloc(rows)
            }
        }
    }
}

fn default_value(ty: JType) -> RValue {
    match ty {
        JType::Boolean => RValue::Bool(false),
        JType::String => RValue::Str(String::new()),
        t if t.is_integral() => RValue::Int(0),
        // null references are outside the fragment; definite assignment
        // guarantees this handle is never dereferenced
        _ => RValue::Arr(usize::MAX),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::load;

    fn run(src: &str) -> ExecTrace {
        let ast = load(src).unwrap();
        interpret(&ast, &BTreeMap::new(), &InterpConfig::default())
    }

    #[test]
    fn prints_sum() {
        assert_eq!(run("System.out.print(1+1);").output, "2");
    }

    #[test]
    fn one_even_instance() {
        let ast = load(include_str!("../../fixtures/one_even.java")).unwrap();
        let mut values = BTreeMap::new();
        values.insert(0, Value::IntArray(vec![23, 8, 43, 67, 59]));
        values.insert(1, Value::Int(1));
        let t = interpret(&ast, &values, &InterpConfig::default());
        assert!(t.all_assertions_hold(), "{:?}", t.assertions);
        assert_eq!(t.final_store["arr"], Value::IntArray(vec![23, 8, 43, 67, 59]));
        assert_eq!(t.fault, None);
        // generation-only code is not counted
        assert_eq!(t.steps, 4);
        assert!(t.loops.is_empty());
    }

    #[test]
    fn java_semantics() {
        let t = run(
            "int a = -7; int b = 2; System.out.print(a / b); System.out.print(\" \"); System.out.print(a % b);\n\
             byte x = 127; x++; System.out.print(\" \" + x); char c = 'a'; c += 1; System.out.print(c);\n\
             int m = -2147483648; System.out.print(\" \" + m / -1 + \" \" + Math.abs(m));",
        );
        assert_eq!(t.output, "-3 -1 -128b -2147483648 -2147483648");
    }

    #[test]
    fn faults() {
        assert!(matches!(
            run("int a = 0; int b = 1 / a;").fault,
            Some(Fault::DivisionByZero { .. })
        ));
        assert!(matches!(
            run("int[] a = new int[2]; a[2] = 1;").fault,
            Some(Fault::IndexOutOfBounds { index: 2, length: 2, .. })
        ));
        let ast = load("int i = 0; while (true) { i++; }").unwrap();
        let cfg = InterpConfig {
            max_steps: 1000,
            ..Default::default()
        };
        assert!(matches!(
            interpret(&ast, &BTreeMap::new(), &cfg).fault,
            Some(Fault::StepLimit { .. })
        ));
    }

    #[test]
    fn loop_counts_and_recursion_depth() {
        let src = "@MAIN static int m() { int s = 0; LOOP(range(0, 5)); for (int i = 0; i < 3; i++) { s += f(i); } return s; }\n\
                   @REC(3) static int f(int n) { if (n == 0) return 0; return 1 + f(n - 1); }";
        let t = run(src);
        assert_eq!(t.return_value, Some(Value::Int(3)));
        assert_eq!(t.loops.len(), 1);
        assert_eq!(t.loops[0].iterations, vec![3]);
        assert_eq!(t.recursion_depth["f"], 2);
    }

    #[test]
    fn break_continue_and_do_while() {
        let t = run(
            "int s = 0; for (int i = 0; i < 10; i++) { if (i == 5) break; if (i % 2 == 0) continue; s += i; }\n\
             int k = 0; do { k++; } while (k < 3); System.out.print(s + \",\" + k);",
        );
        assert_eq!(t.output, "4,3");
        assert_eq!(t.loops[0].iterations, vec![6]);
        assert_eq!(t.loops[1].iterations, vec![3]);
    }

    #[test]
    fn aliasing_arrays() {
        let t = run("int[] a = new int[3]; int[] b = a; b[1] = 7; System.out.print(a[1]);");
        assert_eq!(t.output, "7");
    }

    #[test]
    fn invariant_run() {
        let ast = load(include_str!("../../fixtures/invariant_fill.java")).unwrap();
        let mut values = BTreeMap::new();
        values.insert(0, Value::Int(9546));
        values.insert(1, Value::Int(8));
        values.insert(2, Value::Int(76360));
        let t = interpret(&ast, &values, &InterpConfig::default());
        assert_eq!(t.output, "true");
        assert!(t.all_assertions_hold());
        assert_eq!(t.loops[0].iterations, vec![9545]);
    }
}
