//! Translation of normalized statements and expressions into formulas.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::frontend::ast::*;
use crate::frontend::typecheck::binary_promote;
use crate::smt::term::*;

use super::context::{Context, Scope, SsaName};
use super::placeholders::PlaceholderVars;
use super::{BranchEncoding, UnwindError, UnwindOptions};

type R<T> = Result<T, UnwindError>;

/// Largest extent reserved for an allocation whose size has no known bound.
pub const FALLBACK_RESERVE: i64 = 65_536;
/// Longest store chain followed when resolving a read at a literal address.
const CHAIN_LIMIT: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HeapKind {
    Int,
    Str,
    Rows,
}

impl HeapKind {
    pub const ALL: [HeapKind; 3] = [HeapKind::Int, HeapKind::Str, HeapKind::Rows];

    /// Name of the heap variable; `!` keeps it apart from Java names.
    pub fn var(self) -> &'static str {
        match self {
            HeapKind::Int => "!intArray",
            HeapKind::Str => "!stringArray",
            HeapKind::Rows => "!int2DArray",
        }
    }

    pub fn elem_sort(self) -> Sort {
        match self {
            HeapKind::Int => Sort::BitVec(32),
            HeapKind::Str => Sort::String,
            HeapKind::Rows => Sort::BitVec(64),
        }
    }

    pub fn sort(self) -> Sort {
        Sort::array(Sort::BitVec(32), self.elem_sort())
    }

    fn default_value(self) -> Term {
        match self {
            HeapKind::Int => Term::bv(0, 32),
            HeapKind::Str => Term::string(""),
            HeapKind::Rows => Term::bv(0, 64),
        }
    }

    pub fn of_array(ty: JType) -> HeapKind {
        match ty {
            JType::IntArray => HeapKind::Int,
            JType::StringArray => HeapKind::Str,
            JType::IntArray2D => HeapKind::Rows,
            other => panic!("{other} is not an array type"),
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

pub fn sort_of(ty: JType) -> Sort {
    match ty {
        JType::Boolean => Sort::Bool,
        JType::String => Sort::String,
        t if t.is_array() => Sort::BitVec(64),
        t => Sort::BitVec(t.width().expect("integral type")),
    }
}

/// Convert an integral term between Java types.
pub fn convert(t: Term, from: JType, to: JType) -> Term {
    if from == to || !from.is_integral() || !to.is_integral() {
        return t;
    }
    let (wf, wt) = (from.width().unwrap(), to.width().unwrap());
    if wt > wf {
        if from == JType::Char {
            zero_extend(wt - wf, t)
        } else {
            sign_extend(wt - wf, t)
        }
    } else if wt < wf {
        extract(wt - 1, 0, t)
    } else {
        t
    }
}

/// Decimal text of an integral term, as Java prints it.
pub fn stringify(t: Term, ty: JType) -> Term {
    match ty {
        JType::String => t,
        JType::Boolean => ite(t, Term::string("true"), Term::string("false")),
        JType::Char => str_from_code(bv2nat(t)),
        _ => {
            let w = t.sort().width();
            ite(
                bvslt(t.clone(), Term::bv(0, w)),
                str_concat(Term::string("-"), str_from_int(bv2nat(bvneg(t.clone())))),
                str_from_int(bv2nat(t)),
            )
        }
    }
}

fn handle_base(h: &Term) -> Term {
    extract(63, 32, h.clone())
}

fn handle_len(h: &Term) -> Term {
    extract(31, 0, h.clone())
}

fn signed_range(w: u32) -> (i64, i64) {
    if w >= 64 {
        (i64::MIN, i64::MAX)
    } else {
        (-(1i64 << (w - 1)), (1i64 << (w - 1)) - 1)
    }
}

/// An open then-branch: the scopes before it, for merging.
struct Open {
    cond: Term,
    before: Vec<Scope>,
}

pub(super) struct Unwinder<'a> {
    pub ast: &'a SkeletonAst,
    pub opts: &'a UnwindOptions,
    pub ctx: Context,
    lists: Vec<Vec<Term>>,
    guards: Vec<Term>,
    calls: Vec<String>,
    returns: Vec<Option<Term>>,
    pub placeholders: Vec<PlaceholderVars>,
    cursor: [i64; 3],
    /// Heap versions defined by one store: address, value, previous name.
    heap_defs: HashMap<String, (Term, Term, String)>,
    /// Heap versions known to hold the default value everywhere.
    heap_init: HashSet<String>,
    /// Signed value ranges of constants, for sizing allocations.
    ranges: HashMap<String, (i64, i64)>,
    pub target: Option<Term>,
    pub heaps: Vec<HeapKind>,
    /// Variables given unconstrained values by invariant loops.
    pub havocked: BTreeSet<String>,
}

impl<'a> Unwinder<'a> {
    pub fn new(ast: &'a SkeletonAst, opts: &'a UnwindOptions) -> Self {
        Unwinder {
            ast,
            opts,
            ctx: Context::new(),
            lists: vec![Vec::new()],
            guards: Vec::new(),
            calls: Vec::new(),
            returns: Vec::new(),
            placeholders: Vec::new(),
            cursor: [0; 3],
            heap_defs: HashMap::new(),
            heap_init: HashSet::new(),
            ranges: HashMap::new(),
            target: None,
            heaps: Vec::new(),
            havocked: BTreeSet::new(),
        }
    }

    pub fn take_formula(&mut self) -> Vec<Term> {
        std::mem::take(&mut self.lists[0])
    }

    // ---- set-up ----

    /// Initial context: `__out` equal to the empty string, the heaps used by
    /// the program and one set of constants per placeholder.
    pub fn init(&mut self) {
        let out = self.ctx.declare("__out", Sort::String);
        self.ctx.add_constraint(eq(out, Term::string("")));
        if self.opts.propagate {
            self.ctx.lookup_mut("__out").unwrap().known = Some(Term::string(""));
        }
        let mut kinds = BTreeSet::new();
        let mut note = |ty: JType| {
            if ty.is_array() {
                kinds.insert(HeapKind::of_array(ty));
                if ty == JType::IntArray2D {
                    kinds.insert(HeapKind::Int);
                }
            }
        };
        for f in &self.ast.functions {
            for p in &f.params {
                note(p.ty);
            }
            if let Some(t) = f.ret {
                note(t);
            }
            f.body.walk(&mut |s| {
                if let StmtKind::VarDecl { ty, .. } = &s.kind {
                    note(*ty);
                }
                for e in s.exprs() {
                    e.walk(&mut |x| {
                        if let Some(t) = x.ty {
                            note(t);
                        }
                    });
                }
            });
        }
        for p in &self.ast.placeholders {
            note(p.kind.java_type());
        }
        for k in kinds {
            let h = self.ctx.declare(k.var(), k.sort());
            if self.opts.capabilities.constant_arrays {
                self.ctx
                    .add_constraint(eq(h.clone(), const_array(Sort::BitVec(32), k.default_value())));
                self.heap_init.insert(h.const_name().unwrap().to_string());
            }
            self.heaps.push(k);
        }
        for p in &self.ast.placeholders {
            let (vars, decls, cons) = PlaceholderVars::create(p);
            for (name, sort) in decls {
                self.ctx.n.insert(name, sort);
            }
            for c in cons {
                self.ctx.add_constraint(c);
            }
            if let Some((lo, hi)) = p.values.int_bounds() {
                if !vars.is_array() {
                    self.ranges.insert(vars.value.clone(), (lo, hi));
                }
            }
            if let Some((lo, hi)) = p.length.as_ref().and_then(|l| l.int_bounds()) {
                self.ranges.insert(vars.value.clone(), (lo, hi));
            }
            if let Some((lo, hi)) = p.inner_length.as_ref().and_then(|l| l.int_bounds()) {
                for r in &vars.rows {
                    self.ranges.insert(r.len.clone(), (lo, hi));
                }
            }
            self.placeholders.push(vars);
        }
    }

    // ---- formula and guard plumbing ----

    fn append(&mut self, t: Term) {
        if t.as_bool() != Some(true) {
            self.lists.last_mut().expect("formula list").push(t);
        }
    }

    fn guard(&self) -> Term {
        and(self.guards.clone())
    }

    /// Record a side condition under the current path condition.
    fn side(&mut self, cond: Term) {
        if cond.as_bool() == Some(true) {
            return;
        }
        let g = self.guard();
        self.ctx.add_constraint(implies(g, cond));
    }

    fn with_guard<T>(&mut self, g: Term, f: impl FnOnce(&mut Self) -> R<T>) -> R<T> {
        self.guards.push(g);
        let r = f(self);
        self.guards.pop();
        r
    }

    // ---- variables ----

    fn read_var(&self, name: &str) -> R<Term> {
        let b = self
            .ctx
            .lookup(name)
            .ok_or_else(|| UnwindError::Internal(format!("unbound variable '{name}'")))?;
        Ok(match (&b.known, self.opts.propagate) {
            (Some(k), true) => k.clone(),
            _ => b.term(),
        })
    }

    /// Equate the fresh binding `c` of `jv` with `t`.
    fn define(&mut self, jv: &str, c: Term, t: Term) {
        if let Some(r) = self.range(&t) {
            self.ranges.insert(c.const_name().unwrap().to_string(), r);
        }
        if self.opts.propagate && t.is_literal() {
            self.ctx.lookup_mut(jv).unwrap().known = Some(t.clone());
        }
        self.append(eq(c, t));
    }

    fn assign_var(&mut self, jv: &str, t: Term) {
        let c = self.ctx.update(jv);
        self.define(jv, c, t);
    }

    fn declare_var(&mut self, jv: &str, ty: JType, init: Option<Term>) {
        let c = self.ctx.declare(jv, sort_of(ty));
        if let Some(t) = init {
            self.define(jv, c, t);
        }
    }

    // ---- heap ----

    fn heap_read(&mut self, kind: HeapKind, addr: Term) -> Term {
        let b = self.ctx.lookup(kind.var()).expect("heap declared");
        let mut name = b.name.to_string();
        if self.opts.propagate && addr.is_literal() {
            for _ in 0..CHAIN_LIMIT {
                if let Some((a, v, prev)) = self.heap_defs.get(&name) {
                    if a.is_literal() {
                        if *a == addr {
                            return v.clone();
                        }
                        name = prev.clone();
                        continue;
                    }
                    break;
                }
                if self.heap_init.contains(&name) {
                    return kind.default_value();
                }
                break;
            }
        }
        select(Term::constant(name, kind.sort()), addr)
    }

    fn heap_write(&mut self, kind: HeapKind, addr: Term, val: Term) {
        let old = self.ctx.lookup(kind.var()).expect("heap declared").term();
        let new = self.ctx.update(kind.var());
        if self.opts.propagate {
            self.heap_defs.insert(
                new.const_name().unwrap().to_string(),
                (addr.clone(), val.clone(), old.const_name().unwrap().to_string()),
            );
        }
        self.append(eq(new, store(old, addr, val)));
    }

    fn bounds_check(&mut self, idx: &Term, len: &Term) {
        self.side(and2(
            bvsle(Term::bv(0, 32), idx.clone()),
            bvslt(idx.clone(), len.clone()),
        ));
    }

    fn array_read(&mut self, arr_ty: JType, h: Term, idx: Term) -> Term {
        self.bounds_check(&idx, &handle_len(&h));
        let addr = bvadd(handle_base(&h), idx);
        self.heap_read(HeapKind::of_array(arr_ty), addr)
    }

    fn array_write(&mut self, arr_ty: JType, h: Term, idx: Term, val: Term) {
        self.bounds_check(&idx, &handle_len(&h));
        let addr = bvadd(handle_base(&h), idx);
        self.heap_write(HeapKind::of_array(arr_ty), addr, val);
    }

    /// Reserve an extent for `size` elements; returns the handle and the
    /// base address.
    fn allocate(&mut self, kind: HeapKind, size: Term, span: Span) -> R<(Term, i64)> {
        self.side(bvsle(Term::bv(0, 32), size.clone()));
        let reserve = match size.as_bv() {
            Some(n) => n.max(0),
            None => match self.range(&size) {
                Some((_, hi)) if hi <= FALLBACK_RESERVE => hi.max(0),
                _ => {
                    self.side(bvsle(size.clone(), Term::bv(FALLBACK_RESERVE, 32)));
                    FALLBACK_RESERVE
                }
            },
        };
        let base = self.cursor[kind.index()];
        let end = base + reserve;
        if end > i32::MAX as i64 {
            return Err(UnwindError::HeapExhausted {
                line: span.line,
                col: span.col,
            });
        }
        self.cursor[kind.index()] = end;
        if !self.opts.capabilities.constant_arrays {
            let Some(n) = size.as_bv() else {
                return Err(UnwindError::Unsupported {
                    line: span.line,
                    col: span.col,
                    what: "array of symbolic size without constant-array support".into(),
                });
            };
            for i in 0..n {
                self.heap_write(kind, Term::bv(base + i, 32), kind.default_value());
            }
        }
        Ok((concat(Term::bv(base, 32), size), base))
    }

    // ---- value ranges ----

    fn range(&self, t: &Term) -> Option<(i64, i64)> {
        if let Some(v) = t.as_bv() {
            return Some((v, v));
        }
        if let Some(n) = t.const_name() {
            return self.ranges.get(n).copied();
        }
        let (op, args) = t.app()?;
        let Sort::BitVec(w) = t.sort() else {
            return None;
        };
        let (min, max) = signed_range(w);
        let fit = |lo: i128, hi: i128| (lo >= min as i128 && hi <= max as i128).then_some((lo as i64, hi as i64));
        match op {
            Op::BvAdd | Op::BvSub | Op::BvMul => {
                let (a, b) = (self.range(&args[0])?, self.range(&args[1])?);
                let (a0, a1, b0, b1) = (a.0 as i128, a.1 as i128, b.0 as i128, b.1 as i128);
                match op {
                    Op::BvAdd => fit(a0 + b0, a1 + b1),
                    Op::BvSub => fit(a0 - b1, a1 - b0),
                    _ => {
                        let c = [a0 * b0, a0 * b1, a1 * b0, a1 * b1];
                        fit(*c.iter().min().unwrap(), *c.iter().max().unwrap())
                    }
                }
            }
            Op::Ite => {
                let (a, b) = (self.range(&args[1])?, self.range(&args[2])?);
                Some((a.0.min(b.0), a.1.max(b.1)))
            }
            Op::SignExtend(_) => self.range(&args[0]),
            Op::ZeroExtend(_) => self.range(&args[0]).filter(|r| r.0 >= 0),
            _ => None,
        }
    }

    // ---- branches ----

    fn open_branch(&mut self, cond: Term) -> Open {
        let before = self.ctx.v.clone();
        self.guards.push(cond.clone());
        self.lists.push(Vec::new());
        self.ctx.enter();
        Open { cond, before }
    }

    /// Close the arm opened last; returns its formulas and final scopes and
    /// restores the scopes of the branch point.
    fn close_arm(&mut self, open: &Open) -> (Vec<Term>, Vec<Scope>) {
        self.ctx.leave();
        self.guards.pop();
        let list = self.lists.pop().expect("arm formula list");
        let after = std::mem::replace(&mut self.ctx.v, open.before.clone());
        (list, after)
    }

    /// Translate an if statement's else arm (possibly empty) and merge.
    fn finish_branch(&mut self, open: Open, then_list: Vec<Term>, then_v: Vec<Scope>, els: Option<&Stmt>) -> R<()> {
        if self.opts.encoding == BranchEncoding::Guarded {
            // the else arm must not reuse names created by the then arm
            for (s, scope) in then_v.iter().enumerate() {
                for (jv, b) in &scope.vars {
                    if open.before[s].vars[jv].name != b.name {
                        self.ctx.raise_floor(&b.name, b.name.writecount + 1);
                    }
                }
            }
        }
        let (else_list, else_v) = match els {
            Some(e) => {
                let neg = Open {
                    cond: not(open.cond.clone()),
                    before: open.before.clone(),
                };
                self.guards.push(neg.cond.clone());
                self.lists.push(Vec::new());
                self.ctx.enter();
                self.stmt(e)?;
                self.close_arm(&neg)
            }
            None => (Vec::new(), open.before.clone()),
        };
        self.merge(open, then_list, then_v, else_list, else_v);
        Ok(())
    }

    /// Join two arms. The modified encoding pads the arm with fewer writes
    /// by copy equations onto the other arm's names and emits one `ite`.
    fn merge(&mut self, open: Open, mut g1: Vec<Term>, a: Vec<Scope>, mut g2: Vec<Term>, b: Vec<Scope>) {
        let Open { cond, before } = open;
        let mut merged = before.clone();
        let mut joins = Vec::new();
        for (s, scope) in merged.iter_mut().enumerate() {
            for (jv, m) in scope.vars.iter_mut() {
                let (ba, bb) = (&a[s].vars[jv], &b[s].vars[jv]);
                let orig = &before[s].vars[jv];
                if ba.name == orig.name && bb.name == orig.name {
                    continue;
                }
                let known = match (&ba.known, &bb.known) {
                    (Some(x), Some(y)) if x == y => Some(x.clone()),
                    _ => None,
                };
                let name = match self.opts.encoding {
                    BranchEncoding::ModifiedSsa => {
                        if ba.name.writecount >= bb.name.writecount {
                            if ba.name != bb.name {
                                g2.push(eq(ba.term(), bb.term()));
                            }
                            ba.name.clone()
                        } else {
                            g1.push(eq(bb.term(), ba.term()));
                            bb.name.clone()
                        }
                    }
                    BranchEncoding::Guarded => {
                        let name = SsaName {
                            writecount: ba.name.writecount.max(bb.name.writecount) + 1,
                            ..ba.name.clone()
                        };
                        self.ctx.ensure(&name, &ba.sort);
                        let t = Term::constant(name.to_string(), ba.sort.clone());
                        joins.push(implies(cond.clone(), eq(t.clone(), ba.term())));
                        joins.push(implies(not(cond.clone()), eq(t, bb.term())));
                        name
                    }
                };
                let text = name.to_string();
                self.heap_defs.remove(&text);
                self.heap_init.remove(&text);
                self.ranges.remove(&text);
                m.name = name;
                m.known = known;
            }
        }
        self.ctx.v = merged;
        match self.opts.encoding {
            BranchEncoding::ModifiedSsa => self.append(ite(cond, and(g1), and(g2))),
            BranchEncoding::Guarded => {
                self.append(implies(cond.clone(), and(g1)));
                self.append(implies(not(cond), and(g2)));
                for j in joins {
                    self.append(j);
                }
            }
        }
    }

    // ---- statements ----

    pub fn stmt(&mut self, s: &Stmt) -> R<()> {
        match &s.kind {
            StmtKind::Empty => Ok(()),
            StmtKind::Block(stmts) => {
                self.ctx.enter();
                for x in stmts {
                    self.stmt(x)?;
                }
                self.ctx.leave();
                Ok(())
            }
            StmtKind::VarDecl { ty, name, init } => {
                let t = match init {
                    Some(e) => {
                        let t = self.expr(e)?;
                        Some(convert(t, e.ty(), *ty))
                    }
                    None => None,
                };
                self.declare_var(name, *ty, t);
                Ok(())
            }
            StmtKind::Assign { target, value } => self.assign(target, value),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let c = self.expr(cond)?;
                match c.as_bool() {
                    Some(true) => self.scoped(then_branch),
                    Some(false) => match else_branch {
                        Some(e) => self.scoped(e),
                        None => Ok(()),
                    },
                    None => {
                        let open = self.open_branch(c);
                        self.stmt(then_branch)?;
                        let (l, v) = self.close_arm(&open);
                        self.finish_branch(open, l, v, else_branch.as_deref())
                    }
                }
            }
            StmtKind::While {
                cond,
                body,
                bound,
                invariant,
            } => match invariant {
                Some(inv) => self.invariant_loop(cond, body, inv),
                None => {
                    let bound = bound.as_ref().ok_or(UnwindError::MissingLoopBound {
                        line: s.span.line,
                        col: s.span.col,
                    })?;
                    self.bounded_loop(cond, body, bound)
                }
            },
            StmtKind::Return(e) => {
                let f = self.current_function();
                if let (Some(e), Some(rt)) = (e, f.ret) {
                    let t = convert(self.expr(e)?, e.ty(), rt);
                    let c = self.ctx.declare("__return", sort_of(rt));
                    self.define("__return", c, t);
                    let r = self.read_var("__return")?;
                    *self.returns.last_mut().expect("inside a call") = Some(r);
                }
                Ok(())
            }
            StmtKind::Print { arg, newline } => {
                let mut text = match arg {
                    Some(a) => {
                        let t = self.expr(a)?;
                        stringify(t, a.ty())
                    }
                    None => Term::string(""),
                };
                if *newline {
                    text = str_concat(text, Term::string("\n"));
                }
                let out = self.read_var("__out")?;
                self.assign_var("__out", str_concat(out, text));
                Ok(())
            }
            StmtKind::Expr(e) => {
                match &e.kind {
                    ExprKind::Call { name, args } => {
                        self.call(name, args)?;
                    }
                    _ => {
                        self.expr(e)?;
                    }
                }
                Ok(())
            }
            StmtKind::Assert(e) => {
                let t = self.expr(e)?;
                if Some(s.id) == self.opts.target {
                    let g = implies(self.guard(), t);
                    self.target = Some(match self.target.take() {
                        Some(prev) => and2(prev, g),
                        None => g,
                    });
                } else {
                    self.append(t);
                }
                Ok(())
            }
            StmtKind::AssertBlock(b) => self.scoped(b),
            StmtKind::For { .. }
            | StmtKind::DoWhile { .. }
            | StmtKind::Break
            | StmtKind::Continue
            | StmtKind::CompoundAssign { .. } => Err(UnwindError::Internal(format!(
                "{}: statement not normalized",
                s.span
            ))),
        }
    }

    fn scoped(&mut self, s: &Stmt) -> R<()> {
        self.ctx.enter();
        self.stmt(s)?;
        self.ctx.leave();
        Ok(())
    }

    fn current_function(&self) -> &'a FunctionDecl {
        let name = self.calls.last().expect("inside a function");
        self.ast.function(name).expect("known function")
    }

    fn assign(&mut self, target: &Expr, value: &Expr) -> R<()> {
        match &target.kind {
            ExprKind::Var(name) => {
                let t = convert(self.expr(value)?, value.ty(), target.ty());
                self.assign_var(name, t);
            }
            ExprKind::Index(a, i) => {
                let h = self.expr(a)?;
                let idx = convert(self.expr(i)?, i.ty(), JType::Int);
                let v = convert(self.expr(value)?, value.ty(), target.ty());
                self.array_write(a.ty(), h, idx, v);
            }
            _ => {
                return Err(UnwindError::Internal(format!(
                    "{}: unsupported assignment target",
                    target.span
                )))
            }
        }
        Ok(())
    }

    // ---- loops ----

    fn iteration(&mut self, body: &Stmt) -> R<()> {
        self.scoped(body)
    }

    /// Unwinding of a loop with a `LOOP` bound: mandatory iterations first,
    /// then guarded ones up to the upper bound, then the exit condition.
    fn bounded_loop(&mut self, cond: &Expr, body: &Stmt, bound: &LoopBound) -> R<()> {
        let (lower, upper) = (bound.lower(), bound.upper());
        for _ in 0..lower {
            let c = self.expr(cond)?;
            let stop = c.as_bool() == Some(false);
            self.append(c);
            if stop {
                return Ok(());
            }
            self.iteration(body)?;
        }
        if cond.has_side_effects() {
            return self.nested_iterations(cond, body, bound, lower, upper);
        }
        // Flat form: with a pure condition, `if (c) body` repeated is the
        // same as the nested unrolling, since a false condition stays false.
        let mut prev: Option<Term> = None;
        for m in lower..=upper {
            let c = self.expr(cond)?;
            if !bound.allows(m) {
                let p = prev.clone().unwrap_or_else(|| Term::bool(true));
                self.append(implies(p, c.clone()));
            }
            if m == upper {
                self.append(not(c));
                break;
            }
            match c.as_bool() {
                Some(false) => break,
                Some(true) => self.iteration(body)?,
                None => {
                    let open = self.open_branch(c.clone());
                    self.stmt(body)?;
                    let (l, v) = self.close_arm(&open);
                    self.finish_branch(open, l, v, None)?;
                }
            }
            prev = Some(c);
        }
        Ok(())
    }

    fn nested_iterations(&mut self, cond: &Expr, body: &Stmt, bound: &LoopBound, lower: u64, upper: u64) -> R<()> {
        let mut open = Vec::new();
        for m in lower..=upper {
            let c = self.expr(cond)?;
            if !bound.allows(m) {
                self.append(c.clone());
            }
            if m == upper {
                self.append(not(c));
                break;
            }
            match c.as_bool() {
                Some(false) => break,
                Some(true) => self.iteration(body)?,
                None => {
                    open.push(self.open_branch(c));
                    self.stmt(body)?;
                }
            }
        }
        while let Some(o) = open.pop() {
            let (l, v) = self.close_arm(&o);
            self.finish_branch(o, l, v, None)?;
        }
        Ok(())
    }

    /// Entry check, inductive step on havocked state, and exit on a second
    /// havoc constrained by the invariant and the negated condition.
    fn invariant_loop(&mut self, cond: &Expr, body: &Stmt, inv: &Expr) -> R<()> {
        if cond.has_side_effects() {
            return Err(UnwindError::Unsupported {
                line: cond.span.line,
                col: cond.span.col,
                what: "side effects in the condition of a loop with an invariant".into(),
            });
        }
        let entry = self.expr(inv)?;
        self.append(entry);
        let written = self.written_vars(body);
        self.havoc(&written);
        let c = self.expr(cond)?;
        let pre = self.expr(inv)?;
        let hyp = and2(pre, c);
        self.guards.push(hyp.clone());
        self.lists.push(Vec::new());
        let step = self.iteration(body).and_then(|_| self.expr(inv));
        let mut list = self.lists.pop().unwrap();
        self.guards.pop();
        list.push(step?);
        self.append(implies(hyp, and(list)));
        self.havoc(&written);
        let exit_inv = self.expr(inv)?;
        let exit_c = self.expr(cond)?;
        self.append(exit_inv);
        self.append(not(exit_c));
        Ok(())
    }

    fn havoc(&mut self, vars: &[String]) {
        for v in vars {
            self.havocked.insert(v.clone());
            let c = self.ctx.update(v);
            let name = c.const_name().unwrap().to_string();
            self.ranges.remove(&name);
        }
    }

    /// Variables visible here that the loop body may change, including heaps
    /// and `__out`.
    fn written_vars(&self, body: &Stmt) -> Vec<String> {
        let mut out = BTreeSet::new();
        let mut all_global = false;
        let note_expr = |e: &Expr, out: &mut BTreeSet<String>, all: &mut bool| {
            e.walk(&mut |x| match &x.kind {
                ExprKind::IncDec { target, .. } => match &target.kind {
                    ExprKind::Var(n) => {
                        out.insert(n.clone());
                    }
                    ExprKind::Index(a, _) => {
                        out.insert(HeapKind::of_array(a.ty()).var().to_string());
                    }
                    _ => {}
                },
                ExprKind::Call { .. } => *all = true,
                ExprKind::NewArray { ty, .. } | ExprKind::ArrayLit { ty, .. } => {
                    out.insert(HeapKind::of_array(*ty).var().to_string());
                    if *ty == JType::IntArray2D {
                        out.insert(HeapKind::Int.var().to_string());
                    }
                }
                ExprKind::Placeholder(_) if x.ty().is_array() => {
                    out.insert(HeapKind::of_array(x.ty()).var().to_string());
                    out.insert(HeapKind::Int.var().to_string());
                }
                _ => {}
            });
        };
        body.walk(&mut |s| {
            match &s.kind {
                StmtKind::Assign { target, .. } => match &target.kind {
                    ExprKind::Var(n) => {
                        out.insert(n.clone());
                    }
                    ExprKind::Index(a, _) => {
                        out.insert(HeapKind::of_array(a.ty()).var().to_string());
                    }
                    _ => {}
                },
                StmtKind::Print { .. } => {
                    out.insert("__out".to_string());
                }
                _ => {}
            }
            for e in s.exprs() {
                note_expr(e, &mut out, &mut all_global);
            }
        });
        if all_global {
            out.insert("__out".to_string());
            for k in &self.heaps {
                out.insert(k.var().to_string());
            }
        }
        out.into_iter().filter(|v| self.ctx.lookup(v).is_some()).collect()
    }

    // ---- calls ----

    fn call(&mut self, name: &str, args: &[Expr]) -> R<Option<Term>> {
        let f = self
            .ast
            .function(name)
            .ok_or_else(|| UnwindError::Internal(format!("unknown function '{name}'")))?;
        let mut vals = Vec::with_capacity(args.len());
        for (a, p) in args.iter().zip(&f.params) {
            let t = self.expr(a)?;
            vals.push(convert(t, a.ty(), p.ty));
        }
        self.inline(f, vals)
    }

    /// Inline `f`; past its recursion limit the path becomes infeasible.
    pub fn inline(&mut self, f: &'a FunctionDecl, vals: Vec<Term>) -> R<Option<Term>> {
        let depth = self.calls.iter().filter(|c| **c == f.name).count();
        if depth > f.recursion_limit() as usize {
            self.append(Term::bool(false));
            return Ok(f.ret.map(|t| self.ctx.fresh("__cut", sort_of(t)).term()));
        }
        self.calls.push(f.name.clone());
        self.ctx.enter_frame();
        for (p, v) in f.params.iter().zip(vals) {
            let c = self.ctx.declare(&p.name, sort_of(p.ty));
            self.define(&p.name, c, v);
        }
        self.returns.push(None);
        let r = self.stmt(&f.body);
        let ret = self.returns.pop().unwrap();
        self.ctx.leave();
        self.calls.pop();
        r?;
        match (f.ret, ret) {
            (Some(_), Some(t)) => Ok(Some(t)),
            (Some(_), None) => Err(UnwindError::Internal(format!("'{}' ends without a return", f.name))),
            (None, _) => Ok(None),
        }
    }

    /// Bind the entry function's parameters to unconstrained constants.
    pub fn entry(&mut self) -> R<Option<Term>> {
        let f = self.ast.entry_function();
        let vals = f
            .params
            .iter()
            .map(|p| self.ctx.fresh(&format!("__arg_{}", p.name), sort_of(p.ty)).term())
            .collect();
        self.inline(f, vals)
    }

    // ---- expressions ----

    pub fn expr(&mut self, e: &Expr) -> R<Term> {
        let ty = e.ty();
        Ok(match &e.kind {
            ExprKind::Lit(l) => match l {
                Literal::Bool(b) => Term::bool(*b),
                Literal::Int(v) => Term::bv(*v, sort_of(ty).width()),
                Literal::Char(c) => Term::bv(*c as i64, 16),
                Literal::Str(s) => Term::string(s.clone()),
            },
            ExprKind::Var(name) => self.read_var(name)?,
            ExprKind::Unary(op, a) => {
                let t = self.expr(a)?;
                match op {
                    UnOp::Not => not(t),
                    UnOp::Neg => bvneg(convert(t, a.ty(), ty)),
                    UnOp::Plus => convert(t, a.ty(), ty),
                }
            }
            ExprKind::Binary(op, a, b) => self.binary(*op, a, b, ty)?,
            ExprKind::Ternary(c, a, b) => {
                let tc = self.expr(c)?;
                match tc.as_bool() {
                    Some(true) => convert(self.expr(a)?, a.ty(), ty),
                    Some(false) => convert(self.expr(b)?, b.ty(), ty),
                    None => {
                        let ta = self.with_guard(tc.clone(), |u| u.expr(a))?;
                        let tb = self.with_guard(not(tc.clone()), |u| u.expr(b))?;
                        ite(tc, convert(ta, a.ty(), ty), convert(tb, b.ty(), ty))
                    }
                }
            }
            ExprKind::IncDec {
                target,
                increment,
                prefix,
            } => {
                let w = sort_of(ty).width();
                let delta = Term::bv(if *increment { 1 } else { -1 }, w);
                match &target.kind {
                    ExprKind::Var(name) => {
                        let old = self.read_var(name)?;
                        let new = bvadd(old.clone(), delta);
                        self.assign_var(name, new.clone());
                        if *prefix {
                            self.read_var(name)?
                        } else {
                            old
                        }
                    }
                    ExprKind::Index(a, i) => {
                        let h = self.expr(a)?;
                        let idx = convert(self.expr(i)?, i.ty(), JType::Int);
                        let old = self.array_read(a.ty(), h.clone(), idx.clone());
                        let new = bvadd(old.clone(), delta);
                        let addr = bvadd(handle_base(&h), idx);
                        self.heap_write(HeapKind::of_array(a.ty()), addr, new.clone());
                        if *prefix {
                            new
                        } else {
                            old
                        }
                    }
                    _ => return Err(UnwindError::Internal("increment of a non-variable".into())),
                }
            }
            ExprKind::Index(a, i) => {
                let h = self.expr(a)?;
                let idx = convert(self.expr(i)?, i.ty(), JType::Int);
                self.array_read(a.ty(), h, idx)
            }
            ExprKind::Length(a) => handle_len(&self.expr(a)?),
            ExprKind::NewArray { ty: aty, dims } => {
                let mut sizes = Vec::new();
                for d in dims {
                    let t = self.expr(d)?;
                    sizes.push(convert(t, d.ty(), JType::Int));
                }
                self.new_array(*aty, &sizes, e.span)?
            }
            ExprKind::ArrayLit { ty: aty, elems } => {
                let elem_ty = aty.element().unwrap();
                let mut vals = Vec::new();
                for x in elems {
                    let t = self.expr(x)?;
                    vals.push(convert(t, x.ty(), elem_ty));
                }
                let kind = HeapKind::of_array(*aty);
                let (h, base) = self.allocate(kind, Term::bv(vals.len() as i64, 32), e.span)?;
                for (i, v) in vals.into_iter().enumerate() {
                    self.heap_write(kind, Term::bv(base + i as i64, 32), v);
                }
                h
            }
            ExprKind::Call { name, args } => self
                .call(name, args)?
                .ok_or_else(|| UnwindError::Internal(format!("void call to '{name}' used as a value")))?,
            ExprKind::Placeholder(id) => self.placeholder(*id, e.span)?,
            ExprKind::Distinct(a, n) => {
                let h = self.expr(a)?;
                let tn = convert(self.expr(n)?, n.ty(), JType::Int);
                self.distinct(a.ty(), h, tn, e.span)?
            }
            ExprKind::Impl(a, b) => {
                let ta = self.expr(a)?;
                let tb = self.with_guard(ta.clone(), |u| u.expr(b))?;
                implies(ta, tb)
            }
            ExprKind::Out => self.read_var("__out")?,
            ExprKind::Concat(a, b) => {
                let ta = self.expr(a)?;
                let tb = self.expr(b)?;
                str_concat(stringify(ta, a.ty()), stringify(tb, b.ty()))
            }
            ExprKind::StrEquals(a, b) => {
                let ta = self.expr(a)?;
                let tb = self.expr(b)?;
                eq(ta, tb)
            }
            ExprKind::StrLength(a) => int2bv(32, str_len(self.expr(a)?)),
            ExprKind::Abs(a) => {
                let t = convert(self.expr(a)?, a.ty(), ty);
                let w = t.sort().width();
                ite(bvslt(t.clone(), Term::bv(0, w)), bvneg(t.clone()), t)
            }
            ExprKind::Cast(to, a) => convert(self.expr(a)?, a.ty(), *to),
        })
    }

    fn binary(&mut self, op: BinOp, a: &Expr, b: &Expr, ty: JType) -> R<Term> {
        match op {
            BinOp::And => {
                let ta = self.expr(a)?;
                if ta.as_bool() == Some(false) {
                    return Ok(ta);
                }
                let tb = self.with_guard(ta.clone(), |u| u.expr(b))?;
                return Ok(and2(ta, tb));
            }
            BinOp::Or => {
                let ta = self.expr(a)?;
                if ta.as_bool() == Some(true) {
                    return Ok(ta);
                }
                let tb = self.with_guard(not(ta.clone()), |u| u.expr(b))?;
                return Ok(or2(ta, tb));
            }
            _ => {}
        }
        let ta = self.expr(a)?;
        let tb = self.expr(b)?;
        if op.is_arithmetic() {
            let (x, y) = (convert(ta, a.ty(), ty), convert(tb, b.ty(), ty));
            return Ok(match op {
                BinOp::Add => bvadd(x, y),
                BinOp::Sub => bvsub(x, y),
                BinOp::Mul => bvmul(x, y),
                BinOp::Div | BinOp::Rem => {
                    let w = y.sort().width();
                    self.side(not(eq(y.clone(), Term::bv(0, w))));
                    if op == BinOp::Div {
                        bvsdiv(x, y)
                    } else {
                        bvsrem(x, y)
                    }
                }
                _ => unreachable!(),
            });
        }
        if a.ty() == JType::Boolean {
            let e = eq(ta, tb);
            return Ok(if op == BinOp::Ne { not(e) } else { e });
        }
        let pt = binary_promote(a.ty(), b.ty());
        let (x, y) = (convert(ta, a.ty(), pt), convert(tb, b.ty(), pt));
        Ok(match op {
            BinOp::Lt => bvslt(x, y),
            BinOp::Le => bvsle(x, y),
            BinOp::Gt => bvsgt(x, y),
            BinOp::Ge => bvsge(x, y),
            BinOp::Eq => eq(x, y),
            BinOp::Ne => not(eq(x, y)),
            _ => unreachable!(),
        })
    }

    fn new_array(&mut self, ty: JType, sizes: &[Term], span: Span) -> R<Term> {
        let kind = HeapKind::of_array(ty);
        match sizes {
            [n] => Ok(self.allocate(kind, n.clone(), span)?.0),
            [n, m] => {
                let (h, base) = self.allocate(kind, n.clone(), span)?;
                let rows = match n.as_bv() {
                    Some(k) => k.max(0),
                    None => self.range(n).map(|r| r.1).unwrap_or(FALLBACK_RESERVE).clamp(0, FALLBACK_RESERVE),
                };
                // a negative row length fails even when there are no rows
                self.side(bvsle(Term::bv(0, 32), m.clone()));
                for j in 0..rows {
                    let (row, _) = self.allocate(HeapKind::Int, m.clone(), span)?;
                    self.heap_write(kind, Term::bv(base + j, 32), row);
                }
                Ok(h)
            }
            _ => Err(UnwindError::Internal("array without dimensions".into())),
        }
    }

    fn placeholder(&mut self, id: usize, span: Span) -> R<Term> {
        let p = &self.ast.placeholders[id];
        let vars = self.placeholders[id].clone();
        let len_term = |name: &str, spec: Option<&ValueSpec>| match spec.and_then(|s| s.singleton()) {
            Some(Literal::Int(n)) => Term::bv(n, 32),
            _ => Term::constant(name, Sort::BitVec(32)),
        };
        Ok(match p.kind {
            PlaceholderKind::Int | PlaceholderKind::Char | PlaceholderKind::Boolean | PlaceholderKind::String => {
                let c = Term::constant(vars.value.clone(), super::placeholders::scalar_sort(p.kind));
                match (&p.values.singleton(), self.opts.propagate) {
                    (Some(Literal::Int(v)), true) => Term::bv(*v, c.sort().width()),
                    (Some(Literal::Char(v)), true) => Term::bv(*v as i64, 16),
                    _ => c,
                }
            }
            PlaceholderKind::IntArray | PlaceholderKind::StringArray => {
                let kind = HeapKind::of_array(p.kind.java_type());
                let len = len_term(&vars.value, p.length.as_ref());
                let (h, base) = self.allocate(kind, len, span)?;
                let sort = kind.elem_sort();
                for (i, el) in vars.rows[0].elems.iter().enumerate() {
                    self.heap_write(kind, Term::bv(base + i as i64, 32), Term::constant(el.clone(), sort.clone()));
                }
                h
            }
            PlaceholderKind::Int2DArray => {
                let len = len_term(&vars.value, p.length.as_ref());
                let (h, base) = self.allocate(HeapKind::Rows, len, span)?;
                for (j, row) in vars.rows.iter().enumerate() {
                    let rl = len_term(&row.len, p.inner_length.as_ref());
                    let (rh, rbase) = self.allocate(HeapKind::Int, rl, span)?;
                    for (i, el) in row.elems.iter().enumerate() {
                        self.heap_write(
                            HeapKind::Int,
                            Term::bv(rbase + i as i64, 32),
                            Term::constant(el.clone(), Sort::BitVec(32)),
                        );
                    }
                    self.heap_write(HeapKind::Rows, Term::bv(base + j as i64, 32), rh);
                }
                h
            }
        })
    }

    /// `__distinct(a, n)`: the first `n` elements are pairwise different.
    fn distinct(&mut self, arr_ty: JType, h: Term, n: Term, span: Span) -> R<Term> {
        let len = handle_len(&h);
        self.side(and2(bvsle(Term::bv(0, 32), n.clone()), bvsle(n.clone(), len.clone())));
        let kind = HeapKind::of_array(arr_ty);
        let base = handle_base(&h);
        let count = match n.as_bv() {
            Some(k) => k.max(0),
            None => match self.range(&n).or_else(|| self.range(&len)) {
                Some((_, hi)) if hi <= 4096 => hi.max(0),
                _ => {
                    return Err(UnwindError::Unsupported {
                        line: span.line,
                        col: span.col,
                        what: "__distinct over an unbounded number of elements".into(),
                    })
                }
            },
        };
        let elems: Vec<Term> = (0..count)
            .map(|i| self.heap_read(kind, bvadd(base.clone(), Term::bv(i, 32))))
            .collect();
        if n.is_literal() {
            return Ok(distinct(elems));
        }
        let mut parts = Vec::new();
        for j in 1..count as usize {
            let live = bvslt(Term::bv(j as i64, 32), n.clone());
            for i in 0..j {
                parts.push(implies(live.clone(), not(eq(elems[i].clone(), elems[j].clone()))));
            }
        }
        Ok(and(parts))
    }
}
