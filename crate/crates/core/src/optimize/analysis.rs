//! Forward interval analysis over statements, recording per-statement
//! facts for dead-branch elimination and loop bound tightening.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::frontend::ast::*;

use super::interval::Interval;

/// Most iterations simulated for one visit of a loop.
pub const ANALYSIS_CAP: u64 = 10_000;
/// Body simulations allowed for a whole skeleton; after that loops are
/// analyzed in one step with their written variables unknown.
const FUEL: u64 = 500_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbsVal {
    Int(Interval),
    Bool(Option<bool>),
    Other,
}

impl AbsVal {
    fn join(self, o: AbsVal) -> AbsVal {
        match (self, o) {
            (AbsVal::Int(a), AbsVal::Int(b)) => AbsVal::Int(a.join(b)),
            (AbsVal::Bool(a), AbsVal::Bool(b)) => AbsVal::Bool(if a == b { a } else { None }),
            _ => AbsVal::Other,
        }
    }

    fn int(self, ty: JType) -> Interval {
        match self {
            AbsVal::Int(i) => i,
            _ => Interval::top(ty),
        }
    }

    fn truth(self) -> Option<bool> {
        match self {
            AbsVal::Bool(b) => b,
            _ => None,
        }
    }
}

fn top(ty: JType) -> AbsVal {
    if ty.is_integral() {
        AbsVal::Int(Interval::top(ty))
    } else if ty == JType::Boolean {
        AbsVal::Bool(None)
    } else {
        AbsVal::Other
    }
}

/// Abstract values of the variables in scope; absent means unknown.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Env {
    pub vars: BTreeMap<String, AbsVal>,
}

impl Env {
    fn get(&self, name: &str, ty: JType) -> AbsVal {
        self.vars.get(name).copied().unwrap_or_else(|| top(ty))
    }

    fn set(&mut self, name: &str, v: AbsVal) {
        match v {
            AbsVal::Other | AbsVal::Bool(None) => {
                self.vars.remove(name);
            }
            v => {
                self.vars.insert(name.to_string(), v);
            }
        }
    }

    /// Pointwise hull; a variable unknown on either side stays unknown.
    pub fn join(&self, o: &Env) -> Env {
        let mut vars = BTreeMap::new();
        for (k, a) in &self.vars {
            if let Some(b) = o.vars.get(k) {
                let j = a.join(*b);
                if !matches!(j, AbsVal::Other | AbsVal::Bool(None)) {
                    vars.insert(k.clone(), j);
                }
            }
        }
        Env { vars }
    }

    /// Intervals of the integer variables, for reports.
    pub fn intervals(&self) -> Vec<(String, Interval)> {
        self.vars
            .iter()
            .filter_map(|(k, v)| match v {
                AbsVal::Int(i) => Some((k.clone(), *i)),
                _ => None,
            })
            .collect()
    }
}

fn join_opt(a: Option<Env>, b: &Env) -> Option<Env> {
    Some(match a {
        Some(a) => a.join(b),
        None => b.clone(),
    })
}

/// What all visits of an `if` concluded about its condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IfFact {
    Always(bool),
    Mixed,
}

#[derive(Clone, Debug)]
pub struct LoopFact {
    pub line: u32,
    pub declared_upper: Option<u64>,
    /// Largest iteration count found over all visits; `None` when some
    /// visit could not bound the loop.
    pub detected: Option<u64>,
    pub undetected: bool,
    /// Step and state of the first detection.
    pub step: Option<u64>,
    pub env: Vec<(String, Interval)>,
}

#[derive(Default)]
pub struct Facts {
    pub ifs: HashMap<NodeId, IfFact>,
    pub loops: HashMap<NodeId, LoopFact>,
}

pub struct Analyzer<'a> {
    ast: &'a SkeletonAst,
    pub facts: Facts,
    fuel: u64,
}

impl<'a> Analyzer<'a> {
    pub fn new(ast: &'a SkeletonAst) -> Self {
        Analyzer {
            ast,
            facts: Facts::default(),
            fuel: FUEL,
        }
    }

    /// Analyze every function once, parameters unknown.
    pub fn run(&mut self) {
        for f in &self.ast.functions {
            let mut env = Env::default();
            self.stmt(&f.body, &mut env);
        }
    }

    fn record_if(&mut self, id: NodeId, v: Option<bool>) {
        let fact = match v {
            Some(b) => IfFact::Always(b),
            None => IfFact::Mixed,
        };
        self.facts
            .ifs
            .entry(id)
            .and_modify(|f| {
                if *f != fact {
                    *f = IfFact::Mixed
                }
            })
            .or_insert(fact);
    }

    /// Abstract execution; `env` becomes the post-state.
    pub fn stmt(&mut self, s: &Stmt, env: &mut Env) {
        match &s.kind {
            StmtKind::Empty | StmtKind::Break | StmtKind::Continue => {}
            StmtKind::Block(stmts) => {
                for x in stmts {
                    self.stmt(x, env);
                }
            }
            StmtKind::AssertBlock(b) => self.stmt(b, env),
            StmtKind::VarDecl { ty, name, init } => {
                let v = match init {
                    Some(e) => {
                        let v = self.expr(e, env);
                        fit(v, *ty)
                    }
                    None => top(*ty),
                };
                env.set(name, v);
            }
            StmtKind::Assign { target, value } => {
                let v = self.expr(value, env);
                self.store(target, v, env);
            }
            StmtKind::CompoundAssign { target, op, value } => {
                let cur = self.expr(target, env);
                let v = self.expr(value, env);
                let r = if op.is_arithmetic() && target.ty().is_integral() {
                    let pt = crate::frontend::typecheck::binary_promote(target.ty(), value.ty());
                    AbsVal::Int(cur.int(pt).arith(*op, v.int(pt), pt))
                } else {
                    top(target.ty())
                };
                self.store(target, r, env);
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let c = self.expr(cond, env).truth();
                self.record_if(s.id, c);
                match c {
                    Some(true) => self.stmt(then_branch, env),
                    Some(false) => {
                        if let Some(e) = else_branch {
                            self.stmt(e, env);
                        }
                    }
                    None => {
                        let mut a = env.clone();
                        self.stmt(then_branch, &mut a);
                        if let Some(e) = else_branch {
                            self.stmt(e, env);
                        }
                        *env = a.join(env);
                    }
                }
            }
            StmtKind::While {
                cond,
                body,
                bound,
                invariant,
            } => self.while_loop(s, cond, body, bound.as_ref(), invariant.as_ref(), env),
            StmtKind::DoWhile { body, cond, .. } => {
                // only seen before normalization
                self.stmt(body, env);
                let written = written_vars(body);
                havoc(env, &written);
                self.stmt(body, &mut env.clone());
                self.expr(cond, env);
            }
            StmtKind::For { init, cond, update, body, .. } => {
                if let Some(i) = init {
                    self.stmt(i, env);
                }
                let mut all = written_vars(body);
                for u in update {
                    all.extend(written_vars(u));
                }
                havoc(env, &all);
                if let Some(c) = cond {
                    self.expr(c, env);
                }
                let mut e = env.clone();
                self.stmt(body, &mut e);
                for u in update {
                    self.stmt(u, &mut e);
                }
            }
            StmtKind::Return(e) | StmtKind::Print { arg: e, .. } => {
                if let Some(e) = e {
                    self.expr(e, env);
                }
            }
            StmtKind::Expr(e) | StmtKind::Assert(e) => {
                self.expr(e, env);
            }
        }
    }

    fn store(&mut self, target: &Expr, v: AbsVal, env: &mut Env) {
        match &target.kind {
            ExprKind::Var(name) => env.set(name, fit(v, target.ty())),
            ExprKind::Index(a, i) => {
                self.expr(a, env);
                self.expr(i, env);
            }
            _ => {}
        }
    }

    fn while_loop(
        &mut self,
        s: &Stmt,
        cond: &Expr,
        body: &Stmt,
        bound: Option<&LoopBound>,
        invariant: Option<&Expr>,
        env: &mut Env,
    ) {
        let declared_upper = bound.map(|b| b.upper());
        if let Some(inv) = invariant {
            havoc(env, &written_vars(body));
            self.expr(inv, env);
            self.expr(cond, env);
            self.stmt(body, &mut env.clone());
            return;
        }
        let limit = declared_upper.unwrap_or(ANALYSIS_CAP).min(ANALYSIS_CAP);
        let mut cur = env.clone();
        let mut exit: Option<Env> = None;
        let mut detected = None;
        let mut cut = false;
        let mut k = 0u64;
        loop {
            let mut e = cur.clone();
            let c = self.expr(cond, &mut e).truth();
            exit = join_opt(exit, &e);
            if c == Some(false) {
                detected = Some((k, cur.intervals()));
                break;
            }
            if Some(k) == declared_upper {
                break;
            }
            if k >= limit || self.fuel == 0 {
                cut = true;
                break;
            }
            self.fuel -= 1;
            self.stmt(body, &mut e);
            if e == cur {
                break;
            }
            cur = e;
            k += 1;
        }
        if cut {
            // later iterations were not simulated: cover them with one
            // visit on a state where everything the loop writes is unknown
            let mut t = cur;
            havoc(&mut t, &written_vars(body));
            if let Some(c) = s_cond_vars(cond) {
                havoc(&mut t, &c);
            }
            self.expr(cond, &mut t);
            let mut b = t.clone();
            self.stmt(body, &mut b);
            exit = join_opt(exit, &t);
        }
        *env = exit.expect("the condition was evaluated at least once");
        let fact = self.facts.loops.entry(s.id).or_insert(LoopFact {
            line: s.span.line,
            declared_upper,
            detected: None,
            undetected: false,
            step: None,
            env: Vec::new(),
        });
        match detected {
            Some((k, snapshot)) => {
                fact.detected = Some(fact.detected.map_or(k, |d| d.max(k)));
                if fact.step.is_none() {
                    fact.step = Some(k);
                    fact.env = snapshot;
                }
            }
            None => fact.undetected = true,
        }
    }

    pub fn expr(&mut self, e: &Expr, env: &mut Env) -> AbsVal {
        let ty = e.ty();
        match &e.kind {
            ExprKind::Lit(l) => match l {
                Literal::Bool(b) => AbsVal::Bool(Some(*b)),
                Literal::Int(v) => AbsVal::Int(Interval::point(*v)),
                Literal::Char(c) => AbsVal::Int(Interval::point(*c as i64)),
                Literal::Str(_) => AbsVal::Other,
            },
            ExprKind::Var(n) => env.get(n, ty),
            ExprKind::Unary(op, a) => {
                let v = self.expr(a, env);
                match op {
                    UnOp::Not => AbsVal::Bool(v.truth().map(|b| !b)),
                    UnOp::Neg => AbsVal::Int(v.int(a.ty()).convert(ty).neg(ty)),
                    UnOp::Plus => AbsVal::Int(v.int(a.ty()).convert(ty)),
                }
            }
            ExprKind::Binary(op, a, b) => self.binary(*op, a, b, ty, env),
            ExprKind::Ternary(c, a, b) => match self.expr(c, env).truth() {
                Some(true) => fit(self.expr(a, env), ty),
                Some(false) => fit(self.expr(b, env), ty),
                None => {
                    let mut ea = env.clone();
                    let va = fit(self.expr(a, &mut ea), ty);
                    let vb = fit(self.expr(b, env), ty);
                    *env = ea.join(env);
                    va.join(vb)
                }
            },
            ExprKind::IncDec {
                target,
                increment,
                prefix,
            } => {
                let old = self.expr(target, env);
                let tt = target.ty();
                let d = Interval::point(if *increment { 1 } else { -1 });
                // the update wraps at the variable's own type
                let pt = crate::frontend::typecheck::binary_promote(tt, JType::Int);
                let new = AbsVal::Int(old.int(tt).arith(BinOp::Add, d, pt).convert(tt));
                if let ExprKind::Var(n) = &target.kind {
                    env.set(n, new);
                }
                if *prefix {
                    new
                } else {
                    old
                }
            }
            ExprKind::Index(a, i) => {
                self.expr(a, env);
                self.expr(i, env);
                top(ty)
            }
            ExprKind::Length(a) | ExprKind::StrLength(a) => {
                self.expr(a, env);
                AbsVal::Int(Interval::new(0, i32::MAX as i64))
            }
            ExprKind::Abs(a) => {
                let v = self.expr(a, env).int(a.ty()).convert(ty);
                AbsVal::Int(v.abs(ty))
            }
            ExprKind::Cast(to, a) => {
                let v = self.expr(a, env);
                match v {
                    AbsVal::Int(i) => AbsVal::Int(i.convert(*to)),
                    other => fit(other, *to),
                }
            }
            ExprKind::Placeholder(id) => {
                let p = &self.ast.placeholders[*id];
                match p.kind {
                    PlaceholderKind::Int | PlaceholderKind::Char => match p.values.int_bounds() {
                        Some((lo, hi)) => AbsVal::Int(Interval::new(lo, hi)),
                        None => top(ty),
                    },
                    PlaceholderKind::Boolean => match p.values.singleton() {
                        Some(Literal::Bool(b)) => AbsVal::Bool(Some(b)),
                        _ => AbsVal::Bool(None),
                    },
                    _ => AbsVal::Other,
                }
            }
            ExprKind::Impl(a, b) => {
                let va = self.expr(a, env).truth();
                if va == Some(false) {
                    return AbsVal::Bool(Some(true));
                }
                let mut eb = env.clone();
                let vb = self.expr(b, &mut eb).truth();
                *env = if va == Some(true) { eb } else { eb.join(env) };
                AbsVal::Bool(match (va, vb) {
                    (_, Some(true)) => Some(true),
                    (Some(true), Some(false)) => Some(false),
                    _ => None,
                })
            }
            ExprKind::Call { args, .. } => {
                for a in args {
                    self.expr(a, env);
                }
                top(ty)
            }
            _ => {
                for c in e.children() {
                    self.expr(c, env);
                }
                top(ty)
            }
        }
    }

    fn binary(&mut self, op: BinOp, a: &Expr, b: &Expr, ty: JType, env: &mut Env) -> AbsVal {
        match op {
            BinOp::And | BinOp::Or => {
                let short = op == BinOp::Or;
                let va = self.expr(a, env).truth();
                if va == Some(short) {
                    return AbsVal::Bool(Some(short));
                }
                let mut eb = env.clone();
                let vb = self.expr(b, &mut eb).truth();
                *env = if va.is_some() { eb } else { eb.join(env) };
                return AbsVal::Bool(if va.is_some() {
                    vb
                } else if vb == Some(short) {
                    Some(short)
                } else {
                    None
                });
            }
            _ => {}
        }
        let va = self.expr(a, env);
        let vb = self.expr(b, env);
        if op.is_arithmetic() {
            return AbsVal::Int(va.int(a.ty()).convert(ty).arith(op, vb.int(b.ty()).convert(ty), ty));
        }
        if same_pure_expr(a, b) {
            return AbsVal::Bool(Some(matches!(op, BinOp::Le | BinOp::Ge | BinOp::Eq)));
        }
        match (va, vb) {
            (AbsVal::Bool(x), AbsVal::Bool(y)) => AbsVal::Bool(match (x, y) {
                (Some(x), Some(y)) => Some((x == y) == (op == BinOp::Eq)),
                _ => None,
            }),
            (AbsVal::Int(x), AbsVal::Int(y)) => AbsVal::Bool(x.compare(op, y)),
            _ => AbsVal::Bool(None),
        }
    }
}

/// Whether `a` and `b` are the same side-effect free expression, up to
/// source positions; both then evaluate to the same value.
fn same_pure_expr(a: &Expr, b: &Expr) -> bool {
    let mut fresh_array = false;
    a.walk(&mut |x| fresh_array |= matches!(x.kind, ExprKind::Placeholder(_)) && x.ty().is_array());
    if a.has_side_effects() || a.allocates() || fresh_array {
        return false;
    }
    let strip = |e: &Expr| {
        let mut e = e.clone();
        e.walk_mut(&mut |x| x.span = Span::default());
        e
    };
    strip(a) == strip(b)
}

/// `v` stored into a slot of type `ty`.
fn fit(v: AbsVal, ty: JType) -> AbsVal {
    match v {
        AbsVal::Int(i) if ty.is_integral() => AbsVal::Int(i.convert(ty)),
        AbsVal::Bool(b) if ty == JType::Boolean => AbsVal::Bool(b),
        _ => top(ty),
    }
}

fn havoc(env: &mut Env, vars: &BTreeSet<String>) {
    for v in vars {
        env.vars.remove(v);
    }
}

/// Variables the condition itself writes, e.g. `i++ < n`.
fn s_cond_vars(cond: &Expr) -> Option<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    expr_writes(cond, &mut out);
    (!out.is_empty()).then_some(out)
}

fn expr_writes(e: &Expr, out: &mut BTreeSet<String>) {
    e.walk(&mut |x| {
        if let ExprKind::IncDec { target, .. } = &x.kind {
            if let ExprKind::Var(n) = &target.kind {
                out.insert(n.clone());
            }
        }
    });
}

/// Local variables a statement may assign.
pub fn written_vars(s: &Stmt) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    s.walk(&mut |x| {
        match &x.kind {
            StmtKind::Assign { target, .. } | StmtKind::CompoundAssign { target, .. } => {
                if let ExprKind::Var(n) = &target.kind {
                    out.insert(n.clone());
                }
            }
            StmtKind::VarDecl { name, .. } => {
                out.insert(name.clone());
            }
            _ => {}
        }
        for e in x.exprs() {
            expr_writes(e, &mut out);
        }
    });
    out
}
