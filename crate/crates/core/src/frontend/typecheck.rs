//! Name resolution, typing, definite assignment and fragment restrictions.

use std::collections::{BTreeSet, HashMap};

use super::ast::*;
use super::FrontendError;
use super::FrontendErrorKind;

type TResult<T> = Result<T, FrontendError>;

/// Type of `a op b` for arithmetic on integral operands.
pub fn binary_promote(a: JType, b: JType) -> JType {
    if a == JType::Long || b == JType::Long {
        JType::Long
    } else {
        JType::Int
    }
}

/// Type of a unary arithmetic operand after promotion.
pub fn unary_promote(a: JType) -> JType {
    if a == JType::Long {
        JType::Long
    } else {
        JType::Int
    }
}

/// Whether a value of type `from` may be stored in a slot of type `to`
/// without a cast.
pub fn widens_to(from: JType, to: JType) -> bool {
    use JType::*;
    from == to
        || matches!(
            (from, to),
            (Byte, Short) | (Byte, Int) | (Byte, Long) | (Short, Int) | (Short, Long) | (Char, Int)
                | (Char, Long) | (Int, Long)
        )
}

pub fn fits(value: i64, ty: JType) -> bool {
    match ty {
        JType::Byte => i8::try_from(value).is_ok(),
        JType::Short => i16::try_from(value).is_ok(),
        JType::Char => u16::try_from(value).is_ok(),
        JType::Int => i32::try_from(value).is_ok(),
        JType::Long => true,
        _ => false,
    }
}

pub fn check(mut ast: SkeletonAst) -> TResult<SkeletonAst> {
    let mut sigs = HashMap::new();
    for f in &ast.functions {
        if f.name.starts_with("__") {
            return Err(FrontendError::semantic(
                f.span,
                format!("'{}' uses the reserved '__' prefix", f.name),
            ));
        }
        sigs.insert(
            f.name.clone(),
            (f.params.iter().map(|p| p.ty).collect::<Vec<_>>(), f.ret),
        );
    }
    let entry = ast.entry_function();
    if !entry.params.is_empty() {
        return Err(FrontendError::semantic(
            entry.span,
            "the @MAIN function must not take parameters",
        ));
    }
    let placeholder_types: Vec<JType> = ast.placeholders.iter().map(|p| p.kind.java_type()).collect();
    let placeholder_bounds: Vec<Option<(i64, i64)>> =
        ast.placeholders.iter().map(|p| p.values.int_bounds()).collect();
    for func in &mut ast.functions {
        let mut c = Checker {
            sigs: &sigs,
            placeholder_types: &placeholder_types,
            placeholder_bounds: &placeholder_bounds,
            scopes: vec![HashMap::new()],
            ret: func.ret,
            gen_only: 0,
            assert_block_base: None,
            loop_depth: 0,
        };
        let mut flow = Flow::default();
        for p in &func.params {
            check_name(&p.name, func.span)?;
            if c.scopes[0].insert(p.name.clone(), p.ty).is_some() {
                return Err(FrontendError::semantic(
                    func.span,
                    format!("duplicate parameter '{}'", p.name),
                ));
            }
            flow.assigned.insert(p.name.clone());
        }
        c.stmt(&mut func.body, &mut flow)?;
        if func.ret.is_some() && !flow.dead {
            return Err(FrontendError::semantic(
                func.span,
                format!("function '{}' may finish without returning a value", func.name),
            ));
        }
    }
    Ok(ast)
}

fn check_name(name: &str, span: Span) -> TResult<()> {
    if name.starts_with("__") {
        return Err(FrontendError::semantic(
            span,
            format!("'{name}' uses the reserved '__' prefix"),
        ));
    }
    Ok(())
}

#[derive(Clone, Debug, Default)]
struct Flow {
    assigned: BTreeSet<String>,
    /// Control cannot reach this point.
    dead: bool,
}

impl Flow {
    fn join(a: Flow, b: Flow) -> Flow {
        match (a.dead, b.dead) {
            (true, _) => b,
            (_, true) => a,
            _ => Flow {
                assigned: a.assigned.intersection(&b.assigned).cloned().collect(),
                dead: false,
            },
        }
    }
}

struct Checker<'a> {
    sigs: &'a HashMap<String, (Vec<JType>, Option<JType>)>,
    placeholder_types: &'a [JType],
    placeholder_bounds: &'a [Option<(i64, i64)>],
    scopes: Vec<HashMap<String, JType>>,
    ret: Option<JType>,
    /// Nesting depth of generation-only contexts.
    gen_only: u32,
    /// Scope index of the innermost enclosing ASSERTBLOCK body.
    assert_block_base: Option<usize>,
    loop_depth: u32,
}

impl Checker<'_> {
    fn lookup(&self, name: &str) -> Option<(usize, JType)> {
        self.scopes
            .iter()
            .enumerate()
            .rev()
            .find_map(|(i, s)| s.get(name).map(|t| (i, *t)))
    }

    fn declare(&mut self, name: &str, ty: JType, span: Span) -> TResult<()> {
        check_name(name, span)?;
        if self.lookup(name).is_some() {
            return Err(FrontendError::semantic(
                span,
                format!("variable '{name}' is already defined"),
            ));
        }
        self.scopes.last_mut().unwrap().insert(name.to_string(), ty);
        Ok(())
    }

    fn scoped<T>(&mut self, f: impl FnOnce(&mut Self) -> TResult<T>) -> TResult<T> {
        self.scopes.push(HashMap::new());
        let r = f(self);
        self.scopes.pop();
        r
    }

    /// Reject writes that escape an ASSERTBLOCK.
    fn check_block_write(&self, target: &Expr) -> TResult<()> {
        let Some(base) = self.assert_block_base else {
            return Ok(());
        };
        match &target.kind {
            ExprKind::Var(name) => match self.lookup(name) {
                Some((i, _)) if i >= base => Ok(()),
                _ => Err(FrontendError::semantic(
                    target.span,
                    format!("ASSERTBLOCK must not modify '{name}' declared outside the block"),
                )),
            },
            _ => Err(FrontendError::semantic(
                target.span,
                "ASSERTBLOCK must not write array elements",
            )),
        }
    }

    fn stmt(&mut self, s: &mut Stmt, flow: &mut Flow) -> TResult<()> {
        let span = s.span;
        match &mut s.kind {
            StmtKind::Empty => {}
            StmtKind::Block(stmts) => {
                self.scoped(|c| {
                    for st in stmts.iter_mut() {
                        c.stmt(st, flow)?;
                    }
                    Ok(())
                })?;
            }
            StmtKind::VarDecl { ty, name, init } => {
                let ty = *ty;
                if let Some(e) = init {
                    self.assign_value(e, ty, flow)?;
                }
                self.declare(name, ty, span)?;
                if init.is_some() {
                    flow.assigned.insert(name.clone());
                } else {
                    flow.assigned.remove(name.as_str());
                }
            }
            StmtKind::Assign { target, value } => {
                let tty = self.target(target, flow, false)?;
                self.assign_value(value, tty, flow)?;
                self.check_block_write(target)?;
                if let ExprKind::Var(n) = &target.kind {
                    flow.assigned.insert(n.clone());
                }
            }
            StmtKind::CompoundAssign { target, op, value } => {
                let tty = self.target(target, flow, true)?;
                let vty = self.expr(value, flow)?;
                self.check_block_write(target)?;
                if tty == JType::String {
                    if *op != BinOp::Add {
                        return Err(FrontendError::type_error(
                            span,
                            format!("operator '{}=' is not defined for String", op.symbol()),
                        ));
                    }
                    if vty.is_array() {
                        return Err(FrontendError::unsupported(span, "concatenating arrays"));
                    }
                } else if !(tty.is_integral() && vty.is_integral()) {
                    return Err(FrontendError::type_error(
                        span,
                        format!("operator '{}=' is not defined for {tty} and {vty}", op.symbol()),
                    ));
                }
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.condition(cond, flow)?;
                let mut a = flow.clone();
                self.scoped(|c| c.stmt(then_branch, &mut a))?;
                let mut b = flow.clone();
                if let Some(e) = else_branch {
                    self.scoped(|c| c.stmt(e, &mut b))?;
                }
                *flow = Flow::join(a, b);
            }
            StmtKind::While {
                cond,
                body,
                invariant,
                ..
            } => {
                if let Some(inv) = invariant {
                    self.gen_only += 1;
                    let r = self.condition(inv, flow);
                    self.gen_only -= 1;
                    r?;
                }
                self.condition(cond, flow)?;
                self.loop_body(body, flow)?;
                flow.dead = is_true_literal(cond) && !breaks_out(body);
            }
            StmtKind::DoWhile { body, cond, .. } => {
                let mut inner = flow.clone();
                self.loop_depth += 1;
                let r = self.scoped(|c| c.stmt(body, &mut inner));
                self.loop_depth -= 1;
                r?;
                // Whatever the body assigns before a `continue` is unknown;
                // only the straight-line path counts.
                let mut after = if inner.dead { flow.clone() } else { inner };
                after.dead = false;
                self.condition(cond, &mut after)?;
                *flow = after;
                flow.dead = is_true_literal(cond) && !breaks_out(body);
            }
            StmtKind::For {
                init,
                cond,
                update,
                body,
                ..
            } => {
                let Some(cond) = cond else {
                    return Err(FrontendError::unsupported(span, "for loop without a condition"));
                };
                let outer = flow.clone();
                self.scoped(|c| {
                    if let Some(i) = init {
                        c.stmt(i, flow)?;
                    }
                    c.condition(cond, flow)?;
                    let mut inner = flow.clone();
                    c.loop_depth += 1;
                    let r = c.scoped(|c| {
                        c.stmt(body, &mut inner)?;
                        inner.dead = false;
                        for u in update.iter_mut() {
                            c.stmt(u, &mut inner)?;
                        }
                        Ok(())
                    });
                    c.loop_depth -= 1;
                    r
                })?;
                let mut after = flow.clone();
                after.assigned.retain(|n| outer.assigned.contains(n) || self.lookup(n).is_some());
                *flow = after;
                flow.dead = is_true_literal(cond) && !breaks_out(body);
            }
            StmtKind::Return(e) => {
                if self.assert_block_base.is_some() {
                    return Err(FrontendError::semantic(span, "return inside ASSERTBLOCK"));
                }
                match (e, self.ret) {
                    (None, None) => {}
                    (Some(e), Some(rt)) => self.assign_value(e, rt, flow)?,
                    (None, Some(_)) => {
                        return Err(FrontendError::type_error(span, "missing return value"))
                    }
                    (Some(_), None) => {
                        return Err(FrontendError::type_error(
                            span,
                            "cannot return a value from a void function",
                        ))
                    }
                }
                flow.dead = true;
            }
            StmtKind::Break | StmtKind::Continue => {
                if self.loop_depth == 0 {
                    return Err(FrontendError::semantic(
                        span,
                        if matches!(s.kind, StmtKind::Break) {
                            "break outside of a loop"
                        } else {
                            "continue outside of a loop"
                        },
                    ));
                }
                flow.dead = true;
            }
            StmtKind::Print { arg, .. } => {
                if self.assert_block_base.is_some() {
                    return Err(FrontendError::semantic(span, "ASSERTBLOCK must not print"));
                }
                if let Some(a) = arg {
                    let t = self.expr(a, flow)?;
                    if t.is_array() {
                        return Err(FrontendError::unsupported(span, "printing an array reference"));
                    }
                }
            }
            StmtKind::Expr(e) => match &mut e.kind {
                ExprKind::Call { .. } => {
                    self.call(e, flow, true)?;
                }
                _ => {
                    self.expr(e, flow)?;
                }
            },
            StmtKind::Assert(e) => {
                self.gen_only += 1;
                let r = self.condition(e, flow);
                self.gen_only -= 1;
                r?;
            }
            StmtKind::AssertBlock(body) => {
                let saved_base = self.assert_block_base;
                let saved_loops = self.loop_depth;
                self.assert_block_base = Some(self.scopes.len());
                self.loop_depth = 0;
                self.gen_only += 1;
                let mut inner = flow.clone();
                let r = self.stmt(body, &mut inner);
                self.gen_only -= 1;
                self.loop_depth = saved_loops;
                self.assert_block_base = saved_base;
                r?;
            }
        }
        Ok(())
    }

    fn loop_body(&mut self, body: &mut Stmt, flow: &Flow) -> TResult<()> {
        let mut inner = flow.clone();
        self.loop_depth += 1;
        let r = self.scoped(|c| c.stmt(body, &mut inner));
        self.loop_depth -= 1;
        r
    }

    fn condition(&mut self, e: &mut Expr, flow: &mut Flow) -> TResult<()> {
        let t = self.expr(e, flow)?;
        if t != JType::Boolean {
            return Err(FrontendError::type_error(
                e.span,
                format!("expected boolean, found {t}"),
            ));
        }
        Ok(())
    }

    /// Type an assignment target. Compound targets must already hold a value.
    fn target(&mut self, target: &mut Expr, flow: &mut Flow, compound: bool) -> TResult<JType> {
        match &mut target.kind {
            ExprKind::Var(name) => {
                let Some((_, ty)) = self.lookup(name) else {
                    return Err(FrontendError::unresolved(target.span, name));
                };
                if compound && !flow.assigned.contains(name.as_str()) {
                    return Err(use_before(target.span, name));
                }
                target.ty = Some(ty);
                Ok(ty)
            }
            ExprKind::Index(..) => self.expr(target, flow),
            _ => Err(FrontendError::syntax(target.span, "invalid assignment target")),
        }
    }

    /// Check `e` against a slot of type `to`, applying constant narrowing.
    fn assign_value(&mut self, e: &mut Expr, to: JType, flow: &mut Flow) -> TResult<()> {
        if let ExprKind::ArrayLit { ty, .. } = &e.kind {
            if *ty != to {
                return Err(FrontendError::type_error(
                    e.span,
                    format!("cannot assign {ty} initializer to {to}"),
                ));
            }
        }
        let from = self.expr(e, flow)?;
        if widens_to(from, to) {
            return Ok(());
        }
        if let (ExprKind::Lit(lit), true) = (&e.kind, to.is_integral()) {
            if matches!(from, JType::Int | JType::Char | JType::Short | JType::Byte) {
                if let Some(v) = literal_as_i64(lit) {
                    if fits(v, to) {
                        e.ty = Some(to);
                        return Ok(());
                    }
                }
            }
        }
        if let (ExprKind::Placeholder(id), true) = (&e.kind, to.is_integral()) {
            if let Some((lo, hi)) = self.placeholder_bounds[*id] {
                if fits(lo, to) && fits(hi, to) {
                    e.ty = Some(to);
                    return Ok(());
                }
            }
        }
        Err(FrontendError::type_error(
            e.span,
            format!("cannot assign {from} to {to}"),
        ))
    }

    fn require_gen_only(&self, span: Span, what: &str) -> TResult<()> {
        if self.gen_only == 0 {
            return Err(FrontendError::misplaced(
                span,
                format!("{what} may only be used inside ASSERT, ASSERTBLOCK or INVARIANT"),
            ));
        }
        Ok(())
    }

    fn integral(&mut self, e: &mut Expr, flow: &mut Flow) -> TResult<JType> {
        let t = self.expr(e, flow)?;
        if !t.is_integral() {
            return Err(FrontendError::type_error(
                e.span,
                format!("expected an integral value, found {t}"),
            ));
        }
        Ok(t)
    }

    fn index_type(&mut self, e: &mut Expr, flow: &mut Flow) -> TResult<()> {
        let t = self.integral(e, flow)?;
        if t == JType::Long {
            return Err(FrontendError::type_error(e.span, "array index must be int, found long"));
        }
        Ok(())
    }

    fn call(&mut self, e: &mut Expr, flow: &mut Flow, void_ok: bool) -> TResult<Option<JType>> {
        let span = e.span;
        let ExprKind::Call { name, args } = &mut e.kind else {
            unreachable!()
        };
        if self.assert_block_base.is_some() {
            return Err(FrontendError::unsupported(span, "function calls inside ASSERTBLOCK"));
        }
        let Some((params, ret)) = self.sigs.get(name.as_str()).cloned() else {
            return Err(FrontendError::unresolved(span, name));
        };
        if params.len() != args.len() {
            return Err(FrontendError::type_error(
                span,
                format!(
                    "'{name}' expects {} argument(s), found {}",
                    params.len(),
                    args.len()
                ),
            ));
        }
        for (a, p) in args.iter_mut().zip(params) {
            self.assign_value(a, p, flow)?;
        }
        if ret.is_none() && !void_ok {
            return Err(FrontendError::type_error(
                span,
                format!("'{name}' returns no value"),
            ));
        }
        e.ty = ret;
        Ok(ret)
    }

    fn expr(&mut self, e: &mut Expr, flow: &mut Flow) -> TResult<JType> {
        let span = e.span;
        let ty = match &mut e.kind {
            ExprKind::Lit(l) => match l {
                Literal::Bool(_) => JType::Boolean,
                Literal::Int(_) => e.ty.unwrap_or(JType::Int),
                Literal::Char(_) => JType::Char,
                Literal::Str(_) => JType::String,
            },
            ExprKind::Var(name) => {
                let Some((_, ty)) = self.lookup(name) else {
                    return Err(FrontendError::unresolved(span, name));
                };
                if !flow.assigned.contains(name.as_str()) {
                    return Err(use_before(span, name));
                }
                ty
            }
            ExprKind::Unary(op, a) => {
                let t = self.expr(a, flow)?;
                match op {
                    UnOp::Not if t == JType::Boolean => JType::Boolean,
                    UnOp::Neg | UnOp::Plus if t.is_integral() => unary_promote(t),
                    _ => {
                        return Err(FrontendError::type_error(
                            span,
                            format!("bad operand type {t} for unary operator"),
                        ))
                    }
                }
            }
            ExprKind::Binary(op, a, b) => {
                let op = *op;
                let ta = self.expr(a, flow)?;
                let tb = self.expr(b, flow)?;
                if op == BinOp::Add && (ta == JType::String || tb == JType::String) {
                    if ta.is_array() || tb.is_array() {
                        return Err(FrontendError::unsupported(span, "concatenating arrays"));
                    }
                    let a = std::mem::replace(a, Box::new(Expr::bool_lit(false, span)));
                    let b = std::mem::replace(b, Box::new(Expr::bool_lit(false, span)));
                    e.kind = ExprKind::Concat(a, b);
                    JType::String
                } else if op.is_arithmetic() {
                    if !(ta.is_integral() && tb.is_integral()) {
                        return Err(bad_operands(span, op, ta, tb));
                    }
                    binary_promote(ta, tb)
                } else if op.is_logical() {
                    if ta != JType::Boolean || tb != JType::Boolean {
                        return Err(bad_operands(span, op, ta, tb));
                    }
                    if b.has_side_effects() {
                        return Err(FrontendError::unsupported(
                            b.span,
                            format!("side effects in the right operand of '{}'", op.symbol()),
                        ));
                    }
                    JType::Boolean
                } else if matches!(op, BinOp::Eq | BinOp::Ne) {
                    if ta == JType::String && tb == JType::String {
                        return Err(FrontendError::unsupported(
                            span,
                            "comparing strings with '==' or '!='; use equals",
                        ));
                    }
                    if ta.is_array() || tb.is_array() {
                        return Err(FrontendError::unsupported(span, "comparing array references"));
                    }
                    let ok = (ta.is_integral() && tb.is_integral())
                        || (ta == JType::Boolean && tb == JType::Boolean);
                    if !ok {
                        return Err(bad_operands(span, op, ta, tb));
                    }
                    JType::Boolean
                } else {
                    if !(ta.is_integral() && tb.is_integral()) {
                        return Err(bad_operands(span, op, ta, tb));
                    }
                    JType::Boolean
                }
            }
            ExprKind::Ternary(c, a, b) => {
                self.condition(c, flow)?;
                let ta = self.expr(a, flow)?;
                let tb = self.expr(b, flow)?;
                if a.has_side_effects() || b.has_side_effects() {
                    return Err(FrontendError::unsupported(
                        span,
                        "side effects in a branch of a conditional expression",
                    ));
                }
                if ta == tb {
                    ta
                } else if ta.is_integral() && tb.is_integral() {
                    binary_promote(ta, tb)
                } else {
                    return Err(FrontendError::type_error(
                        span,
                        format!("incompatible branch types {ta} and {tb}"),
                    ));
                }
            }
            ExprKind::IncDec { target, .. } => {
                let t = self.target(target, flow, true)?;
                if !t.is_integral() {
                    return Err(FrontendError::type_error(
                        span,
                        format!("cannot increment a value of type {t}"),
                    ));
                }
                self.check_block_write(target)?;
                t
            }
            ExprKind::Index(a, i) => {
                let ta = self.expr(a, flow)?;
                let Some(elem) = ta.element() else {
                    return Err(FrontendError::type_error(
                        span,
                        format!("cannot index a value of type {ta}"),
                    ));
                };
                self.index_type(i, flow)?;
                elem
            }
            ExprKind::Length(a) => {
                let ta = self.expr(a, flow)?;
                if !ta.is_array() {
                    return Err(FrontendError::type_error(
                        span,
                        format!("'.length' needs an array, found {ta}"),
                    ));
                }
                JType::Int
            }
            ExprKind::NewArray { ty, dims } => {
                let ty = *ty;
                let max_dims = if ty == JType::IntArray2D { 2 } else { 1 };
                if dims.len() > max_dims {
                    return Err(FrontendError::type_error(span, "too many array dimensions"));
                }
                if dims.len() < max_dims {
                    return Err(FrontendError::unsupported(span, "arrays with unallocated rows"));
                }
                if ty == JType::StringArray {
                    return Err(FrontendError::unsupported(
                        span,
                        "'new String[n]' (elements would be null); use an initializer",
                    ));
                }
                for d in dims.iter_mut() {
                    self.index_type(d, flow)?;
                }
                ty
            }
            ExprKind::ArrayLit { ty, elems } => {
                let ty = *ty;
                let elem = ty.element().expect("array literal type");
                for el in elems.iter_mut() {
                    self.assign_value(el, elem, flow)?;
                }
                ty
            }
            ExprKind::Call { .. } => {
                return self.call(e, flow, false).map(|t| t.expect("non-void call"));
            }
            ExprKind::Placeholder(id) => self.placeholder_types[*id],
            ExprKind::Distinct(a, n) => {
                self.require_gen_only(span, "__distinct")?;
                let ta = self.expr(a, flow)?;
                if !matches!(ta, JType::IntArray | JType::StringArray) {
                    return Err(FrontendError::type_error(
                        span,
                        format!("__distinct needs int[] or String[], found {ta}"),
                    ));
                }
                self.index_type(n, flow)?;
                JType::Boolean
            }
            ExprKind::Impl(a, b) => {
                self.require_gen_only(span, "__impl")?;
                self.condition(a, flow)?;
                self.condition(b, flow)?;
                JType::Boolean
            }
            ExprKind::Out => {
                self.require_gen_only(span, "__out")?;
                JType::String
            }
            ExprKind::Concat(a, b) => {
                self.expr(a, flow)?;
                self.expr(b, flow)?;
                JType::String
            }
            ExprKind::StrEquals(a, b) => {
                let ta = self.expr(a, flow)?;
                let tb = self.expr(b, flow)?;
                if ta != JType::String || tb != JType::String {
                    return Err(FrontendError::type_error(
                        span,
                        format!("equals expects two strings, found {ta} and {tb}"),
                    ));
                }
                JType::Boolean
            }
            ExprKind::StrLength(a) => {
                let ta = self.expr(a, flow)?;
                if ta != JType::String {
                    return Err(FrontendError::type_error(
                        span,
                        format!("length() needs a String, found {ta}"),
                    ));
                }
                JType::Int
            }
            ExprKind::Abs(a) => {
                let t = self.integral(a, flow)?;
                unary_promote(t)
            }
            ExprKind::Cast(to, a) => {
                let to = *to;
                let t = self.expr(a, flow)?;
                let ok = (t.is_integral() && to.is_integral()) || (t == to);
                if !ok {
                    return Err(FrontendError::type_error(
                        span,
                        format!("cannot cast {t} to {to}"),
                    ));
                }
                to
            }
        };
        e.ty = Some(ty);
        Ok(ty)
    }
}

fn use_before(span: Span, name: &str) -> FrontendError {
    FrontendError::new(
        FrontendErrorKind::UseBeforeAssignment,
        span,
        format!("variable '{name}' might not have been initialized"),
    )
}

fn bad_operands(span: Span, op: BinOp, a: JType, b: JType) -> FrontendError {
    FrontendError::type_error(
        span,
        format!("bad operand types for '{}': {a} and {b}", op.symbol()),
    )
}

fn is_true_literal(e: &Expr) -> bool {
    matches!(e.kind, ExprKind::Lit(Literal::Bool(true)))
}

/// Whether `body` contains a `break` that exits the enclosing loop.
fn breaks_out(body: &Stmt) -> bool {
    fn go(s: &Stmt) -> bool {
        match &s.kind {
            StmtKind::Break => true,
            StmtKind::While { .. } | StmtKind::DoWhile { .. } | StmtKind::For { .. } => false,
            _ => s.children().into_iter().any(go),
        }
    }
    go(body)
}

#[cfg(test)]
mod tests {
    use super::super::{load, FrontendErrorKind};
    use super::*;

    fn err_kind(src: &str) -> FrontendErrorKind {
        load(src).unwrap_err().kind
    }

    fn find_expr<'a>(ast: &'a SkeletonAst, pred: &dyn Fn(&Expr) -> bool) -> Option<&'a Expr> {
        let mut found = None;
        ast.walk_stmts(&mut |s| {
            for e in s.exprs() {
                e.walk(&mut |x| {
                    if found.is_none() && pred(x) {
                        found = Some(x);
                    }
                });
            }
        });
        found
    }

    #[test]
    fn boolean_into_int_is_rejected() {
        assert_eq!(err_kind("int x = true;"), FrontendErrorKind::TypeMismatch);
    }

    #[test]
    fn byte_arithmetic_promotes_to_int() {
        let ast = load("byte b = 1; int y = b + 1;").unwrap();
        let add = find_expr(&ast, &|e| matches!(e.kind, ExprKind::Binary(BinOp::Add, ..))).unwrap();
        assert_eq!(add.ty, Some(JType::Int));
        let lit = find_expr(&ast, &|e| e.as_lit() == Some(&Literal::Int(1))).unwrap();
        assert_eq!(lit.ty, Some(JType::Byte));
    }

    #[test]
    fn narrowing_needs_a_fitting_constant() {
        assert!(load("byte b = 127;").is_ok());
        assert_eq!(err_kind("byte b = 128;"), FrontendErrorKind::TypeMismatch);
        assert_eq!(err_kind("int i = 1; byte b = i;"), FrontendErrorKind::TypeMismatch);
        assert!(load("byte b = 1; b += 300;").is_ok());
    }

    #[test]
    fn definite_assignment() {
        assert_eq!(err_kind("int x; x++;"), FrontendErrorKind::UseBeforeAssignment);
        assert_eq!(
            err_kind("int x; if (1 < 2) { x = 1; } int y = x;"),
            FrontendErrorKind::UseBeforeAssignment
        );
        assert!(load("int x; if (1 < 2) { x = 1; } else { x = 2; } int y = x;").is_ok());
        assert_eq!(err_kind("int y = z;"), FrontendErrorKind::Unresolved);
    }

    #[test]
    fn string_plus_becomes_concat() {
        let ast = load("String s = \"a\" + 1;").unwrap();
        assert!(find_expr(&ast, &|e| matches!(e.kind, ExprKind::Concat(..))).is_some());
        assert_eq!(err_kind("String s = \"a\"; boolean b = s == s;"), FrontendErrorKind::Unsupported);
    }

    #[test]
    fn helpers_only_in_generation_code() {
        assert_eq!(
            err_kind("boolean b = __impl(true, false);"),
            FrontendErrorKind::MisplacedAnnotation
        );
        assert!(load("ASSERT(__impl(true, true));").is_ok());
        assert!(load("System.out.print(1); ASSERT(__out.equals(\"1\"));").is_ok());
    }

    #[test]
    fn assert_block_cannot_modify_outer_state() {
        assert!(load("int x = 1; ASSERTBLOCK(); { x = 2; }").is_err());
        assert!(load("int x = 1; ASSERTBLOCK(); { int y = x; y++; ASSERT(y > 1); }").is_ok());
        assert!(load("int[] a = new int[2]; ASSERTBLOCK(); { a[0] = 1; }").is_err());
    }

    #[test]
    fn missing_return_and_recursion() {
        let src = "@MAIN static int f() { int x = 1; }";
        assert!(load(src).is_err());
        let src = "@MAIN static int f() { return g(3); }\nstatic int g(int n) { if (n == 0) return 0; return g(n - 1); }";
        assert!(load(src).is_ok());
    }

    #[test]
    fn break_outside_loop() {
        assert!(load("break;").is_err());
        assert!(load("while (true) { break; } int y = 1;").is_ok());
    }

    #[test]
    fn conditional_side_effects_and_null_arrays() {
        let k = |src| err_kind(src);
        assert_eq!(k("int i = 0; boolean b = i > 0 && i++ > 1;"), FrontendErrorKind::Unsupported);
        assert_eq!(k("int i = 0; int j = i > 0 ? i++ : 1;"), FrontendErrorKind::Unsupported);
        assert_eq!(k("String[] s = new String[2];"), FrontendErrorKind::Unsupported);
        assert_eq!(k("int[][] m = new int[2][];"), FrontendErrorKind::Unsupported);
        assert!(load("int i = 0; boolean b = i++ > 0 && i > 1;").is_ok());
    }

    #[test]
    fn no_shadowing() {
        assert!(load("int x = 1; { int x = 2; }").is_err());
        assert!(load("{ int x = 1; } { int x = 2; }").is_ok());
    }

    #[test]
    fn array_placeholder_indexing() {
        let src = "int[] arr = INTARRAY(list(5), range(1, 100)); int idx = INT(range(0, 4)); arr[idx] /= 2;";
        let ast = load(src).unwrap();
        let idx = find_expr(&ast, &|e| matches!(e.kind, ExprKind::Index(..))).unwrap();
        assert_eq!(idx.ty, Some(JType::Int));
    }
}
