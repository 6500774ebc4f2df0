//! Bottom-up constant folding of typed expressions.

use crate::arith;
use crate::frontend::ast::*;

/// Whether dropping `e` unevaluated is unobservable: no side effects, no
/// allocation and no possible fault.
pub fn is_removable(e: &Expr) -> bool {
    let mut ok = true;
    e.walk(&mut |x| {
        ok &= !matches!(
            x.kind,
            ExprKind::IncDec { .. }
                | ExprKind::Call { .. }
                | ExprKind::NewArray { .. }
                | ExprKind::ArrayLit { .. }
                | ExprKind::Index(..)
                | ExprKind::Distinct(..)
                | ExprKind::Binary(BinOp::Div | BinOp::Rem, ..)
        )
    });
    ok
}

/// Literal of type `ty` holding `v`.
fn lit(v: i64, ty: JType, span: Span) -> Expr {
    let l = match ty {
        JType::Char => Literal::Char(v as u16),
        JType::Boolean => Literal::Bool(v != 0),
        _ => Literal::Int(v),
    };
    Expr::typed(ExprKind::Lit(l), span, ty)
}

fn int_of(e: &Expr) -> Option<i64> {
    e.as_lit().and_then(literal_as_i64)
}

fn bool_of(e: &Expr) -> Option<bool> {
    match e.as_lit() {
        Some(Literal::Bool(b)) => Some(*b),
        _ => None,
    }
}

/// `e` as a value of type `ty`, adding a cast when the types differ.
fn retype(e: Expr, ty: JType) -> Expr {
    if e.ty() == ty {
        return e;
    }
    if let Some(v) = int_of(&e) {
        return lit(arith::wrap(v, ty), ty, e.span);
    }
    let span = e.span;
    Expr::typed(ExprKind::Cast(ty, Box::new(e)), span, ty)
}

/// Java text of a literal in string concatenation.
fn literal_text(e: &Expr) -> Option<String> {
    Some(match e.as_lit()? {
        Literal::Bool(b) => b.to_string(),
        Literal::Int(v) => v.to_string(),
        Literal::Char(c) => char::from_u32(*c as u32)?.to_string(),
        Literal::Str(s) => s.clone(),
    })
}

pub fn fold_expr(e: Expr) -> Expr {
    let Expr { kind, span, ty } = e;
    let t = ty.expect("typed expression");
    let rebuild = |kind| Expr { kind, span, ty };
    match kind {
        ExprKind::Unary(op, a) => {
            let a = fold_expr(*a);
            match (op, int_of(&a), bool_of(&a)) {
                (UnOp::Neg, Some(v), _) => lit(arith::neg(v, t), t, span),
                (UnOp::Plus, Some(v), _) => lit(v, t, span),
                (UnOp::Not, _, Some(b)) => Expr::bool_lit(!b, span),
                (UnOp::Not, _, _) => match a.kind {
                    ExprKind::Unary(UnOp::Not, inner) => *inner,
                    k => rebuild(ExprKind::Unary(op, Box::new(Expr { kind: k, ..a }))),
                },
                _ => rebuild(ExprKind::Unary(op, Box::new(a))),
            }
        }
        ExprKind::Binary(op, a, b) => {
            let (a, b) = (fold_expr(*a), fold_expr(*b));
            fold_binary(op, a, b, t, span)
        }
        ExprKind::Ternary(c, a, b) => {
            let (c, a, b) = (fold_expr(*c), fold_expr(*a), fold_expr(*b));
            match bool_of(&c) {
                Some(true) => retype(a, t),
                Some(false) => retype(b, t),
                None => rebuild(ExprKind::Ternary(Box::new(c), Box::new(a), Box::new(b))),
            }
        }
        ExprKind::Cast(to, a) => {
            let a = fold_expr(*a);
            match int_of(&a) {
                Some(v) => lit(arith::wrap(v, to), to, span),
                None if a.ty() == to => a,
                None => rebuild(ExprKind::Cast(to, Box::new(a))),
            }
        }
        ExprKind::Abs(a) => {
            let a = fold_expr(*a);
            match int_of(&a) {
                Some(v) => lit(arith::abs(v, t), t, span),
                None => rebuild(ExprKind::Abs(Box::new(a))),
            }
        }
        ExprKind::Concat(a, b) => {
            let (a, b) = (fold_expr(*a), fold_expr(*b));
            match (literal_text(&a), literal_text(&b)) {
                (Some(x), Some(y)) => Expr::typed(ExprKind::Lit(Literal::Str(x + &y)), span, JType::String),
                _ => rebuild(ExprKind::Concat(Box::new(a), Box::new(b))),
            }
        }
        ExprKind::StrLength(a) => {
            let a = fold_expr(*a);
            match a.as_lit() {
                Some(Literal::Str(s)) => lit(s.encode_utf16().count() as i64, t, span),
                _ => rebuild(ExprKind::StrLength(Box::new(a))),
            }
        }
        ExprKind::StrEquals(a, b) => {
            let (a, b) = (fold_expr(*a), fold_expr(*b));
            match (a.as_lit(), b.as_lit()) {
                (Some(Literal::Str(x)), Some(Literal::Str(y))) => Expr::bool_lit(x == y, span),
                _ => rebuild(ExprKind::StrEquals(Box::new(a), Box::new(b))),
            }
        }
        ExprKind::Impl(a, b) => {
            let (a, b) = (fold_expr(*a), fold_expr(*b));
            match bool_of(&a) {
                Some(false) => Expr::bool_lit(true, span),
                Some(true) => b,
                None => rebuild(ExprKind::Impl(Box::new(a), Box::new(b))),
            }
        }
        other => {
            let mut e = Expr { kind: other, span, ty };
            for c in e.children_mut() {
                let owned = std::mem::replace(c, Expr::bool_lit(false, span));
                *c = fold_expr(owned);
            }
            e
        }
    }
}

fn fold_binary(op: BinOp, a: Expr, b: Expr, t: JType, span: Span) -> Expr {
    let rebuild = |a: Expr, b: Expr| Expr::typed(ExprKind::Binary(op, Box::new(a), Box::new(b)), span, t);
    match op {
        BinOp::And => match (bool_of(&a), bool_of(&b)) {
            (Some(true), _) => b,
            (Some(false), _) => a,
            (None, Some(true)) => a,
            (None, Some(false)) if is_removable(&a) => b,
            _ => rebuild(a, b),
        },
        BinOp::Or => match (bool_of(&a), bool_of(&b)) {
            (Some(false), _) => b,
            (Some(true), _) => a,
            (None, Some(false)) => a,
            (None, Some(true)) if is_removable(&a) => b,
            _ => rebuild(a, b),
        },
        _ if op.is_arithmetic() => {
            if let (Some(x), Some(y)) = (int_of(&a), int_of(&b)) {
                if let Some(v) = arith::arith(op, x, y, t) {
                    return lit(v, t, span);
                }
                return rebuild(a, b);
            }
            let (ia, ib) = (int_of(&a), int_of(&b));
            match (op, ia, ib) {
                (BinOp::Add, Some(0), _) => retype(b, t),
                (BinOp::Add | BinOp::Sub, _, Some(0)) => retype(a, t),
                (BinOp::Mul, Some(1), _) => retype(b, t),
                (BinOp::Mul | BinOp::Div, _, Some(1)) => retype(a, t),
                _ => rebuild(a, b),
            }
        }
        _ => {
            // comparisons
            if let (Some(x), Some(y)) = (bool_of(&a), bool_of(&b)) {
                return Expr::bool_lit(if op == BinOp::Eq { x == y } else { x != y }, span);
            }
            if let (Some(x), Some(y)) = (int_of(&a), int_of(&b)) {
                return Expr::bool_lit(arith::compare(op, x, y), span);
            }
            rebuild(a, b)
        }
    }
}
