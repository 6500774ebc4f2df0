//! Rewrites a checked skeleton into the shape the unwinder expects.
//!
//! After normalization there are no `for` or `do`-`while` loops, no `break`
//! or `continue`, `return` only appears as the last statement of a function
//! body, and compound assignments are expanded into plain assignments.
//! Jumps are replaced by boolean flags (`__brk_<n>`, `__cnt_<n>`, `__ret`)
//! that guard the statements following them; early function results are
//! collected in `__return`.

use crate::frontend::ast::*;
use crate::frontend::typecheck::binary_promote;

/// Normalize every function of `ast`.
pub fn normalize(ast: &SkeletonAst) -> SkeletonAst {
    let mut out = ast.clone();
    let mut n = Normalizer {
        next_id: out.next_id,
        loops: 0,
        temps: 0,
    };
    for f in &mut out.functions {
        n.function(f);
    }
    out.next_id = n.next_id;
    out
}

/// Check the structural guarantees of [`normalize`]; returns a description
/// of the first violation.
pub fn check_normalized(ast: &SkeletonAst) -> Result<(), String> {
    for f in &ast.functions {
        let StmtKind::Block(stmts) = &f.body.kind else {
            return Err(format!("body of '{}' is not a block", f.name));
        };
        let mut err = None;
        f.body.walk(&mut |s| {
            let bad = match &s.kind {
                StmtKind::For { .. } => Some("for loop"),
                StmtKind::DoWhile { .. } => Some("do-while loop"),
                StmtKind::Break => Some("break"),
                StmtKind::Continue => Some("continue"),
                StmtKind::CompoundAssign { .. } => Some("compound assignment"),
                StmtKind::Return(_) if !stmts.last().is_some_and(|l| l.id == s.id) => {
                    Some("return before the end of the body")
                }
                _ => None,
            };
            if let (Some(what), None) = (bad, &err) {
                err = Some(format!("{}: {what} in '{}'", s.span, f.name));
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(())
}

const BRK: u8 = 1;
const CNT: u8 = 2;
const RET: u8 = 4;

#[derive(Clone, Copy)]
struct Ctx {
    /// Ordinal of the innermost loop.
    loop_id: Option<u32>,
    /// Returns are lowered to flag assignments.
    early_returns: bool,
}

struct Normalizer {
    next_id: NodeId,
    loops: u32,
    temps: u32,
}

fn brk_name(n: u32) -> String {
    format!("__brk_{n}")
}

fn cnt_name(n: u32) -> String {
    format!("__cnt_{n}")
}

fn flag(name: &str, span: Span) -> Expr {
    Expr::var(name, JType::Boolean, span)
}

/// Conjunction of `!flag` for every flag in `mask`.
fn guard(mask: u8, loop_id: Option<u32>, span: Span) -> Option<Expr> {
    let mut names = Vec::new();
    if mask & RET != 0 {
        names.push("__ret".to_string());
    }
    if let Some(n) = loop_id {
        if mask & BRK != 0 {
            names.push(brk_name(n));
        }
        if mask & CNT != 0 {
            names.push(cnt_name(n));
        }
    }
    names
        .iter()
        .map(|n| Expr::negated(flag(n, span)))
        .reduce(Expr::and)
}

fn contains_return(s: &Stmt) -> bool {
    let mut found = false;
    s.walk(&mut |x| found |= matches!(x.kind, StmtKind::Return(_)));
    found
}

fn is_simple(e: &Expr) -> bool {
    matches!(e.kind, ExprKind::Var(_) | ExprKind::Lit(_))
}

fn decrement(bound: &LoopBound) -> LoopBound {
    let spec = match &bound.spec {
        ValueSpec::Range(lo, hi) => ValueSpec::Range((lo - 1).max(0), (hi - 1).max(0)),
        ValueSpec::List(items) => ValueSpec::List(
            items
                .iter()
                .map(|l| Literal::Int(literal_as_i64(l).unwrap_or(0).saturating_sub(1).max(0)))
                .collect(),
        ),
        ValueSpec::Any => ValueSpec::Any,
    };
    LoopBound { spec }
}

impl Normalizer {
    fn id(&mut self) -> NodeId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn mk(&mut self, span: Span, kind: StmtKind) -> Stmt {
        let id = self.id();
        Stmt::new(id, span, kind)
    }

    fn decl(&mut self, ty: JType, name: &str, init: Option<Expr>, span: Span) -> Stmt {
        self.mk(
            span,
            StmtKind::VarDecl {
                ty,
                name: name.to_string(),
                init,
            },
        )
    }

    fn set_flag(&mut self, name: &str, span: Span) -> Stmt {
        self.mk(
            span,
            StmtKind::Assign {
                target: flag(name, span),
                value: Expr::bool_lit(true, span),
            },
        )
    }

    fn wrap(&mut self, mut stmts: Vec<Stmt>, span: Span) -> Stmt {
        if stmts.len() == 1 {
            stmts.pop().unwrap()
        } else {
            self.mk(span, StmtKind::Block(stmts))
        }
    }

    fn function(&mut self, f: &mut FunctionDecl) {
        let body = std::mem::replace(&mut f.body, Stmt::new(0, f.span, StmtKind::Empty));
        let span = body.span;
        let id = body.id;
        let StmtKind::Block(mut stmts) = body.kind else {
            unreachable!("function bodies are blocks")
        };
        let mut final_return = match stmts.last() {
            Some(Stmt {
                kind: StmtKind::Return(_),
                ..
            }) => stmts.pop(),
            _ => None,
        };
        let early = stmts.iter().any(contains_return);
        // with early returns the final one is lowered with the rest, so it
        // lands in the same guarded block as the locals it reads
        if early {
            stmts.extend(final_return.take());
        }
        let ctx = Ctx {
            loop_id: None,
            early_returns: early,
        };
        let mut out = Vec::new();
        if early {
            if let Some(t) = f.ret {
                out.push(self.decl(t, "__return", None, span));
            }
            out.push(self.decl(JType::Boolean, "__ret", Some(Expr::bool_lit(false, span)), span));
        }
        let (lowered, _) = self.block(stmts, ctx);
        out.extend(lowered);
        out.extend(final_return);
        if let (true, Some(t)) = (early, f.ret) {
            out.push(self.mk(span, StmtKind::Return(Some(Expr::var("__return", t, span)))));
        }
        f.body = Stmt::new(id, span, StmtKind::Block(out));
    }

    /// Lower a statement list; statements after a possible jump are guarded.
    fn block(&mut self, stmts: Vec<Stmt>, ctx: Ctx) -> (Vec<Stmt>, u8) {
        let mut out = Vec::new();
        let mut iter = stmts.into_iter();
        while let Some(s) = iter.next() {
            let span = s.span;
            let (lowered, mask) = self.stmt(s, ctx);
            out.extend(lowered);
            if mask != 0 {
                let rest: Vec<Stmt> = iter.collect();
                if rest.is_empty() {
                    return (out, mask);
                }
                let (rest, rest_mask) = self.block(rest, ctx);
                let g = guard(mask, ctx.loop_id, span).unwrap();
                let body = self.mk(span, StmtKind::Block(rest));
                out.push(self.mk(
                    span,
                    StmtKind::If {
                        cond: g,
                        then_branch: Box::new(body),
                        else_branch: None,
                    },
                ));
                return (out, mask | rest_mask);
            }
        }
        (out, 0)
    }

    fn single(&mut self, s: Stmt, ctx: Ctx) -> (Stmt, u8) {
        let span = s.span;
        let (v, m) = self.stmt(s, ctx);
        (self.wrap(v, span), m)
    }

    fn stmt(&mut self, s: Stmt, ctx: Ctx) -> (Vec<Stmt>, u8) {
        let Stmt { id, span, kind } = s;
        let keep = |kind| (vec![Stmt::new(id, span, kind)], 0);
        match kind {
            StmtKind::Block(stmts) => {
                let (v, m) = self.block(stmts, ctx);
                (vec![Stmt::new(id, span, StmtKind::Block(v))], m)
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let (t, mt) = self.single(*then_branch, ctx);
                let (e, me) = match else_branch {
                    Some(e) => {
                        let (e, m) = self.single(*e, ctx);
                        (Some(Box::new(e)), m)
                    }
                    None => (None, 0),
                };
                let kind = StmtKind::If {
                    cond,
                    then_branch: Box::new(t),
                    else_branch: e,
                };
                (vec![Stmt::new(id, span, kind)], mt | me)
            }
            StmtKind::Break => {
                let n = ctx.loop_id.expect("break inside a loop");
                (vec![self.set_flag(&brk_name(n), span)], BRK)
            }
            StmtKind::Continue => {
                let n = ctx.loop_id.expect("continue inside a loop");
                (vec![self.set_flag(&cnt_name(n), span)], CNT)
            }
            StmtKind::Return(e) if ctx.early_returns => {
                let mut v = Vec::new();
                if let Some(e) = e {
                    let t = e.ty();
                    v.push(self.mk(
                        span,
                        StmtKind::Assign {
                            target: Expr::var("__return", t, span),
                            value: e,
                        },
                    ));
                }
                v.push(self.set_flag("__ret", span));
                (v, RET)
            }
            StmtKind::CompoundAssign { target, op, value } => (self.compound(id, span, target, op, value), 0),
            StmtKind::AssertBlock(body) => {
                let (b, _) = self.single(*body, ctx);
                keep(StmtKind::AssertBlock(Box::new(b)))
            }
            StmtKind::While {
                cond,
                body,
                bound,
                invariant,
            } => self.lower_loop(id, span, None, cond, *body, Vec::new(), bound, invariant, false, ctx),
            StmtKind::For {
                init,
                cond,
                update,
                body,
                bound,
            } => {
                let cond = cond.expect("for loops without a condition are rejected");
                let init = init.map(|i| {
                    let (v, _) = self.stmt(*i, ctx);
                    v
                });
                let mut update_out = Vec::new();
                for u in update {
                    let (v, _) = self.stmt(u, ctx);
                    update_out.extend(v);
                }
                self.lower_loop(id, span, init, cond, *body, update_out, bound, None, false, ctx)
            }
            StmtKind::DoWhile { body, cond, bound } => {
                self.lower_loop(id, span, None, cond, *body, Vec::new(), bound, None, true, ctx)
            }
            other => keep(other),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn lower_loop(
        &mut self,
        id: NodeId,
        span: Span,
        init: Option<Vec<Stmt>>,
        cond: Expr,
        body: Stmt,
        update: Vec<Stmt>,
        bound: Option<LoopBound>,
        invariant: Option<Expr>,
        do_while: bool,
        ctx: Ctx,
    ) -> (Vec<Stmt>, u8) {
        self.loops += 1;
        let n = self.loops;
        let inner = Ctx {
            loop_id: Some(n),
            early_returns: ctx.early_returns,
        };
        let body_span = body.span;
        let body_stmts = match body.kind {
            StmtKind::Block(stmts) => stmts,
            _ => vec![body],
        };
        let (lowered, mask) = self.block(body_stmts, inner);

        let mut iteration = Vec::new();
        if mask & CNT != 0 {
            iteration.push(self.decl(JType::Boolean, &cnt_name(n), Some(Expr::bool_lit(false, span)), span));
        }
        iteration.extend(lowered);
        if !update.is_empty() {
            match guard(mask & (BRK | RET), Some(n), span) {
                Some(g) => {
                    let u = self.mk(span, StmtKind::Block(update));
                    iteration.push(self.mk(
                        span,
                        StmtKind::If {
                            cond: g,
                            then_branch: Box::new(u),
                            else_branch: None,
                        },
                    ));
                }
                None => iteration.extend(update),
            }
        }

        let cond = match guard(mask & (BRK | RET), Some(n), span) {
            Some(g) => Expr::and(g, cond),
            None => cond,
        };

        let mut out = init.unwrap_or_default();
        if mask & BRK != 0 {
            out.push(self.decl(JType::Boolean, &brk_name(n), Some(Expr::bool_lit(false, span)), span));
        }
        let bound = if do_while {
            out.push(self.mk(body_span, StmtKind::Block(iteration.clone())));
            bound.as_ref().map(decrement)
        } else {
            bound
        };
        let body = Stmt::new(self.id(), body_span, StmtKind::Block(iteration));
        out.push(Stmt::new(
            id,
            span,
            StmtKind::While {
                cond,
                body: Box::new(body),
                bound,
                invariant,
            },
        ));
        let stmts = if out.len() == 1 {
            out
        } else {
            vec![self.mk(span, StmtKind::Block(out))]
        };
        (stmts, mask & RET)
    }

    fn compound(&mut self, id: NodeId, span: Span, target: Expr, op: BinOp, value: Expr) -> Vec<Stmt> {
        let tty = target.ty();
        match target.kind {
            ExprKind::Index(a, i) if !(is_simple(&a) && is_simple(&i)) => {
                self.temps += 1;
                let k = self.temps;
                let arr_name = format!("__arr_{k}");
                let idx_name = format!("__idx_{k}");
                let aty = a.ty();
                let ity = i.ty();
                let d1 = self.decl(aty, &arr_name, Some(*a), span);
                let d2 = self.decl(ity, &idx_name, Some(*i), span);
                let target = Expr::typed(
                    ExprKind::Index(
                        Box::new(Expr::var(&arr_name, aty, span)),
                        Box::new(Expr::var(&idx_name, ity, span)),
                    ),
                    target.span,
                    tty,
                );
                let assign = self.expand(id, span, target, op, value);
                vec![self.mk(span, StmtKind::Block(vec![d1, d2, assign]))]
            }
            kind => {
                let target = Expr {
                    kind,
                    span: target.span,
                    ty: target.ty,
                };
                vec![self.expand(id, span, target, op, value)]
            }
        }
    }

    /// `t op= v` becomes `t = (T) (t op v)`.
    fn expand(&mut self, id: NodeId, span: Span, target: Expr, op: BinOp, value: Expr) -> Stmt {
        let tty = target.ty();
        let read = target.clone();
        let value = if tty == JType::String {
            Expr::typed(ExprKind::Concat(Box::new(read), Box::new(value)), span, JType::String)
        } else {
            let pty = binary_promote(tty, value.ty());
            let e = Expr::typed(ExprKind::Binary(op, Box::new(read), Box::new(value)), span, pty);
            if pty == tty {
                e
            } else {
                Expr::typed(ExprKind::Cast(tty, Box::new(e)), span, tty)
            }
        };
        Stmt::new(id, span, StmtKind::Assign { target, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{load, printer};
    use crate::instance::interp::{interpret, InterpConfig};
    use std::collections::BTreeMap;

    fn both(src: &str) -> (SkeletonAst, SkeletonAst) {
        let ast = load(src).unwrap();
        let norm = normalize(&ast);
        check_normalized(&norm).unwrap();
        (ast, norm)
    }

    fn same_behaviour(src: &str) {
        let (ast, norm) = both(src);
        let cfg = InterpConfig::default();
        let a = interpret(&ast, &BTreeMap::new(), &cfg);
        let b = interpret(&norm, &BTreeMap::new(), &cfg);
        assert_eq!(a.output, b.output, "{}", printer::print_skeleton(&norm));
        assert_eq!(a.return_value, b.return_value);
        assert_eq!(a.fault, b.fault);
    }

    #[test]
    fn break_is_guarded() {
        let (_, norm) = both("int x = 0; int c = 5; LOOP(range(0, 5)); while (c > 0) { c--; if (c == 2) break; x++; }");
        let text = printer::print_skeleton(&norm);
        assert!(text.contains("while (!__brk_1 && c > 0)"), "{text}");
        assert!(text.contains("__brk_1 = true;"), "{text}");
        assert!(text.contains("if (!__brk_1)"), "{text}");
        same_behaviour("int x = 0; int c = 5; while (c > 0) { c--; if (c == 2) break; x++; } System.out.print(x + \" \" + c);");
    }

    #[test]
    fn for_and_continue_keep_update() {
        same_behaviour(
            "int s = 0; for (int i = 0; i < 10; i++) { if (i % 3 == 0) continue; if (i == 8) break; s += i; } System.out.print(s);",
        );
    }

    #[test]
    fn do_while_hoists_first_pass() {
        let (_, norm) = both("int x = 0; LOOP(range(1, 1)); do { x++; } while (false);");
        let mut bounds = Vec::new();
        norm.walk_stmts(&mut |s| {
            if let StmtKind::While { bound, .. } = &s.kind {
                bounds.push(bound.clone());
            }
        });
        assert_eq!(bounds, vec![Some(LoopBound::range(0, 0))]);
        same_behaviour("int x = 0; do { x++; if (x == 3) continue; x += 2; } while (x < 10); System.out.print(x);");
    }

    #[test]
    fn early_returns() {
        let src = "@MAIN static int m() { int r = 0; for (int i = 0; i < 4; i++) { r += f(i); } return r; }\n\
                   static int f(int n) { if (n == 2) { return 10; } int k = n * 3; while (true) { if (k > 4) return k; k++; } }";
        same_behaviour(src);
        let (_, norm) = both(src);
        let text = printer::print_skeleton(&norm);
        assert!(text.contains("__ret = true;"), "{text}");
        assert!(text.contains("return __return;"), "{text}");
    }

    #[test]
    fn compound_assignments_expand() {
        same_behaviour(
            "byte b = 100; b += 100; int[] a = new int[] { 1, 2, 3 }; int i = 0; a[i++] *= 7; a[1] -= 3; char c = 'a'; c += 2;\n\
             String s = \"x\"; s += 1; System.out.print(b + \" \" + a[0] + a[1] + i + c + s);",
        );
    }

    #[test]
    fn idempotent_on_fixtures() {
        for src in [
            include_str!("../fixtures/loops_abc.java"),
            include_str!("../fixtures/minmax_rec5.java"),
            include_str!("../fixtures/one_even.java"),
            include_str!("../fixtures/branch_divergence.java"),
        ] {
            let once = normalize(&load(src).unwrap());
            let twice = normalize(&once);
            assert_eq!(once.without_positions(), twice.without_positions());
        }
    }
}
