//! AST simplification before unwinding: constant folding, dead branches
//! and loop bounds tightened by an interval analysis.
//!
//! The analysis iterates a loop body on intervals until the loop condition
//! is definitely false, the declared upper bound is reached, the state
//! stops changing or the analysis cap is hit. There is no widening and no
//! refinement by the condition, so bounds found are sound upper limits on
//! the iteration count.

mod analysis;
mod fold;
pub mod interval;

use std::fmt;

use serde::Serialize;

use crate::frontend::ast::*;

pub use analysis::{written_vars, AbsVal, Analyzer, Env, ANALYSIS_CAP};
pub use fold::{fold_expr, is_removable};
pub use interval::Interval;

use analysis::IfFact;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LoopReport {
    pub id: NodeId,
    pub line: u32,
    pub declared_upper: Option<u64>,
    /// Sound bound found by the analysis, when every visit found one.
    pub detected_upper: Option<u64>,
    /// Iteration at which the condition first became definitely false.
    pub step: Option<u64>,
    /// Variable intervals at that iteration.
    pub env: Vec<(String, Interval)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OptimizeReport {
    pub loops: Vec<LoopReport>,
    pub dead_branches: usize,
}

impl fmt::Display for OptimizeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dead branches removed: {}", self.dead_branches)?;
        for l in &self.loops {
            let show = |b: Option<u64>| b.map_or("-".to_string(), |v| v.to_string());
            write!(
                f,
                "loop at line {}: declared upper {}, detected {}",
                l.line,
                show(l.declared_upper),
                show(l.detected_upper)
            )?;
            if let Some(step) = l.step {
                write!(f, " (step {step}:")?;
                for (v, i) in &l.env {
                    write!(f, " {v} in {i}")?;
                }
                write!(f, ")")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Simplify a normalized skeleton. Statement ids are preserved.
pub fn optimize(ast: &SkeletonAst) -> (SkeletonAst, OptimizeReport) {
    let mut out = ast.clone();
    for f in &mut out.functions {
        f.body.walk_mut(&mut |s| {
            for e in s.exprs_mut() {
                let owned = std::mem::replace(e, Expr::bool_lit(false, Span::default()));
                *e = fold_expr(owned);
            }
        });
    }
    let facts = {
        let mut a = Analyzer::new(&out);
        a.run();
        a.facts
    };
    let mut report = OptimizeReport::default();
    let mut loops: Vec<_> = facts.loops.iter().collect();
    loops.sort_by_key(|(id, _)| **id);
    for (id, l) in loops {
        report.loops.push(LoopReport {
            id: *id,
            line: l.line,
            declared_upper: l.declared_upper,
            detected_upper: if l.undetected { None } else { l.detected },
            step: l.step,
            env: l.env.clone(),
        });
    }
    for f in &mut out.functions {
        rewrite(&mut f.body, &facts, &mut report);
    }
    (out, report)
}

fn rewrite(s: &mut Stmt, facts: &analysis::Facts, report: &mut OptimizeReport) {
    if let StmtKind::If {
        cond,
        then_branch,
        else_branch,
    } = &mut s.kind
    {
        if let Some(IfFact::Always(live)) = facts.ifs.get(&s.id) {
            if is_removable(cond) {
                let kept = if *live {
                    Some(std::mem::replace(then_branch.as_mut(), Stmt::new(0, s.span, StmtKind::Empty)))
                } else {
                    else_branch.take().map(|b| *b)
                };
                report.dead_branches += 1;
                s.kind = match kept {
                    Some(b) => StmtKind::Block(vec![b]),
                    None => StmtKind::Empty,
                };
            }
        }
    }
    if let StmtKind::While { bound, invariant: None, .. } = &mut s.kind {
        if let Some(l) = facts.loops.get(&s.id) {
            if let (Some(k), false) = (l.detected, l.undetected) {
                *bound = tighten(bound.take(), k);
            }
        }
    }
    for c in s.children_mut() {
        rewrite(c, facts, report);
    }
}

/// The bound with its upper end lowered to `k` where that keeps the lower
/// end reachable.
fn tighten(bound: Option<LoopBound>, k: u64) -> Option<LoopBound> {
    let Some(b) = bound else {
        return Some(LoopBound::range(0, k as i64));
    };
    if k >= b.upper() || k < b.lower() {
        return Some(b);
    }
    let spec = match b.spec {
        ValueSpec::Range(lo, _) => ValueSpec::Range(lo, k as i64),
        ValueSpec::List(items) => ValueSpec::List(
            items
                .into_iter()
                .filter(|l| literal_as_i64(l).is_some_and(|v| v <= k as i64))
                .collect(),
        ),
        ValueSpec::Any => ValueSpec::Any,
    };
    Some(LoopBound { spec })
}
