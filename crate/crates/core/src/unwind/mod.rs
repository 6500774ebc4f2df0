//! Bounded unwinding of a normalized skeleton into an SMT problem.
//!
//! The result keeps three parts apart: the formula `F` produced by the
//! statements, the side conditions `E` (value domains, bounds checks,
//! heap initialisation) and the target assertion, which callers may require,
//! negate or drop.

pub mod context;
pub mod placeholders;
mod translate;

use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::Serialize;

use crate::frontend::ast::{JType, NodeId, SkeletonAst, StmtKind};
use crate::smt::emit::Problem;
use crate::smt::solver::Capabilities;
use crate::smt::term::{and, not, Sort, Term};

pub use placeholders::{blocking_clause, PlaceholderVars};
pub use translate::{convert, sort_of, stringify, HeapKind, FALLBACK_RESERVE};

/// How an if statement's two arms are joined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum BranchEncoding {
    /// Both arms end on the same names; the shorter arm is padded with
    /// copies and the statement becomes one `ite`.
    #[default]
    ModifiedSsa,
    /// Each arm gets its own names, guarded by the condition, followed by
    /// guarded equations onto a fresh merged name.
    Guarded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnwindOptions {
    /// Substitute known literal values of variables into later terms.
    pub propagate: bool,
    pub encoding: BranchEncoding,
    pub capabilities: Capabilities,
    /// Statement id of the `ASSERT` kept apart as the target.
    pub target: Option<NodeId>,
}

impl Default for UnwindOptions {
    fn default() -> Self {
        UnwindOptions {
            propagate: true,
            encoding: BranchEncoding::default(),
            capabilities: Capabilities::default(),
            target: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetMode {
    Require,
    Negate,
    Ignore,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UnwindError {
    #[error("{line}:{col}: loop has no LOOP bound and none could be inferred")]
    MissingLoopBound { line: u32, col: u32 },
    #[error("{line}:{col}: unsupported: {what}")]
    Unsupported { line: u32, col: u32, what: String },
    #[error("{line}:{col}: allocations exceed the addressable heap")]
    HeapExhausted { line: u32, col: u32 },
    #[error("internal unwinding error: {0}")]
    Internal(String),
}

/// The unwound program.
#[derive(Clone, Debug)]
pub struct UnwindSpec {
    /// Every constant with its sort, in creation order.
    pub constants: IndexMap<String, Sort>,
    pub formula: Vec<Term>,
    pub side_conditions: Vec<Term>,
    /// `path condition => assertion` for the target, if it was reached.
    pub target: Option<Term>,
    pub placeholders: Vec<PlaceholderVars>,
    /// Constant holding the printed output at the end of the entry function.
    pub out_constant: Term,
    /// Value returned by the entry function.
    pub return_value: Option<Term>,
    pub return_type: Option<JType>,
    pub heaps: Vec<HeapKind>,
    /// Heap constants at the end of the entry function.
    pub final_heaps: Vec<(HeapKind, Term)>,
    /// Variables (including `__out` and heaps) that an invariant loop left
    /// unconstrained; values read from them are not determined by the run.
    pub havocked: BTreeSet<String>,
}

impl UnwindSpec {
    /// Declarations and assertions for the solver.
    pub fn problem(&self, mode: TargetMode) -> Problem {
        let mut assertions = vec![and(self.formula.clone())];
        assertions.extend(self.side_conditions.iter().cloned());
        match (&self.target, mode) {
            (Some(t), TargetMode::Require) => assertions.push(t.clone()),
            (Some(t), TargetMode::Negate) => assertions.push(not(t.clone())),
            _ => {}
        }
        Problem {
            declarations: self.constants.iter().map(|(n, s)| (n.clone(), s.clone())).collect(),
            assertions,
        }
    }

    /// Human-readable listing of `F`, `E` and the target.
    pub fn dump_ssa(&self) -> String {
        let mut out = String::from("; formula\n");
        for t in &self.formula {
            out.push_str(&t.pretty());
            out.push('\n');
        }
        out.push_str("; side conditions\n");
        for t in &self.side_conditions {
            out.push_str(&t.pretty());
            out.push('\n');
        }
        if let Some(t) = &self.target {
            out.push_str("; target\n");
            out.push_str(&t.pretty());
            out.push('\n');
        }
        out
    }
}

/// Id of the last top-level `ASSERT` in the entry function's body.
pub fn default_target(ast: &SkeletonAst) -> Option<NodeId> {
    let f = ast.entry_function();
    let StmtKind::Block(stmts) = &f.body.kind else {
        return None;
    };
    stmts.iter().rev().find_map(|s| match s.kind {
        StmtKind::Assert(_) => Some(s.id),
        _ => None,
    })
}

/// Unwind a normalized, type-checked skeleton.
pub fn unwind(ast: &SkeletonAst, opts: &UnwindOptions) -> Result<UnwindSpec, UnwindError> {
    let mut u = translate::Unwinder::new(ast, opts);
    u.init();
    let ret = u.entry()?;
    let out_constant = u.ctx.lookup("__out").expect("output declared").term();
    let formula = u.take_formula();
    let f = ast.entry_function();
    Ok(UnwindSpec {
        constants: u.ctx.n.clone(),
        formula,
        side_conditions: u.ctx.e.clone(),
        target: u.target.take(),
        placeholders: u.placeholders.clone(),
        out_constant,
        return_value: ret,
        return_type: f.ret,
        final_heaps: u
            .heaps
            .iter()
            .map(|k| (*k, u.ctx.lookup(k.var()).expect("heap declared").term()))
            .collect(),
        heaps: u.heaps.clone(),
        havocked: u.havocked.clone(),
    })
}

#[cfg(test)]
mod tests;
