//! Deterministic SMT-LIB 2 text for a problem.

use std::fmt::Write;

use super::solver::{Capabilities, SolverConfig};
use super::term::{symbol, Node, Op, Sort, Term};

/// Declarations and assertions to be checked together.
#[derive(Clone, Debug, Default)]
pub struct Problem {
    pub declarations: Vec<(String, Sort)>,
    pub assertions: Vec<Term>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EmitError {
    #[error("operator '{0}' needs a solver capability that is disabled")]
    Unsupported(String),
}

/// Reject operators outside the configured capability set.
pub fn check_capabilities(t: &Term, caps: Capabilities) -> Result<(), EmitError> {
    if let Node::App { op, args, .. } = t.node() {
        let needs = match op {
            Op::StrFromInt | Op::StrFromCode | Op::Bv2Nat | Op::Int2Bv(_) | Op::StrLen => {
                (!caps.numeric_to_string).then_some("numeric-to-string conversion")
            }
            Op::ConstArray => (!caps.constant_arrays).then_some("constant arrays"),
            _ => None,
        };
        if let Some(what) = needs {
            return Err(EmitError::Unsupported(what.to_string()));
        }
        for a in args {
            check_capabilities(a, caps)?;
        }
    }
    Ok(())
}

/// Header, options, declarations and assertions, without `check-sat`.
pub fn emit_problem(p: &Problem, cfg: &SolverConfig) -> Result<String, EmitError> {
    let mut out = String::new();
    out.push_str("; generated by tracegen\n");
    out.push_str("; logic ALL: no standard logic combines strings, bitvectors and arrays\n");
    out.push_str("(set-option :produce-models true)\n");
    writeln!(out, "(set-option :random-seed {})", cfg.seed).unwrap();
    out.push_str("(set-logic ALL)\n");
    for (name, sort) in &p.declarations {
        writeln!(out, "(declare-const {} {})", symbol(name), sort).unwrap();
    }
    for a in &p.assertions {
        check_capabilities(a, cfg.capabilities)?;
        writeln!(out, "(assert {a})").unwrap();
    }
    Ok(out)
}

/// Complete script: the problem, `check-sat` and a `get-value` request.
pub fn emit_script(p: &Problem, cfg: &SolverConfig, values: &[String]) -> Result<String, EmitError> {
    let mut out = emit_problem(p, cfg)?;
    out.push_str("(check-sat)\n");
    if !values.is_empty() {
        writeln!(out, "(get-value ({}))", values.join(" ")).unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smt::term::*;

    #[test]
    fn single_equation() {
        let x = Term::constant("x", Sort::BitVec(32));
        let p = Problem {
            declarations: vec![("x".into(), Sort::BitVec(32))],
            assertions: vec![eq(x, Term::bv(3, 32))],
        };
        let text = emit_script(&p, &SolverConfig::default(), &["x".into()]).unwrap();
        assert!(text.contains("(declare-const x (_ BitVec 32))\n(assert (= x #x00000003))\n(check-sat)\n(get-value (x))"));
        assert_eq!(text, emit_script(&p, &SolverConfig::default(), &["x".into()]).unwrap());
    }

    #[test]
    fn capability_gate() {
        let x = Term::constant("x", Sort::BitVec(32));
        let s = Term::constant("s", Sort::String);
        let p = Problem {
            declarations: vec![],
            assertions: vec![eq(s, str_from_int(bv2nat(x)))],
        };
        let mut cfg = SolverConfig::default();
        cfg.capabilities.numeric_to_string = false;
        assert!(matches!(emit_problem(&p, &cfg), Err(EmitError::Unsupported(_))));
    }
}
