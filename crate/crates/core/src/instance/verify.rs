//! The safety net: checks a rendered instance against its skeleton.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::frontend::ast::{NodeId, SkeletonAst, Span, StmtKind};
use crate::frontend::load_instance;
use crate::value::Value;

use super::interp::{interpret, Fault, InterpConfig};
use super::render::InstanceBundle;

/// Values the solver model predicts, where the unwinding determined them.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Expectation {
    pub output: Option<String>,
    pub return_value: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Rejection {
    Fault { fault: Fault },
    Assertion { line: u32, col: u32 },
    /// The assertion expected to fail held or was never reached.
    TargetHeld { line: u32, col: u32 },
    LoopBound { line: u32, iterations: u64 },
    Recursion { function: String, depth: u32, limit: u32 },
    Output { expected: String, actual: String },
    ReturnValue { expected: Option<Value>, actual: Option<Value> },
    /// The rendered text does not behave like the skeleton it came from.
    Fidelity { detail: String },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::Fault { fault } => write!(f, "runtime fault: {fault}"),
            Rejection::Assertion { line, col } => write!(f, "assertion at {line}:{col} does not hold"),
            Rejection::TargetHeld { line, col } => write!(f, "negated assertion at {line}:{col} did not fail"),
            Rejection::LoopBound { line, iterations } => {
                write!(f, "loop at line {line} ran {iterations} times, outside its LOOP range")
            }
            Rejection::Recursion { function, depth, limit } => {
                write!(f, "'{function}' recursed to depth {depth}, limit {limit}")
            }
            Rejection::Output { expected, actual } => {
                write!(f, "output {actual:?} differs from the model's {expected:?}")
            }
            Rejection::ReturnValue { expected, actual } => {
                write!(f, "return value {actual:?} differs from the model's {expected:?}")
            }
            Rejection::Fidelity { detail } => write!(f, "rendered program diverges: {detail}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Accepted,
    Rejected(Rejection),
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        *self == Verdict::Accepted
    }
}

/// Check the first failing condition, in order: faults, assertions, loop
/// ranges, recursion depth, agreement with the model, and that the
/// rendered text re-parses and behaves like the skeleton.
pub fn verify_instance(
    ast: &SkeletonAst,
    bundle: &InstanceBundle,
    expected: &Expectation,
    cfg: &InterpConfig,
) -> Verdict {
    match check(ast, bundle, expected, None, cfg) {
        Ok(()) => Verdict::Accepted,
        Err(r) => Verdict::Rejected(r),
    }
}

/// Like [`verify_instance`], but the assertion `target` must fail while
/// every other assertion holds. Used for wrong answers.
pub fn verify_negated(
    ast: &SkeletonAst,
    bundle: &InstanceBundle,
    expected: &Expectation,
    target: NodeId,
    cfg: &InterpConfig,
) -> Verdict {
    match check(ast, bundle, expected, Some(target), cfg) {
        Ok(()) => Verdict::Accepted,
        Err(r) => Verdict::Rejected(r),
    }
}

fn assertion_span(ast: &SkeletonAst, id: NodeId) -> Option<Span> {
    let mut found = None;
    ast.walk_stmts(&mut |s| {
        if s.id == id && matches!(s.kind, StmtKind::Assert(_)) {
            found = Some(s.span);
        }
    });
    found
}

fn check(
    ast: &SkeletonAst,
    bundle: &InstanceBundle,
    expected: &Expectation,
    negated: Option<NodeId>,
    cfg: &InterpConfig,
) -> Result<(), Rejection> {
    let t = &bundle.trace;
    if let Some(fault) = &t.fault {
        return Err(Rejection::Fault { fault: fault.clone() });
    }
    let target_span = negated.and_then(|id| assertion_span(ast, id));
    let is_target = |line: u32, col: u32| target_span.is_some_and(|s| s.line == line && s.col == col);
    if let Some(a) = t.assertions.iter().find(|a| !a.holds && !is_target(a.line, a.col)) {
        return Err(Rejection::Assertion { line: a.line, col: a.col });
    }
    if let Some(id) = negated {
        if t.assertion_ids.get(&id) != Some(&false) {
            let s = target_span.unwrap_or_default();
            return Err(Rejection::TargetHeld {
                line: s.line,
                col: s.col,
            });
        }
    }
    let mut bounds = BTreeMap::new();
    ast.walk_stmts(&mut |s| {
        let b = match &s.kind {
            StmtKind::While { bound, .. } | StmtKind::DoWhile { bound, .. } | StmtKind::For { bound, .. } => bound,
            _ => &None,
        };
        if let Some(b) = b {
            bounds.insert(s.id, (s.span.line, b.clone()));
        }
    });
    for (id, counts) in &t.loop_counts {
        if let Some((line, b)) = bounds.get(id) {
            if let Some(n) = counts.iter().find(|n| !b.allows(**n)) {
                return Err(Rejection::LoopBound {
                    line: *line,
                    iterations: *n,
                });
            }
        }
    }
    for f in &ast.functions {
        let depth = t.recursion_depth.get(&f.name).copied().unwrap_or(0);
        if depth > f.recursion_limit() {
            return Err(Rejection::Recursion {
                function: f.name.clone(),
                depth,
                limit: f.recursion_limit(),
            });
        }
    }
    if let Some(out) = &expected.output {
        if *out != t.output {
            return Err(Rejection::Output {
                expected: out.clone(),
                actual: t.output.clone(),
            });
        }
    }
    if expected.return_value.is_some() && expected.return_value != t.return_value {
        return Err(Rejection::ReturnValue {
            expected: expected.return_value.clone(),
            actual: t.return_value.clone(),
        });
    }
    let fidelity = |detail: String| Rejection::Fidelity { detail };
    let instance = load_instance(&bundle.rendered_source, &ast.entry).map_err(|e| fidelity(e.to_string()))?;
    if !instance.placeholders.is_empty() {
        return Err(fidelity("placeholders remain".into()));
    }
    let rerun = interpret(&instance, &BTreeMap::new(), cfg);
    if rerun.fault != t.fault {
        return Err(fidelity(format!("fault {:?}", rerun.fault)));
    }
    if rerun.output != t.output {
        return Err(fidelity(format!("output {:?}", rerun.output)));
    }
    if rerun.return_value != t.return_value {
        return Err(fidelity(format!("return value {:?}", rerun.return_value)));
    }
    let counts = |l: &[super::interp::LoopRecord]| l.iter().map(|r| (r.ordinal, r.iterations.clone())).collect::<Vec<_>>();
    if counts(&rerun.loops) != counts(&t.loops) {
        return Err(fidelity("loop iteration counts".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::load;
    use crate::instance::render::render_instance;

    fn run(src: &str, vals: BTreeMap<usize, Value>, expected: Expectation) -> Verdict {
        let ast = load(src).unwrap();
        let cfg = InterpConfig::default();
        let b = render_instance(&ast, &vals, None, &cfg).unwrap();
        verify_instance(&ast, &b, &expected, &cfg)
    }

    #[test]
    fn one_even_element_instance_is_accepted() {
        let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/one_even.java")).unwrap();
        let src = src.as_str();
        let vals = BTreeMap::from([
            (0, Value::IntArray(vec![23, 8, 43, 67, 59])),
            (1, Value::Int(1)),
        ]);
        assert_eq!(run(src, vals.clone(), Expectation::default()), Verdict::Accepted);
        let mut bad = vals;
        bad.insert(0, Value::IntArray(vec![22, 8, 43, 67, 59]));
        assert!(matches!(
            run(src, bad, Expectation::default()),
            Verdict::Rejected(Rejection::Assertion { .. })
        ));
    }

    #[test]
    fn loop_running_past_its_range_is_rejected() {
        let src = "int n = INT(range(0, 30)); int i = 0;\nLOOP(range(1, 20));\nwhile (i < n) { i++; }";
        let v = run(src, BTreeMap::from([(0, Value::Int(21))]), Expectation::default());
        assert_eq!(
            v,
            Verdict::Rejected(Rejection::LoopBound {
                line: 3,
                iterations: 21
            })
        );
        let v = run(src, BTreeMap::from([(0, Value::Int(20))]), Expectation::default());
        assert_eq!(v, Verdict::Accepted);
    }

    #[test]
    fn model_disagreement_is_rejected() {
        let src = "int x = INT(range(0, 3));\nSystem.out.print(x);";
        let exp = Expectation {
            output: Some("3".into()),
            return_value: None,
        };
        assert_eq!(run(src, BTreeMap::from([(0, Value::Int(3))]), exp.clone()), Verdict::Accepted);
        assert!(matches!(
            run(src, BTreeMap::from([(0, Value::Int(2))]), exp),
            Verdict::Rejected(Rejection::Output { .. })
        ));
    }

    #[test]
    fn negated_target_must_fail() {
        let src = "int x = INT(range(0, 9));\nASSERT(x > 1);\nASSERT(x < 5);";
        let ast = load(src).unwrap();
        let target = crate::unwind::default_target(&ast).unwrap();
        let cfg = InterpConfig::default();
        let check = |x: i64| {
            let b = render_instance(&ast, &BTreeMap::from([(0, Value::Int(x))]), None, &cfg).unwrap();
            verify_negated(&ast, &b, &Expectation::default(), target, &cfg)
        };
        assert_eq!(check(7), Verdict::Accepted);
        assert_eq!(check(3), Verdict::Rejected(Rejection::TargetHeld { line: 3, col: 1 }));
        assert_eq!(check(0), Verdict::Rejected(Rejection::Assertion { line: 2, col: 1 }));
    }

    #[test]
    fn deep_recursion_is_rejected() {
        let src = "@MAIN static int start() { return f(INT(range(0, 5))); }\n\
                   @REC(2) static int f(int n) { if (n == 0) return 0; return 1 + f(n - 1); }";
        assert_eq!(run(src, BTreeMap::from([(0, Value::Int(2))]), Expectation::default()), Verdict::Accepted);
        assert!(matches!(
            run(src, BTreeMap::from([(0, Value::Int(3))]), Expectation::default()),
            Verdict::Rejected(Rejection::Recursion { depth: 3, limit: 2, .. })
        ));
    }
}
