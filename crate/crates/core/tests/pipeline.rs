use std::collections::BTreeSet;

use tracegen_core::instance::{Rejection, Verdict};
use tracegen_core::pipeline::*;
use tracegen_core::smt::CheckResult;
use tracegen_core::value::Value;

fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}.java", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

fn int(v: &Value) -> i64 {
    match v {
        Value::Int(x) => *x,
        other => panic!("not an int: {other:?}"),
    }
}

#[test]
fn three_loop_pool_is_distinct_and_verified() {
    let opts = PipelineOptions::default();
    let p = prepare_source(&fixture("loops_abc"), &opts).unwrap();
    let pool = generate_pool(&p, &opts, 10).unwrap();
    assert_eq!(pool.shortfall, None);
    assert_eq!(pool.instances.len(), 10);
    let distinct: BTreeSet<_> = pool
        .instances
        .iter()
        .map(|c| format!("{:?}", c.bundle.valuation))
        .collect();
    assert_eq!(distinct.len(), 10);
    for c in &pool.instances {
        let st = &c.bundle.trace.final_store;
        let (a, b, cc) = (int(&st["a"]), int(&st["b"]), int(&st["c"]));
        assert!(a > 6 && a < b && cc < b, "{a} {b} {cc}");
        for l in &c.bundle.trace.loops {
            assert!(l.iterations.iter().all(|n| (1..=20).contains(n)));
        }
        assert!(c.verdict.is_accepted());
    }
}

#[test]
fn over_constrained_skeleton_yields_nothing() {
    let opts = PipelineOptions::default();
    let p = prepare_source("int x = INT(range(0, 3));\nASSERT(x > 5);", &opts).unwrap();
    let pool = generate_pool(&p, &opts, 3).unwrap();
    assert!(pool.instances.is_empty());
    assert_eq!(pool.shortfall, Some(Shortfall::Exhausted));
    assert_eq!(check(&p, &opts).unwrap(), CheckResult::Unsat);
}

#[test]
fn small_domain_runs_out_early() {
    let opts = PipelineOptions::default();
    let p = prepare_source("int x = INT(range(0, 3));\nASSERT(x > 1);", &opts).unwrap();
    let pool = generate_pool(&p, &opts, 5).unwrap();
    assert_eq!(pool.instances.len(), 2);
    assert_eq!(pool.shortfall, Some(Shortfall::Exhausted));
}

#[test]
fn weak_invariant_models_are_caught_by_the_interpreter() {
    let opts = PipelineOptions {
        max_rejections: 5,
        ..PipelineOptions::default()
    };
    let p = prepare_source(&fixture("weak_invariant"), &opts).unwrap();
    let pool = generate_pool(&p, &opts, 1).unwrap();
    assert!(pool.instances.is_empty());
    assert_eq!(pool.shortfall, Some(Shortfall::TooManyRejections));
    assert_eq!(pool.rejected.len(), 5);
    for c in &pool.rejected {
        assert!(matches!(c.verdict, Verdict::Rejected(Rejection::Assertion { .. })));
    }
}

#[test]
fn recursive_minmax_returns_the_extremes() {
    let opts = PipelineOptions::default();
    let p = prepare_source(&fixture("minmax_rec5"), &opts).unwrap();
    let pool = generate_pool(&p, &opts, 1).unwrap();
    let c = &pool.instances[0];
    let Value::IntArray(input) = &c.bundle.valuation[&0] else {
        panic!()
    };
    let want = Value::IntArray(vec![*input.iter().min().unwrap(), *input.iter().max().unwrap()]);
    assert_eq!(c.bundle.trace.return_value.as_ref(), Some(&want));
    // the model's own prediction agrees with the interpreter
    assert_eq!(c.expectation.return_value.as_ref(), Some(&want));
}

#[test]
fn divergence_hole_answers_split_by_outcome() {
    let opts = PipelineOptions::default();
    let p = prepare_source(&fixture("branch_divergence"), &opts).unwrap();
    let hole = resolve_hole(&p.skeleton, None).unwrap().unwrap();
    let pool = generate_hole_pool(&p, &opts, hole, 2, 10).unwrap();
    assert_eq!(pool.questions.len(), 2);
    for q in &pool.questions {
        assert!(!q.correct.is_empty() && !q.wrong.is_empty());
        let wrong = q.wrong_values();
        assert!(q.correct_values().iter().all(|v| !wrong.contains(v)));
        assert!(q.instance.bundle.hole_rendered_source.as_ref().unwrap().contains("??"));
    }
}

#[test]
fn unknown_placeholder_ordinal_is_an_error() {
    let p = prepare_source("int x = INT(range(0, 3));", &PipelineOptions::default()).unwrap();
    assert!(matches!(resolve_hole(&p.skeleton, Some(4)), Err(PipelineError::NoSuchPlaceholder(4))));
}
