//! Java int arithmetic: exact math, solver models and the interpreter agree.

mod common;

use common::arith::{check_pairs, exact, pairs};

#[test]
fn oracle_matches_java_corner_cases() {
    assert_eq!(exact("/", i32::MIN, -1), i32::MIN);
    assert_eq!(exact("%", i32::MIN, -1), 0);
    assert_eq!(exact("%", -7, 2), -1);
    assert_eq!(exact("%", 7, -2), 1);
    assert_eq!(exact("/", -7, 2), -3);
    assert_eq!(exact("+", i32::MAX, 1), i32::MIN);
    assert_eq!(exact("*", 65536, 65536), 0);
}

#[test]
fn solver_and_interpreter_follow_java_int_semantics() {
    let (bad, compared) = check_pairs(&pairs(7, 1000), 100);
    assert!(compared > 4500);
    assert!(bad.is_empty(), "{bad:#?}");
}
