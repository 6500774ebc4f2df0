//! The solver and exhaustive interpretation agree on random tiny skeletons.

mod common;

use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 120, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn solver_agrees_with_brute_force(seed in any::<u64>(), optimize in any::<bool>()) {
        let case = common::tiny_skeleton(seed);
        let m = common::compare(&case, optimize);
        prop_assert!(m.is_none(), "{:?}\n{}", m, case.source);
    }
}

#[test]
fn generated_skeletons_cover_both_outcomes() {
    let mut sat = 0;
    let mut unsat = 0;
    for seed in 0..40 {
        let case = common::tiny_skeleton(seed);
        assert!(common::assignments(&case.domains).len() <= 4096);
        assert_eq!(common::compare(&case, true), None, "{}", case.source);
        let ast = tracegen_core::frontend::load(&case.source).unwrap();
        let cfg = tracegen_core::instance::InterpConfig::default();
        let any = common::assignments(&case.domains).iter().any(|v| {
            let b = tracegen_core::instance::render_instance(&ast, v, None, &cfg).unwrap();
            tracegen_core::instance::verify_instance(&ast, &b, &Default::default(), &cfg).is_accepted()
        });
        if any {
            sat += 1;
        } else {
            unsat += 1;
        }
    }
    assert!(sat >= 5 && unsat >= 5, "sat {sat} unsat {unsat}");
}
