use qpl_core::brackets::{initial_conditions, symbolic_table, symmetry_check};
use qpl_core::engine::EdgeSign;
use qpl_core::pipeline::numeric_brackets;
use qpl_core::Truncation;

#[test]
fn p1_brackets_meet_initial_conditions_and_flip_symmetry() {
    for sign in [EdgeSign::Proof, EdgeSign::Definition] {
        let t = numeric_brackets(1, &Truncation::total(1, 3), sign, 2).unwrap();
        let rep = initial_conditions(&t);
        assert!(rep.passed, "{:?}", rep.details);
        let rep = symmetry_check(&symbolic_table(&t), &t);
        assert!(rep.passed, "{:?}", rep.details);
    }
}

#[test]
fn p1xp1_brackets_with_per_variable_caps() {
    let t = numeric_brackets(2, &Truncation::per_variable(&[2, 1]), EdgeSign::Proof, 1).unwrap();
    assert_eq!(t.entries.len(), 4);
    let rep = initial_conditions(&t);
    assert!(rep.passed, "{:?}", rep.details);
    let rep = symmetry_check(&symbolic_table(&t), &t);
    assert!(rep.passed, "{:?}", rep.details);
}
