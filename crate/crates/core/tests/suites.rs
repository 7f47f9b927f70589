use qpl_core::suites::run_suite;

fn assert_suite(name: &str) {
    for r in run_suite(name).unwrap() {
        assert!(r.passed, "{name}: {}: {:?}", r.claim, r.details);
    }
}

#[test]
fn moduli_suite_passes() {
    assert_suite("moduli");
}

#[test]
fn poly_suite_passes() {
    assert_suite("poly");
}

#[test]
fn asymptotics_suite_passes() {
    assert_suite("asymptotics");
}

#[test]
fn lambda_suite_passes() {
    assert_suite("lambda");
}

#[test]
fn unknown_suite_is_rejected() {
    assert!(run_suite("nope").is_err());
}
