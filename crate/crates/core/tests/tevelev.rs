//! Higher-genus oracle for P¹: with m = 2d − g + 1 point-class ancestors and a
//! top-degree class α pulled back from M̄_{g,m}, the invariant is (∫α)·2^g,
//! since the quantum Euler class of P¹ is 2H.

use qpl_core::engine::{EdgeSign, Insertion};
use qpl_core::pipeline::{numeric_series, Job};
use qpl_core::scalar::rat;
use qpl_core::verify::lambda_independence_check;
use qpl_core::{Multidegree, Rational, Truncation};

fn job(genus: u32, ins: &str) -> Job {
    Job::new(1, genus, Insertion::parse_list(ins, 1).unwrap(), Truncation::total(1, 1), EdgeSign::Proof)
}

fn degree_one(j: &Job) -> Rational {
    numeric_series(j).unwrap().coeff(&Multidegree::from_slice(&[1]))
}

// Witten–Kontsevich: ⟨τ1⟩₁ = 1/24, hence ⟨τ2τ0⟩₁ = ⟨τ1τ1⟩₁ = 1/24 by string and
// dilaton; ⟨τ4⟩₂ = 1/1152.
const CASES: [(u32, &str, (i64, i64)); 3] = [(1, "2:1;0:1", (1, 24)), (1, "1:1;1:1", (1, 24)), (2, "4:1", (1, 1152))];

#[test]
fn degree_one_ancestors_equal_twice_genus_power_of_the_psi_integral() {
    for (g, ins, (p, q)) in CASES {
        let want = rat(p, q) * Rational::from_integer((1i64 << g).into());
        assert_eq!(degree_one(&job(g, ins)), want, "genus {g} insertions {ins}");
    }
}

#[test]
fn the_same_values_are_lambda_free() {
    for (g, ins, (p, q)) in CASES {
        let (rep, vals) = lambda_independence_check(&job(g, ins)).unwrap();
        assert!(rep.passed, "{:?}", rep.details);
        let v = vals.iter().find(|v| v.d == vec![1]).unwrap();
        assert_eq!(v.value, qpl_core::scalar::rat_str(&(rat(p, q) * Rational::from_integer((1i64 << g).into()))));
    }
}
