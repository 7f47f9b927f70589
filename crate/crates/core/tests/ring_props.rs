use proptest::prelude::*;
use qpl_core::sign_ring::{monomial_has_type, sum_over_signs};
use qpl_core::suites::witness_cost;
use qpl_core::{Rational, SignGen, SignMonomial, SignPoly, TypeTag};

const N: usize = 3;
const SLOTS: usize = 3;

fn monomial(bits: u16) -> SignMonomial {
    let gens: Vec<SignGen> = (0..N * SLOTS).filter(|k| bits >> k & 1 == 1).map(|k| SignGen::new(k % N, k / N)).collect();
    SignMonomial::from_gens(&gens)
}

/// Smallest b with m of type (a; b), from the brute-force witness search.
fn min_b(m: SignMonomial, a: &[i32]) -> u32 {
    witness_cost(m, a, N, SLOTS)
}

proptest! {
    #[test]
    fn has_type_matches_witness(bits in 0u16..1 << (N * SLOTS), a in prop::collection::vec(-2i32..3, N), b in 0u32..4) {
        let m = monomial(bits);
        prop_assert_eq!(monomial_has_type(m, &TypeTag::new(a.clone(), b)), min_b(m, &a) <= b);
    }

    #[test]
    fn types_add_under_products(x in 0u16..1 << (N * SLOTS), y in 0u16..1 << (N * SLOTS),
                                a1 in prop::collection::vec(-1i32..3, N), a2 in prop::collection::vec(-1i32..3, N)) {
        let (m1, m2) = (monomial(x), monomial(y));
        let t1 = TypeTag::new(a1.clone(), min_b(m1, &a1));
        let t2 = TypeTag::new(a2.clone(), min_b(m2, &a2));
        prop_assert!(monomial_has_type(m1.mul(m2), &t1.add(&t2)));
    }

    #[test]
    fn sign_sum_matches_enumeration(coeffs in prop::collection::vec((0u16..1 << (N * 2), -5i64..6), 1..6)) {
        let mut f = SignPoly::default();
        for (bits, c) in &coeffs {
            f = f + SignPoly::monomial(monomial(*bits), Rational::from_integer((*c).into()));
        }
        let ambient: Vec<SignGen> = (0..N * 2).map(|k| SignGen::new(k % N, k / N)).collect();
        let mut brute = Rational::from_integer(0.into());
        for assign in 0u32..1 << ambient.len() {
            brute += f.evaluate(|g| {
                let k = g.slot * N + g.factor;
                if assign >> k & 1 == 1 { -1 } else { 1 }
            });
        }
        prop_assert_eq!(sum_over_signs(&f, &ambient).unwrap(), brute);
    }
}
